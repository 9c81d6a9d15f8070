use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::encode::{preprocess, EncodeOptions};
use super::schema::DatasetSchema;
use super::table::read_csv;
use super::GroupedDataset;
use crate::error::{Error, Result};
use crate::linalg::{DataMatrix, Matrix};

const MAGIC: &[u8; 8] = b"FPCABIN1";

/// Hex digest of the file bytes, the schema and the encoding options.
pub fn cache_key(bytes: &[u8], schema: &DatasetSchema, options: EncodeOptions) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.update(schema.to_toml().as_bytes());
    h.update(serde_json::to_vec(&options).expect("options serialize"));
    hex::encode(h.finalize())
}

fn cache_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.bin"))
}

/// Loads and encodes a CSV, reusing `cache_dir/<key>.bin` when present.
pub fn load_dataset(
    path: &Path,
    schema: &DatasetSchema,
    options: EncodeOptions,
    cache_dir: Option<&Path>,
) -> Result<GroupedDataset> {
    let bytes = std::fs::read(path).map_err(|e| Error::Load {
        path: path.display().to_string(),
        row: 0,
        column: String::new(),
        message: format!("cannot read: {e}"),
    })?;
    let key = cache_dir.map(|_| cache_key(&bytes, schema, options));
    if let (Some(dir), Some(key)) = (cache_dir, &key) {
        match load_cached(&cache_path(dir, key)) {
            Ok(Some(gd)) => {
                log::info!("loaded {} from cache {key}", path.display());
                return Ok(gd);
            }
            Ok(None) => {}
            Err(e) => log::warn!("ignoring unreadable cache entry {key}: {e}"),
        }
    }
    let table = read_csv(bytes.as_slice(), &path.display().to_string(), schema)?;
    log::info!(
        "{}: {} rows read, {} dropped for missing values",
        path.display(),
        table.rows_read,
        table.rows_dropped
    );
    let gd = preprocess(&table, schema, options)?;
    if let (Some(dir), Some(key)) = (cache_dir, &key) {
        if let Err(e) = store_cached(&cache_path(dir, key), &gd) {
            log::warn!("could not write cache entry {key}: {e}");
        }
    }
    Ok(gd)
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u64).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

/// Writes `gd` in the cache's binary layout (temp file, then rename).
pub fn store_cached(path: &Path, gd: &GroupedDataset) -> Result<()> {
    let m = gd.matrix.as_matrix();
    let (n, d) = m.shape();
    let mut out = Vec::with_capacity(16 + 8 * n * (d + 1));
    out.extend_from_slice(MAGIC);
    for v in [n, d, gd.group_count(), usize::from(gd.labels.is_some())] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    for i in 0..n {
        for j in 0..d {
            out.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    for &g in &gd.group_ids {
        out.extend_from_slice(&(g as u64).to_le_bytes());
    }
    if let Some(labels) = &gd.labels {
        out.extend(labels.iter().map(|&l| l as u8));
    }
    for s in gd.group_names.iter().chain(&gd.feature_names) {
        put_str(&mut out, s);
    }
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("bin.tmp");
    std::fs::File::create(&tmp)?.write_all(&out)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

struct Cursor<'a>(&'a [u8]);

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.0.len() < n {
            return Err(Error::Data("truncated cache file".into()));
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Data("cache value overflows usize".into()))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.usize()?;
        String::from_utf8(self.take(len)?.to_vec()).map_err(|_| Error::Data("cache string is not UTF-8".into()))
    }
}

/// Reads a cache entry; `Ok(None)` when the file does not exist.
pub fn load_cached(path: &Path) -> Result<Option<GroupedDataset>> {
    let mut bytes = Vec::new();
    match std::fs::File::open(path) {
        Ok(mut f) => f.read_to_end(&mut bytes)?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let mut c = Cursor(&bytes);
    if c.take(MAGIC.len())? != MAGIC {
        return Err(Error::Data("not a cache file".into()));
    }
    let (n, d, k, has_labels) = (c.usize()?, c.usize()?, c.usize()?, c.u64()? == 1);
    let mut values = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        values.push(f64::from_bits(c.u64()?));
    }
    let group_ids = (0..n).map(|_| c.usize()).collect::<Result<Vec<_>>>()?;
    let labels = if has_labels {
        Some(c.take(n)?.iter().map(|&b| b as i8).collect())
    } else {
        None
    };
    let group_names = (0..k).map(|_| c.string()).collect::<Result<Vec<_>>>()?;
    let feature_names = (0..d).map(|_| c.string()).collect::<Result<Vec<_>>>()?;
    let matrix = DataMatrix::new(Matrix::from_row_slice(n, d, &values))?;
    GroupedDataset::new(matrix, group_ids, group_names, labels, feature_names).map(Some)
}
