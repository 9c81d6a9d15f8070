use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::Subspace;

/// Hex sha256 of the JSON form of `config`.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(json))
}

/// Comma-separated table with a provenance comment line and a header row.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width matches header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self, hash: &str) -> Result<Vec<u8>> {
        let mut buf = format!("# config-hash: {hash}\n").into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
            w.write_record(&self.header).map_err(csv_err)?;
            for row in &self.rows {
                w.write_record(row).map_err(csv_err)?;
            }
            w.flush()?;
        }
        Ok(buf)
    }
}

/// Shortest round-trip representation of a float.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Text form of a basis: `d` and `r` on the first two lines, then one
/// whitespace-delimited row per ambient coordinate.
pub fn subspace_text(u: &Subspace) -> String {
    let b = u.basis();
    let mut out = format!("{}\n{}\n", b.nrows(), b.ncols());
    for i in 0..b.nrows() {
        let row: Vec<String> = b.row(i).iter().map(|&v| format!("{v:.17e}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parses the format written by [`subspace_text`].
pub fn parse_subspace(text: &str) -> Result<Subspace> {
    let mut lines = text.lines();
    let mut dim = |what: &str| -> Result<usize> {
        lines
            .next()
            .and_then(|l| l.trim().parse().ok())
            .ok_or_else(|| Error::Data(format!("subspace file: missing {what}")))
    };
    let (d, r) = (dim("d")?, dim("r")?);
    let values: Vec<f64> = lines
        .flat_map(str::split_whitespace)
        .map(|t| t.parse().map_err(|_| Error::Data(format!("subspace file: bad number '{t}'"))))
        .collect::<Result<_>>()?;
    if values.len() != d * r {
        return Err(Error::Data(format!(
            "subspace file: expected {} values, found {}",
            d * r,
            values.len()
        )));
    }
    Subspace::new(crate::linalg::Matrix::from_row_slice(d, r, &values))
}

/// Writes every file to a temporary sibling, then renames them into place.
///
/// Nothing is renamed until all temporary files are written, so a failure
/// leaves no partial outputs under their final names.
pub fn write_atomic(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let target = dir.join(name);
        let tmp = dir.join(format!(".{name}.tmp"));
        let written = fs::File::create(&tmp).and_then(|mut f| {
            f.write_all(bytes)?;
            f.sync_all()
        });
        if let Err(e) = written {
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            let _ = fs::remove_file(&tmp);
            return Err(e.into());
        }
        staged.push((tmp, target));
    }
    for (tmp, target) in staged {
        fs::rename(tmp, target)?;
    }
    Ok(())
}
