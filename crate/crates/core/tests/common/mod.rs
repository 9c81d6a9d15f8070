#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fairpca::data::GroupedDataset;

pub fn adult_csv() -> PathBuf {
    workspace().join("data/adult.csv")
}

pub fn credit_csv() -> PathBuf {
    workspace().join("data/credit.csv")
}

pub fn schema(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name)
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fairpca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairpca"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Writes `gd` as a CSV with numeric columns `x0..`, a `group` column and,
/// when labels are present, a `label` column. Returns `(csv, schema)`.
pub fn write_dataset(dir: &Path, gd: &GroupedDataset) -> (PathBuf, PathBuf) {
    let m = gd.matrix.as_matrix();
    let d = m.ncols();
    let mut csv = String::new();
    let mut header: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
    header.push("group".into());
    if gd.labels.is_some() {
        header.push("label".into());
    }
    let _ = writeln!(csv, "{}", header.join(","));
    for i in 0..m.nrows() {
        let mut row: Vec<String> = (0..d).map(|j| format!("{:e}", m[(i, j)])).collect();
        row.push(gd.group_names[gd.group_ids[i]].clone());
        if let Some(l) = &gd.labels {
            row.push(if l[i] == 1 { "yes".into() } else { "no".into() });
        }
        let _ = writeln!(csv, "{}", row.join(","));
    }

    let mut schema = String::new();
    for j in 0..d {
        let _ = writeln!(schema, "[[columns]]\nname = \"x{j}\"\nkind = \"numeric\"\n");
    }
    schema.push_str("[[columns]]\nname = \"group\"\nkind = \"sensitive\"\n");
    if gd.labels.is_some() {
        schema.push_str("\n[[columns]]\nname = \"label\"\nkind = \"label\"\npositive = \"yes\"\n");
    }
    let csv_path = dir.join("data.csv");
    let schema_path = dir.join("schema.toml");
    std::fs::write(&csv_path, csv).unwrap();
    std::fs::write(&schema_path, schema).unwrap();
    (csv_path, schema_path)
}

/// `key=value` lines of a report file.
pub fn report_value(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|rest| rest.strip_prefix('=')))
        .unwrap_or_else(|| panic!("report has no key {key}"))
        .to_string()
}

/// Data rows of a table written by the CLI, skipping the hash comment.
pub fn read_table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config-hash: "));
    let body: String = lines.collect::<Vec<_>>().join("\n");
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

/// Gaussian groups with per-group column scales, normalized so the pooled
/// energy is about one.
pub fn random_groups(sizes: &[usize], d: usize, seed: u64) -> Vec<fairpca::DataMatrix> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n: usize = sizes.iter().sum();
    let norm = 1.0 / ((n * d) as f64).sqrt();
    sizes
        .iter()
        .map(|&rows| {
            let scale: Vec<f64> = (0..d)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z.abs() + 0.2
                })
                .collect();
            let m = fairpca::Matrix::from_fn(rows, d, |_, j| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * scale[j] * norm
            });
            fairpca::DataMatrix::new(m).unwrap()
        })
        .collect()
}

/// Entrywise central differences of objective `i`.
pub fn finite_difference(
    problem: &fairpca::FairPcaProblem,
    u: &fairpca::Matrix,
    i: usize,
    h: f64,
) -> fairpca::Matrix {
    let mut g = fairpca::Matrix::zeros(u.nrows(), u.ncols());
    for a in 0..u.nrows() {
        for b in 0..u.ncols() {
            let mut up = u.clone();
            let mut down = u.clone();
            up[(a, b)] += h;
            down[(a, b)] -= h;
            let fu = problem.evaluate(&up).values()[i];
            let fd = problem.evaluate(&down).values()[i];
            g[(a, b)] = (fu - fd) / (2.0 * h);
        }
    }
    g
}
