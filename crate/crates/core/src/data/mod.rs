//! Dataset ingestion: CSV loading, encoding, group partitioning, splits and
//! synthetic fixtures.

mod cache;
mod encode;
mod schema;
mod split;
mod synthetic;
mod table;

pub use cache::{cache_key, load_cached, load_dataset, store_cached};
pub use encode::{preprocess, EncodeOptions, Encoder};
pub use schema::{ColumnKind, ColumnSpec, DatasetSchema};
pub use split::train_test_split;
pub use synthetic::synthetic_mirrored_groups;
pub use table::{load_csv, read_csv, ColumnValues, RawColumn, RawTable};

use crate::error::{Error, Result};
use crate::linalg::DataMatrix;

/// Encoded samples with their sensitive-group partition and optional labels.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedDataset {
    pub matrix: DataMatrix,
    /// Group index of each row, in `0..group_names.len()`.
    pub group_ids: Vec<usize>,
    pub group_names: Vec<String>,
    /// `±1` per row when the schema has a label column.
    pub labels: Option<Vec<i8>>,
    pub feature_names: Vec<String>,
}

impl GroupedDataset {
    pub fn new(
        matrix: DataMatrix,
        group_ids: Vec<usize>,
        group_names: Vec<String>,
        labels: Option<Vec<i8>>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let n = matrix.nrows();
        if group_ids.len() != n {
            return Err(Error::Dimension(format!("{} group ids for {n} rows", group_ids.len())));
        }
        if feature_names.len() != matrix.ncols() {
            return Err(Error::Dimension(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                matrix.ncols()
            )));
        }
        let k = group_names.len();
        let mut sizes = vec![0usize; k];
        for &g in &group_ids {
            if g >= k {
                return Err(Error::Range { index: g, len: k });
            }
            sizes[g] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::Data(format!("group '{}' has no rows", group_names[empty])));
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::Dimension(format!("{} labels for {n} rows", labels.len())));
            }
            if labels.iter().any(|&l| l != 1 && l != -1) {
                return Err(Error::InvalidInput("labels must be -1 or +1".into()));
            }
        }
        Ok(Self {
            matrix,
            group_ids,
            group_names,
            labels,
            feature_names,
        })
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn group_count(&self) -> usize {
        self.group_names.len()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.group_count()];
        for &g in &self.group_ids {
            sizes[g] += 1;
        }
        sizes
    }

    /// Rows at `indices` (in the given order), keeping the group naming.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            self.matrix.select_rows(indices)?,
            indices.iter().map(|&i| self.group_ids[i]).collect(),
            self.group_names.clone(),
            self.labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
            self.feature_names.clone(),
        )
    }
}

/// Row blocks per group, preserving the original row order within each.
pub fn split_groups(gd: &GroupedDataset) -> Vec<DataMatrix> {
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); gd.group_count()];
    for (i, &g) in gd.group_ids.iter().enumerate() {
        rows[g].push(i);
    }
    rows.iter()
        .map(|r| gd.matrix.select_rows(r).expect("groups are non-empty"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gram, Matrix};

    fn toy() -> GroupedDataset {
        let m = Matrix::from_fn(6, 2, |i, j| (i * 2 + j) as f64);
        GroupedDataset::new(
            DataMatrix::new(m).unwrap(),
            vec![0, 1, 0, 1, 0, 1],
            vec!["a".into(), "b".into()],
            None,
            vec!["x".into(), "y".into()],
        )
        .unwrap()
    }

    #[test]
    fn alternating_groups() {
        let blocks = split_groups(&toy());
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].as_matrix().column(0).iter().copied().collect::<Vec<_>>(), [0.0, 4.0, 8.0]);
        assert_eq!(blocks[1].as_matrix().column(0).iter().copied().collect::<Vec<_>>(), [2.0, 6.0, 10.0]);
        let total = gram(&toy().matrix);
        let sum = gram(&blocks[0]).as_matrix() + gram(&blocks[1]).as_matrix();
        assert!((total.as_matrix() - sum).amax() <= 1e-12);
    }

    #[test]
    fn single_group_is_whole_matrix() {
        let mut gd = toy();
        gd.group_ids = vec![0; 6];
        gd.group_names = vec!["all".into()];
        let blocks = split_groups(&gd);
        assert_eq!(blocks, vec![gd.matrix.clone()]);
    }

    #[test]
    fn empty_group_is_rejected() {
        let gd = toy();
        let err = GroupedDataset::new(
            gd.matrix.clone(),
            vec![0; 6],
            gd.group_names.clone(),
            None,
            gd.feature_names.clone(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }
}
