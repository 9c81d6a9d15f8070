use std::collections::BTreeSet;

use super::schema::{ColumnKind, DatasetSchema};
use super::table::{ColumnValues, RawTable};
use super::GroupedDataset;
use crate::error::{Error, Result};
use crate::linalg::{DataMatrix, Matrix};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct EncodeOptions {
    /// Leave the sensitive column out of the feature matrix.
    pub exclude_sensitive: bool,
}

#[derive(Debug, Clone, PartialEq)]
enum Block {
    Numeric { column: String, mean: f64, std: f64 },
    OneHot { column: String, categories: Vec<String> },
}

/// Column-wise feature encoding fitted on one table and applicable to others.
///
/// Numeric columns are z-scored with population statistics, categorical
/// columns are one-hot encoded over their sorted categories (no level
/// dropped), and the sensitive column supplies the group ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    blocks: Vec<Block>,
    sensitive: String,
    group_values: Vec<String>,
    group_names: Vec<String>,
    label: Option<(String, String)>,
    dropped: Vec<String>,
}

fn text<'a>(table: &'a RawTable, name: &str) -> Result<&'a [String]> {
    match table.column(name).map(|c| &c.values) {
        Some(ColumnValues::Text(v)) => Ok(v),
        Some(ColumnValues::Numeric(_)) => Err(Error::Encoding(format!("column '{name}' is numeric"))),
        None => Err(Error::Encoding(format!("table has no column '{name}'"))),
    }
}

fn sorted_unique(values: &[String]) -> Vec<String> {
    values.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect()
}

impl Encoder {
    pub fn fit(table: &RawTable, schema: &DatasetSchema, options: EncodeOptions) -> Result<Self> {
        if table.nrows() == 0 {
            return Err(Error::Data("no rows left after dropping missing values".into()));
        }
        let mut blocks = Vec::new();
        let mut dropped = Vec::new();
        for spec in &schema.columns {
            let name = spec.name.clone();
            match spec.kind {
                ColumnKind::Numeric => {
                    let Some(ColumnValues::Numeric(v)) = table.column(&name).map(|c| &c.values) else {
                        return Err(Error::Encoding(format!("column '{name}' is not numeric")));
                    };
                    let n = v.len() as f64;
                    let mean = v.iter().sum::<f64>() / n;
                    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
                    if var <= f64::EPSILON * mean.abs().max(1.0).powi(2) {
                        log::warn!("dropping constant numeric column '{name}'");
                        dropped.push(name);
                        continue;
                    }
                    blocks.push(Block::Numeric {
                        column: name,
                        mean,
                        std: var.sqrt(),
                    });
                }
                ColumnKind::Categorical => blocks.push(Block::OneHot {
                    categories: sorted_unique(text(table, &name)?),
                    column: name,
                }),
                ColumnKind::Sensitive if !options.exclude_sensitive => blocks.push(Block::OneHot {
                    categories: sorted_unique(text(table, &name)?),
                    column: name,
                }),
                _ => {}
            }
        }
        if blocks.is_empty() {
            return Err(Error::Data("no feature columns remain after encoding".into()));
        }

        let sensitive = schema.sensitive();
        let group_values = sorted_unique(text(table, &sensitive.name)?);
        let group_names = group_values
            .iter()
            .map(|v| sensitive.names.get(v).cloned().unwrap_or_else(|| v.clone()))
            .collect();
        let label = schema
            .label()
            .map(|l| (l.name.clone(), l.positive.clone().expect("validated")));

        Ok(Self {
            blocks,
            sensitive: sensitive.name.clone(),
            group_values,
            group_names,
            label,
            dropped,
        })
    }

    pub fn feature_count(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| match b {
                Block::Numeric { .. } => 1,
                Block::OneHot { categories, .. } => categories.len(),
            })
            .sum()
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.feature_count());
        for b in &self.blocks {
            match b {
                Block::Numeric { column, .. } => names.push(column.clone()),
                Block::OneHot { column, categories } => {
                    names.extend(categories.iter().map(|c| format!("{column}={c}")))
                }
            }
        }
        names
    }

    /// Numeric columns dropped for having zero variance.
    pub fn dropped_columns(&self) -> &[String] {
        &self.dropped
    }

    pub fn group_names(&self) -> &[String] {
        &self.group_names
    }

    pub fn transform(&self, table: &RawTable) -> Result<GroupedDataset> {
        let n = table.nrows();
        let d = self.feature_count();
        let mut m = Matrix::zeros(n, d);
        let mut offset = 0;
        for b in &self.blocks {
            match b {
                Block::Numeric { column, mean, std } => {
                    let Some(ColumnValues::Numeric(v)) = table.column(column).map(|c| &c.values) else {
                        return Err(Error::Encoding(format!("column '{column}' is not numeric")));
                    };
                    for (i, x) in v.iter().enumerate() {
                        m[(i, offset)] = (x - mean) / std;
                    }
                    offset += 1;
                }
                Block::OneHot { column, categories } => {
                    for (i, value) in text(table, column)?.iter().enumerate() {
                        let j = categories.binary_search(value).map_err(|_| {
                            Error::Encoding(format!("unseen category '{value}' in column '{column}'"))
                        })?;
                        m[(i, offset + j)] = 1.0;
                    }
                    offset += categories.len();
                }
            }
        }

        let group_ids = text(table, &self.sensitive)?
            .iter()
            .map(|v| {
                self.group_values.binary_search(v).map_err(|_| {
                    Error::Encoding(format!("unseen group '{v}' in column '{}'", self.sensitive))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let labels = match &self.label {
            Some((name, positive)) => Some(
                text(table, name)?
                    .iter()
                    .map(|v| if v == positive { 1 } else { -1 })
                    .collect(),
            ),
            None => None,
        };
        GroupedDataset::new(
            DataMatrix::new(m)?,
            group_ids,
            self.group_names.clone(),
            labels,
            self.feature_names(),
        )
    }

    /// Recovers the original values of a one-hot encoded column.
    pub fn decode_column(&self, features: &Matrix, column: &str) -> Result<Vec<String>> {
        if features.ncols() != self.feature_count() {
            return Err(Error::Dimension(format!(
                "expected {} features, got {}",
                self.feature_count(),
                features.ncols()
            )));
        }
        let mut offset = 0;
        for b in &self.blocks {
            match b {
                Block::Numeric { .. } => offset += 1,
                Block::OneHot { column: c, categories } if c == column => {
                    return (0..features.nrows())
                        .map(|i| {
                            let hot: Vec<usize> = (0..categories.len())
                                .filter(|&j| features[(i, offset + j)] == 1.0)
                                .collect();
                            match hot.as_slice() {
                                [j] => Ok(categories[*j].clone()),
                                _ => Err(Error::Encoding(format!(
                                    "row {i} of '{column}' is not a one-hot vector"
                                ))),
                            }
                        })
                        .collect();
                }
                Block::OneHot { categories, .. } => offset += categories.len(),
            }
        }
        Err(Error::Encoding(format!("'{column}' is not a one-hot encoded column")))
    }
}

/// Fits an [`Encoder`] on `table` and applies it.
pub fn preprocess(table: &RawTable, schema: &DatasetSchema, options: EncodeOptions) -> Result<GroupedDataset> {
    let encoder = Encoder::fit(table, schema, options)?;
    log::info!(
        "encoded {} rows into {} features ({} groups)",
        table.nrows(),
        encoder.feature_count(),
        encoder.group_names().len()
    );
    encoder.transform(table)
}
