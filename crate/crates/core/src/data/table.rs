use std::path::Path;

use super::schema::{ColumnKind, DatasetSchema};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnValues {
    Numeric(Vec<f64>),
    Text(Vec<String>),
}

impl ColumnValues {
    pub fn len(&self) -> usize {
        match self {
            ColumnValues::Numeric(v) => v.len(),
            ColumnValues::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawColumn {
    pub name: String,
    pub kind: ColumnKind,
    pub values: ColumnValues,
}

/// Typed columns of a CSV file after dropping rows with missing values.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub columns: Vec<RawColumn>,
    /// Data rows in the file.
    pub rows_read: usize,
    /// Rows dropped because a used column was missing.
    pub rows_dropped: usize,
}

impl RawTable {
    pub fn nrows(&self) -> usize {
        self.rows_read - self.rows_dropped
    }

    pub fn column(&self, name: &str) -> Option<&RawColumn> {
        self.columns.iter().find(|c| c.name == name)
    }
}

/// Reads a CSV with a header row laid out as `schema` describes.
pub fn load_csv(path: &Path, schema: &DatasetSchema) -> Result<RawTable> {
    let display = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::Load {
        path: display.clone(),
        row: 0,
        column: String::new(),
        message: format!("cannot open: {e}"),
    })?;
    read_csv(file, &display, schema)
}

/// [`load_csv`] over any reader; `source` names it in errors.
pub fn read_csv<R: std::io::Read>(reader: R, source: &str, schema: &DatasetSchema) -> Result<RawTable> {
    schema.validate()?;
    let load_err = |row: usize, column: &str, message: String| Error::Load {
        path: source.to_string(),
        row,
        column: column.to_string(),
        message,
    };

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| load_err(1, "", format!("cannot read header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    for h in &header {
        if schema.column(h).is_none() {
            return Err(load_err(1, h, "column not declared in schema".into()));
        }
    }
    let positions: Vec<usize> = schema
        .columns
        .iter()
        .map(|c| {
            header
                .iter()
                .position(|h| h == &c.name)
                .ok_or_else(|| load_err(1, &c.name, "column missing from header".into()))
        })
        .collect::<Result<_>>()?;

    let used: Vec<usize> = (0..schema.columns.len())
        .filter(|&i| schema.columns[i].kind != ColumnKind::Ignore)
        .collect();
    let mut values: Vec<ColumnValues> = used
        .iter()
        .map(|&i| match schema.columns[i].kind {
            ColumnKind::Numeric => ColumnValues::Numeric(Vec::new()),
            _ => ColumnValues::Text(Vec::new()),
        })
        .collect();

    let mut rows_read = 0;
    let mut rows_dropped = 0;
    for (idx, record) in rdr.records().enumerate() {
        // Header is line 1.
        let line = idx + 2;
        let record = record.map_err(|e| load_err(line, "", e.to_string()))?;
        if record.len() != header.len() {
            return Err(load_err(
                line,
                "",
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        rows_read += 1;
        let mut cells: Vec<&str> = Vec::with_capacity(used.len());
        let mut missing = false;
        for &i in &used {
            let cell = &record[positions[i]];
            missing |= schema.is_missing(&schema.columns[i], cell);
            cells.push(cell);
        }
        if missing {
            rows_dropped += 1;
            continue;
        }
        for (slot, (&i, cell)) in values.iter_mut().zip(used.iter().zip(&cells)) {
            match slot {
                ColumnValues::Numeric(v) => {
                    let x: f64 = cell.parse().map_err(|_| {
                        load_err(line, &schema.columns[i].name, format!("'{cell}' is not a number"))
                    })?;
                    if !x.is_finite() {
                        return Err(load_err(line, &schema.columns[i].name, "non-finite value".into()));
                    }
                    v.push(x);
                }
                ColumnValues::Text(v) => v.push((*cell).to_string()),
            }
        }
    }

    let columns = used
        .iter()
        .zip(values)
        .map(|(&i, values)| RawColumn {
            name: schema.columns[i].name.clone(),
            kind: schema.columns[i].kind,
            values,
        })
        .collect();
    if rows_dropped > 0 {
        log::info!("{source}: dropped {rows_dropped} of {rows_read} rows with missing values");
    }
    Ok(RawTable {
        columns,
        rows_read,
        rows_dropped,
    })
}
