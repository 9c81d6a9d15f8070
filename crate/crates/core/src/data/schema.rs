use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    /// Categorical column that defines the groups.
    Sensitive,
    /// Binary target for the downstream classifier; never a feature.
    Label,
    /// Present in the file but unused.
    Ignore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    /// Extra missing-value tokens for this column.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub missing: Vec<String>,
    /// Value of a label column that counts as the positive class.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive: Option<String>,
    /// Display names for raw category values.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub names: BTreeMap<String, String>,
}

/// Column names and kinds of a CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    /// Missing-value tokens shared by every column.
    #[serde(default)]
    pub missing: Vec<String>,
    pub columns: Vec<ColumnSpec>,
}

impl DatasetSchema {
    pub fn from_toml(text: &str) -> Result<Self> {
        let schema: Self =
            toml::from_str(text).map_err(|e| Error::Config(format!("invalid schema: {e}")))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read schema {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("schema serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.columns.is_empty() {
            return Err(Error::Config("schema declares no columns".into()));
        }
        let mut names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("column '{}' declared twice", w[0])));
        }
        let count = |kind| self.columns.iter().filter(|c| c.kind == kind).count();
        if count(ColumnKind::Sensitive) != 1 {
            return Err(Error::Config(format!(
                "schema must mark exactly one sensitive column, found {}",
                count(ColumnKind::Sensitive)
            )));
        }
        if count(ColumnKind::Label) > 1 {
            return Err(Error::Config("schema marks more than one label column".into()));
        }
        if let Some(label) = self.label() {
            if label.positive.is_none() {
                return Err(Error::Config(format!(
                    "label column '{}' needs a positive value",
                    label.name
                )));
            }
        }
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn sensitive(&self) -> &ColumnSpec {
        self.columns
            .iter()
            .find(|c| c.kind == ColumnKind::Sensitive)
            .expect("validated schema has a sensitive column")
    }

    pub fn label(&self) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.kind == ColumnKind::Label)
    }

    /// Makes `name` the sensitive column; the previous one becomes categorical.
    pub fn with_sensitive(&self, name: &str) -> Result<Self> {
        let target = self
            .column(name)
            .ok_or_else(|| Error::Config(format!("no column named '{name}' in schema")))?;
        if target.kind == ColumnKind::Label {
            return Err(Error::Config(format!("label column '{name}' cannot be sensitive")));
        }
        let mut out = self.clone();
        for c in &mut out.columns {
            if c.name == name {
                c.kind = ColumnKind::Sensitive;
            } else if c.kind == ColumnKind::Sensitive {
                c.kind = ColumnKind::Categorical;
            }
        }
        out.validate()?;
        Ok(out)
    }

    /// Whether `value` is a missing token for `column`.
    pub fn is_missing(&self, column: &ColumnSpec, value: &str) -> bool {
        value.is_empty()
            || self.missing.iter().any(|m| m == value)
            || column.missing.iter().any(|m| m == value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = r#"
missing = ["?"]

[[columns]]
name = "x"
kind = "numeric"

[[columns]]
name = "colour"
kind = "categorical"

[[columns]]
name = "g"
kind = "sensitive"
missing = ["0"]
names = { "1" = "one" }

[[columns]]
name = "y"
kind = "label"
positive = "yes"
"#;

    #[test]
    fn parses_and_round_trips() {
        let s = DatasetSchema::from_toml(TOY).unwrap();
        assert_eq!(s.sensitive().name, "g");
        assert_eq!(s.label().unwrap().positive.as_deref(), Some("yes"));
        assert!(s.is_missing(s.column("g").unwrap(), "0"));
        assert!(s.is_missing(s.column("x").unwrap(), "?"));
        assert!(!s.is_missing(s.column("x").unwrap(), "0"));
        assert_eq!(DatasetSchema::from_toml(&s.to_toml()).unwrap(), s);
    }

    #[test]
    fn sensitive_override() {
        let s = DatasetSchema::from_toml(TOY).unwrap().with_sensitive("colour").unwrap();
        assert_eq!(s.sensitive().name, "colour");
        assert_eq!(s.column("g").unwrap().kind, ColumnKind::Categorical);
        let base = DatasetSchema::from_toml(TOY).unwrap();
        assert!(base.with_sensitive("y").is_err());
        assert!(base.with_sensitive("nope").is_err());
    }

    #[test]
    fn rejects_two_sensitive_columns() {
        let text = TOY.replace("kind = \"categorical\"", "kind = \"sensitive\"");
        assert!(matches!(DatasetSchema::from_toml(&text), Err(Error::Config(_))));
    }
}
