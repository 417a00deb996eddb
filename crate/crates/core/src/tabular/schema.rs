use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    Binary,
    Multiclass,
}

impl ColumnKind {
    pub fn is_categorical(self) -> bool {
        !matches!(self, ColumnKind::Continuous)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Continuous => "continuous",
            ColumnKind::Binary => "binary",
            ColumnKind::Multiclass => "multiclass",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    /// Ordered category labels; cell values index into this list.
    pub categories: Vec<String>,
}

impl ColumnSchema {
    pub fn continuous(name: impl Into<String>) -> Self {
        ColumnSchema {
            name: name.into(),
            kind: ColumnKind::Continuous,
            categories: Vec::new(),
        }
    }

    /// Binary when given exactly two labels, multiclass otherwise.
    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        categories: impl IntoIterator<Item = S>,
    ) -> Self {
        let categories: Vec<String> = categories.into_iter().map(Into::into).collect();
        let kind = if categories.len() == 2 {
            ColumnKind::Binary
        } else {
            ColumnKind::Multiclass
        };
        ColumnSchema {
            name: name.into(),
            kind,
            categories,
        }
    }

    pub fn n_categories(&self) -> usize {
        self.categories.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.categories.len();
        let ok = match self.kind {
            ColumnKind::Continuous => n == 0,
            ColumnKind::Binary => n == 2,
            ColumnKind::Multiclass => n >= 3,
        };
        if !ok {
            return Err(Error::Schema(format!(
                "column {:?} is {} but has {} categories",
                self.name,
                self.kind.as_str(),
                n
            )));
        }
        let distinct: HashSet<&str> = self.categories.iter().map(String::as_str).collect();
        if distinct.len() != n {
            return Err(Error::Schema(format!(
                "column {:?} has duplicate category labels",
                self.name
            )));
        }
        Ok(())
    }

    pub fn category_index(&self, label: &str) -> Option<u32> {
        self.categories
            .iter()
            .position(|c| c == label)
            .map(|i| i as u32)
    }
}

/// Ordered column schemas plus the label column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    columns: Vec<ColumnSchema>,
    target: usize,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSchema>, target: &str) -> Result<Self> {
        let mut seen = HashSet::new();
        for c in &columns {
            c.validate()?;
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column name {:?}", c.name)));
            }
        }
        let target_idx = columns
            .iter()
            .position(|c| c.name == target)
            .ok_or_else(|| Error::Schema(format!("target {target:?} is not a column")))?;
        if !columns[target_idx].kind.is_categorical() {
            return Err(Error::Schema(format!(
                "target {target:?} must be binary or multiclass"
            )));
        }
        Ok(Schema {
            columns,
            target: target_idx,
        })
    }

    pub fn columns(&self) -> &[ColumnSchema] {
        &self.columns
    }

    pub fn column(&self, idx: usize) -> &ColumnSchema {
        &self.columns[idx]
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn target_index(&self) -> usize {
        self.target
    }

    pub fn target(&self) -> &ColumnSchema {
        &self.columns[self.target]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    /// Indices of every column except the target, in schema order.
    pub fn feature_indices(&self) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&i| i != self.target)
            .collect()
    }

    pub fn continuous_indices(&self) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&i| self.columns[i].kind == ColumnKind::Continuous)
            .collect()
    }

    pub fn categorical_indices(&self) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&i| self.columns[i].kind.is_categorical())
            .collect()
    }

    /// Schema with the named columns removed. The target cannot be removed.
    pub fn without(&self, drop: &[usize]) -> Result<Schema> {
        if drop.contains(&self.target) {
            return Err(Error::Schema("cannot drop the target column".into()));
        }
        let columns = self
            .columns
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, c)| c.clone())
            .collect();
        Schema::new(columns, &self.target().name)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Schema> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Schema::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Schema> {
        let file: SchemaFile =
            toml::from_str(text).map_err(|e| Error::Schema(format!("bad schema file: {e}")))?;
        let targets: Vec<&ColumnEntry> = file.column.iter().filter(|c| c.target).collect();
        if targets.len() != 1 {
            return Err(Error::Schema(format!(
                "schema file must flag exactly one target column, found {}",
                targets.len()
            )));
        }
        let target = targets[0].name.clone();
        let columns = file
            .column
            .into_iter()
            .map(|c| ColumnSchema {
                name: c.name,
                kind: c.kind,
                categories: c.categories,
            })
            .collect();
        Schema::new(columns, &target)
    }

    pub fn to_toml(&self) -> String {
        let file = SchemaFile {
            column: self
                .columns
                .iter()
                .enumerate()
                .map(|(i, c)| ColumnEntry {
                    name: c.name.clone(),
                    kind: c.kind,
                    categories: c.categories.clone(),
                    target: i == self.target,
                })
                .collect(),
        };
        toml::to_string(&file).expect("schema serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml()).map_err(|e| Error::io(path, e))
    }
}

/// On-disk schema layout: one `[[column]]` table per column.
#[derive(Debug, Serialize, Deserialize)]
struct SchemaFile {
    column: Vec<ColumnEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ColumnEntry {
    name: String,
    kind: ColumnKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    categories: Vec<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    target: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_category_counts_are_enforced() {
        let bad = ColumnSchema {
            name: "x".into(),
            kind: ColumnKind::Binary,
            categories: vec!["a".into(), "b".into(), "c".into()],
        };
        assert!(bad.validate().is_err());
        assert_eq!(
            ColumnSchema::categorical("y", ["a", "b"]).kind,
            ColumnKind::Binary
        );
        assert_eq!(
            ColumnSchema::categorical("y", ["a", "b", "c"]).kind,
            ColumnKind::Multiclass
        );
    }

    #[test]
    fn duplicate_names_and_continuous_target_rejected() {
        let cols = vec![ColumnSchema::continuous("a"), ColumnSchema::continuous("a")];
        assert!(Schema::new(cols, "a").is_err());
        let cols = vec![
            ColumnSchema::continuous("a"),
            ColumnSchema::categorical("y", ["0", "1"]),
        ];
        assert!(Schema::new(cols.clone(), "a").is_err());
        assert!(Schema::new(cols, "y").is_ok());
    }

    #[test]
    fn schema_file_round_trip() {
        let s = Schema::new(
            vec![
                ColumnSchema::continuous("age"),
                ColumnSchema::categorical("income", ["<=50K", ">50K"]),
            ],
            "income",
        )
        .unwrap();
        let text = s.to_toml();
        assert!(text.contains("target = true"));
        assert_eq!(Schema::from_toml(&text).unwrap(), s);
    }

    #[test]
    fn schema_file_needs_one_target() {
        let text = "[[column]]\nname = \"a\"\nkind = \"continuous\"\n";
        assert!(Schema::from_toml(text).is_err());
    }
}
