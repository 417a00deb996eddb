use crate::error::{Error, Result};

use super::schema::{ColumnKind, Schema};

/// Values of one column. Categorical cells are indices into the column's
/// category list.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Continuous(Vec<f64>),
    Categorical(Vec<u32>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Continuous(v) => v.len(),
            ColumnData::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_continuous(&self) -> Option<&[f64]> {
        match self {
            ColumnData::Continuous(v) => Some(v),
            ColumnData::Categorical(_) => None,
        }
    }

    pub fn as_categorical(&self) -> Option<&[u32]> {
        match self {
            ColumnData::Categorical(v) => Some(v),
            ColumnData::Continuous(_) => None,
        }
    }

    pub fn take(&self, rows: &[usize]) -> ColumnData {
        match self {
            ColumnData::Continuous(v) => {
                ColumnData::Continuous(rows.iter().map(|&r| v[r]).collect())
            }
            ColumnData::Categorical(v) => {
                ColumnData::Categorical(rows.iter().map(|&r| v[r]).collect())
            }
        }
    }
}

/// Immutable typed table. Every operation that "modifies" a dataset returns a
/// new one.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    columns: Vec<ColumnData>,
    n_rows: usize,
}

impl Dataset {
    pub fn new(schema: Schema, columns: Vec<ColumnData>) -> Result<Self> {
        if columns.len() != schema.len() {
            return Err(Error::InvalidDataset(format!(
                "schema has {} columns, got {}",
                schema.len(),
                columns.len()
            )));
        }
        let n_rows = columns.first().map_or(0, ColumnData::len);
        for (col, data) in schema.columns().iter().zip(&columns) {
            if data.len() != n_rows {
                return Err(Error::InvalidDataset(format!(
                    "column {:?} has {} rows, expected {n_rows}",
                    col.name,
                    data.len()
                )));
            }
            match (col.kind, data) {
                (ColumnKind::Continuous, ColumnData::Continuous(v)) => {
                    if let Some(pos) = v.iter().position(|x| !x.is_finite()) {
                        return Err(Error::InvalidDataset(format!(
                            "column {:?} row {pos} is not finite",
                            col.name
                        )));
                    }
                }
                (ColumnKind::Binary | ColumnKind::Multiclass, ColumnData::Categorical(v)) => {
                    let k = col.categories.len() as u32;
                    if let Some(pos) = v.iter().position(|&c| c >= k) {
                        return Err(Error::InvalidDataset(format!(
                            "column {:?} row {pos} has category index {} outside 0..{k}",
                            col.name, v[pos]
                        )));
                    }
                }
                _ => {
                    return Err(Error::InvalidDataset(format!(
                        "column {:?} storage does not match kind {}",
                        col.name,
                        col.kind.as_str()
                    )))
                }
            }
        }
        Ok(Dataset {
            schema,
            columns,
            n_rows,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[ColumnData] {
        &self.columns
    }

    pub fn column(&self, idx: usize) -> &ColumnData {
        &self.columns[idx]
    }

    pub fn column_by_name(&self, name: &str) -> Result<&ColumnData> {
        Ok(&self.columns[self.schema.index_of(name)?])
    }

    pub fn target_name(&self) -> &str {
        &self.schema.target().name
    }

    pub fn target_values(&self) -> &[u32] {
        self.columns[self.schema.target_index()]
            .as_categorical()
            .expect("target is categorical")
    }

    pub fn n_classes(&self) -> usize {
        self.schema.target().n_categories()
    }

    pub fn take_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.take(rows)).collect(),
            n_rows: rows.len(),
        }
    }

    /// Copy with column `idx` replaced.
    pub fn with_column(&self, idx: usize, data: ColumnData) -> Result<Dataset> {
        let mut columns = self.columns.clone();
        columns[idx] = data;
        Dataset::new(self.schema.clone(), columns)
    }

    pub fn with_columns(&self, columns: Vec<ColumnData>) -> Result<Dataset> {
        Dataset::new(self.schema.clone(), columns)
    }

    pub fn into_columns(self) -> Vec<ColumnData> {
        self.columns
    }

    /// Row-wise cell view: continuous values as-is, categories as their index.
    pub fn row(&self, r: usize) -> Vec<f64> {
        self.columns
            .iter()
            .map(|c| match c {
                ColumnData::Continuous(v) => v[r],
                ColumnData::Categorical(v) => f64::from(v[r]),
            })
            .collect()
    }
}

/// The `n` values of column `name`, in row order.
pub fn column_values<'a>(d: &'a Dataset, name: &str) -> Result<&'a ColumnData> {
    d.column_by_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::ColumnSchema;

    fn tiny() -> Dataset {
        let schema = Schema::new(
            vec![
                ColumnSchema::continuous("age"),
                ColumnSchema::categorical("y", ["no", "yes"]),
            ],
            "y",
        )
        .unwrap();
        Dataset::new(
            schema,
            vec![
                ColumnData::Continuous(vec![25.0, 40.0, 31.0]),
                ColumnData::Categorical(vec![0, 1, 0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn column_values_in_row_order() {
        let d = tiny();
        assert_eq!(
            column_values(&d, "age").unwrap().as_continuous().unwrap(),
            &[25.0, 40.0, 31.0]
        );
        assert!(matches!(
            column_values(&d, "zzz"),
            Err(Error::UnknownColumn(_))
        ));
    }

    #[test]
    fn invalid_grids_rejected() {
        let d = tiny();
        assert!(d
            .with_column(1, ColumnData::Categorical(vec![0, 2, 0]))
            .is_err());
        assert!(d
            .with_column(0, ColumnData::Categorical(vec![0, 1, 0]))
            .is_err());
        assert!(d
            .with_column(0, ColumnData::Continuous(vec![1.0, f64::NAN, 0.0]))
            .is_err());
        assert!(d.with_column(0, ColumnData::Continuous(vec![1.0])).is_err());
    }

    #[test]
    fn take_rows_keeps_schema() {
        let d = tiny();
        let t = d.take_rows(&[2, 0]);
        assert_eq!(t.n_rows(), 2);
        assert_eq!(t.schema(), d.schema());
        assert_eq!(t.target_values(), &[0, 0]);
        assert_eq!(t.row(0), vec![31.0, 0.0]);
    }
}
