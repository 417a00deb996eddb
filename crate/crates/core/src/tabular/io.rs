use std::collections::BTreeSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::dataset::{ColumnData, Dataset};
use super::schema::{ColumnKind, ColumnSchema, Schema};

/// Reads a headered CSV whose header must list exactly the schema's columns,
/// in order.
pub fn load_csv(path: impl AsRef<Path>, columns: &[ColumnSchema], target: &str) -> Result<Dataset> {
    let schema = Schema::new(columns.to_vec(), target)?;
    load_csv_with_schema(path, &schema)
}

pub fn load_csv_with_schema(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema)
}

pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let expected: Vec<String> = schema.names().map(str::to_string).collect();
    if header != expected {
        return Err(Error::HeaderMismatch {
            expected,
            found: header,
        });
    }

    let mut columns: Vec<ColumnData> = schema
        .columns()
        .iter()
        .map(|c| match c.kind {
            ColumnKind::Continuous => ColumnData::Continuous(Vec::new()),
            _ => ColumnData::Categorical(Vec::new()),
        })
        .collect();

    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        for ((col, data), raw) in schema
            .columns()
            .iter()
            .zip(columns.iter_mut())
            .zip(record.iter())
        {
            let raw = raw.trim();
            let cell_err = |reason: &str| Error::Cell {
                row,
                column: col.name.clone(),
                value: raw.to_string(),
                reason: reason.to_string(),
            };
            if raw.is_empty() {
                return Err(cell_err("missing value"));
            }
            match data {
                ColumnData::Continuous(v) => {
                    let x: f64 = raw.parse().map_err(|_| cell_err("not a real number"))?;
                    if !x.is_finite() {
                        return Err(cell_err("not finite"));
                    }
                    v.push(x);
                }
                ColumnData::Categorical(v) => {
                    let idx = col
                        .category_index(raw)
                        .ok_or_else(|| cell_err("unknown category label"))?;
                    v.push(idx);
                }
            }
        }
    }
    Dataset::new(schema.clone(), columns)
}

/// Writes the header then one line per row; categories are written as labels,
/// reals in shortest round-trip form.
pub fn write_csv<W: Write>(d: &Dataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(d.schema().names())?;
    let mut record = Vec::with_capacity(d.n_cols());
    for r in 0..d.n_rows() {
        record.clear();
        for (col, data) in d.schema().columns().iter().zip(d.columns()) {
            record.push(match data {
                ColumnData::Continuous(v) => format_real(v[r]),
                ColumnData::Categorical(v) => col.categories[v[r] as usize].clone(),
            });
        }
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn save_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(d, std::io::BufWriter::new(file))
}

/// Shortest representation that parses back to the identical `f64`.
pub fn format_real(x: f64) -> String {
    format!("{x:?}")
}

/// Guesses column kinds from a headered CSV. A column is continuous when every
/// value parses as a real and it has more than `max_categories` distinct
/// values; otherwise it is categorical.
pub fn infer_schema(path: impl AsRef<Path>, max_categories: usize) -> Result<Vec<ColumnSchema>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    infer_schema_from_reader(file, max_categories)
}

pub fn infer_schema_from_reader<R: Read>(
    reader: R,
    max_categories: usize,
) -> Result<Vec<ColumnSchema>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::Schema("empty file".into()));
    }
    let mut distinct: Vec<BTreeSet<String>> = vec![BTreeSet::new(); header.len()];
    let mut numeric = vec![true; header.len()];
    let mut rows = 0usize;
    for record in rdr.records() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { .. } => Error::Schema(format!("ragged rows: {e}")),
            _ => Error::Csv(e),
        })?;
        for (j, raw) in record.iter().enumerate() {
            let raw = raw.trim();
            if raw.is_empty() {
                return Err(Error::Cell {
                    row: rows,
                    column: header[j].clone(),
                    value: String::new(),
                    reason: "missing value".into(),
                });
            }
            if numeric[j] && !raw.parse::<f64>().is_ok_and(f64::is_finite) {
                numeric[j] = false;
            }
            distinct[j].insert(raw.to_string());
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Schema("file has no data rows".into()));
    }

    header
        .into_iter()
        .zip(distinct)
        .zip(numeric)
        .map(|((name, values), is_numeric)| {
            if is_numeric && (values.len() > max_categories || values.len() == 1) {
                return Ok(ColumnSchema::continuous(name));
            }
            if values.len() == 1 {
                return Err(Error::Schema(format!(
                    "column {name:?} has a single non-numeric value and cannot be typed"
                )));
            }
            let mut labels: Vec<String> = values.into_iter().collect();
            if is_numeric {
                labels.sort_by(|a, b| {
                    let (x, y): (f64, f64) = (a.parse().unwrap(), b.parse().unwrap());
                    x.total_cmp(&y)
                });
            }
            Ok(ColumnSchema::categorical(name, labels))
        })
        .collect()
}
