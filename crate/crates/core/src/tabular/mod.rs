//! Typed tabular data: schemas, datasets, CSV ingestion and splitting.

mod dataset;
mod io;
mod schema;
mod split;

pub use dataset::{column_values, ColumnData, Dataset};
pub use io::{
    format_real, infer_schema, infer_schema_from_reader, load_csv, load_csv_with_schema, read_csv,
    save_csv, write_csv,
};
pub use schema::{ColumnKind, ColumnSchema, Schema};
pub use split::train_test_split;
