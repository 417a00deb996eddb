//! Bundled synthetic datasets.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::tabular::{ColumnData, ColumnSchema, Dataset, Schema};

pub const FIXTURE_NAMES: [&str; 3] = ["blobs", "xor", "planted_signal"];

/// Default row count of each bundled fixture.
pub fn default_rows(name: &str) -> Option<usize> {
    match name {
        "blobs" => Some(2000),
        "xor" => Some(400),
        "planted_signal" => Some(2000),
        _ => None,
    }
}

pub fn fixture(name: &str, rows: usize, seed: Seed) -> Result<Dataset> {
    if rows < 2 {
        return Err(Error::InvalidParameter(format!(
            "fixture needs at least 2 rows, got {rows}"
        )));
    }
    match name {
        "blobs" => Ok(blobs(rows, seed)),
        "xor" => Ok(xor(rows, seed)),
        "planted_signal" => Ok(planted_signal(rows, seed)),
        _ => Err(Error::InvalidParameter(format!(
            "unknown fixture {name:?}; expected one of {FIXTURE_NAMES:?}"
        ))),
    }
}

fn normal<R: Rng>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    mean + sd * rng.sample::<f64, _>(StandardNormal)
}

fn binary_target() -> ColumnSchema {
    ColumnSchema::categorical("label", ["0", "1"])
}

/// Two balanced Gaussian classes over four continuous features plus a rare
/// binary feature. `age`, `hours` and `income` sit far from the origin with
/// small class shifts; `score` sits near the origin and carries most of the
/// signal. `flag` is set on about 3% of rows regardless of class.
pub fn blobs(rows: usize, seed: Seed) -> Dataset {
    let mut rng = seed.rng("fixture.blobs");
    let mut age = Vec::with_capacity(rows);
    let mut hours = Vec::with_capacity(rows);
    let mut income = Vec::with_capacity(rows);
    let mut score = Vec::with_capacity(rows);
    let mut flag = Vec::with_capacity(rows);
    let mut label = Vec::with_capacity(rows);
    for i in 0..rows {
        let y = (i % 2) as u32;
        let s = if y == 1 { 1.0 } else { -1.0 };
        age.push(normal(&mut rng, 25.0 + 1.5 * s, 3.0));
        hours.push(normal(&mut rng, 40.0 + 2.0 * s, 4.0));
        income.push(normal(&mut rng, 60.0 + 3.0 * s, 6.0));
        score.push(normal(&mut rng, 1.5 * s, 1.0));
        flag.push(u32::from(rng.random::<f64>() < 0.03));
        label.push(y);
    }
    let schema = Schema::new(
        vec![
            ColumnSchema::continuous("age"),
            ColumnSchema::continuous("hours"),
            ColumnSchema::continuous("income"),
            ColumnSchema::continuous("score"),
            ColumnSchema::categorical("flag", ["no", "yes"]),
            binary_target(),
        ],
        "label",
    )
    .expect("valid fixture schema");
    Dataset::new(
        schema,
        vec![
            ColumnData::Continuous(age),
            ColumnData::Continuous(hours),
            ColumnData::Continuous(income),
            ColumnData::Continuous(score),
            ColumnData::Categorical(flag),
            ColumnData::Categorical(label),
        ],
    )
    .expect("valid fixture data")
}

/// Four clusters at (±1, ±1); the label is 1 when the signs differ.
pub fn xor(rows: usize, seed: Seed) -> Dataset {
    let mut rng = seed.rng("fixture.xor");
    let mut x1 = Vec::with_capacity(rows);
    let mut x2 = Vec::with_capacity(rows);
    let mut label = Vec::with_capacity(rows);
    for i in 0..rows {
        let a = if i % 2 == 0 { 1.0 } else { -1.0 };
        let b = if (i / 2) % 2 == 0 { 1.0 } else { -1.0 };
        x1.push(normal(&mut rng, a, 0.3));
        x2.push(normal(&mut rng, b, 0.3));
        label.push(u32::from(a * b < 0.0));
    }
    let schema = Schema::new(
        vec![
            ColumnSchema::continuous("x1"),
            ColumnSchema::continuous("x2"),
            binary_target(),
        ],
        "label",
    )
    .expect("valid fixture schema");
    Dataset::new(
        schema,
        vec![
            ColumnData::Continuous(x1),
            ColumnData::Continuous(x2),
            ColumnData::Categorical(label),
        ],
    )
    .expect("valid fixture data")
}

/// Eight standard-normal features; the label is 1 when `s1 + s2 > 0` and
/// the six `noise*` columns are unrelated to it.
pub fn planted_signal(rows: usize, seed: Seed) -> Dataset {
    let mut rng = seed.rng("fixture.planted_signal");
    let mut cols: Vec<Vec<f64>> = (0..8).map(|_| Vec::with_capacity(rows)).collect();
    let mut label = Vec::with_capacity(rows);
    for _ in 0..rows {
        for c in cols.iter_mut() {
            c.push(normal(&mut rng, 0.0, 1.0));
        }
        label.push(u32::from(
            cols[0].last().unwrap() + cols[1].last().unwrap() > 0.0,
        ));
    }
    let mut schema_cols = vec![
        ColumnSchema::continuous("s1"),
        ColumnSchema::continuous("s2"),
    ];
    schema_cols.extend((1..=6).map(|i| ColumnSchema::continuous(format!("noise{i}"))));
    schema_cols.push(binary_target());
    let schema = Schema::new(schema_cols, "label").expect("valid fixture schema");
    let mut columns: Vec<ColumnData> = cols.into_iter().map(ColumnData::Continuous).collect();
    columns.push(ColumnData::Categorical(label));
    Dataset::new(schema, columns).expect("valid fixture data")
}
