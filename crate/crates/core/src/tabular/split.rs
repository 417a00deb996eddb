use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::Seed;

use super::dataset::Dataset;

/// Seeded shuffle split into `(train, test)` with `|test| = round(fraction · n)`.
pub fn train_test_split(d: &Dataset, test_fraction: f64, seed: Seed) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test_fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n = d.n_rows();
    let n_test = (test_fraction * n as f64).round() as usize;
    if n < 2 || n_test == 0 || n_test == n {
        return Err(Error::InvalidParameter(format!(
            "test_fraction {test_fraction} on {n} rows leaves an empty split"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed.rng("train_test_split"));
    let (test_idx, train_idx) = order.split_at(n_test);
    Ok((d.take_rows(train_idx), d.take_rows(test_idx)))
}
