use rand::Rng;

use crate::tabular::{ColumnData, Dataset};

/// Add-one smoothed frequencies.
pub(crate) fn smoothed_table(values: impl IntoIterator<Item = u32>, k: usize) -> Vec<f64> {
    let mut counts = vec![1.0; k];
    let mut total = k as f64;
    for v in values {
        counts[v as usize] += 1.0;
        total += 1.0;
    }
    counts.iter().map(|c| c / total).collect()
}

/// Inverse-CDF draw from a probability vector. Zero-probability entries are
/// never returned.
pub(crate) fn draw_categorical<R: Rng>(rng: &mut R, probs: &[f64]) -> u32 {
    let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i as u32;
            }
        }
    }
    last as u32
}

/// Row indices grouped by target class.
pub(crate) fn rows_by_class(d: &Dataset) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); d.n_classes()];
    for (i, &c) in d.target_values().iter().enumerate() {
        groups[c as usize].push(i);
    }
    groups
}

pub(crate) fn continuous_column(d: &Dataset, idx: usize) -> &[f64] {
    match d.column(idx) {
        ColumnData::Continuous(v) => v,
        ColumnData::Categorical(_) => {
            unreachable!("continuous index points at a categorical column")
        }
    }
}

pub(crate) fn categorical_column(d: &Dataset, idx: usize) -> &[u32] {
    match d.column(idx) {
        ColumnData::Categorical(v) => v,
        ColumnData::Continuous(_) => {
            unreachable!("categorical index points at a continuous column")
        }
    }
}

pub(crate) fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}
