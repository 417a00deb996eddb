//! Distributional-fidelity metrics and percentage-change arithmetic.

mod distance;
mod fidelity;

pub use distance::{
    kl_divergence_categorical, kl_divergence_continuous, kl_divergence_probs, ks_statistic,
    percent_change, wasserstein_1d, KL_EPSILON,
};
pub use fidelity::{fidelity_report, ColumnMetric, FidelityReport, Metric, DEFAULT_BINS};

use crate::error::Result;
use crate::tabular::{ColumnData, ColumnSchema};

/// Column-kind dispatch for KL divergence.
pub fn kl_divergence(
    a: &ColumnData,
    b: &ColumnData,
    column: &ColumnSchema,
    bins: usize,
) -> Result<f64> {
    match (a, b) {
        (ColumnData::Continuous(a), ColumnData::Continuous(b)) => {
            kl_divergence_continuous(a, b, bins)
        }
        (ColumnData::Categorical(a), ColumnData::Categorical(b)) => {
            kl_divergence_categorical(a, b, column.n_categories())
        }
        _ => Err(crate::error::Error::SchemaMismatch(format!(
            "column {:?} storage differs between samples",
            column.name
        ))),
    }
}
