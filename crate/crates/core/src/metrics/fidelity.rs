use std::io::Write;

use crate::error::{Error, Result};
use crate::tabular::{format_real, ColumnData, Dataset};

use super::distance::{
    kl_divergence_categorical, kl_divergence_continuous, ks_statistic, wasserstein_1d,
};

/// Default histogram resolution for continuous KL divergence.
pub const DEFAULT_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Wd,
    Ks,
    Kld,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Wd => "wd",
            Metric::Ks => "ks",
            Metric::Kld => "kld",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMetric {
    pub column: String,
    pub metric: Metric,
    pub value: f64,
}

/// Per-column divergences between a real and a synthetic dataset, plus their
/// equal-weight means.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityReport {
    pub entries: Vec<ColumnMetric>,
    pub wd_mean: f64,
    pub ks_mean: f64,
    pub kld_mean: f64,
}

impl FidelityReport {
    pub fn values(&self, metric: Metric) -> impl Iterator<Item = f64> + '_ {
        self.entries
            .iter()
            .filter(move |e| e.metric == metric)
            .map(|e| e.value)
    }

    pub fn get(&self, column: &str, metric: Metric) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.column == column && e.metric == metric)
            .map(|e| e.value)
    }

    /// `(wd_mean, ks_mean, kld_mean)`
    pub fn aggregates(&self) -> (f64, f64, f64) {
        (self.wd_mean, self.ks_mean, self.kld_mean)
    }

    /// `column,metric,value` rows at full precision.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["column", "metric", "value"])?;
        for e in &self.entries {
            wtr.write_record([e.column.as_str(), e.metric.as_str(), &format_real(e.value)])?;
        }
        for (name, v) in [
            ("wd_mean", self.wd_mean),
            ("ks_mean", self.ks_mean),
            ("kld_mean", self.kld_mean),
        ] {
            wtr.write_record(["*", name, &format_real(v)])?;
        }
        wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// WD and KS on every continuous column, KL (real ‖ synthetic) on every
/// column. Aggregates over an empty column set are 0.
pub fn fidelity_report(real: &Dataset, synth: &Dataset, bins: usize) -> Result<FidelityReport> {
    if real.schema() != synth.schema() {
        return Err(Error::SchemaMismatch(
            "real and synthetic datasets have different schemas".into(),
        ));
    }
    let mut entries = Vec::new();
    for (idx, col) in real.schema().columns().iter().enumerate() {
        match (real.column(idx), synth.column(idx)) {
            (ColumnData::Continuous(a), ColumnData::Continuous(b)) => {
                for (metric, value) in [
                    (Metric::Wd, wasserstein_1d(a, b)?),
                    (Metric::Ks, ks_statistic(a, b)?),
                    (Metric::Kld, kl_divergence_continuous(a, b, bins)?),
                ] {
                    entries.push(ColumnMetric {
                        column: col.name.clone(),
                        metric,
                        value,
                    });
                }
            }
            (ColumnData::Categorical(a), ColumnData::Categorical(b)) => {
                entries.push(ColumnMetric {
                    column: col.name.clone(),
                    metric: Metric::Kld,
                    value: kl_divergence_categorical(a, b, col.n_categories())?,
                })
            }
            _ => unreachable!("identical schemas imply identical storage"),
        }
    }
    let of = |m: Metric| mean(entries.iter().filter(|e| e.metric == m).map(|e| e.value));
    Ok(FidelityReport {
        wd_mean: of(Metric::Wd),
        ks_mean: of(Metric::Ks),
        kld_mean: of(Metric::Kld),
        entries,
    })
}
