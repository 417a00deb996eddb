//! Native synthetic-data generators: a latent-class Gaussian mixture fitted
//! by EM, a class-conditional Gaussian copula and a class-conditional
//! histogram model.

mod copula;
mod gmm;
mod histogram;
mod tables;

pub use copula::{CopulaModel, CopulaPart};
pub use gmm::{log_likelihood, GmmModel};
pub use histogram::{HistogramModel, HistogramPart};

use serde::{Deserialize, Serialize};

use crate::attacks::{AttackKind, AttackSpec};
use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::tabular::{ColumnKind, Dataset, Schema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorFamily {
    Gmm,
    GaussianCopula,
    Histogram,
}

impl GeneratorFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorFamily::Gmm => "gmm",
            GeneratorFamily::GaussianCopula => "gaussian_copula",
            GeneratorFamily::Histogram => "histogram",
        }
    }
}

impl std::fmt::Display for GeneratorFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for GeneratorFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            GeneratorFamily::Gmm,
            GeneratorFamily::GaussianCopula,
            GeneratorFamily::Histogram,
        ]
        .into_iter()
        .find(|f| f.as_str() == s)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown generator family {s:?}")))
    }
}

pub const DEFAULT_COMPONENTS: usize = 20;
pub const DEFAULT_EPOCHS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub family: GeneratorFamily,
    /// Mixture components (gmm only).
    pub components: usize,
    /// EM iterations (gmm only).
    pub max_epochs: usize,
    /// EM stops once an iteration improves the mean log-likelihood by less.
    pub tolerance: f64,
    /// Bins per continuous column (histogram only).
    pub bins: usize,
    pub seed: Seed,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            family: GeneratorFamily::Gmm,
            components: DEFAULT_COMPONENTS,
            max_epochs: DEFAULT_EPOCHS,
            tolerance: 1e-6,
            bins: 20,
            seed: Seed(0),
        }
    }
}

impl GeneratorConfig {
    pub fn new(family: GeneratorFamily) -> Self {
        GeneratorConfig {
            family,
            ..GeneratorConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| {
            Err(Error::InvalidParameter(format!(
                "generator {}: {m}",
                self.family
            )))
        };
        if self.components == 0 {
            return bad("components must be >= 1");
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be >= 1");
        }
        if self.bins < 2 {
            return bad("bins must be >= 2");
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return bad("tolerance must be finite and > 0");
        }
        Ok(())
    }
}

/// Config produced by an in-processing attack, using the epochs and
/// component counts of `spec`.
pub fn degraded_config_for(base: &GeneratorConfig, spec: &AttackSpec) -> Result<GeneratorConfig> {
    spec.validate()?;
    match spec.kind {
        AttackKind::LowEpochs => Ok(GeneratorConfig {
            max_epochs: spec.epochs,
            ..base.clone()
        }),
        AttackKind::OversimplifiedSdg => Ok(GeneratorConfig {
            family: GeneratorFamily::Gmm,
            components: spec.components,
            ..base.clone()
        }),
        other => Err(Error::InvalidParameter(format!(
            "{other} is not a generator-configuration attack"
        ))),
    }
}

/// Config produced by an in-processing attack with its standard settings:
/// 10 EM iterations for `low_epochs`, a 10-component mixture for
/// `oversimplified_sdg`.
pub fn degraded_config(base: &GeneratorConfig, kind: AttackKind) -> Result<GeneratorConfig> {
    degraded_config_for(base, &AttackSpec::new(kind))
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorModel {
    Gmm(GmmModel),
    Copula(CopulaModel),
    Histogram(HistogramModel),
}

pub fn fit(config: &GeneratorConfig, d: &Dataset) -> Result<GeneratorModel> {
    config.validate()?;
    if d.n_rows() == 0 {
        return Err(Error::InvalidDataset(
            "cannot fit a generator on an empty dataset".into(),
        ));
    }
    Ok(match config.family {
        GeneratorFamily::Gmm => GeneratorModel::Gmm(GmmModel::fit(config, d)?),
        GeneratorFamily::GaussianCopula => GeneratorModel::Copula(CopulaModel::fit(d)?),
        GeneratorFamily::Histogram => {
            GeneratorModel::Histogram(HistogramModel::fit(config.bins, d)?)
        }
    })
}

impl GeneratorModel {
    pub fn fit(config: &GeneratorConfig, d: &Dataset) -> Result<Self> {
        fit(config, d)
    }

    pub fn family(&self) -> GeneratorFamily {
        match self {
            GeneratorModel::Gmm(_) => GeneratorFamily::Gmm,
            GeneratorModel::Copula(_) => GeneratorFamily::GaussianCopula,
            GeneratorModel::Histogram(_) => GeneratorFamily::Histogram,
        }
    }

    pub fn schema(&self) -> &Schema {
        match self {
            GeneratorModel::Gmm(m) => &m.schema,
            GeneratorModel::Copula(m) => &m.schema,
            GeneratorModel::Histogram(m) => &m.schema,
        }
    }

    /// Draws `m` rows.
    pub fn sample(&self, m: usize, seed: Seed) -> Result<Dataset> {
        if m == 0 {
            return Err(Error::InvalidParameter("sample size must be >= 1".into()));
        }
        match self {
            GeneratorModel::Gmm(g) => g.sample(m, seed),
            GeneratorModel::Copula(c) => c.sample(m, seed),
            GeneratorModel::Histogram(h) => h.sample(m, seed),
        }
    }

    /// Per-iteration training log-likelihood (gmm only).
    pub fn fit_log(&self) -> Option<&[f64]> {
        match self {
            GeneratorModel::Gmm(g) => Some(&g.fit_log),
            _ => None,
        }
    }

    /// The model's marginal CDF of a continuous column at `x`.
    pub fn marginal_cdf(&self, column: &str, x: f64) -> Result<f64> {
        let schema = self.schema();
        let idx = schema.index_of(column)?;
        if schema.column(idx).kind != ColumnKind::Continuous {
            return Err(Error::InvalidParameter(format!(
                "column {column:?} is not continuous"
            )));
        }
        let slot = schema
            .continuous_indices()
            .iter()
            .position(|&c| c == idx)
            .expect("continuous");
        Ok(match self {
            GeneratorModel::Gmm(g) => g.marginal_cdf(slot, x),
            GeneratorModel::Copula(c) => c.marginal_cdf(slot, x),
            GeneratorModel::Histogram(h) => h.marginal_cdf(slot, x),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degraded_configs() {
        let base = GeneratorConfig {
            max_epochs: 100,
            ..GeneratorConfig::new(GeneratorFamily::Histogram)
        };
        assert_eq!(
            degraded_config(&base, AttackKind::LowEpochs)
                .unwrap()
                .max_epochs,
            10
        );
        let copula = GeneratorConfig::new(GeneratorFamily::GaussianCopula);
        let over = degraded_config(&copula, AttackKind::OversimplifiedSdg).unwrap();
        assert_eq!((over.family, over.components), (GeneratorFamily::Gmm, 10));
        assert!(degraded_config(&base, AttackKind::LabelFlip).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = GeneratorConfig::default();
        assert!(c.validate().is_ok());
        c.bins = 1;
        assert!(c.validate().is_err());
        c = GeneratorConfig {
            tolerance: 0.0,
            ..GeneratorConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
