//! Data-level attack primitives and the stage-aware dispatcher.

mod primitives;

pub use primitives::{
    feature_importance_attack, feature_importance_drop, incorrect_source, label_flip, noise_inject,
    noise_inject_keyed, restore_suppressed, retained_columns, scale_output, select_flip_indices,
    suppression_fill, FlipIndexSet, INCORRECT_SOURCE_HIGH, INCORRECT_SOURCE_LOW,
    INCORRECT_SOURCE_SIGMA,
};

use serde::{Deserialize, Serialize};

use crate::downstream::ImportanceRanking;
use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::tabular::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    None,
    LabelFlip,
    FeatureImportance,
    IncorrectSource,
    ScaleOutput,
    NoiseInject,
    LowEpochs,
    OversimplifiedSdg,
}

/// Where in the pipeline an attack acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttackSurface {
    /// The real data the generator is trained on.
    Upstream,
    /// The generator's training configuration.
    InProcessing,
    /// The sampled synthetic data.
    PostGeneration,
}

impl AttackKind {
    pub const ALL: [AttackKind; 8] = [
        AttackKind::None,
        AttackKind::LabelFlip,
        AttackKind::FeatureImportance,
        AttackKind::IncorrectSource,
        AttackKind::ScaleOutput,
        AttackKind::NoiseInject,
        AttackKind::LowEpochs,
        AttackKind::OversimplifiedSdg,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AttackKind::None => "none",
            AttackKind::LabelFlip => "label_flip",
            AttackKind::FeatureImportance => "feature_importance",
            AttackKind::IncorrectSource => "incorrect_source",
            AttackKind::ScaleOutput => "scale_output",
            AttackKind::NoiseInject => "noise_inject",
            AttackKind::LowEpochs => "low_epochs",
            AttackKind::OversimplifiedSdg => "oversimplified_sdg",
        }
    }

    /// Short label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            AttackKind::None => "None",
            AttackKind::LabelFlip => "LFA",
            AttackKind::FeatureImportance => "FIA",
            AttackKind::IncorrectSource => "Incorrect Source",
            AttackKind::ScaleOutput => "Scale Output",
            AttackKind::NoiseInject => "Noise Injection",
            AttackKind::LowEpochs => "Low Epochs",
            AttackKind::OversimplifiedSdg => "Oversimplified SDG",
        }
    }

    /// `None` for the clean baseline.
    pub fn surface(self) -> Option<AttackSurface> {
        match self {
            AttackKind::None => None,
            AttackKind::LabelFlip | AttackKind::FeatureImportance | AttackKind::IncorrectSource => {
                Some(AttackSurface::Upstream)
            }
            AttackKind::LowEpochs | AttackKind::OversimplifiedSdg => {
                Some(AttackSurface::InProcessing)
            }
            AttackKind::ScaleOutput | AttackKind::NoiseInject => {
                Some(AttackSurface::PostGeneration)
            }
        }
    }

    /// Whether the tampering ratio parametrizes this attack.
    pub fn uses_ratio(self) -> bool {
        matches!(self, AttackKind::LabelFlip | AttackKind::FeatureImportance)
    }
}

impl std::fmt::Display for AttackKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AttackKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown attack kind {s:?}")))
    }
}

/// One attack primitive and its parameters. Only the fields relevant to
/// `kind` are read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackSpec {
    pub kind: AttackKind,
    /// Flip fraction for label flipping, retained-feature fraction for FIA.
    pub ratio: f64,
    pub scale: f64,
    pub sigma: f64,
    pub epochs: usize,
    pub components: usize,
    pub seed: Seed,
    /// Upper bound on `ratio` for ratio-driven attacks.
    pub budget: Option<f64>,
    /// FIA drops suppressed columns instead of constant-filling them.
    pub fia_drop: bool,
}

impl Default for AttackSpec {
    fn default() -> Self {
        AttackSpec {
            kind: AttackKind::None,
            ratio: 0.0,
            scale: 2.0,
            sigma: 10.0,
            epochs: 10,
            components: 10,
            seed: Seed(0),
            budget: None,
            fia_drop: false,
        }
    }
}

impl AttackSpec {
    pub fn new(kind: AttackKind) -> Self {
        AttackSpec {
            kind,
            ..AttackSpec::default()
        }
    }

    pub fn with_ratio(mut self, ratio: f64) -> Self {
        self.ratio = ratio;
        self
    }

    pub fn with_seed(mut self, seed: Seed) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(format!("{}: {m}", self.kind)));
        match self.kind {
            AttackKind::LabelFlip | AttackKind::FeatureImportance => {
                if !(0.0..=1.0).contains(&self.ratio) {
                    return bad(format!("ratio {} outside [0, 1]", self.ratio));
                }
                if self.kind == AttackKind::FeatureImportance && self.ratio == 0.0 {
                    return bad("ratio 0 would suppress every feature".into());
                }
                if let Some(budget) = self.budget {
                    if self.ratio > budget {
                        return bad(format!("ratio {} exceeds budget {budget}", self.ratio));
                    }
                }
            }
            AttackKind::ScaleOutput => {
                if !self.scale.is_finite() || self.scale == 0.0 {
                    return bad(format!(
                        "scale must be finite and non-zero, got {}",
                        self.scale
                    ));
                }
            }
            AttackKind::NoiseInject => {
                if !(self.sigma.is_finite() && self.sigma >= 0.0) {
                    return bad(format!("sigma must be finite and >= 0, got {}", self.sigma));
                }
            }
            AttackKind::LowEpochs => {
                if self.epochs == 0 {
                    return bad("epochs must be positive".into());
                }
            }
            AttackKind::OversimplifiedSdg => {
                if self.components == 0 {
                    return bad("components must be positive".into());
                }
            }
            AttackKind::None | AttackKind::IncorrectSource => {}
        }
        Ok(())
    }
}

/// Which pipeline dataset an attacked dataset replaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DataStage {
    RealInput,
    SyntheticOutput,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StagedDataset {
    pub stage: DataStage,
    pub data: Dataset,
}

fn require<'a>(kind: AttackKind, d: Option<&'a Dataset>, what: &str) -> Result<&'a Dataset> {
    d.ok_or_else(|| Error::MissingInput {
        kind: kind.to_string(),
        missing: what.into(),
    })
}

/// Applies a data-level attack. Generator-configuration attacks are rejected
/// here; they go through `generators::degraded_config`.
pub fn apply_attack(
    spec: &AttackSpec,
    real: Option<&Dataset>,
    synth: Option<&Dataset>,
    ranking: Option<&ImportanceRanking>,
) -> Result<StagedDataset> {
    spec.validate()?;
    let upstream = |data| StagedDataset {
        stage: DataStage::RealInput,
        data,
    };
    let post = |data| StagedDataset {
        stage: DataStage::SyntheticOutput,
        data,
    };
    match spec.kind {
        AttackKind::None => Ok(upstream(require(spec.kind, real, "real data")?.clone())),
        AttackKind::LabelFlip => Ok(upstream(label_flip(
            require(spec.kind, real, "real data")?,
            spec.ratio,
            spec.seed,
        )?)),
        AttackKind::FeatureImportance => {
            let real = require(spec.kind, real, "real data")?;
            let ranking = ranking.ok_or_else(|| Error::MissingInput {
                kind: spec.kind.to_string(),
                missing: "an importance ranking".into(),
            })?;
            let data = if spec.fia_drop {
                feature_importance_drop(real, spec.ratio, ranking)?
            } else {
                feature_importance_attack(real, spec.ratio, ranking)?
            };
            Ok(upstream(data))
        }
        AttackKind::IncorrectSource => {
            let real = require(spec.kind, real, "real data")?;
            Ok(upstream(incorrect_source(
                real.schema(),
                real.n_rows(),
                spec.seed,
            )?))
        }
        AttackKind::ScaleOutput => Ok(post(scale_output(
            require(spec.kind, synth, "synthetic data")?,
            spec.scale,
        )?)),
        AttackKind::NoiseInject => Ok(post(noise_inject(
            require(spec.kind, synth, "synthetic data")?,
            spec.sigma,
            spec.seed,
        )?)),
        AttackKind::LowEpochs | AttackKind::OversimplifiedSdg => {
            Err(Error::GeneratorConfigAttack(spec.kind.to_string()))
        }
    }
}
