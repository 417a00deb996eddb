//! Downstream classifiers, the train-on-synthetic/test-on-real protocol and
//! forest-based feature-importance ranking.

mod encode;
mod forest;
mod linear;
mod mlp;
mod optim;

pub use encode::{encode_features, EncodingMap, FeatureEncoding, FeatureMatrix};
pub use forest::{Forest, ForestParams, Tree};
pub use linear::{logistic_objective, LogisticModel};
pub use mlp::{mlp_objective, MlpModel};
pub use optim::{argmax, descend, softmax};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::tabular::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Logreg,
    RandomForest,
    Mlp,
}

impl ClassifierKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Logreg => "logreg",
            ClassifierKind::RandomForest => "random_forest",
            ClassifierKind::Mlp => "mlp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    pub learning_rate: f64,
    pub iterations: usize,
    pub hidden_units: usize,
    pub trees: usize,
    /// Absent means unlimited depth.
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub l2: f64,
    pub seed: Seed,
}

impl ClassifierConfig {
    pub fn logreg() -> Self {
        ClassifierConfig {
            kind: ClassifierKind::Logreg,
            learning_rate: 0.1,
            iterations: 500,
            hidden_units: 0,
            trees: 0,
            max_depth: None,
            bootstrap: false,
            l2: 1e-4,
            seed: Seed(0),
        }
    }

    pub fn mlp() -> Self {
        ClassifierConfig {
            kind: ClassifierKind::Mlp,
            learning_rate: 0.05,
            iterations: 800,
            hidden_units: 32,
            l2: 1e-4,
            ..ClassifierConfig::logreg()
        }
    }

    pub fn random_forest() -> Self {
        ClassifierConfig {
            kind: ClassifierKind::RandomForest,
            trees: 100,
            max_depth: Some(12),
            bootstrap: true,
            l2: 0.0,
            ..ClassifierConfig::logreg()
        }
    }

    pub fn default_for(kind: ClassifierKind) -> Self {
        match kind {
            ClassifierKind::Logreg => Self::logreg(),
            ClassifierKind::RandomForest => Self::random_forest(),
            ClassifierKind::Mlp => Self::mlp(),
        }
    }

    pub fn with_seed(mut self, seed: Seed) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| {
            Err(Error::InvalidParameter(format!(
                "{}: {m}",
                self.kind.as_str()
            )))
        };
        match self.kind {
            ClassifierKind::Logreg | ClassifierKind::Mlp => {
                if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
                    return bad("learning_rate must be finite and positive");
                }
                if self.iterations == 0 {
                    return bad("iterations must be positive");
                }
                if !(self.l2 >= 0.0 && self.l2.is_finite()) {
                    return bad("l2 must be non-negative");
                }
                if self.kind == ClassifierKind::Mlp && self.hidden_units == 0 {
                    return bad("hidden_units must be positive");
                }
            }
            ClassifierKind::RandomForest => {
                if self.trees == 0 {
                    return bad("trees must be positive");
                }
                if self.max_depth == Some(0) {
                    return bad("max_depth must be positive");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Logistic(LogisticModel),
    Mlp(MlpModel),
    Forest(Forest),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedClassifier {
    pub kind: ClassifierKind,
    pub encoding: EncodingMap,
    pub model: FittedModel,
    pub classes: Vec<String>,
    /// Training loss after every accepted descent step (gradient models only).
    pub loss_history: Vec<f64>,
}

impl TrainedClassifier {
    fn encoded(&self, d: &Dataset) -> Result<FeatureMatrix> {
        Ok(self.encoding.transform(d)?.0)
    }

    pub fn predict_encoded(&self, x: &[f64]) -> u32 {
        match &self.model {
            FittedModel::Logistic(m) => m.predict_row(x),
            FittedModel::Mlp(m) => m.predict_row(x),
            FittedModel::Forest(f) => f.predict_row(x),
        }
    }

    pub fn proba_encoded(&self, x: &[f64]) -> Vec<f64> {
        match &self.model {
            FittedModel::Logistic(m) => m.proba(x),
            FittedModel::Mlp(m) => m.proba(x),
            FittedModel::Forest(f) => f.vote_share(x),
        }
    }
}

fn classes_present(y: &[u32], n_classes: usize) -> usize {
    let mut seen = vec![false; n_classes];
    for &c in y {
        seen[c as usize] = true;
    }
    seen.into_iter().filter(|&s| s).count()
}

pub fn train(config: &ClassifierConfig, d: &Dataset) -> Result<TrainedClassifier> {
    config.validate()?;
    let (x, y, encoding) = encode_features(d);
    let k = d.n_classes();
    if classes_present(&y, k) < 2 {
        return Err(Error::Degenerate(format!(
            "training data for {} contains fewer than two classes",
            config.kind.as_str()
        )));
    }
    let (model, loss_history) = match config.kind {
        ClassifierKind::Logreg => {
            let mut params = vec![0.0; (x.cols + 1) * k];
            let hist = descend(
                &mut params,
                |p| logistic_objective(p, &x, &y, k, config.l2),
                config.learning_rate,
                config.iterations,
            );
            (
                FittedModel::Logistic(LogisticModel::from_params(x.cols, k, params)),
                hist,
            )
        }
        ClassifierKind::Mlp => {
            let mut m = MlpModel::init(x.cols, config.hidden_units, k, config.seed);
            let hist = descend(
                &mut m.params,
                |p| mlp_objective(p, &x, &y, config.hidden_units, k, config.l2),
                config.learning_rate,
                config.iterations,
            );
            (FittedModel::Mlp(m), hist)
        }
        ClassifierKind::RandomForest => {
            let params = ForestParams {
                trees: config.trees,
                max_depth: config.max_depth,
                bootstrap: config.bootstrap,
                seed: config.seed,
            };
            (
                FittedModel::Forest(Forest::fit(&x, &y, k, &params)),
                Vec::new(),
            )
        }
    };
    Ok(TrainedClassifier {
        kind: config.kind,
        encoding,
        model,
        classes: d.schema().target().categories.clone(),
        loss_history,
    })
}

pub fn predict(model: &TrainedClassifier, d: &Dataset) -> Result<Vec<u32>> {
    let x = model.encoded(d)?;
    Ok((0..x.rows)
        .map(|i| model.predict_encoded(x.row(i)))
        .collect())
}

/// Class probabilities per row (vote shares for forests).
pub fn predict_proba(model: &TrainedClassifier, d: &Dataset) -> Result<Vec<Vec<f64>>> {
    let x = model.encoded(d)?;
    Ok((0..x.rows).map(|i| model.proba_encoded(x.row(i))).collect())
}

pub fn accuracy(predictions: &[u32], truth: &[u32]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::InvalidParameter(format!(
            "prediction length {} differs from truth length {}",
            predictions.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::InvalidParameter(
            "accuracy of an empty vector".into(),
        ));
    }
    let hits = predictions
        .iter()
        .zip(truth)
        .filter(|(p, t)| p == t)
        .count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Feature importance weights, descending, one entry per non-target column.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceRanking {
    entries: Vec<(String, f64)>,
}

impl ImportanceRanking {
    /// Sorts descending; equal weights keep the given order.
    pub fn new(mut entries: Vec<(String, f64)>) -> Result<Self> {
        if entries.iter().any(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter(
                "importance weights must be finite and >= 0".into(),
            ));
        }
        entries.sort_by(|a, b| b.1.total_cmp(&a.1));
        Ok(ImportanceRanking { entries })
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn weight(&self, name: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, w)| *w)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Mean decrease in Gini impurity per source column (one-hot parts summed),
/// normalized to sum to 1. A forest without any split ranks all columns
/// equally.
pub fn feature_importances(model: &TrainedClassifier) -> Result<ImportanceRanking> {
    let FittedModel::Forest(forest) = &model.model else {
        return Err(Error::InvalidParameter(format!(
            "feature importances need a random forest, got {}",
            model.kind.as_str()
        )));
    };
    let schema = model.encoding.schema();
    let features = schema.feature_indices();
    let mut by_column = vec![0.0; schema.len()];
    for (src, &imp) in model
        .encoding
        .source_columns()
        .iter()
        .zip(forest.encoded_importances())
    {
        by_column[*src] += imp;
    }
    let total: f64 = features.iter().map(|&c| by_column[c]).sum();
    let entries = features
        .iter()
        .map(|&c| {
            let w = if total > 0.0 {
                by_column[c] / total
            } else {
                1.0 / features.len() as f64
            };
            (schema.column(c).name.clone(), w)
        })
        .collect();
    ImportanceRanking::new(entries)
}

/// Classifier settings for the three TSTR models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSuite {
    pub logreg: ClassifierConfig,
    pub random_forest: ClassifierConfig,
    pub mlp: ClassifierConfig,
}

impl Default for ClassifierSuite {
    fn default() -> Self {
        ClassifierSuite {
            logreg: ClassifierConfig::logreg(),
            random_forest: ClassifierConfig::random_forest(),
            mlp: ClassifierConfig::mlp(),
        }
    }
}

impl ClassifierSuite {
    /// Same suite with every model's seed derived from `seed`.
    pub fn reseeded(&self, seed: Seed) -> Self {
        ClassifierSuite {
            logreg: self.logreg.clone().with_seed(seed.derive("logreg")),
            random_forest: self
                .random_forest
                .clone()
                .with_seed(seed.derive("random_forest")),
            mlp: self.mlp.clone().with_seed(seed.derive("mlp")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityReport {
    pub acc_lr: f64,
    pub acc_rf: f64,
    pub acc_mlp: f64,
}

/// Trains each classifier on `synth` and scores it on `real_test`.
pub fn tstr(
    synth: &Dataset,
    real_test: &Dataset,
    suite: &ClassifierSuite,
) -> Result<UtilityReport> {
    if synth.schema() != real_test.schema() {
        return Err(Error::SchemaMismatch(
            "synthetic and real test data have different schemas".into(),
        ));
    }
    let truth = real_test.target_values();
    let score = |config: &ClassifierConfig| -> Result<f64> {
        let model = train(config, synth)?;
        accuracy(&predict(&model, real_test)?, truth)
    };
    Ok(UtilityReport {
        acc_lr: score(&suite.logreg)?,
        acc_rf: score(&suite.random_forest)?,
        acc_mlp: score(&suite.mlp)?,
    })
}
