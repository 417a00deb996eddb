//! The sweep: clean baseline and attacked runs for every dataset, generator
//! and seed.

use crate::attacks::{apply_attack, restore_suppressed, AttackKind, AttackSpec, AttackSurface};
use crate::downstream::{feature_importances, train, tstr, ClassifierSuite, ImportanceRanking};
use crate::error::{Error, Result};
use crate::generators::{degraded_config_for, fit, GeneratorConfig};
use crate::metrics::fidelity_report;
use crate::rng::Seed;
use crate::tabular::{train_test_split, Dataset};

use super::config::ExperimentConfig;
use super::records::{Outcome, RecordStage, RunMetrics, RunRecord};
use super::report::{aggregate, ExperimentReport};

/// Identifies one sweep cell for observers.
#[derive(Debug, Clone, PartialEq)]
pub struct CellContext {
    pub dataset: String,
    pub generator: String,
    pub seed: u64,
    pub attack: AttackKind,
    pub ratio: Option<f64>,
}

/// Taps into the pipeline. Each cell reports the generator's training input
/// and configuration, the generator's raw sample and the dataset finally
/// evaluated. Cells that reuse the baseline's fitted sample report the
/// baseline's input and sample.
pub trait PipelineObserver {
    fn generator_input(
        &mut self,
        _cell: &CellContext,
        _config: &GeneratorConfig,
        _train: &Dataset,
    ) {
    }
    fn generator_output(&mut self, _cell: &CellContext, _synth: &Dataset) {}
    fn evaluated(&mut self, _cell: &CellContext, _synth: &Dataset) {}
}

struct NoObserver;

impl PipelineObserver for NoObserver {}

/// Per-seed streams for every randomized step.
#[derive(Debug, Clone, Copy)]
struct RunSeeds {
    split: Seed,
    fit: Seed,
    sample: Seed,
    attack: Seed,
    classifiers: Seed,
}

impl RunSeeds {
    fn new(seed: u64) -> Self {
        let s = Seed(seed);
        RunSeeds {
            split: s.derive("split"),
            fit: s.derive("fit"),
            sample: s.derive("sample"),
            attack: s.derive("attack"),
            classifiers: s.derive("classifiers"),
        }
    }
}

struct Baseline {
    synth: Dataset,
    metrics: RunMetrics,
}

fn evaluate(
    train: &Dataset,
    test: &Dataset,
    synth: &Dataset,
    bins: usize,
    suite: &ClassifierSuite,
) -> Result<RunMetrics> {
    let fidelity = fidelity_report(train, synth, bins)?;
    let utility = tstr(synth, test, suite)?;
    Ok(RunMetrics {
        acc_lr: utility.acc_lr,
        acc_rf: utility.acc_rf,
        acc_mlp: utility.acc_mlp,
        wd: fidelity.wd_mean,
        ks: fidelity.ks_mean,
        kld: fidelity.kld_mean,
    })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<(Vec<RunRecord>, ExperimentReport)> {
    run_experiment_observed(config, &mut NoObserver)
}

/// `run_experiment` with pipeline taps. Dataset loading and config errors
/// abort before any run; errors inside a cell mark that cell failed.
pub fn run_experiment_observed(
    config: &ExperimentConfig,
    observer: &mut dyn PipelineObserver,
) -> Result<(Vec<RunRecord>, ExperimentReport)> {
    config.validate()?;
    let datasets = config
        .datasets
        .iter()
        .map(|d| d.load().map(|data| (d.id.clone(), data)))
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::new();
    for (id, data) in &datasets {
        for &seed in &config.seeds {
            let seeds = RunSeeds::new(seed);
            let suite = config.classifiers.reseeded(seeds.classifiers);
            let split = train_test_split(data, config.test_fraction, seeds.split);
            let needs_ranking = config
                .attacks
                .iter()
                .any(|a| a.kind == AttackKind::FeatureImportance);
            let ranking = match (&split, needs_ranking) {
                (Ok((train_set, _)), true) => Some(importance_ranking(train_set, &suite)),
                _ => None,
            };
            for generator in &config.generators {
                let run = SweepRun {
                    dataset: id,
                    seed,
                    seeds,
                    generator,
                    suite: &suite,
                    bins: config.bins,
                    synthetic_rows: config.synthetic_rows,
                };
                match &split {
                    Ok((train_set, test_set)) => run.execute(
                        train_set,
                        test_set,
                        &config.attacks,
                        ranking.as_ref(),
                        observer,
                        &mut records,
                    ),
                    Err(e) => run.fail_all(&config.attacks, &e.to_string(), &mut records),
                }
            }
        }
    }
    records.sort_by(RunRecord::sort_cmp);
    let report = aggregate(&records)?;
    Ok((records, report))
}

fn importance_ranking(
    train_set: &Dataset,
    suite: &ClassifierSuite,
) -> std::result::Result<ImportanceRanking, String> {
    train(&suite.random_forest, train_set)
        .and_then(|forest| feature_importances(&forest))
        .map_err(|e| e.to_string())
}

struct SweepRun<'a> {
    dataset: &'a str,
    seed: u64,
    seeds: RunSeeds,
    generator: &'a GeneratorConfig,
    suite: &'a ClassifierSuite,
    bins: usize,
    synthetic_rows: Option<usize>,
}

impl SweepRun<'_> {
    fn cell(&self, attack: AttackKind, ratio: Option<f64>) -> CellContext {
        CellContext {
            dataset: self.dataset.to_string(),
            generator: self.generator.family.to_string(),
            seed: self.seed,
            attack,
            ratio,
        }
    }

    fn record(&self, cell: &CellContext, outcome: Outcome) -> RunRecord {
        RunRecord {
            dataset: cell.dataset.clone(),
            generator: cell.generator.clone(),
            attack: cell.attack,
            ratio: cell.ratio,
            seed: self.seed,
            stage: if cell.attack == AttackKind::None {
                RecordStage::Baseline
            } else {
                RecordStage::Attacked
            },
            outcome,
        }
    }

    fn fit_config(&self, base: &GeneratorConfig) -> GeneratorConfig {
        GeneratorConfig {
            seed: self.seeds.fit.derive_index(base.seed.value()),
            ..base.clone()
        }
    }

    /// Fits `config` on `input` and samples.
    fn generate(
        &self,
        cell: &CellContext,
        config: &GeneratorConfig,
        input: &Dataset,
        observer: &mut dyn PipelineObserver,
    ) -> Result<Dataset> {
        observer.generator_input(cell, config, input);
        let model = fit(config, input)?;
        let m = self.synthetic_rows.unwrap_or(input.n_rows());
        let synth = model.sample(m, self.seeds.sample)?;
        observer.generator_output(cell, &synth);
        Ok(synth)
    }

    fn fail_all(&self, attacks: &[AttackSpec], reason: &str, records: &mut Vec<RunRecord>) {
        records.push(self.record(
            &self.cell(AttackKind::None, None),
            Outcome::Failed(reason.to_string()),
        ));
        for spec in attacks.iter().filter(|a| a.kind != AttackKind::None) {
            let cell = self.cell(spec.kind, spec.kind.uses_ratio().then_some(spec.ratio));
            records.push(self.record(
                &cell,
                Outcome::Failed(format!("baseline unavailable: {reason}")),
            ));
        }
    }

    fn execute(
        &self,
        train_set: &Dataset,
        test_set: &Dataset,
        attacks: &[AttackSpec],
        ranking: Option<&std::result::Result<ImportanceRanking, String>>,
        observer: &mut dyn PipelineObserver,
        records: &mut Vec<RunRecord>,
    ) {
        let base_config = self.fit_config(self.generator);
        let base_cell = self.cell(AttackKind::None, None);
        let baseline = self
            .generate(&base_cell, &base_config, train_set, observer)
            .and_then(|synth| {
                observer.evaluated(&base_cell, &synth);
                let metrics = evaluate(train_set, test_set, &synth, self.bins, self.suite)?;
                Ok(Baseline { synth, metrics })
            });
        let baseline = match baseline {
            Ok(b) => {
                records.push(self.record(&base_cell, Outcome::Completed(b.metrics)));
                b
            }
            Err(e) => return self.fail_all(attacks, &e.to_string(), records),
        };

        for spec in attacks.iter().filter(|a| a.kind != AttackKind::None) {
            let cell = self.cell(spec.kind, spec.kind.uses_ratio().then_some(spec.ratio));
            let spec = AttackSpec {
                seed: self.seeds.attack.derive_index(spec.seed.value()),
                ..spec.clone()
            };
            let outcome = self
                .attacked_synth(
                    &cell,
                    &spec,
                    &base_config,
                    train_set,
                    &baseline,
                    ranking,
                    observer,
                )
                .and_then(|synth| {
                    observer.evaluated(&cell, &synth);
                    evaluate(train_set, test_set, &synth, self.bins, self.suite)
                });
            let outcome = match outcome {
                Ok(m) => Outcome::Completed(m),
                Err(e) => Outcome::Failed(e.to_string()),
            };
            records.push(self.record(&cell, outcome));
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn attacked_synth(
        &self,
        cell: &CellContext,
        spec: &AttackSpec,
        base_config: &GeneratorConfig,
        train_set: &Dataset,
        baseline: &Baseline,
        ranking: Option<&std::result::Result<ImportanceRanking, String>>,
        observer: &mut dyn PipelineObserver,
    ) -> Result<Dataset> {
        match spec.kind.surface() {
            Some(AttackSurface::Upstream) => {
                let ranking = match ranking {
                    Some(Ok(r)) => Some(r),
                    Some(Err(e)) => {
                        return Err(Error::Degenerate(format!("importance ranking failed: {e}")))
                    }
                    None => None,
                };
                let poisoned = apply_attack(spec, Some(train_set), None, ranking)?.data;
                let synth = self.generate(cell, base_config, &poisoned, observer)?;
                if poisoned.schema() != train_set.schema() {
                    restore_suppressed(&synth, train_set)
                } else {
                    Ok(synth)
                }
            }
            Some(AttackSurface::InProcessing) => {
                let degraded = degraded_config_for(base_config, spec)?;
                self.generate(cell, &degraded, train_set, observer)
            }
            Some(AttackSurface::PostGeneration) => {
                observer.generator_input(cell, base_config, train_set);
                observer.generator_output(cell, &baseline.synth);
                Ok(apply_attack(spec, None, Some(&baseline.synth), None)?.data)
            }
            None => Ok(baseline.synth.clone()),
        }
    }
}
