//! Experiment configuration file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::attacks::{AttackKind, AttackSpec};
use crate::downstream::{ClassifierConfig, ClassifierKind, ClassifierSuite};
use crate::error::{Error, Result};
use crate::generators::GeneratorConfig;
use crate::metrics::DEFAULT_BINS;
use crate::rng::Seed;
use crate::tabular::{load_csv_with_schema, Dataset, Schema};

use super::fixtures::{default_rows, fixture};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "SDGATTACK_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    /// Identifier used in run records; defaults to the fixture name or file stem.
    pub name: Option<String>,
    pub fixture: Option<String>,
    pub rows: Option<usize>,
    #[serde(default)]
    pub fixture_seed: u64,
    pub path: Option<PathBuf>,
    /// Schema file for `path`.
    pub schema: Option<PathBuf>,
}

/// A dataset source with paths already resolved.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Fixture {
        name: String,
        rows: usize,
        seed: Seed,
    },
    File {
        path: PathBuf,
        schema: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedDataset {
    pub id: String,
    pub source: DatasetSource,
}

impl NamedDataset {
    pub fn fixture(name: &str) -> Self {
        NamedDataset {
            id: name.to_string(),
            source: DatasetSource::Fixture {
                name: name.to_string(),
                rows: default_rows(name).unwrap_or(1000),
                seed: Seed(0),
            },
        }
    }

    pub fn load(&self) -> Result<Dataset> {
        match &self.source {
            DatasetSource::Fixture { name, rows, seed } => fixture(name, *rows, *seed),
            DatasetSource::File { path, schema } => {
                load_csv_with_schema(path, &Schema::load(schema)?)
            }
        }
    }
}

/// One `[[attack]]` table. `ratios` expands into one spec per ratio.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackEntry {
    pub kind: AttackKind,
    pub ratio: Option<f64>,
    pub ratios: Option<Vec<f64>>,
    pub scale: Option<f64>,
    pub sigma: Option<f64>,
    pub epochs: Option<usize>,
    pub components: Option<usize>,
    pub seed: Option<u64>,
    pub budget: Option<f64>,
    pub fia_drop: Option<bool>,
}

impl AttackEntry {
    pub fn expand(&self) -> Result<Vec<AttackSpec>> {
        let d = AttackSpec::default();
        let base = AttackSpec {
            kind: self.kind,
            ratio: d.ratio,
            scale: self.scale.unwrap_or(d.scale),
            sigma: self.sigma.unwrap_or(d.sigma),
            epochs: self.epochs.unwrap_or(d.epochs),
            components: self.components.unwrap_or(d.components),
            seed: self.seed.map_or(d.seed, Seed),
            budget: self.budget,
            fia_drop: self.fia_drop.unwrap_or(d.fia_drop),
        };
        let ratios = match (&self.ratio, &self.ratios) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(format!(
                    "attack {}: give ratio or ratios, not both",
                    self.kind
                )))
            }
            (Some(r), None) => vec![*r],
            (None, Some(rs)) => rs.clone(),
            (None, None) if self.kind.uses_ratio() => {
                return Err(Error::Config(format!(
                    "attack {} needs ratio or ratios",
                    self.kind
                )))
            }
            (None, None) => vec![base.ratio],
        };
        if ratios.is_empty() {
            return Err(Error::Config(format!(
                "attack {}: empty ratio list",
                self.kind
            )));
        }
        if !self.kind.uses_ratio() && (self.ratio.is_some() || self.ratios.is_some()) {
            return Err(Error::Config(format!(
                "attack {} takes no ratio",
                self.kind
            )));
        }
        ratios
            .into_iter()
            .map(|ratio| {
                let spec = AttackSpec {
                    ratio,
                    ..base.clone()
                };
                spec.validate().map_err(|e| Error::Config(e.to_string()))?;
                Ok(spec)
            })
            .collect()
    }
}

/// Per-field overrides applied on top of a classifier's defaults.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierOverrides {
    pub learning_rate: Option<f64>,
    pub iterations: Option<usize>,
    pub hidden_units: Option<usize>,
    pub trees: Option<usize>,
    pub max_depth: Option<usize>,
    pub unlimited_depth: Option<bool>,
    pub bootstrap: Option<bool>,
    pub l2: Option<f64>,
    pub seed: Option<u64>,
}

impl ClassifierOverrides {
    fn apply(&self, kind: ClassifierKind) -> ClassifierConfig {
        let mut c = ClassifierConfig::default_for(kind);
        if let Some(v) = self.learning_rate {
            c.learning_rate = v;
        }
        if let Some(v) = self.iterations {
            c.iterations = v;
        }
        if let Some(v) = self.hidden_units {
            c.hidden_units = v;
        }
        if let Some(v) = self.trees {
            c.trees = v;
        }
        if let Some(v) = self.max_depth {
            c.max_depth = Some(v);
        }
        if self.unlimited_depth == Some(true) {
            c.max_depth = None;
        }
        if let Some(v) = self.bootstrap {
            c.bootstrap = v;
        }
        if let Some(v) = self.l2 {
            c.l2 = v;
        }
        if let Some(v) = self.seed {
            c.seed = Seed(v);
        }
        c
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierSection {
    #[serde(default)]
    pub logreg: ClassifierOverrides,
    #[serde(default)]
    pub random_forest: ClassifierOverrides,
    #[serde(default)]
    pub mlp: ClassifierOverrides,
}

impl ClassifierSection {
    pub fn resolve(&self) -> ClassifierSuite {
        ClassifierSuite {
            logreg: self.logreg.apply(ClassifierKind::Logreg),
            random_forest: self.random_forest.apply(ClassifierKind::RandomForest),
            mlp: self.mlp.apply(ClassifierKind::Mlp),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Markdown,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<ReportFormat>,
}

fn default_formats() -> Vec<ReportFormat> {
    vec![ReportFormat::Markdown, ReportFormat::Csv]
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: None,
            formats: default_formats(),
        }
    }
}

fn default_test_fraction() -> f64 {
    0.2
}

fn default_bins() -> usize {
    DEFAULT_BINS
}

/// The file as written.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "dataset")]
    datasets: Vec<DatasetEntry>,
    #[serde(default = "default_test_fraction")]
    test_fraction: f64,
    seeds: Vec<u64>,
    synthetic_rows: Option<usize>,
    #[serde(default = "default_bins")]
    bins: usize,
    #[serde(rename = "generator")]
    generators: Vec<GeneratorConfig>,
    #[serde(rename = "attack", default)]
    attacks: Vec<AttackEntry>,
    #[serde(default)]
    classifiers: ClassifierSection,
    #[serde(default)]
    output: OutputSection,
}

/// A validated sweep: datasets × generators × seeds, each run clean and
/// under every attack.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub datasets: Vec<NamedDataset>,
    pub test_fraction: f64,
    pub seeds: Vec<u64>,
    /// Synthetic rows per run; `None` matches the training split size.
    pub synthetic_rows: Option<usize>,
    pub bins: usize,
    pub generators: Vec<GeneratorConfig>,
    pub attacks: Vec<AttackSpec>,
    pub classifiers: ClassifierSuite,
    pub output: OutputSection,
}

impl ExperimentConfig {
    /// A single-dataset sweep with default classifiers and output settings.
    pub fn new(
        dataset: NamedDataset,
        generators: Vec<GeneratorConfig>,
        attacks: Vec<AttackSpec>,
        seeds: Vec<u64>,
    ) -> Self {
        ExperimentConfig {
            datasets: vec![dataset],
            test_fraction: default_test_fraction(),
            seeds,
            synthetic_rows: None,
            bins: DEFAULT_BINS,
            generators,
            attacks,
            classifiers: ClassifierSuite::default(),
            output: OutputSection::default(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parses a config; relative dataset paths resolve against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let datasets = raw
            .datasets
            .iter()
            .map(|d| resolve_dataset(d, base_dir))
            .collect::<Result<Vec<_>>>()?;
        let attacks = raw
            .attacks
            .iter()
            .map(AttackEntry::expand)
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        let config = ExperimentConfig {
            datasets,
            test_fraction: raw.test_fraction,
            seeds: raw.seeds,
            synthetic_rows: raw.synthetic_rows,
            bins: raw.bins,
            generators: raw.generators,
            attacks,
            classifiers: raw.classifiers.resolve(),
            output: OutputSection {
                dir: raw
                    .output
                    .dir
                    .map(|d| if d.is_relative() { base_dir.join(d) } else { d }),
                formats: raw.output.formats,
            },
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.datasets.is_empty() {
            return fail("at least one [[dataset]] is required".into());
        }
        if self.generators.is_empty() {
            return fail("at least one [[generator]] is required".into());
        }
        if self.seeds.is_empty() {
            return fail("seeds must list at least one seed".into());
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return fail(format!(
                "test_fraction {} outside (0, 1)",
                self.test_fraction
            ));
        }
        if self.synthetic_rows == Some(0) {
            return fail("synthetic_rows must be >= 1".into());
        }
        if self.bins < 2 {
            return fail("bins must be >= 2".into());
        }
        let mut ids: Vec<&str> = self.datasets.iter().map(|d| d.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return fail("dataset names must be unique".into());
        }
        let mut families: Vec<_> = self.generators.iter().map(|g| g.family).collect();
        families.sort_unstable();
        if families.windows(2).any(|w| w[0] == w[1]) {
            return fail("each generator family may appear once".into());
        }
        for g in &self.generators {
            g.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        let mut cells = Vec::new();
        for a in &self.attacks {
            a.validate().map_err(|e| Error::Config(e.to_string()))?;
            let key = (a.kind, a.kind.uses_ratio().then_some(a.ratio.to_bits()));
            if cells.contains(&key) {
                return fail(format!(
                    "attack {} listed twice with the same ratio",
                    a.kind
                ));
            }
            cells.push(key);
        }
        for c in [
            &self.classifiers.logreg,
            &self.classifiers.random_forest,
            &self.classifiers.mlp,
        ] {
            c.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Output directory: explicit override, then the config file, then the
    /// environment, then `reports`.
    pub fn output_dir(&self, cli_override: Option<&Path>) -> PathBuf {
        cli_override
            .map(Path::to_path_buf)
            .or_else(|| self.output.dir.clone())
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("reports"))
    }
}

fn resolve_dataset(d: &DatasetEntry, base_dir: &Path) -> Result<NamedDataset> {
    let resolve = |p: &Path| {
        if p.is_relative() {
            base_dir.join(p)
        } else {
            p.to_path_buf()
        }
    };
    match (&d.fixture, &d.path) {
        (Some(name), None) => {
            if d.schema.is_some() {
                return Err(Error::Config(format!(
                    "fixture {name:?} takes no schema file"
                )));
            }
            let rows = match d.rows {
                Some(r) => r,
                None => default_rows(name)
                    .ok_or_else(|| Error::Config(format!("unknown fixture {name:?}")))?,
            };
            Ok(NamedDataset {
                id: d.name.clone().unwrap_or_else(|| name.clone()),
                source: DatasetSource::Fixture {
                    name: name.clone(),
                    rows,
                    seed: Seed(d.fixture_seed),
                },
            })
        }
        (None, Some(path)) => {
            let schema = d.schema.as_ref().ok_or_else(|| {
                Error::Config(format!("dataset {} needs a schema file", path.display()))
            })?;
            let id = d.name.clone().unwrap_or_else(|| {
                path.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "dataset".into())
            });
            Ok(NamedDataset {
                id,
                source: DatasetSource::File {
                    path: resolve(path),
                    schema: resolve(schema),
                },
            })
        }
        _ => Err(Error::Config(
            "each [[dataset]] needs exactly one of fixture or path".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::GeneratorFamily;

    const SAMPLE: &str = r#"
seeds = [1, 2]
synthetic_rows = 500

[[dataset]]
fixture = "blobs"
rows = 300

[[generator]]
family = "gmm"
components = 5

[[generator]]
family = "histogram"

[[attack]]
kind = "label_flip"
ratios = [0.1, 0.3]

[[attack]]
kind = "noise_inject"
sigma = 5.0

[classifiers.mlp]
iterations = 50
"#;

    #[test]
    fn parses_and_expands() {
        let c = ExperimentConfig::from_toml(SAMPLE, Path::new(".")).unwrap();
        assert_eq!(c.datasets[0].id, "blobs");
        assert_eq!(c.generators[0].components, 5);
        assert_eq!(c.generators[1].family, GeneratorFamily::Histogram);
        assert_eq!(c.attacks.len(), 3);
        assert_eq!(c.attacks[1].ratio, 0.3);
        assert_eq!(c.attacks[2].sigma, 5.0);
        assert_eq!(c.classifiers.mlp.iterations, 50);
        assert_eq!(c.classifiers.mlp.hidden_units, 32);
        assert_eq!(c.test_fraction, 0.2);
    }

    #[test]
    fn rejects_bad_configs() {
        let no_seeds = SAMPLE.replace("seeds = [1, 2]", "seeds = []");
        assert!(ExperimentConfig::from_toml(&no_seeds, Path::new(".")).is_err());
        let bad_ratio = SAMPLE.replace("[0.1, 0.3]", "[0.1, 1.3]");
        assert!(ExperimentConfig::from_toml(&bad_ratio, Path::new(".")).is_err());
        let unknown = SAMPLE.replace("synthetic_rows", "synth_rows");
        assert!(ExperimentConfig::from_toml(&unknown, Path::new(".")).is_err());
        let no_ratio = SAMPLE.replace("ratios = [0.1, 0.3]", "");
        assert!(ExperimentConfig::from_toml(&no_ratio, Path::new(".")).is_err());
    }

    #[test]
    fn output_dir_precedence() {
        let mut c = ExperimentConfig::from_toml(SAMPLE, Path::new(".")).unwrap();
        assert_eq!(c.output_dir(Some(Path::new("cli"))), PathBuf::from("cli"));
        c.output.dir = Some(PathBuf::from("cfg"));
        assert_eq!(c.output_dir(None), PathBuf::from("cfg"));
    }
}
