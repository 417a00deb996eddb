//! Python bindings: datasets, attacks, generators, metrics, downstream
//! utility and the experiment runner.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use sdgattack::attacks::{apply_attack, AttackKind, AttackSpec};
use sdgattack::downstream::{feature_importances, train, tstr, ClassifierConfig, ClassifierSuite};
use sdgattack::experiment::{fixtures, ExperimentConfig, Outcome, RunRecord};
use sdgattack::generators::{GeneratorConfig, GeneratorFamily, GeneratorModel};
use sdgattack::metrics;
use sdgattack::tabular::{self, ColumnData, Schema};
use sdgattack::Seed;

fn py_err(e: sdgattack::Error) -> PyErr {
    match e {
        sdgattack::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn or_py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for sdgattack::Result<T> {
    fn or_py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// A typed table with one categorical target column.
#[pyclass(name = "Dataset", module = "sdgattack", frozen)]
struct PyDataset {
    inner: tabular::Dataset,
}

#[pymethods]
impl PyDataset {
    /// Loads a CSV. Pass a schema TOML file, or let the column kinds be
    /// inferred and name the target.
    #[staticmethod]
    #[pyo3(signature = (path, schema=None, target=None, max_categories=20))]
    fn load_csv(
        path: PathBuf,
        schema: Option<PathBuf>,
        target: Option<&str>,
        max_categories: usize,
    ) -> PyResult<Self> {
        let inner = match (schema, target) {
            (Some(schema), _) => {
                tabular::load_csv_with_schema(&path, &Schema::load(schema).or_py()?).or_py()?
            }
            (None, Some(target)) => {
                let columns = tabular::infer_schema(&path, max_categories).or_py()?;
                tabular::load_csv(&path, &columns, target).or_py()?
            }
            (None, None) => {
                return Err(PyValueError::new_err("either schema or target is required"))
            }
        };
        Ok(PyDataset { inner })
    }

    /// One of the bundled synthetic fixtures.
    #[staticmethod]
    #[pyo3(signature = (name, rows=None, seed=0))]
    fn fixture(name: &str, rows: Option<usize>, seed: u64) -> PyResult<Self> {
        let rows = rows
            .or_else(|| fixtures::default_rows(name))
            .ok_or_else(|| PyValueError::new_err(format!("unknown fixture {name:?}")))?;
        Ok(PyDataset {
            inner: fixtures::fixture(name, rows, Seed(seed)).or_py()?,
        })
    }

    fn save_csv(&self, path: PathBuf) -> PyResult<()> {
        tabular::save_csv(&self.inner, path).or_py()
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        tabular::write_csv(&self.inner, &mut buf).or_py()?;
        String::from_utf8(buf).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn schema_toml(&self) -> String {
        self.inner.schema().to_toml()
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    #[getter]
    fn columns(&self) -> Vec<String> {
        self.inner.schema().names().map(str::to_owned).collect()
    }

    #[getter]
    fn target(&self) -> String {
        self.inner.target_name().to_owned()
    }

    /// Continuous columns come back as floats, categorical ones as labels.
    fn column<'py>(&self, py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyAny>> {
        let idx = self.inner.schema().index_of(name).or_py()?;
        match self.inner.column(idx) {
            ColumnData::Continuous(v) => Ok(v.clone().into_pyobject(py)?.into_any()),
            ColumnData::Categorical(codes) => {
                let labels = &self.inner.schema().column(idx).categories;
                let out: Vec<&str> = codes.iter().map(|&c| labels[c as usize].as_str()).collect();
                Ok(out.into_pyobject(py)?.into_any())
            }
        }
    }

    #[pyo3(signature = (test_fraction=0.2, seed=0))]
    fn split(&self, test_fraction: f64, seed: u64) -> PyResult<(PyDataset, PyDataset)> {
        let (train, test) =
            tabular::train_test_split(&self.inner, test_fraction, Seed(seed)).or_py()?;
        Ok((PyDataset { inner: train }, PyDataset { inner: test }))
    }

    fn __len__(&self) -> usize {
        self.inner.n_rows()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(rows={}, columns={}, target={:?})",
            self.inner.n_rows(),
            self.inner.n_cols(),
            self.inner.target_name()
        )
    }
}

/// A fitted generator.
#[pyclass(name = "Generator", module = "sdgattack", frozen)]
struct PyGenerator {
    inner: GeneratorModel,
}

#[pymethods]
impl PyGenerator {
    #[staticmethod]
    #[pyo3(signature = (data, family="gmm", components=20, max_epochs=100, bins=20, seed=0))]
    fn fit(
        data: &PyDataset,
        family: &str,
        components: usize,
        max_epochs: usize,
        bins: usize,
        seed: u64,
    ) -> PyResult<Self> {
        let family: GeneratorFamily = family.parse().or_py()?;
        let config = GeneratorConfig {
            components,
            max_epochs,
            bins,
            seed: Seed(seed),
            ..GeneratorConfig::new(family)
        };
        Ok(PyGenerator {
            inner: GeneratorModel::fit(&config, &data.inner).or_py()?,
        })
    }

    #[pyo3(signature = (rows, seed=0))]
    fn sample(&self, rows: usize, seed: u64) -> PyResult<PyDataset> {
        Ok(PyDataset {
            inner: self.inner.sample(rows, Seed(seed)).or_py()?,
        })
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.family().as_str()
    }

    /// Log-likelihood trace of the mixture fit; `None` for other families.
    #[getter]
    fn fit_log(&self) -> Option<Vec<f64>> {
        self.inner.fit_log().map(<[f64]>::to_vec)
    }

    fn marginal_cdf(&self, column: &str, x: f64) -> PyResult<f64> {
        self.inner.marginal_cdf(column, x).or_py()
    }
}

/// Applies a data-level attack. Label flipping, feature suppression and
/// source substitution act on `real`; scaling and noise act on `synth`.
#[pyfunction]
#[pyo3(signature = (kind, real=None, synth=None, ratio=None, scale=None, sigma=None, seed=0))]
#[allow(clippy::too_many_arguments)]
fn attack(
    kind: &str,
    real: Option<&PyDataset>,
    synth: Option<&PyDataset>,
    ratio: Option<f64>,
    scale: Option<f64>,
    sigma: Option<f64>,
    seed: u64,
) -> PyResult<PyDataset> {
    let kind: AttackKind = kind.parse().or_py()?;
    let mut spec = AttackSpec::new(kind).with_seed(Seed(seed));
    if let Some(r) = ratio {
        spec = spec.with_ratio(r);
    }
    if let Some(s) = scale {
        spec.scale = s;
    }
    if let Some(s) = sigma {
        spec.sigma = s;
    }
    let real = real.map(|d| &d.inner);
    let ranking = match (kind, real) {
        (AttackKind::FeatureImportance, Some(d)) => {
            let config = ClassifierConfig::random_forest().with_seed(Seed(seed).derive("ranking"));
            Some(feature_importances(&train(&config, d).or_py()?).or_py()?)
        }
        _ => None,
    };
    let staged = apply_attack(&spec, real, synth.map(|d| &d.inner), ranking.as_ref()).or_py()?;
    Ok(PyDataset { inner: staged.data })
}

/// Per-column distances and their means, keyed by `wd`, `ks` and `kld`.
#[pyfunction]
#[pyo3(signature = (real, synth, bins=metrics::DEFAULT_BINS))]
fn fidelity(real: &PyDataset, synth: &PyDataset, bins: usize) -> PyResult<BTreeMap<String, f64>> {
    let report = metrics::fidelity_report(&real.inner, &synth.inner, bins).or_py()?;
    let mut out = BTreeMap::from([
        ("wd".to_owned(), report.wd_mean),
        ("ks".to_owned(), report.ks_mean),
        ("kld".to_owned(), report.kld_mean),
    ]);
    for e in &report.entries {
        out.insert(format!("{}.{}", e.column, e.metric.as_str()), e.value);
    }
    Ok(out)
}

/// Train on `synth`, score on `real_test`.
#[pyfunction]
#[pyo3(signature = (synth, real_test, seed=0))]
fn utility(synth: &PyDataset, real_test: &PyDataset, seed: u64) -> PyResult<BTreeMap<String, f64>> {
    let suite = ClassifierSuite::default().reseeded(Seed(seed));
    let r = tstr(&synth.inner, &real_test.inner, &suite).or_py()?;
    Ok(BTreeMap::from([
        ("acc_lr".to_owned(), r.acc_lr),
        ("acc_rf".to_owned(), r.acc_rf),
        ("acc_mlp".to_owned(), r.acc_mlp),
    ]))
}

#[pyfunction]
fn wasserstein(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    metrics::wasserstein_1d(&a, &b).or_py()
}

#[pyfunction]
fn ks(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    metrics::ks_statistic(&a, &b).or_py()
}

#[pyfunction]
#[pyo3(signature = (real, synth, bins=metrics::DEFAULT_BINS))]
fn kl(real: Vec<f64>, synth: Vec<f64>, bins: usize) -> PyResult<f64> {
    metrics::kl_divergence_continuous(&real, &synth, bins).or_py()
}

type RecordDict = BTreeMap<String, Option<String>>;

fn record_dict(r: &RunRecord) -> RecordDict {
    let mut out = BTreeMap::from([
        ("dataset".to_owned(), Some(r.dataset.clone())),
        ("generator".to_owned(), Some(r.generator.clone())),
        ("attack".to_owned(), Some(r.attack.as_str().to_owned())),
        ("ratio".to_owned(), r.ratio.map(tabular::format_real)),
        ("seed".to_owned(), Some(r.seed.to_string())),
        ("stage".to_owned(), Some(r.stage.as_str().to_owned())),
    ]);
    match &r.outcome {
        Outcome::Completed(m) => {
            let names = ["acc_lr", "acc_rf", "acc_mlp", "wd", "ks", "kld"];
            for (name, v) in names.iter().zip(m.as_array()) {
                out.insert((*name).to_owned(), Some(tabular::format_real(v)));
            }
        }
        Outcome::Failed(reason) => {
            out.insert("error".to_owned(), Some(reason.clone()));
        }
    }
    out
}

/// Runs an experiment config and writes its outputs. Returns the output
/// directory and the per-run records as string dicts.
#[pyfunction]
#[pyo3(signature = (config_path, out_dir=None))]
fn run_experiment(
    py: Python<'_>,
    config_path: PathBuf,
    out_dir: Option<PathBuf>,
) -> PyResult<(PathBuf, Vec<RecordDict>)> {
    let config = ExperimentConfig::load(&config_path).or_py()?;
    let (records, report) = py
        .detach(|| sdgattack::experiment::run_experiment(&config))
        .or_py()?;
    let dir = config.output_dir(out_dir.as_deref());
    sdgattack::experiment::write_outputs(&dir, &records, &report, &config.output.formats)
        .or_py()?;
    Ok((dir, records.iter().map(record_dict).collect()))
}

#[pymodule]
#[pyo3(name = "sdgattack")]
fn sdgattack_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyGenerator>()?;
    m.add_function(wrap_pyfunction!(attack, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(utility, m)?)?;
    m.add_function(wrap_pyfunction!(wasserstein, m)?)?;
    m.add_function(wrap_pyfunction!(ks, m)?)?;
    m.add_function(wrap_pyfunction!(kl, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
