use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::tabular::{ColumnData, Dataset, Schema};

use super::tables::{
    categorical_column, continuous_column, draw_categorical, mean_var, smoothed_table,
};
use super::GeneratorConfig;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
/// Components whose responsibility mass falls below this keep their
/// previous parameters.
const MIN_MASS: f64 = 1e-10;

/// Latent-class mixture: each component has a diagonal Gaussian over the
/// continuous columns and its own probability table for every categorical
/// column (target included).
#[derive(Debug, Clone, PartialEq)]
pub struct GmmModel {
    pub schema: Schema,
    pub weights: Vec<f64>,
    /// `means[k][j]` for continuous column slot `j`.
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
    /// `tables[k][j]` for categorical column slot `j`.
    pub tables: Vec<Vec<Vec<f64>>>,
    /// Lower bound applied to each continuous column's variances.
    pub variance_floor: Vec<f64>,
    /// Mean training log-likelihood before each M-step.
    pub fit_log: Vec<f64>,
}

struct Columns<'a> {
    cont: Vec<&'a [f64]>,
    cat: Vec<&'a [u32]>,
    n: usize,
}

impl<'a> Columns<'a> {
    fn of(d: &'a Dataset) -> Self {
        let s = d.schema();
        Columns {
            cont: s
                .continuous_indices()
                .into_iter()
                .map(|c| continuous_column(d, c))
                .collect(),
            cat: s
                .categorical_indices()
                .into_iter()
                .map(|c| categorical_column(d, c))
                .collect(),
            n: d.n_rows(),
        }
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl GmmModel {
    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    /// log(w_k) + log p(row | k) for every component.
    fn joint_log(&self, cols: &Columns, i: usize, out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            let mut l = self.weights[k].ln();
            for (j, col) in cols.cont.iter().enumerate() {
                let var = self.variances[k][j];
                let diff = col[i] - self.means[k][j];
                l -= 0.5 * (LN_2PI + var.ln() + diff * diff / var);
            }
            for (j, col) in cols.cat.iter().enumerate() {
                l += self.tables[k][j][col[i] as usize].ln();
            }
            *o = l;
        }
    }

    fn mean_log_likelihood(&self, cols: &Columns) -> f64 {
        let mut buf = vec![0.0; self.n_components()];
        let mut total = 0.0;
        for i in 0..cols.n {
            self.joint_log(cols, i, &mut buf);
            total += log_sum_exp(&buf);
        }
        total / cols.n as f64
    }

    pub fn fit(config: &GeneratorConfig, d: &Dataset) -> Result<Self> {
        let k = config.components;
        let n = d.n_rows();
        if n < k {
            return Err(Error::InvalidParameter(format!(
                "gmm with {k} components needs at least {k} rows, got {n}"
            )));
        }
        let schema = d.schema().clone();
        let cols = Columns::of(d);
        let cat_sizes: Vec<usize> = schema
            .categorical_indices()
            .into_iter()
            .map(|c| schema.column(c).n_categories())
            .collect();

        let stats: Vec<(f64, f64)> = cols.cont.iter().map(|c| mean_var(c)).collect();
        let variance_floor: Vec<f64> = stats.iter().map(|&(_, v)| 1e-6 * (v + 1e-12)).collect();
        let global_tables: Vec<Vec<f64>> = cols
            .cat
            .iter()
            .zip(&cat_sizes)
            .map(|(c, &size)| smoothed_table(c.iter().copied(), size))
            .collect();

        let seeds = kmeans_pp_seeds(&cols, &stats, k, config.seed);
        let mut model = GmmModel {
            schema,
            weights: vec![1.0 / k as f64; k],
            means: seeds
                .iter()
                .map(|&r| cols.cont.iter().map(|c| c[r]).collect())
                .collect(),
            variances: vec![
                stats
                    .iter()
                    .zip(&variance_floor)
                    .map(|(&(_, v), &f)| v.max(f))
                    .collect();
                k
            ],
            tables: seeds
                .iter()
                .map(|&r| {
                    global_tables
                        .iter()
                        .zip(&cols.cat)
                        .map(|(g, c)| {
                            let mut t: Vec<f64> = g.iter().map(|p| 0.5 * p).collect();
                            t[c[r] as usize] += 0.5;
                            t
                        })
                        .collect()
                })
                .collect(),
            variance_floor,
            fit_log: Vec::new(),
        };

        let mut resp = vec![0.0; n * k];
        let mut buf = vec![0.0; k];
        for epoch in 0..config.max_epochs {
            // E-step
            let mut ll = 0.0;
            for i in 0..n {
                model.joint_log(&cols, i, &mut buf);
                let norm = log_sum_exp(&buf);
                ll += norm;
                for (r, b) in resp[i * k..(i + 1) * k].iter_mut().zip(&buf) {
                    *r = (b - norm).exp();
                }
            }
            let ll = ll / n as f64;
            let converged = epoch > 0 && ll - model.fit_log[epoch - 1] < config.tolerance;
            model.fit_log.push(ll);
            if converged {
                break;
            }
            model.m_step(&cols, &resp);
        }
        Ok(model)
    }

    fn m_step(&mut self, cols: &Columns, resp: &[f64]) {
        let k = self.n_components();
        let n = cols.n;
        let mut mass = vec![0.0; k];
        for i in 0..n {
            for (m, r) in mass.iter_mut().zip(&resp[i * k..(i + 1) * k]) {
                *m += r;
            }
        }
        let total: f64 = mass.iter().sum();
        for c in 0..k {
            self.weights[c] = mass[c] / total;
            if mass[c] < MIN_MASS {
                continue;
            }
            for (j, col) in cols.cont.iter().enumerate() {
                let mut mean = 0.0;
                for i in 0..n {
                    mean += resp[i * k + c] * col[i];
                }
                mean /= mass[c];
                let mut var = 0.0;
                for i in 0..n {
                    let d = col[i] - mean;
                    var += resp[i * k + c] * d * d;
                }
                self.means[c][j] = mean;
                self.variances[c][j] = (var / mass[c]).max(self.variance_floor[j]);
            }
            for (j, col) in cols.cat.iter().enumerate() {
                let table = &mut self.tables[c][j];
                table.iter_mut().for_each(|p| *p = 0.0);
                for i in 0..n {
                    table[col[i] as usize] += resp[i * k + c];
                }
                table.iter_mut().for_each(|p| *p /= mass[c]);
            }
        }
    }

    pub fn sample(&self, m: usize, seed: Seed) -> Result<Dataset> {
        let mut rng = seed.rng("gmm.sample");
        let cont_idx = self.schema.continuous_indices();
        let cat_idx = self.schema.categorical_indices();
        let mut cont = vec![Vec::with_capacity(m); cont_idx.len()];
        let mut cat = vec![Vec::with_capacity(m); cat_idx.len()];
        for _ in 0..m {
            let c = draw_categorical(&mut rng, &self.weights) as usize;
            for (j, out) in cont.iter_mut().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                out.push(self.means[c][j] + self.variances[c][j].sqrt() * z);
            }
            for (j, out) in cat.iter_mut().enumerate() {
                out.push(draw_categorical(&mut rng, &self.tables[c][j]));
            }
        }
        assemble(&self.schema, cont, cat)
    }

    pub(crate) fn marginal_cdf(&self, slot: usize, x: f64) -> f64 {
        let mut f = 0.0;
        for c in 0..self.n_components() {
            let normal = Normal::new(self.means[c][slot], self.variances[c][slot].sqrt())
                .expect("positive sd");
            f += self.weights[c] * normal.cdf(x);
        }
        f
    }
}

/// Builds a dataset from continuous and categorical columns in schema slot order.
pub(crate) fn assemble(
    schema: &Schema,
    cont: Vec<Vec<f64>>,
    cat: Vec<Vec<u32>>,
) -> Result<Dataset> {
    let mut cont = cont.into_iter();
    let mut cat = cat.into_iter();
    let columns = schema
        .columns()
        .iter()
        .map(|col| {
            if col.kind.is_categorical() {
                ColumnData::Categorical(cat.next().expect("slot"))
            } else {
                ColumnData::Continuous(cont.next().expect("slot"))
            }
        })
        .collect();
    Dataset::new(schema.clone(), columns)
}

/// k-means++ seeding on sd-scaled continuous columns; returns `k` distinct
/// row indices.
fn kmeans_pp_seeds(cols: &Columns, stats: &[(f64, f64)], k: usize, seed: Seed) -> Vec<usize> {
    let mut rng = seed.rng("gmm.init");
    let n = cols.n;
    let scale: Vec<f64> = stats
        .iter()
        .map(|&(_, v)| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 })
        .collect();
    let dist = |a: usize, b: usize| -> f64 {
        cols.cont
            .iter()
            .zip(&scale)
            .map(|(c, s)| ((c[a] - c[b]) * s).powi(2))
            .sum()
    };
    let mut chosen = vec![rng.random_range(0..n)];
    let mut taken = vec![false; n];
    taken[chosen[0]] = true;
    let mut d2: Vec<f64> = (0..n).map(|i| dist(i, chosen[0])).collect();
    while chosen.len() < k {
        let total: f64 = (0..n).filter(|&i| !taken[i]).map(|i| d2[i]).sum();
        let next = if total > 0.0 {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for i in (0..n).filter(|&i| !taken[i]) {
                if d2[i] > 0.0 {
                    acc += d2[i];
                    pick = Some(i);
                    if u < acc {
                        break;
                    }
                }
            }
            pick.expect("positive mass")
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        taken[next] = true;
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(dist(i, next));
        }
    }
    chosen
}

/// Mean per-row log-density of `d` under the mixture.
pub fn log_likelihood(model: &GmmModel, d: &Dataset) -> Result<f64> {
    if d.schema() != &model.schema {
        return Err(Error::SchemaMismatch(
            "dataset schema differs from the model's".into(),
        ));
    }
    if d.n_rows() == 0 {
        return Err(Error::InvalidDataset(
            "log-likelihood of an empty dataset".into(),
        ));
    }
    Ok(model.mean_log_likelihood(&Columns::of(d)))
}
