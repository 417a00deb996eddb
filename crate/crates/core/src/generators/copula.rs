use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::Result;
use crate::rng::Seed;
use crate::tabular::{Dataset, Schema};

use super::gmm::assemble;
use super::tables::{
    categorical_column, continuous_column, draw_categorical, rows_by_class, smoothed_table,
};

const EIGEN_FLOOR: f64 = 1e-8;

/// Copula fitted on the rows of one target class.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaPart {
    /// Sorted training values per continuous column.
    pub marginals: Vec<Vec<f64>>,
    /// Repaired correlation of the normal scores.
    pub correlation: DMatrix<f64>,
    pub cholesky: DMatrix<f64>,
    /// Smoothed tables for the non-target categorical columns.
    pub tables: Vec<Vec<f64>>,
}

/// Gaussian copula fitted separately within each target class.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaModel {
    pub schema: Schema,
    /// Smoothed class frequencies.
    pub class_probs: Vec<f64>,
    /// One part per class; classes absent from training use the pooled fit.
    pub parts: Vec<CopulaPart>,
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Normal scores from mid-ranks: Φ⁻¹(rank / (n + 1)), ties averaged.
fn normal_scores(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = rank;
        }
        i = j + 1;
    }
    let normal = std_normal();
    ranks
        .iter()
        .map(|r| normal.inverse_cdf(r / (n as f64 + 1.0)))
        .collect()
}

/// Pearson correlation; zero-variance columns are uncorrelated with the rest.
fn correlation(scores: &[Vec<f64>]) -> DMatrix<f64> {
    let c = scores.len();
    let mut m = DMatrix::identity(c, c);
    let centered: Vec<(Vec<f64>, f64)> = scores
        .iter()
        .map(|s| {
            let mean = s.iter().sum::<f64>() / s.len() as f64;
            let v: Vec<f64> = s.iter().map(|x| x - mean).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            (v, norm)
        })
        .collect();
    for a in 0..c {
        for b in a + 1..c {
            let (va, na) = &centered[a];
            let (vb, nb) = &centered[b];
            let r = if *na > 0.0 && *nb > 0.0 {
                va.iter().zip(vb).map(|(x, y)| x * y).sum::<f64>() / (na * nb)
            } else {
                0.0
            };
            m[(a, b)] = r;
            m[(b, a)] = r;
        }
    }
    m
}

/// Clips eigenvalues at a small positive floor and rescales to unit diagonal.
pub(crate) fn repair_correlation(m: &DMatrix<f64>) -> DMatrix<f64> {
    let c = m.nrows();
    if c == 0 {
        return m.clone();
    }
    let eig = SymmetricEigen::new(m.clone());
    let clipped = eig.eigenvalues.map(|l| l.max(EIGEN_FLOOR));
    let rebuilt =
        &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    let d: Vec<f64> = (0..c).map(|i| rebuilt[(i, i)].sqrt()).collect();
    let mut out = DMatrix::identity(c, c);
    for a in 0..c {
        for b in a + 1..c {
            let r = 0.5 * (rebuilt[(a, b)] + rebuilt[(b, a)]) / (d[a] * d[b]);
            out[(a, b)] = r;
            out[(b, a)] = r;
        }
    }
    out
}

impl CopulaPart {
    fn fit(d: &Dataset, rows: &[usize]) -> CopulaPart {
        let schema = d.schema();
        let values: Vec<Vec<f64>> = schema
            .continuous_indices()
            .into_iter()
            .map(|c| {
                let col = continuous_column(d, c);
                rows.iter().map(|&r| col[r]).collect()
            })
            .collect();
        let scores: Vec<Vec<f64>> = values.iter().map(|v| normal_scores(v)).collect();
        let correlation = repair_correlation(&correlation(&scores));
        let cholesky = Cholesky::new(correlation.clone())
            .map(|ch| ch.l())
            .unwrap_or_else(|| DMatrix::identity(correlation.nrows(), correlation.ncols()));
        let marginals = values
            .into_iter()
            .map(|mut v| {
                v.sort_by(f64::total_cmp);
                v
            })
            .collect();
        let tables = schema
            .categorical_indices()
            .into_iter()
            .filter(|&c| c != schema.target_index())
            .map(|c| {
                let col = categorical_column(d, c);
                smoothed_table(
                    rows.iter().map(|&r| col[r]),
                    schema.column(c).n_categories(),
                )
            })
            .collect();
        CopulaPart {
            marginals,
            correlation,
            cholesky,
            tables,
        }
    }
}

/// Linear interpolation between order statistics at probability `u`.
fn inverse_marginal(sorted: &[f64], u: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = u.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = (pos.floor() as usize).min(n - 2);
    let t = pos - lo as f64;
    sorted[lo] + t * (sorted[lo + 1] - sorted[lo])
}

/// CDF of the piecewise-linear quantile function used by `inverse_marginal`.
fn interpolated_cdf(sorted: &[f64], x: f64) -> f64 {
    let n = sorted.len();
    if x < sorted[0] {
        return 0.0;
    }
    if x >= sorted[n - 1] {
        return 1.0;
    }
    let i = sorted.partition_point(|&v| v <= x) - 1;
    let width = sorted[i + 1] - sorted[i];
    (i as f64 + (x - sorted[i]) / width) / (n - 1) as f64
}

impl CopulaModel {
    pub fn fit(d: &Dataset) -> Result<Self> {
        let groups = rows_by_class(d);
        let all: Vec<usize> = (0..d.n_rows()).collect();
        let pooled = CopulaPart::fit(d, &all);
        let parts = groups
            .iter()
            .map(|rows| {
                if rows.is_empty() {
                    pooled.clone()
                } else {
                    CopulaPart::fit(d, rows)
                }
            })
            .collect();
        Ok(CopulaModel {
            schema: d.schema().clone(),
            class_probs: smoothed_table(d.target_values().iter().copied(), d.n_classes()),
            parts,
        })
    }

    pub fn sample(&self, m: usize, seed: Seed) -> Result<Dataset> {
        let mut rng = seed.rng("copula.sample");
        let normal = std_normal();
        let n_cont = self.schema.continuous_indices().len();
        let target_slot = self
            .schema
            .categorical_indices()
            .iter()
            .position(|&c| c == self.schema.target_index())
            .expect("target is categorical");
        let n_cat = self.schema.categorical_indices().len();
        let mut cont = vec![Vec::with_capacity(m); n_cont];
        let mut cat = vec![Vec::with_capacity(m); n_cat];
        let mut eps = vec![0.0; n_cont];
        for _ in 0..m {
            let class = draw_categorical(&mut rng, &self.class_probs);
            let part = &self.parts[class as usize];
            for e in eps.iter_mut() {
                *e = rng.sample(StandardNormal);
            }
            for (j, out) in cont.iter_mut().enumerate() {
                let z: f64 = (0..=j).map(|i| part.cholesky[(j, i)] * eps[i]).sum();
                out.push(inverse_marginal(&part.marginals[j], normal.cdf(z)));
            }
            let mut tables = part.tables.iter();
            for (j, out) in cat.iter_mut().enumerate() {
                if j == target_slot {
                    out.push(class);
                } else {
                    out.push(draw_categorical(&mut rng, tables.next().expect("table")));
                }
            }
        }
        assemble(&self.schema, cont, cat)
    }

    pub(crate) fn marginal_cdf(&self, slot: usize, x: f64) -> f64 {
        self.class_probs
            .iter()
            .zip(&self.parts)
            .map(|(p, part)| p * interpolated_cdf(&part.marginals[slot], x))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repaired_matrix_is_psd_with_unit_diagonal() {
        // indefinite: pairwise correlations that cannot coexist
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0]);
        let r = repair_correlation(&m);
        for i in 0..3 {
            assert_eq!(r[(i, i)], 1.0);
            for j in 0..3 {
                assert_eq!(r[(i, j)], r[(j, i)]);
            }
        }
        let eig = SymmetricEigen::new(r.clone());
        assert!(
            eig.eigenvalues.iter().all(|&l| l > -1e-12),
            "{:?}",
            eig.eigenvalues
        );
        assert!(Cholesky::new(r).is_some());
    }

    #[test]
    fn inverse_marginal_interpolates() {
        let s = [0.0, 1.0, 3.0];
        assert_eq!(inverse_marginal(&s, 0.0), 0.0);
        assert_eq!(inverse_marginal(&s, 0.25), 0.5);
        assert_eq!(inverse_marginal(&s, 0.75), 2.0);
        assert_eq!(inverse_marginal(&s, 1.0), 3.0);
        assert_eq!(interpolated_cdf(&s, 2.0), 0.75);
        assert_eq!(interpolated_cdf(&s, -1.0), 0.0);
    }

    #[test]
    fn normal_scores_average_ties() {
        let z = normal_scores(&[2.0, 1.0, 2.0]);
        assert_eq!(z[0], z[2]);
        assert!(z[1] < z[0]);
    }
}
