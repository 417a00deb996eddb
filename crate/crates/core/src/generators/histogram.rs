use rand::Rng;

use crate::error::Result;
use crate::rng::Seed;
use crate::tabular::{Dataset, Schema};

use super::gmm::assemble;
use super::tables::{
    categorical_column, continuous_column, draw_categorical, rows_by_class, smoothed_table,
};

/// Independent per-column histograms for the rows of one target class.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramPart {
    /// Bin probabilities per continuous column.
    pub probs: Vec<Vec<f64>>,
    /// Smoothed tables for the non-target categorical columns.
    pub tables: Vec<Vec<f64>>,
}

/// Class-conditional equal-width histogram model. Bin edges are shared by
/// all classes.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramModel {
    pub schema: Schema,
    /// Strictly increasing bin edges per continuous column.
    pub edges: Vec<Vec<f64>>,
    pub class_probs: Vec<f64>,
    pub parts: Vec<HistogramPart>,
}

fn equal_width_edges(values: &[f64], bins: usize) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    };
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|b| lo + width * b as f64).collect();
    edges.push(hi);
    edges
}

fn bin_of(edges: &[f64], x: f64) -> usize {
    let bins = edges.len() - 1;
    (edges.partition_point(|&e| e <= x).max(1) - 1).min(bins - 1)
}

impl HistogramModel {
    pub fn fit(bins: usize, d: &Dataset) -> Result<Self> {
        let schema = d.schema().clone();
        let cont_idx = schema.continuous_indices();
        let edges: Vec<Vec<f64>> = cont_idx
            .iter()
            .map(|&c| equal_width_edges(continuous_column(d, c), bins))
            .collect();
        let all: Vec<usize> = (0..d.n_rows()).collect();
        let fit_part = |rows: &[usize]| HistogramPart {
            probs: cont_idx
                .iter()
                .zip(&edges)
                .map(|(&c, e)| {
                    let col = continuous_column(d, c);
                    let mut p = vec![0.0; bins];
                    for &r in rows {
                        p[bin_of(e, col[r])] += 1.0;
                    }
                    p.iter_mut().for_each(|v| *v /= rows.len() as f64);
                    p
                })
                .collect(),
            tables: schema
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
                .collect(),
        };
        let pooled = fit_part(&all);
        let parts = rows_by_class(d)
            .iter()
            .map(|rows| {
                if rows.is_empty() {
                    pooled.clone()
                } else {
                    fit_part(rows)
                }
            })
            .collect();
        Ok(HistogramModel {
            class_probs: smoothed_table(d.target_values().iter().copied(), d.n_classes()),
            schema,
            edges,
            parts,
        })
    }

    pub fn sample(&self, m: usize, seed: Seed) -> Result<Dataset> {
        let mut rng = seed.rng("histogram.sample");
        let target_slot = self
            .schema
            .categorical_indices()
            .iter()
            .position(|&c| c == self.schema.target_index())
            .expect("target is categorical");
        let mut cont = vec![Vec::with_capacity(m); self.edges.len()];
        let mut cat = vec![Vec::with_capacity(m); self.schema.categorical_indices().len()];
        for _ in 0..m {
            let class = draw_categorical(&mut rng, &self.class_probs);
            let part = &self.parts[class as usize];
            for (j, out) in cont.iter_mut().enumerate() {
                let b = draw_categorical(&mut rng, &part.probs[j]) as usize;
                let e = &self.edges[j];
                out.push(e[b] + rng.random::<f64>() * (e[b + 1] - e[b]));
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
        let e = &self.edges[slot];
        let within = |probs: &[f64]| -> f64 {
            let mut f = 0.0;
            for (b, &p) in probs.iter().enumerate() {
                if x >= e[b + 1] {
                    f += p;
                } else if x > e[b] {
                    f += p * (x - e[b]) / (e[b + 1] - e[b]);
                }
            }
            f
        };
        self.class_probs
            .iter()
            .zip(&self.parts)
            .map(|(c, part)| c * within(&part.probs[slot]))
            .sum()
    }
}
