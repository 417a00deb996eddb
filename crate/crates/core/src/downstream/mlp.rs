use rand::Rng;

use crate::rng::Seed;

use super::encode::FeatureMatrix;
use super::optim::{argmax, softmax};

/// One tanh hidden layer and a softmax output. Flat parameter layout:
/// `W1 (p×h) | b1 (h) | W2 (h×k) | b2 (k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub(crate) n_features: usize,
    pub(crate) hidden: usize,
    pub(crate) n_classes: usize,
    pub(crate) params: Vec<f64>,
}

pub(crate) struct Layout {
    p: usize,
    h: usize,
    k: usize,
}

impl Layout {
    fn w1(&self) -> std::ops::Range<usize> {
        0..self.p * self.h
    }
    fn b1(&self) -> std::ops::Range<usize> {
        let s = self.p * self.h;
        s..s + self.h
    }
    fn w2(&self) -> std::ops::Range<usize> {
        let s = self.p * self.h + self.h;
        s..s + self.h * self.k
    }
    fn b2(&self) -> std::ops::Range<usize> {
        let s = self.p * self.h + self.h + self.h * self.k;
        s..s + self.k
    }
    fn len(&self) -> usize {
        self.b2().end
    }
}

impl MlpModel {
    /// Glorot-uniform weights, zero biases.
    pub fn init(n_features: usize, hidden: usize, n_classes: usize, seed: Seed) -> Self {
        let layout = Layout {
            p: n_features,
            h: hidden,
            k: n_classes,
        };
        let mut params = vec![0.0; layout.len()];
        let mut rng = seed.rng("mlp.init");
        let a1 = (6.0 / (n_features + hidden) as f64).sqrt();
        for v in &mut params[layout.w1()] {
            *v = rng.random_range(-a1..a1);
        }
        let a2 = (6.0 / (hidden + n_classes) as f64).sqrt();
        for v in &mut params[layout.w2()] {
            *v = rng.random_range(-a2..a2);
        }
        MlpModel {
            n_features,
            hidden,
            n_classes,
            params,
        }
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn proba(&self, x: &[f64]) -> Vec<f64> {
        let layout = self.layout();
        let mut h = vec![0.0; self.hidden];
        let mut z = forward(&self.params, &layout, x, &mut h);
        softmax(&mut z);
        z
    }

    pub fn predict_row(&self, x: &[f64]) -> u32 {
        let layout = self.layout();
        let mut h = vec![0.0; self.hidden];
        argmax(&forward(&self.params, &layout, x, &mut h)) as u32
    }

    pub(crate) fn layout(&self) -> Layout {
        Layout {
            p: self.n_features,
            h: self.hidden,
            k: self.n_classes,
        }
    }
}

/// `tanh` through a single `exp`, which is much cheaper than the libm
/// routine. Absolute error stays near 1e-16; tiny inputs use `tanh` itself
/// to keep relative precision.
fn fast_tanh(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        return x.tanh();
    }
    let e = (2.0 * x.clamp(-40.0, 40.0)).exp();
    (e - 1.0) / (e + 1.0)
}

fn forward(params: &[f64], l: &Layout, x: &[f64], h: &mut [f64]) -> Vec<f64> {
    let w1 = &params[l.w1()];
    h.copy_from_slice(&params[l.b1()]);
    for (j, &xj) in x.iter().enumerate() {
        if xj != 0.0 {
            for (hv, w) in h.iter_mut().zip(&w1[j * l.h..(j + 1) * l.h]) {
                *hv += xj * w;
            }
        }
    }
    for hv in h.iter_mut() {
        *hv = fast_tanh(*hv);
    }
    let w2 = &params[l.w2()];
    let mut z = params[l.b2()].to_vec();
    for (u, &hu) in h.iter().enumerate() {
        for (zc, w) in z.iter_mut().zip(&w2[u * l.k..(u + 1) * l.k]) {
            *zc += hu * w;
        }
    }
    z
}

/// Mean cross-entropy plus `l2/2 · (‖W1‖² + ‖W2‖²)`, with its gradient.
pub fn mlp_objective(
    params: &[f64],
    x: &FeatureMatrix,
    y: &[u32],
    hidden: usize,
    n_classes: usize,
    l2: f64,
) -> (f64, Vec<f64>) {
    let l = Layout {
        p: x.cols,
        h: hidden,
        k: n_classes,
    };
    assert_eq!(params.len(), l.len());
    let n = x.rows as f64;
    let mut grad = vec![0.0; params.len()];
    let mut h = vec![0.0; hidden];
    let mut dh = vec![0.0; hidden];
    let mut loss = 0.0;
    let w2 = &params[l.w2()];
    for (i, &yi) in y.iter().enumerate().take(x.rows) {
        let row = x.row(i);
        let mut prob = forward(params, &l, row, &mut h);
        softmax(&mut prob);
        let yi = yi as usize;
        loss -= prob[yi].max(1e-300).ln();
        prob[yi] -= 1.0;
        // output layer
        {
            let gw2 = &mut grad[l.w2()];
            for (u, &hu) in h.iter().enumerate() {
                for (g, d) in gw2[u * l.k..(u + 1) * l.k].iter_mut().zip(&prob) {
                    *g += hu * d;
                }
            }
        }
        for (g, d) in grad[l.b2()].iter_mut().zip(&prob) {
            *g += d;
        }
        // hidden layer
        for (u, dhu) in dh.iter_mut().enumerate() {
            let back: f64 = w2[u * l.k..(u + 1) * l.k]
                .iter()
                .zip(&prob)
                .map(|(w, d)| w * d)
                .sum();
            *dhu = back * (1.0 - h[u] * h[u]);
        }
        {
            let gw1 = &mut grad[l.w1()];
            for (j, &xj) in row.iter().enumerate() {
                if xj != 0.0 {
                    for (g, d) in gw1[j * l.h..(j + 1) * l.h].iter_mut().zip(&dh) {
                        *g += xj * d;
                    }
                }
            }
        }
        for (g, d) in grad[l.b1()].iter_mut().zip(&dh) {
            *g += d;
        }
    }
    loss /= n;
    for g in grad.iter_mut() {
        *g /= n;
    }
    for range in [l.w1(), l.w2()] {
        for idx in range {
            loss += 0.5 * l2 * params[idx] * params[idx];
            grad[idx] += l2 * params[idx];
        }
    }
    (loss, grad)
}
