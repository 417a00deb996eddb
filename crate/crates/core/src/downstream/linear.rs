use super::encode::FeatureMatrix;
use super::optim::{argmax, softmax};

/// Multinomial logistic regression. `weights` is `features × classes`
/// row-major, followed in the flat parameter vector by one bias per class.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub(crate) n_features: usize,
    pub(crate) n_classes: usize,
    pub(crate) params: Vec<f64>,
}

impl LogisticModel {
    pub fn zeros(n_features: usize, n_classes: usize) -> Self {
        LogisticModel {
            n_features,
            n_classes,
            params: vec![0.0; (n_features + 1) * n_classes],
        }
    }

    pub fn from_params(n_features: usize, n_classes: usize, params: Vec<f64>) -> Self {
        assert_eq!(params.len(), (n_features + 1) * n_classes);
        LogisticModel {
            n_features,
            n_classes,
            params,
        }
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        logits(&self.params, x, self.n_features, self.n_classes)
    }

    pub fn proba(&self, x: &[f64]) -> Vec<f64> {
        let mut z = self.logits(x);
        softmax(&mut z);
        z
    }

    pub fn predict_row(&self, x: &[f64]) -> u32 {
        argmax(&self.logits(x)) as u32
    }
}

fn logits(params: &[f64], x: &[f64], p: usize, k: usize) -> Vec<f64> {
    let (w, b) = params.split_at(p * k);
    let mut z = b.to_vec();
    for (j, &xj) in x.iter().enumerate() {
        if xj != 0.0 {
            for (zc, wc) in z.iter_mut().zip(&w[j * k..(j + 1) * k]) {
                *zc += xj * wc;
            }
        }
    }
    z
}

/// Mean cross-entropy plus `l2/2 · ‖W‖²` (biases unpenalized), with its
/// gradient.
pub fn logistic_objective(
    params: &[f64],
    x: &FeatureMatrix,
    y: &[u32],
    n_classes: usize,
    l2: f64,
) -> (f64, Vec<f64>) {
    let (p, k) = (x.cols, n_classes);
    let n = x.rows as f64;
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    for (i, &yi) in y.iter().enumerate().take(x.rows) {
        let row = x.row(i);
        let mut prob = logits(params, row, p, k);
        softmax(&mut prob);
        let yi = yi as usize;
        loss -= prob[yi].max(1e-300).ln();
        prob[yi] -= 1.0;
        for (j, &xj) in row.iter().enumerate() {
            if xj != 0.0 {
                for (g, d) in grad[j * k..(j + 1) * k].iter_mut().zip(&prob) {
                    *g += xj * d;
                }
            }
        }
        for (g, d) in grad[p * k..].iter_mut().zip(&prob) {
            *g += d;
        }
    }
    loss /= n;
    for g in grad.iter_mut() {
        *g /= n;
    }
    let w = &params[..p * k];
    loss += 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
    for (g, wv) in grad[..p * k].iter_mut().zip(w) {
        *g += l2 * wv;
    }
    (loss, grad)
}
