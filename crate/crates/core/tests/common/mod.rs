#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdgattack::tabular::{ColumnData, ColumnKind, ColumnSchema, Dataset, Schema};

/// A random mixed-type dataset: `n_cont` continuous features, `n_cat`
/// categorical features with 2..=4 labels and a target with `n_classes`
/// labels. The first rows cover as many classes as the row count allows.
pub fn random_dataset(
    seed: u64,
    rows: usize,
    n_cont: usize,
    n_cat: usize,
    n_classes: usize,
) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns = Vec::new();
    let mut data = Vec::new();
    for j in 0..n_cont {
        columns.push(ColumnSchema::continuous(format!("x{j}")));
        let loc = rng.random_range(-20.0..20.0);
        let spread = rng.random_range(0.1..5.0);
        data.push(ColumnData::Continuous(
            (0..rows)
                .map(|_| loc + spread * rng.random_range(-1.0..1.0))
                .collect(),
        ));
    }
    for j in 0..n_cat {
        let k = rng.random_range(2..=4usize);
        columns.push(ColumnSchema::categorical(
            format!("c{j}"),
            (0..k).map(|c| format!("v{c}")),
        ));
        data.push(ColumnData::Categorical(
            (0..rows).map(|_| rng.random_range(0..k as u32)).collect(),
        ));
    }
    columns.push(ColumnSchema::categorical(
        "y",
        (0..n_classes).map(|c| format!("class{c}")),
    ));
    let mut y: Vec<u32> = (0..rows)
        .map(|_| rng.random_range(0..n_classes as u32))
        .collect();
    for (c, v) in y.iter_mut().take(n_classes).enumerate() {
        *v = c as u32;
    }
    data.push(ColumnData::Categorical(y));
    Dataset::new(Schema::new(columns, "y").unwrap(), data).unwrap()
}

/// Re-validates every dataset invariant by rebuilding from parts.
pub fn assert_valid(d: &Dataset) {
    let rebuilt = Dataset::new(d.schema().clone(), d.columns().to_vec());
    assert!(rebuilt.is_ok(), "invalid dataset: {:?}", rebuilt.err());
    for (col, data) in d.schema().columns().iter().zip(d.columns()) {
        assert_eq!(data.len(), d.n_rows());
        match col.kind {
            ColumnKind::Continuous => {
                assert!(data.as_continuous().unwrap().iter().all(|x| x.is_finite()))
            }
            _ => assert!(data
                .as_categorical()
                .unwrap()
                .iter()
                .all(|&c| (c as usize) < col.categories.len())),
        }
    }
}

/// Rows as sortable keys, for multiset comparisons.
pub fn row_keys(d: &Dataset) -> Vec<Vec<u64>> {
    let mut rows: Vec<Vec<u64>> = (0..d.n_rows())
        .map(|r| d.row(r).into_iter().map(f64::to_bits).collect())
        .collect();
    rows.sort();
    rows
}

/// One-sample KS distance between `sample` and the CDF `cdf`.
pub fn ks_against_cdf(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < s.len() {
        let mut j = i;
        while j + 1 < s.len() && s[j + 1] == s[i] {
            j += 1;
        }
        let f = cdf(s[i]);
        worst = worst
            .max((f - i as f64 / n).abs())
            .max((f - (j + 1) as f64 / n).abs());
        i = j + 1;
    }
    worst
}

pub fn continuous(d: &Dataset, name: &str) -> Vec<f64> {
    d.column_by_name(name)
        .unwrap()
        .as_continuous()
        .unwrap()
        .to_vec()
}

pub fn categorical(d: &Dataset, name: &str) -> Vec<u32> {
    d.column_by_name(name)
        .unwrap()
        .as_categorical()
        .unwrap()
        .to_vec()
}

/// A random gradient-check instance: `n ≤ 20` rows, `p ≤ 5` features,
/// `k ∈ {2, 3}` classes.
pub struct GradInstance {
    pub x: sdgattack::downstream::FeatureMatrix,
    pub y: Vec<u32>,
    pub k: usize,
    pub hidden: usize,
    pub l2: f64,
}

pub fn grad_instance(seed: u64) -> GradInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=20usize);
    let p = rng.random_range(1..=5usize);
    let k = rng.random_range(2..=3usize);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    GradInstance {
        x: sdgattack::downstream::FeatureMatrix::from_rows(&rows),
        y: (0..n).map(|_| rng.random_range(0..k as u32)).collect(),
        k,
        hidden: rng.random_range(1..=6usize),
        l2: if rng.random_bool(0.5) {
            0.0
        } else {
            rng.random_range(0.0..0.1)
        },
    }
}

/// Worst per-block relative error `‖g − ĝ‖ / (‖g‖ + ‖ĝ‖)` between the
/// analytic gradient and central differences with step `1e-5`.
pub fn gradient_error<F>(params: &[f64], blocks: &[std::ops::Range<usize>], objective: F) -> f64
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    const H: f64 = 1e-5;
    let (_, analytic) = objective(params);
    let mut numeric = vec![0.0; params.len()];
    let mut probe = params.to_vec();
    for i in 0..params.len() {
        probe[i] = params[i] + H;
        let up = objective(&probe).0;
        probe[i] = params[i] - H;
        let down = objective(&probe).0;
        probe[i] = params[i];
        numeric[i] = (up - down) / (2.0 * H);
    }
    blocks
        .iter()
        .map(|b| {
            let diff: f64 = b
                .clone()
                .map(|i| (analytic[i] - numeric[i]).powi(2))
                .sum::<f64>()
                .sqrt();
            let na: f64 = b.clone().map(|i| analytic[i].powi(2)).sum::<f64>().sqrt();
            let nn: f64 = b.clone().map(|i| numeric[i].powi(2)).sum::<f64>().sqrt();
            if na + nn < 1e-12 {
                0.0
            } else {
                diff / (na + nn)
            }
        })
        .fold(0.0, f64::max)
}

pub fn random_params(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Worst block error for logistic regression on instance `seed`.
pub fn logreg_gradient_error(seed: u64) -> f64 {
    use sdgattack::downstream::logistic_objective;
    let g = grad_instance(seed);
    let p = g.x.cols;
    let params = random_params((p + 1) * g.k, seed);
    let blocks = [0..p * g.k, p * g.k..(p + 1) * g.k];
    gradient_error(&params, &blocks, |w| {
        logistic_objective(w, &g.x, &g.y, g.k, g.l2)
    })
}

/// Worst block error for the one-hidden-layer network on instance `seed`.
pub fn mlp_gradient_error(seed: u64) -> f64 {
    use sdgattack::downstream::mlp_objective;
    let g = grad_instance(seed);
    let (p, h, k) = (g.x.cols, g.hidden, g.k);
    let w1 = p * h;
    let b1 = w1 + h;
    let w2 = b1 + h * k;
    let b2 = w2 + k;
    let params = random_params(b2, seed);
    let blocks = [0..w1, w1..b1, b1..w2, w2..b2];
    gradient_error(&params, &blocks, |w| {
        mlp_objective(w, &g.x, &g.y, h, k, g.l2)
    })
}
