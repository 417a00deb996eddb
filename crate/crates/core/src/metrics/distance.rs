use crate::error::{Error, Result};

/// Additive smoothing applied to every histogram / frequency cell before
/// normalizing.
pub const KL_EPSILON: f64 = 1e-10;

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

fn non_empty(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter("empty sample".into()));
    }
    Ok(())
}

/// First Wasserstein distance between two empirical distributions, computed as
/// the integral of the absolute difference between their quantile functions.
///
/// Breakpoints of both step quantile functions are tracked exactly as integer
/// multiples of `1 / (|a| · |b|)`, so unequal sample sizes need no
/// interpolation.
pub fn wasserstein_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    non_empty(a, b)?;
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as u64, b.len() as u64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut pos = 0u64;
    let mut total = 0.0;
    while i < a.len() && j < b.len() {
        let next_a = (i as u64 + 1) * nb;
        let next_b = (j as u64 + 1) * na;
        let next = next_a.min(next_b);
        total += (next - pos) as f64 * (a[i] - b[j]).abs();
        pos = next;
        if next_a == next {
            i += 1;
        }
        if next_b == next {
            j += 1;
        }
    }
    Ok(total / (na * nb) as f64)
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`, by merge scan.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    non_empty(a, b)?;
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as i128, b.len() as i128);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best: i128 = 0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        // |i/na - j/nb| scaled by na*nb
        best = best.max((i as i128 * nb - j as i128 * na).abs());
    }
    Ok(best as f64 / (na * nb) as f64)
}

fn smoothed(counts: &[f64], total: f64) -> Vec<f64> {
    let raw: Vec<f64> = counts.iter().map(|&c| c / total + KL_EPSILON).collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / z).collect()
}

fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&pi, &qi)| if pi == qi { 0.0 } else { pi * (pi / qi).ln() })
        .sum::<f64>()
        .max(0.0)
}

/// `KL(a ‖ b)` in nats over an equal-width histogram spanning both samples.
///
/// Returns 0 when every value in both samples is identical.
pub fn kl_divergence_continuous(a: &[f64], b: &[f64], bins: usize) -> Result<f64> {
    non_empty(a, b)?;
    if bins < 2 {
        return Err(Error::InvalidParameter(format!(
            "bins must be >= 2, got {bins}"
        )));
    }
    let lo = a.iter().chain(b).copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().chain(b).copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return Ok(0.0);
    }
    let width = (hi - lo) / bins as f64;
    let histogram = |v: &[f64]| {
        let mut counts = vec![0.0; bins];
        for &x in v {
            let k = (((x - lo) / width) as usize).min(bins - 1);
            counts[k] += 1.0;
        }
        smoothed(&counts, v.len() as f64)
    };
    Ok(kl(&histogram(a), &histogram(b)))
}

/// `KL(a ‖ b)` in nats between smoothed category frequencies.
pub fn kl_divergence_categorical(a: &[u32], b: &[u32], n_categories: usize) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter("empty sample".into()));
    }
    let freq = |v: &[u32]| {
        let mut counts = vec![0.0; n_categories];
        for &c in v {
            counts[c as usize] += 1.0;
        }
        smoothed(&counts, v.len() as f64)
    };
    Ok(kl(&freq(a), &freq(b)))
}

/// `KL(p ‖ q)` between two probability vectors, smoothed the same way as the
/// sample-based estimators.
pub fn kl_divergence_probs(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::InvalidParameter(
            "probability vectors differ in length".into(),
        ));
    }
    Ok(kl(&smoothed(p, 1.0), &smoothed(q, 1.0)))
}

/// `100 · (attacked − baseline) / baseline`.
pub fn percent_change(baseline: f64, attacked: f64) -> Result<f64> {
    if !baseline.is_finite() || baseline.abs() < 1e-12 || !attacked.is_finite() {
        return Err(Error::UndefinedChange { baseline });
    }
    Ok(100.0 * (attacked - baseline) / baseline)
}
