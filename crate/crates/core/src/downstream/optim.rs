/// Full-batch gradient descent that never accepts a step increasing the loss.
///
/// A rejected step halves the learning rate and retries from the same point;
/// after `MAX_HALVINGS` consecutive rejections the descent stops early.
/// Returns the loss at the start and after every accepted step.
pub fn descend<F>(
    params: &mut [f64],
    mut objective: F,
    learning_rate: f64,
    iterations: usize,
) -> Vec<f64>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    const MAX_HALVINGS: usize = 40;
    let mut lr = learning_rate;
    let (mut loss, mut grad) = objective(params);
    let mut history = Vec::with_capacity(iterations + 1);
    history.push(loss);
    let mut candidate = vec![0.0; params.len()];
    'outer: for _ in 0..iterations {
        for _ in 0..MAX_HALVINGS {
            for ((c, p), g) in candidate.iter_mut().zip(params.iter()).zip(&grad) {
                *c = p - lr * g;
            }
            let (next_loss, next_grad) = objective(&candidate);
            if next_loss <= loss {
                params.copy_from_slice(&candidate);
                loss = next_loss;
                grad = next_grad;
                history.push(loss);
                continue 'outer;
            }
            lr *= 0.5;
        }
        break;
    }
    history
}

/// In-place numerically stable softmax.
pub fn softmax(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}
