use crate::{Error, Result};

/// Numerically stable log-softmax.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|&z| z - lse).collect()
}

/// Smoothed target: `1 - ε + ε/V` on the target, `ε/V` elsewhere.
pub fn smoothed_target(vocab_size: usize, target: usize, epsilon: f64) -> Vec<f64> {
    let off = epsilon / vocab_size as f64;
    let mut q = vec![off; vocab_size];
    q[target] = 1.0 - epsilon + off;
    q
}

fn check(logits: &[f64], target: usize, epsilon: f64) -> Result<()> {
    if logits.is_empty() {
        return Err(Error::InvalidArgument("empty logits".into()));
    }
    if target >= logits.len() {
        return Err(Error::UnknownToken(target));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!(
            "label smoothing {epsilon} not in [0, 1)"
        )));
    }
    if logits.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite("logits".into()));
    }
    Ok(())
}

/// Cross-entropy of `softmax(logits)` against the smoothed target.
pub fn label_smoothed_ce(logits: &[f64], target: usize, epsilon: f64) -> Result<f64> {
    label_smoothed_ce_grad(logits, target, epsilon).map(|(loss, _)| loss)
}

/// Loss and its gradient with respect to the logits, `softmax - q`.
pub fn label_smoothed_ce_grad(
    logits: &[f64],
    target: usize,
    epsilon: f64,
) -> Result<(f64, Vec<f64>)> {
    check(logits, target, epsilon)?;
    let logp = log_softmax(logits);
    let q = smoothed_target(logits.len(), target, epsilon);
    let loss = -q.iter().zip(&logp).map(|(q, lp)| q * lp).sum::<f64>();
    let grad = logp.iter().zip(&q).map(|(lp, q)| lp.exp() - q).collect();
    Ok((loss, grad))
}
