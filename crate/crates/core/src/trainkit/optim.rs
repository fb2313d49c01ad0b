use ndarray::{ArrayD, Zip};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A named parameter tensor with its gradient and AdamW moments.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGroup {
    pub name: String,
    pub values: ArrayD<f64>,
    pub grads: ArrayD<f64>,
    pub m: ArrayD<f64>,
    pub v: ArrayD<f64>,
    /// Bias tensors are exempt from weight decay.
    pub is_bias: bool,
}

impl ParamGroup {
    pub fn new(name: impl Into<String>, values: ArrayD<f64>, is_bias: bool) -> Self {
        let zeros = ArrayD::zeros(values.raw_dim());
        ParamGroup {
            name: name.into(),
            grads: zeros.clone(),
            m: zeros.clone(),
            v: zeros,
            values,
            is_bias,
        }
    }

    pub fn zero_grad(&mut self) {
        self.grads.fill(0.0);
    }

    fn check(&self) -> Result<()> {
        let shape = self.values.shape();
        if self.grads.shape() != shape || self.m.shape() != shape || self.v.shape() != shape {
            return Err(Error::Shape(format!(
                "parameter {} has inconsistent tensors",
                self.name
            )));
        }
        if self.grads.iter().any(|g| g.is_nan()) {
            return Err(Error::NonFinite(format!("gradient of {}", self.name)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

/// One AdamW step (`t` counts from 1):
///
/// ```text
/// m ← β1·m + (1-β1)·g        v ← β2·v + (1-β2)·g²
/// θ ← θ - lr·m̂/(√v̂ + eps) - lr·wd·θ
/// ```
///
/// with `m̂ = m/(1-β1^t)`, `v̂ = v/(1-β2^t)`. The decay term is skipped for
/// bias groups. Nothing is modified if any gradient is NaN.
pub fn adamw_step(groups: &mut [ParamGroup], cfg: &AdamWConfig, t: u64) -> Result<()> {
    if t == 0 {
        return Err(Error::InvalidArgument(
            "AdamW step counter starts at 1".into(),
        ));
    }
    for g in groups.iter() {
        g.check()?;
    }
    let t = i32::try_from(t).unwrap_or(i32::MAX);
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    for group in groups.iter_mut() {
        let decay = if group.is_bias { 0.0 } else { cfg.weight_decay };
        Zip::from(&mut group.values)
            .and(&group.grads)
            .and(&mut group.m)
            .and(&mut group.v)
            .for_each(|theta, &g, m, v| {
                *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
                *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *theta -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps) + cfg.lr * decay * *theta;
            });
    }
    Ok(())
}

/// ℓ2 norm over all gradients of all groups.
pub fn global_grad_norm(groups: &[ParamGroup]) -> f64 {
    groups
        .iter()
        .flat_map(|g| g.grads.iter())
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt()
}

/// Rescale all gradients so their global ℓ2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_grad_l2(groups: &mut [ParamGroup], max_norm: f64) -> Result<f64> {
    if max_norm.is_nan() || max_norm <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "max_norm must be positive, got {max_norm}"
        )));
    }
    let norm = global_grad_norm(groups);
    if norm > max_norm {
        let scale = max_norm / norm;
        for g in groups.iter_mut() {
            g.grads.mapv_inplace(|x| x * scale);
        }
    }
    Ok(norm)
}
