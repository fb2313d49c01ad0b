use std::f64::consts::PI;

use crate::{Error, Result};

/// `lr0 · (1 + cos(kπ/K)) / 2` for epoch `k` of `K`.
pub fn cosine_lr(k: usize, total: usize, lr0: f64) -> Result<f64> {
    if total == 0 {
        return Err(Error::InvalidArgument(
            "cosine schedule needs at least one epoch".into(),
        ));
    }
    if k > total {
        return Err(Error::InvalidArgument(format!(
            "epoch {k} is past the last epoch {total}"
        )));
    }
    Ok(0.5 * (1.0 + (k as f64 * PI / total as f64).cos()) * lr0)
}
