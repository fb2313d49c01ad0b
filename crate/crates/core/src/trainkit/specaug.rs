use std::ops::Range;

use ndarray::{s, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Masks are sized relative to the axis: each mask length is drawn
/// uniformly from `0..=floor(max_fraction · axis_len)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecAugmentConfig {
    pub masks_per_axis: usize,
    pub max_fraction: f64,
    pub fill: f64,
}

impl Default for SpecAugmentConfig {
    fn default() -> Self {
        SpecAugmentConfig {
            masks_per_axis: 2,
            max_fraction: 0.1,
            fill: 0.0,
        }
    }
}

/// Time ranges (rows) and feature ranges (columns) to blank out.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MaskPlan {
    pub time: Vec<Range<usize>>,
    pub feature: Vec<Range<usize>>,
}

fn axis_masks<R: Rng + ?Sized>(
    len: usize,
    cfg: &SpecAugmentConfig,
    rng: &mut R,
) -> Vec<Range<usize>> {
    let max_len = (cfg.max_fraction * len as f64).floor() as usize;
    (0..cfg.masks_per_axis)
        .map(|_| {
            let width = rng.random_range(0..=max_len.min(len));
            let start = rng.random_range(0..=len - width);
            start..start + width
        })
        .collect()
}

impl MaskPlan {
    /// Draw time masks first, then feature masks.
    pub fn sample<R: Rng + ?Sized>(
        time_len: usize,
        feature_len: usize,
        cfg: &SpecAugmentConfig,
        rng: &mut R,
    ) -> Self {
        let time = axis_masks(time_len, cfg, rng);
        let feature = axis_masks(feature_len, cfg, rng);
        MaskPlan { time, feature }
    }

    pub fn apply(&self, values: &mut Array2<f64>, fill: f64) {
        for r in &self.time {
            values.slice_mut(s![r.clone(), ..]).fill(fill);
        }
        for r in &self.feature {
            values.slice_mut(s![.., r.clone()]).fill(fill);
        }
    }

    pub fn is_masked(&self, t: usize, f: usize) -> bool {
        self.time.iter().any(|r| r.contains(&t)) || self.feature.iter().any(|r| r.contains(&f))
    }
}

/// Mask a `T × d` embedding matrix along both axes.
pub fn spec_augment_embed<R: Rng + ?Sized>(
    embeddings: &Array2<f64>,
    cfg: &SpecAugmentConfig,
    rng: &mut R,
) -> Array2<f64> {
    let (t, d) = embeddings.dim();
    let plan = MaskPlan::sample(t, d, cfg, rng);
    let mut out = embeddings.clone();
    plan.apply(&mut out, cfg.fill);
    out
}
