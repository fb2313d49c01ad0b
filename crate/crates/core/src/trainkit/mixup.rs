use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::{Error, Result};

/// Mixing weight of the first item, always at least 0.5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixupDraw {
    pub lambda: f64,
    pub alpha: f64,
}

pub fn fold_lambda(lambda: f64) -> f64 {
    lambda.max(1.0 - lambda)
}

/// Draw λ ~ Beta(α, α) and fold it to `max(λ, 1 - λ)`.
pub fn draw_lambda<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<MixupDraw> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "mixup alpha must be positive, got {alpha}"
        )));
    }
    let beta = Beta::new(alpha, alpha).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(MixupDraw {
        lambda: fold_lambda(beta.sample(rng)),
        alpha,
    })
}

/// Mixing partner for every batch position: a uniform random permutation,
/// so an item may be paired with itself.
pub fn mixup_partners<R: Rng + ?Sized>(batch_size: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..batch_size).collect();
    order.shuffle(rng);
    order
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mixed {
    pub x: Array1<f64>,
    pub w: Array2<f64>,
    pub lambda: f64,
}

/// Mix with a given raw draw; `lambda` is folded before use.
pub fn mixup_with_lambda(
    x1: ArrayView1<f64>,
    x2: ArrayView1<f64>,
    w1: ArrayView2<f64>,
    w2: ArrayView2<f64>,
    lambda: f64,
) -> Result<Mixed> {
    if x1.shape() != x2.shape() {
        return Err(Error::Shape(format!(
            "audio {:?} vs {:?}",
            x1.shape(),
            x2.shape()
        )));
    }
    if w1.shape() != w2.shape() {
        return Err(Error::Shape(format!(
            "words {:?} vs {:?}",
            w1.shape(),
            w2.shape()
        )));
    }
    let lambda = fold_lambda(lambda);
    Ok(Mixed {
        x: &x1 * lambda + &x2 * (1.0 - lambda),
        w: &w1 * lambda + &w2 * (1.0 - lambda),
        lambda,
    })
}

/// Mix an audio embedding pair and a word-embedding pair with one shared
/// folded Beta(α, α) weight. The training target stays that of item 1.
pub fn mixup_pair<R: Rng + ?Sized>(
    x1: ArrayView1<f64>,
    x2: ArrayView1<f64>,
    w1: ArrayView2<f64>,
    w2: ArrayView2<f64>,
    alpha: f64,
    rng: &mut R,
) -> Result<Mixed> {
    let draw = draw_lambda(alpha, rng)?;
    mixup_with_lambda(x1, x2, w1, w2, draw.lambda)
}

#[cfg(test)]
mod tests {
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn forced_draw_is_folded() {
        let x1 = array![1.0, 0.0];
        let x2 = array![0.0, 1.0];
        let w = Array2::<f64>::zeros((2, 2));
        let m = mixup_with_lambda(x1.view(), x2.view(), w.view(), w.view(), 0.3).unwrap();
        assert_eq!(m.lambda, 0.7);
        assert_eq!(m.x[0], 0.7);
        assert!((m.x[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn equal_inputs_are_a_fixed_point() {
        let x = array![0.25, -3.0, 8.0];
        let w = array![[1.0, 2.0], [3.0, 4.0]];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let m = mixup_pair(x.view(), x.view(), w.view(), w.view(), 0.4, &mut rng).unwrap();
            for (a, b) in m.x.iter().zip(&x) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!(m.lambda >= 0.5);
        }
    }

    #[test]
    fn shape_mismatch() {
        let w = Array2::<f64>::zeros((1, 2));
        let r = mixup_with_lambda(
            array![1.0].view(),
            array![1.0, 2.0].view(),
            w.view(),
            w.view(),
            0.5,
        );
        assert!(matches!(r, Err(Error::Shape(_))));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(draw_lambda(0.0, &mut rng).is_err());
    }

    #[test]
    fn partners_are_a_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut p = mixup_partners(50, &mut rng);
        p.sort();
        assert_eq!(p, (0..50).collect::<Vec<_>>());
    }
}
