//! The training utilities on their own: schedule, mixup, SpecAugment,
//! label smoothing, clipping and AdamW on a two-parameter problem.

use ndarray::{arr1, Array2, ArrayD, IxDyn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use capkit::trainkit::{
    adamw_step, clip_grad_l2, cosine_lr, draw_lambda, label_smoothed_ce, mixup_with_lambda,
    spec_augment_embed, ParamGroup, TrainConfig,
};

fn main() -> capkit::Result<()> {
    let cfg = TrainConfig::from_toml("base = \"ac\"\nepochs = 20\nlr = 0.05\nweight_decay = 0.01")?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    let lambda = draw_lambda(cfg.mixup_alpha, &mut rng)?.lambda;
    let (x1, x2) = (arr1(&[1.0, 0.0]), arr1(&[0.0, 1.0]));
    let w = Array2::<f64>::eye(2);
    let mixed = mixup_with_lambda(x1.view(), x2.view(), w.view(), w.view(), lambda)?;
    println!("mixup λ {:.3} -> {:?}", mixed.lambda, mixed.x.to_vec());

    let frames = Array2::from_elem((20, 10), 1.0);
    let masked = spec_augment_embed(&frames, &cfg.spec_augment_config(), &mut rng);
    println!(
        "SpecAugment zeroed {} of 200 cells",
        masked.iter().filter(|v| **v == 0.0).count()
    );

    println!(
        "smoothed CE of a confident hit {:.4}",
        label_smoothed_ce(&[4.0, 0.0, 0.0], 0, cfg.label_smoothing)?
    );

    // Minimise (a - 3)^2 + (b + 1)^2; b is treated as a bias, so it is not decayed.
    let mut groups = vec![
        ParamGroup::new("a", ArrayD::zeros(IxDyn(&[1])), false),
        ParamGroup::new("b", ArrayD::zeros(IxDyn(&[1])), true),
    ];
    for epoch in 0..cfg.epochs {
        let lr = cosine_lr(epoch, cfg.epochs, cfg.lr)?;
        for step in 0..25 {
            let (a, b) = (groups[0].values[[0]], groups[1].values[[0]]);
            groups[0].grads[[0]] = 2.0 * (a - 3.0);
            groups[1].grads[[0]] = 2.0 * (b + 1.0);
            clip_grad_l2(&mut groups, cfg.clip_norm)?;
            adamw_step(&mut groups, &cfg.adamw(lr), (epoch * 25 + step + 1) as u64)?;
        }
    }
    println!(
        "after {} epochs: a = {:.3}, b = {:.3}",
        cfg.epochs,
        groups[0].values[[0]],
        groups[1].values[[0]]
    );
    Ok(())
}
