use ndarray::{Array1, Array2, ArrayD, ArrayView1, Axis};
use rand::Rng;

use crate::decode::{Scorer, Vocabulary};
use crate::trainkit::{fold_lambda, label_smoothed_ce_grad, log_softmax, ParamGroup};
use crate::{Error, Result};

/// Frame-level audio features and their time mean.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioContext {
    features: Array2<f64>,
    pooled: Array1<f64>,
}

impl AudioContext {
    pub fn new(features: Array2<f64>) -> Result<Self> {
        let (t, d) = features.dim();
        if t == 0 || d == 0 {
            return Err(Error::Shape(format!(
                "audio features must be non-empty, got {t}x{d}"
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("audio features".into()));
        }
        let pooled = features.mean_axis(Axis(0)).expect("non-empty");
        Ok(AudioContext { features, pooled })
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn pooled(&self) -> &Array1<f64> {
        &self.pooled
    }
}

/// Parameters of the log-linear captioner.
///
/// `h = W_aᵀ·pooled + mean(E[prefix])`, `logits = W_oᵀ·h + b_o`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyParams {
    /// `d_a × d`
    pub w_a: Array2<f64>,
    /// `V × d`
    pub e: Array2<f64>,
    /// `d × V`
    pub w_o: Array2<f64>,
    /// `V`
    pub b_o: Array1<f64>,
}

pub const PARAM_NAMES: [&str; 4] = ["w_a", "e", "w_o", "b_o"];

impl ToyParams {
    pub fn zeros(d_audio: usize, d_model: usize, vocab_size: usize) -> Self {
        ToyParams {
            w_a: Array2::zeros((d_audio, d_model)),
            e: Array2::zeros((vocab_size, d_model)),
            w_o: Array2::zeros((d_model, vocab_size)),
            b_o: Array1::zeros(vocab_size),
        }
    }

    /// Every entry uniform in `[-0.1, 0.1)`.
    pub fn init_uniform<R: Rng + ?Sized>(
        d_audio: usize,
        d_model: usize,
        vocab_size: usize,
        rng: &mut R,
    ) -> Self {
        let mut p = Self::zeros(d_audio, d_model, vocab_size);
        for v in p
            .w_a
            .iter_mut()
            .chain(p.e.iter_mut())
            .chain(p.w_o.iter_mut())
            .chain(p.b_o.iter_mut())
        {
            *v = rng.random_range(-0.1..0.1);
        }
        p
    }

    pub fn d_audio(&self) -> usize {
        self.w_a.nrows()
    }

    pub fn d_model(&self) -> usize {
        self.w_a.ncols()
    }

    pub fn vocab_size(&self) -> usize {
        self.b_o.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (d_a, d) = self.w_a.dim();
        let v = self.b_o.len();
        if self.e.dim() != (v, d) || self.w_o.dim() != (d, v) || d_a == 0 || d == 0 || v == 0 {
            return Err(Error::Shape(format!(
                "inconsistent toy parameters: w_a {:?}, e {:?}, w_o {:?}, b_o {:?}",
                self.w_a.dim(),
                self.e.dim(),
                self.w_o.dim(),
                self.b_o.dim()
            )));
        }
        if self
            .tensors()
            .iter()
            .any(|t| t.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::NonFinite("toy parameters".into()));
        }
        Ok(())
    }

    fn tensors(&self) -> [ArrayD<f64>; 4] {
        [
            self.w_a.clone().into_dyn(),
            self.e.clone().into_dyn(),
            self.w_o.clone().into_dyn(),
            self.b_o.clone().into_dyn(),
        ]
    }

    /// Optimizer view; only `b_o` is a bias.
    pub fn to_groups(&self) -> Vec<ParamGroup> {
        PARAM_NAMES
            .iter()
            .zip(self.tensors())
            .map(|(name, t)| ParamGroup::new(*name, t, *name == "b_o"))
            .collect()
    }

    /// Copy values back from [`to_groups`](Self::to_groups) output.
    pub fn copy_from_groups(&mut self, groups: &[ParamGroup]) -> Result<()> {
        let find = |name: &str| {
            groups
                .iter()
                .find(|g| g.name == name)
                .ok_or_else(|| Error::InvalidArgument(format!("missing parameter group {name}")))
        };
        let w_a = find("w_a")?.values.clone().into_dimensionality();
        let e = find("e")?.values.clone().into_dimensionality();
        let w_o = find("w_o")?.values.clone().into_dimensionality();
        let b_o = find("b_o")?.values.clone().into_dimensionality();
        let shape_err = |_| Error::Shape("parameter group rank".into());
        let next = ToyParams {
            w_a: w_a.map_err(shape_err)?,
            e: e.map_err(shape_err)?,
            w_o: w_o.map_err(shape_err)?,
            b_o: b_o.map_err(shape_err)?,
        };
        if (next.w_a.dim(), next.e.dim(), next.w_o.dim(), next.b_o.dim())
            != (self.w_a.dim(), self.e.dim(), self.w_o.dim(), self.b_o.dim())
        {
            return Err(Error::Shape("parameter group shapes changed".into()));
        }
        *self = next;
        Ok(())
    }

    /// Write these gradients into the matching groups' `grads`.
    pub fn write_grads(&self, groups: &mut [ParamGroup]) -> Result<()> {
        for (name, t) in PARAM_NAMES.iter().zip(self.tensors()) {
            let group = groups
                .iter_mut()
                .find(|g| g.name == *name)
                .ok_or_else(|| Error::InvalidArgument(format!("missing parameter group {name}")))?;
            if group.grads.shape() != t.shape() {
                return Err(Error::Shape(format!("gradient of {name}")));
            }
            group.grads = t;
        }
        Ok(())
    }

    fn check_ids(&self, ids: &[usize]) -> Result<()> {
        match ids.iter().find(|&&id| id >= self.vocab_size()) {
            Some(&id) => Err(Error::UnknownToken(id)),
            None => Ok(()),
        }
    }

    fn check_audio(&self, pooled: ArrayView1<f64>) -> Result<()> {
        if pooled.len() != self.d_audio() {
            return Err(Error::Shape(format!(
                "audio dim {} but model expects {}",
                pooled.len(),
                self.d_audio()
            )));
        }
        Ok(())
    }

    pub fn hidden(&self, pooled: ArrayView1<f64>, prefix: &[usize]) -> Result<Array1<f64>> {
        if prefix.is_empty() {
            return Err(Error::InvalidArgument(
                "prefix must start with a start token".into(),
            ));
        }
        self.check_audio(pooled)?;
        self.check_ids(prefix)?;
        let mut h = self.w_a.t().dot(&pooled);
        let scale = 1.0 / prefix.len() as f64;
        for &id in prefix {
            h.scaled_add(scale, &self.e.row(id));
        }
        Ok(h)
    }

    pub fn forward(&self, audio: &AudioContext, prefix: &[usize]) -> Result<Array1<f64>> {
        let h = self.hidden(audio.pooled().view(), prefix)?;
        Ok(self.w_o.t().dot(&h) + &self.b_o)
    }
}

/// One teacher-forced training sequence.
///
/// Position `t` feeds the weighted token mix `inputs[t]` and predicts
/// `targets[t]`. A plain caption has one `(token, 1.0)` per position; a mixup
/// pair has two entries weighted `λ` and `1 - λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub audio: Array1<f64>,
    pub inputs: Vec<Vec<(usize, f64)>>,
    pub targets: Vec<usize>,
}

impl Example {
    /// Inputs `[start, w1..wn]`, targets `[w1..wn, eos]`.
    pub fn teacher_forced(audio: Array1<f64>, start: usize, caption: &[usize], eos: usize) -> Self {
        let inputs = std::iter::once(start)
            .chain(caption.iter().copied())
            .map(|id| vec![(id, 1.0)])
            .collect();
        let targets = caption
            .iter()
            .copied()
            .chain(std::iter::once(eos))
            .collect();
        Example {
            audio,
            inputs,
            targets,
        }
    }

    /// Mix two captions with a folded weight `λ`. Audio and input embeddings
    /// are mixed; targets stay those of the first caption. The partner is
    /// padded with `pad` or truncated to the first caption's length.
    #[allow(clippy::too_many_arguments)]
    pub fn mixed(
        audio_1: ArrayView1<f64>,
        audio_2: ArrayView1<f64>,
        start_1: usize,
        caption_1: &[usize],
        start_2: usize,
        caption_2: &[usize],
        lambda: f64,
        pad: usize,
        eos: usize,
    ) -> Result<Self> {
        if audio_1.len() != audio_2.len() {
            return Err(Error::Shape(format!(
                "audio {} vs {}",
                audio_1.len(),
                audio_2.len()
            )));
        }
        let lambda = fold_lambda(lambda);
        let partner: Vec<usize> = std::iter::once(start_2)
            .chain(caption_2.iter().copied())
            .chain(std::iter::repeat(pad))
            .take(caption_1.len() + 1)
            .collect();
        let mut ex = Example::teacher_forced(audio_1.to_owned(), start_1, caption_1, eos);
        ex.audio = &audio_1 * lambda + &audio_2 * (1.0 - lambda);
        for (slot, other) in ex.inputs.iter_mut().zip(partner) {
            slot[0].1 = lambda;
            slot.push((other, 1.0 - lambda));
        }
        Ok(ex)
    }

    fn check(&self, params: &ToyParams) -> Result<()> {
        if self.inputs.len() != self.targets.len() || self.inputs.is_empty() {
            return Err(Error::LengthMismatch {
                left: self.inputs.len(),
                right: self.targets.len(),
            });
        }
        params.check_audio(self.audio.view())?;
        params.check_ids(&self.targets)?;
        for slot in &self.inputs {
            params.check_ids(&slot.iter().map(|(id, _)| *id).collect::<Vec<_>>())?;
        }
        Ok(())
    }
}

/// Mean label-smoothed cross-entropy over every target position of the
/// batch, and its exact gradient.
pub fn loss_and_grad(
    params: &ToyParams,
    batch: &[Example],
    epsilon: f64,
) -> Result<(f64, ToyParams)> {
    let mut grads = ToyParams::zeros(params.d_audio(), params.d_model(), params.vocab_size());
    let positions: usize = batch.iter().map(|ex| ex.targets.len()).sum();
    if positions == 0 {
        return Err(Error::InvalidArgument("empty training batch".into()));
    }
    let coef = 1.0 / positions as f64;
    let mut total = 0.0;

    for ex in batch {
        ex.check(params)?;
        let proj = params.w_a.t().dot(&ex.audio);
        let mut prefix_sum = Array1::<f64>::zeros(params.d_model());
        // dh_t / (t + 1), accumulated backwards into every earlier input.
        let mut scaled_dh = Vec::with_capacity(ex.targets.len());
        let mut dh_total = Array1::<f64>::zeros(params.d_model());

        for (t, (slot, &target)) in ex.inputs.iter().zip(&ex.targets).enumerate() {
            for &(id, w) in slot {
                prefix_sum.scaled_add(w, &params.e.row(id));
            }
            let h = &proj + &(&prefix_sum / (t + 1) as f64);
            let logits = params.w_o.t().dot(&h) + &params.b_o;
            let (loss, dlogits) =
                label_smoothed_ce_grad(logits.as_slice().unwrap(), target, epsilon)?;
            total += loss;
            let dlogits = Array1::from(dlogits) * coef;

            grads.b_o += &dlogits;
            grads.w_o.zip_mut_with(&outer(&h, &dlogits), |g, v| *g += v);
            let dh = params.w_o.dot(&dlogits);
            dh_total += &dh;
            scaled_dh.push(dh / (t + 1) as f64);
        }

        grads
            .w_a
            .zip_mut_with(&outer(&ex.audio, &dh_total), |g, v| *g += v);
        let mut suffix = Array1::<f64>::zeros(params.d_model());
        for (slot, dh) in ex.inputs.iter().zip(scaled_dh).rev() {
            suffix += &dh;
            for &(id, w) in slot {
                grads.e.row_mut(id).scaled_add(w, &suffix);
            }
        }
    }
    Ok((total * coef, grads))
}

/// Loss only.
pub fn batch_loss(params: &ToyParams, batch: &[Example], epsilon: f64) -> Result<f64> {
    let positions: usize = batch.iter().map(|ex| ex.targets.len()).sum();
    if positions == 0 {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let mut total = 0.0;
    for ex in batch {
        ex.check(params)?;
        let proj = params.w_a.t().dot(&ex.audio);
        let mut prefix_sum = Array1::<f64>::zeros(params.d_model());
        for (t, (slot, &target)) in ex.inputs.iter().zip(&ex.targets).enumerate() {
            for &(id, w) in slot {
                prefix_sum.scaled_add(w, &params.e.row(id));
            }
            let h = &proj + &(&prefix_sum / (t + 1) as f64);
            let logits = params.w_o.t().dot(&h) + &params.b_o;
            let (loss, _) = label_smoothed_ce_grad(logits.as_slice().unwrap(), target, epsilon)?;
            total += loss;
        }
    }
    Ok(total / positions as f64)
}

fn outer(a: &Array1<f64>, b: &Array1<f64>) -> Array2<f64> {
    let col = a.view().insert_axis(Axis(1));
    let row = b.view().insert_axis(Axis(0));
    col.dot(&row)
}

/// Parameters plus vocabulary: a complete captioner.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyModel {
    pub params: ToyParams,
    pub vocab: Vocabulary,
}

impl ToyModel {
    pub fn new(params: ToyParams, vocab: Vocabulary) -> Result<Self> {
        params.validate()?;
        if params.vocab_size() != vocab.len() {
            return Err(Error::Shape(format!(
                "parameters cover {} tokens, vocabulary has {}",
                params.vocab_size(),
                vocab.len()
            )));
        }
        Ok(ToyModel { params, vocab })
    }
}

impl Scorer for ToyModel {
    type Context = AudioContext;

    fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    fn next_logprobs(&self, context: &AudioContext, prefix: &[usize]) -> Result<Vec<f64>> {
        let logits = self.params.forward(context, prefix)?;
        Ok(log_softmax(logits.as_slice().unwrap()))
    }
}
