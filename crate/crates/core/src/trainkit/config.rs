use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::optim::AdamWConfig;
use super::specaug::SpecAugmentConfig;
use crate::{Error, Result};

/// Training and decoding hyperparameters.
///
/// Two presets exist, one per target dataset family: [`TrainConfig::ac`]
/// (AudioCaps-style short captions) and [`TrainConfig::cl`] (Clotho-style
/// long captions).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    pub clip_norm: f64,
    pub label_smoothing: f64,
    pub mixup: bool,
    pub mixup_alpha: f64,
    pub spec_augment: bool,
    pub beam_size: usize,
    pub min_len: usize,
    pub max_len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Ac,
    Cl,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ac" => Ok(Preset::Ac),
            "cl" => Ok(Preset::Cl),
            other => Err(Error::Config(format!(
                "unknown preset `{other}` (expected ac or cl)"
            ))),
        }
    }
}

/// Config file contents: an optional `base` preset plus overrides.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    base: Option<String>,
    epochs: Option<usize>,
    batch_size: Option<usize>,
    lr: Option<f64>,
    beta1: Option<f64>,
    beta2: Option<f64>,
    eps: Option<f64>,
    weight_decay: Option<f64>,
    clip_norm: Option<f64>,
    label_smoothing: Option<f64>,
    mixup: Option<bool>,
    mixup_alpha: Option<f64>,
    spec_augment: Option<bool>,
    beam_size: Option<usize>,
    min_len: Option<usize>,
    max_len: Option<usize>,
}

macro_rules! apply {
    ($cfg:ident, $file:ident, $($field:ident),*) => {
        $(if let Some(v) = $file.$field { $cfg.$field = v; })*
    };
}

impl TrainConfig {
    fn shared(
        epochs: usize,
        clip_norm: f64,
        label_smoothing: f64,
        beam_size: usize,
        max_len: usize,
    ) -> Self {
        TrainConfig {
            epochs,
            batch_size: 512,
            lr: 5e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 2.0,
            clip_norm,
            label_smoothing,
            mixup: true,
            mixup_alpha: 0.4,
            spec_augment: true,
            beam_size,
            min_len: 3,
            max_len,
        }
    }

    pub fn ac() -> Self {
        Self::shared(100, 10.0, 0.1, 2, 30)
    }

    pub fn cl() -> Self {
        Self::shared(400, 1.0, 0.2, 3, 20)
    }

    pub fn preset(preset: Preset) -> Self {
        match preset {
            Preset::Ac => Self::ac(),
            Preset::Cl => Self::cl(),
        }
    }

    /// Parse TOML. Keys not given keep the value of the `base` preset
    /// (`"ac"` when absent).
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let base = file.base.as_deref().unwrap_or("ac").parse()?;
        let mut cfg = Self::preset(base);
        apply!(
            cfg,
            file,
            epochs,
            batch_size,
            lr,
            beta1,
            beta2,
            eps,
            weight_decay,
            clip_norm,
            label_smoothing,
            mixup,
            mixup_alpha,
            spec_augment,
            beam_size,
            min_len,
            max_len
        );
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lr", self.lr),
            ("eps", self.eps),
            ("clip_norm", self.clip_norm),
            ("mixup_alpha", self.mixup_alpha),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Config(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if self.weight_decay.is_nan() || self.weight_decay < 0.0 {
            return Err(Error::Config("weight_decay must be non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::Config("betas must lie in [0, 1)".into()));
        }
        if !(0.0..1.0).contains(&self.label_smoothing) {
            return Err(Error::Config("label_smoothing must lie in [0, 1)".into()));
        }
        if self.epochs == 0 || self.batch_size == 0 || self.beam_size == 0 {
            return Err(Error::Config(
                "epochs, batch_size and beam_size must be positive".into(),
            ));
        }
        if self.max_len == 0 || self.min_len > self.max_len {
            return Err(Error::Config(
                "need 1 <= max_len and min_len <= max_len".into(),
            ));
        }
        Ok(())
    }

    pub fn adamw(&self, lr: f64) -> AdamWConfig {
        AdamWConfig {
            lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
            weight_decay: self.weight_decay,
        }
    }

    pub fn spec_augment_config(&self) -> SpecAugmentConfig {
        SpecAugmentConfig::default()
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::ac()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let ac = TrainConfig::ac();
        let cl = TrainConfig::cl();
        assert_eq!(
            (ac.epochs, ac.clip_norm, ac.label_smoothing),
            (100, 10.0, 0.1)
        );
        assert_eq!(
            (cl.epochs, cl.clip_norm, cl.label_smoothing),
            (400, 1.0, 0.2)
        );
        assert_eq!(
            (ac.beam_size, ac.max_len, cl.beam_size, cl.max_len),
            (2, 30, 3, 20)
        );
        for c in [&ac, &cl] {
            assert_eq!(c.batch_size, 512);
            assert_eq!(c.lr, 5e-4);
            assert_eq!(c.weight_decay, 2.0);
            assert_eq!(c.mixup_alpha, 0.4);
            assert_eq!(c.min_len, 3);
            c.validate().unwrap();
        }
    }

    #[test]
    fn overrides_apply_on_top_of_base() {
        let cfg = TrainConfig::from_toml("base = \"cl\"\nepochs = 5\nlr = 0.01\n").unwrap();
        assert_eq!(cfg.epochs, 5);
        assert_eq!(cfg.lr, 0.01);
        assert_eq!(cfg.clip_norm, 1.0);
        assert_eq!(TrainConfig::from_toml("").unwrap(), TrainConfig::ac());
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = TrainConfig::cl();
        assert_eq!(TrainConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn bad_files() {
        assert!(TrainConfig::from_toml("epochz = 3").is_err());
        assert!(TrainConfig::from_toml("base = \"ma\"").is_err());
        assert!(TrainConfig::from_toml("label_smoothing = 1.0").is_err());
        assert!(TrainConfig::from_toml("min_len = 40").is_err());
    }
}
