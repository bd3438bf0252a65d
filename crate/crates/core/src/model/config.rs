use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::autodiff::AdamConfig;
use crate::error::{Error, Result};
use crate::nn::RowModelKind;

/// Architecture and training hyperparameters shared by both model kinds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub hidden: usize,
    pub gat_layers: usize,
    pub gat_heads: usize,
    pub row_model: RowModelKind,
    pub row_layers: usize,
    pub row_heads: usize,
    /// Transformer depth of the AGE-D encoder and decoder.
    pub age_layers: usize,
    pub age_heads: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub clip_norm: f64,
    pub val_fraction: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        ModelConfig {
            hidden: 32,
            gat_layers: 1,
            gat_heads: 1,
            row_model: RowModelKind::Transformer,
            row_layers: 3,
            row_heads: 4,
            age_layers: 2,
            age_heads: 4,
            lr: adam.lr,
            beta1: adam.beta1,
            beta2: adam.beta2,
            eps: adam.eps,
            weight_decay: adam.weight_decay,
            batch_size: 32,
            clip_norm: 5.0,
            val_fraction: 0.3,
            max_epochs: 1000,
            patience: 10,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
            weight_decay: self.weight_decay,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::param(m));
        if self.hidden == 0 || self.hidden % 2 != 0 {
            return fail(format!("hidden must be even and positive, got {}", self.hidden));
        }
        if self.gat_heads == 0 || self.hidden % self.gat_heads != 0 {
            return fail(format!("hidden {} not divisible by gat_heads {}", self.hidden, self.gat_heads));
        }
        if self.row_model == RowModelKind::Transformer
            && (self.row_heads == 0 || self.hidden % self.row_heads != 0)
        {
            return fail(format!("hidden {} not divisible by row_heads {}", self.hidden, self.row_heads));
        }
        if self.row_layers == 0 || self.gat_layers == 0 {
            return fail("layer counts must be positive".into());
        }
        if self.age_layers == 0 || self.age_heads == 0 {
            return fail("AGE-D layers and heads must be positive".into());
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return fail(format!("val_fraction must lie in (0, 1), got {}", self.val_fraction));
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return fail("batch_size and max_epochs must be positive".into());
        }
        if !(self.lr > 0.0) || !(self.clip_norm > 0.0) || self.weight_decay < 0.0 {
            return fail("lr and clip_norm must be positive, weight_decay non-negative".into());
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment. Unset keys keep their defaults.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut cfg = ModelConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse {
                path: origin.to_path_buf(),
                line: i + 1,
                msg,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            cfg.set(key.trim(), value.trim()).map_err(err)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        ModelConfig::parse(&fs::read_to_string(path)?, path)
    }

    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("invalid value `{v}` for `{key}`"))
        }
        match key {
            "hidden" => self.hidden = num(key, value)?,
            "gat_layers" => self.gat_layers = num(key, value)?,
            "gat_heads" => self.gat_heads = num(key, value)?,
            "row_model" => {
                self.row_model = match value {
                    "transformer" => RowModelKind::Transformer,
                    "lstm" => RowModelKind::Lstm,
                    _ => return Err(format!("row_model must be transformer or lstm, got `{value}`")),
                }
            }
            "row_layers" => self.row_layers = num(key, value)?,
            "row_heads" => self.row_heads = num(key, value)?,
            "age_layers" => self.age_layers = num(key, value)?,
            "age_heads" => self.age_heads = num(key, value)?,
            "lr" => self.lr = num(key, value)?,
            "beta1" => self.beta1 = num(key, value)?,
            "beta2" => self.beta2 = num(key, value)?,
            "eps" => self.eps = num(key, value)?,
            "weight_decay" => self.weight_decay = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "clip_norm" => self.clip_norm = num(key, value)?,
            "val_fraction" => self.val_fraction = num(key, value)?,
            "max_epochs" => self.max_epochs = num(key, value)?,
            "patience" => self.patience = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_training_protocol() {
        let c = ModelConfig::default();
        assert_eq!(c.batch_size, 32);
        assert_eq!(c.clip_norm, 5.0);
        assert_eq!(c.val_fraction, 0.3);
        assert_eq!(c.gat_layers, 1);
        assert_eq!(c.row_layers, 3);
        c.validate().unwrap();
    }

    #[test]
    fn parses_key_value_lines() {
        let text = "# small model\nhidden = 16\nrow_model = lstm  # recurrent rows\n\nlr=0.01\n";
        let c = ModelConfig::parse(text, Path::new("small.cfg")).unwrap();
        assert_eq!(c.hidden, 16);
        assert_eq!(c.row_model, RowModelKind::Lstm);
        assert_eq!(c.lr, 0.01);
        assert_eq!(c.patience, 10);
    }

    #[test]
    fn reports_the_offending_line() {
        let e = ModelConfig::parse("hidden = 16\nbogus = 1\n", Path::new("x.cfg")).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = ModelConfig::parse("hidden = 15\n", Path::new("x.cfg")).unwrap_err();
        assert!(matches!(e, Error::InvalidParam(_)));
        let e = ModelConfig::parse("val_fraction = 1.0\n", Path::new("x.cfg")).unwrap_err();
        assert!(matches!(e, Error::InvalidParam(_)));
    }
}
