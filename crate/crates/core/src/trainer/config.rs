use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::advantage::DEFAULT_EPSILON;
use crate::error::{Error, Result};
use crate::policy::UpdateConfig;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Identity transform only, per-question normalisation.
    Grpo,
    /// Identity plus `N` transforms, normalised across the whole group.
    TaGrpo,
    /// Identity plus `N` transforms, each normalised on its own.
    TaNoPooling,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Grpo, Regime::TaGrpo, Regime::TaNoPooling];

    pub fn name(self) -> &'static str {
        match self {
            Regime::Grpo => "grpo",
            Regime::TaGrpo => "ta_grpo",
            Regime::TaNoPooling => "ta_no_pooling",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Training hyperparameters. Defaults follow the published table (N = 3,
/// G = 8, lr 1e-6, batch 128, KL 0.01, clip [0.8, 1.2], eps 1e-8); the tiny
/// learning rate is meant for LLM fine-tuning, so tabular runs normally
/// override `lr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub regime: Regime,
    /// Rollouts per group member (G).
    #[serde(alias = "G")]
    pub group_size: usize,
    /// Transforms grouped with each question (N); ignored by `grpo`.
    #[serde(alias = "N")]
    pub n_transforms: usize,
    pub lr: f64,
    pub clip_low: f64,
    pub clip_high: f64,
    pub kl_coef: f64,
    pub epsilon: f64,
    pub iterations: usize,
    /// Questions per iteration; the whole population when it is at least that large.
    pub batch_size: usize,
    /// Optimisation steps taken on each iteration's rollouts.
    pub update_epochs: usize,
    pub eval_k: Vec<usize>,
    pub eval_samples: usize,
    /// Weights over the scenario's transforms `0..=N` followed by one unseen
    /// transform. Uniform when absent.
    pub holdout_weights: Option<Vec<f64>>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            regime: Regime::TaGrpo,
            group_size: 8,
            n_transforms: 3,
            lr: 1e-6,
            clip_low: 0.8,
            clip_high: 1.2,
            kl_coef: 0.01,
            epsilon: DEFAULT_EPSILON,
            iterations: 200,
            batch_size: 128,
            update_epochs: 1,
            eval_k: vec![1, 8, 16, 32],
            eval_samples: 32,
            holdout_weights: None,
            seed: 0,
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "regime",
    "group_size",
    "G",
    "n_transforms",
    "N",
    "lr",
    "clip_low",
    "clip_high",
    "kl_coef",
    "epsilon",
    "iterations",
    "batch_size",
    "update_epochs",
    "eval_k",
    "eval_samples",
    "holdout_weights",
    "seed",
];

impl TrainConfig {
    /// Transforms actually grouped with each question.
    pub fn effective_n(&self) -> usize {
        match self.regime {
            Regime::Grpo => 0,
            Regime::TaGrpo | Regime::TaNoPooling => self.n_transforms,
        }
    }

    pub fn update(&self) -> UpdateConfig {
        UpdateConfig {
            lr: self.lr,
            clip_low: self.clip_low,
            clip_high: self.clip_high,
            kl_coef: self.kl_coef,
        }
    }

    pub fn with_regime(&self, regime: Regime) -> Self {
        Self {
            regime,
            ..self.clone()
        }
    }

    /// Parses a flat JSON object. Every unknown key and every bad value is
    /// reported together.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Validation(vec![format!("not valid JSON: {e}")]))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Validation(vec!["config must be a JSON object".into()]))?;
        let unknown: Vec<String> = obj
            .keys()
            .filter(|k| !KNOWN_KEYS.contains(&k.as_str()))
            .map(|k| format!("unknown key `{k}`"))
            .collect();
        if !unknown.is_empty() {
            return Err(Error::Validation(unknown));
        }
        let mut bad = Vec::new();
        let defaults = serde_json::to_value(TrainConfig::default())?;
        for (k, v) in obj {
            let canonical = match k.as_str() {
                "G" => "group_size",
                "N" => "n_transforms",
                other => other,
            };
            let mut probe = defaults.clone();
            probe[canonical] = v.clone();
            if let Err(e) = serde_json::from_value::<TrainConfig>(probe) {
                bad.push(format!("`{k}`: {e}"));
            }
        }
        if !bad.is_empty() {
            return Err(Error::Validation(bad));
        }
        let cfg: TrainConfig =
            serde_json::from_value(value).map_err(|e| Error::Validation(vec![e.to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.group_size == 0 {
            bad.push("`group_size` must be >= 1".to_string());
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            bad.push(format!("`lr` must be positive, got {}", self.lr));
        }
        if !(self.clip_low > 0.0 && self.clip_low <= 1.0) {
            bad.push(format!("`clip_low` must lie in (0, 1], got {}", self.clip_low));
        }
        if !(self.clip_high >= 1.0 && self.clip_high.is_finite()) {
            bad.push(format!("`clip_high` must be >= 1, got {}", self.clip_high));
        }
        if !(self.kl_coef >= 0.0 && self.kl_coef.is_finite()) {
            bad.push(format!("`kl_coef` must be >= 0, got {}", self.kl_coef));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            bad.push(format!("`epsilon` must be >= 0, got {}", self.epsilon));
        }
        if self.iterations == 0 {
            bad.push("`iterations` must be >= 1".to_string());
        }
        if self.batch_size == 0 {
            bad.push("`batch_size` must be >= 1".to_string());
        }
        if self.update_epochs == 0 {
            bad.push("`update_epochs` must be >= 1".to_string());
        }
        if self.eval_k.is_empty() || self.eval_k.contains(&0) {
            bad.push("`eval_k` must be a nonempty list of positive integers".to_string());
        }
        if let Some(&k) = self.eval_k.iter().max() {
            if k > self.eval_samples {
                bad.push(format!("`eval_samples` = {} is below the largest k = {k}", self.eval_samples));
            }
        }
        if let Some(w) = &self.holdout_weights {
            if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
                bad.push("`holdout_weights` must be nonnegative with a positive sum".to_string());
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(bad))
        }
    }

    /// Checks the config against a scenario on top of [`TrainConfig::validate`].
    pub fn validate_for(&self, scenario: &Scenario) -> Result<()> {
        self.validate()?;
        let mut bad = Vec::new();
        if self.effective_n() > scenario.n_transforms() {
            bad.push(format!(
                "`n_transforms` = {} exceeds the scenario's {} transforms",
                self.n_transforms,
                scenario.n_transforms()
            ));
        }
        if let Some(w) = &self.holdout_weights {
            if w.len() != scenario.n_transforms() + 2 {
                bad.push(format!(
                    "`holdout_weights` needs {} entries (transforms 0..={} plus one unseen), got {}",
                    scenario.n_transforms() + 2,
                    scenario.n_transforms(),
                    w.len()
                ));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(bad))
        }
    }
}
