//! Experiment configuration. Every run embeds the fully resolved config, so
//! defaults are auditable and any artifact can be regenerated from its
//! config hash plus seed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use akp_core::activation::ActivationKind;
use akp_core::data::SynthSpec;
use akp_core::init::InitializerKind;
use akp_core::loss::LossKind;
use akp_core::optim::{Optimizer, RmsPropState, SgdState};
use akp_core::perturb::{SwapPolicy, DEFAULT_SWAP_EPOCHS};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    A,
    B,
    C,
    #[serde(rename = "custom")]
    Custom,
}

impl GroupKind {
    pub fn name(&self) -> &'static str {
        match self {
            GroupKind::A => "A",
            GroupKind::B => "B",
            GroupKind::C => "C",
            GroupKind::Custom => "custom",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedPolicy {
    /// One seed reused for every trial.
    Fixed(u64),
    /// A fresh entropy seed per trial, recorded in the run record so the
    /// trial replays exactly.
    RandomRecorded,
}

fn default_sgd_lr() -> f64 {
    0.01
}
fn default_rmsprop_lr() -> f64 {
    0.001
}
fn default_rho() -> f64 {
    0.9
}
fn default_eps() -> f64 {
    1e-7
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptimizerConfig {
    Sgd {
        #[serde(default = "default_sgd_lr")]
        lr: f64,
    },
    RmsProp {
        #[serde(default = "default_rmsprop_lr")]
        lr: f64,
        #[serde(default = "default_rho")]
        rho: f64,
        #[serde(default = "default_eps")]
        eps: f64,
    },
}

impl OptimizerConfig {
    pub fn build(&self) -> Result<Optimizer> {
        Ok(match *self {
            OptimizerConfig::Sgd { lr } => Optimizer::Sgd(SgdState::new(lr)?),
            OptimizerConfig::RmsProp { lr, rho, eps } => {
                Optimizer::RmsProp(RmsPropState::new(lr, rho, eps)?)
            }
        })
    }

    pub fn rmsprop_defaults() -> Self {
        OptimizerConfig::RmsProp {
            lr: default_rmsprop_lr(),
            rho: default_rho(),
            eps: default_eps(),
        }
    }

    pub fn sgd_defaults() -> Self {
        OptimizerConfig::Sgd {
            lr: default_sgd_lr(),
        }
    }
}

fn default_swap_epochs() -> Vec<usize> {
    DEFAULT_SWAP_EPOCHS.to_vec()
}

fn default_activation_sequence() -> Vec<ActivationKind> {
    vec![
        ActivationKind::Tanh,
        ActivationKind::Softplus,
        ActivationKind::ReLU,
    ]
}

fn default_activation_final() -> ActivationKind {
    ActivationKind::ReLU
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActivationPolicyConfig {
    pub sequence: Vec<ActivationKind>,
    pub swap_epochs: Vec<usize>,
    pub final_value: ActivationKind,
}

impl Default for ActivationPolicyConfig {
    fn default() -> Self {
        ActivationPolicyConfig {
            sequence: default_activation_sequence(),
            swap_epochs: default_swap_epochs(),
            final_value: default_activation_final(),
        }
    }
}

impl ActivationPolicyConfig {
    pub fn to_policy(&self) -> Result<SwapPolicy<ActivationKind>> {
        Ok(SwapPolicy::activation(
            self.sequence.clone(),
            self.swap_epochs.clone(),
            self.final_value,
        )?)
    }
}

fn default_loss_sequence() -> Vec<LossKind> {
    vec![
        LossKind::Poisson,
        LossKind::KLDivergence,
        LossKind::SparseCategoricalCE,
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossPolicyConfig {
    pub sequence: Vec<LossKind>,
    pub swap_epochs: Vec<usize>,
    pub final_value: LossKind,
}

impl Default for LossPolicyConfig {
    fn default() -> Self {
        LossPolicyConfig {
            sequence: default_loss_sequence(),
            swap_epochs: default_swap_epochs(),
            final_value: LossKind::SparseCategoricalCE,
        }
    }
}

impl LossPolicyConfig {
    pub fn to_policy(&self) -> Result<SwapPolicy<LossKind>> {
        Ok(SwapPolicy::loss(
            self.sequence.clone(),
            self.swap_epochs.clone(),
            self.final_value,
        )?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetSource {
    Synth(SynthSpec),
    Dir(PathBuf),
}

/// Full experiment description. Unknown keys in a config file are an error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub group: GroupKind,
    pub optimizer: OptimizerConfig,
    pub activation_policy: Option<ActivationPolicyConfig>,
    pub loss_policy: Option<LossPolicyConfig>,
    pub epochs: usize,
    pub trials: usize,
    pub seed: SeedPolicy,
    /// Layer-1 weight initializer per trial, consumed by group C.
    pub initializers: Vec<InitializerKind>,
    pub dataset: DatasetSource,
    /// (train, val, test) fractions.
    pub split: [f64; 3],
    pub split_seed: u64,
    pub happy_threshold: f64,
    pub batch_size: usize,
    /// Output width of the frozen extractor.
    pub feature_dim: usize,
    /// Widths of head layers 1 and 2; layer 3 always has 2 units.
    pub head_widths: [usize; 2],
    /// The extractor is shared by every trial of an experiment, so
    /// representations live in one feature basis.
    pub extractor_seed: u64,
    pub probe_seed: u64,
    pub probe_size: usize,
    /// Hidden activation when no activation policy is configured.
    pub default_activation: ActivationKind,
    /// Loss when no loss policy is configured.
    pub default_loss: LossKind,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            group: GroupKind::A,
            optimizer: OptimizerConfig::rmsprop_defaults(),
            activation_policy: Some(ActivationPolicyConfig::default()),
            loss_policy: None,
            epochs: 30,
            trials: 5,
            seed: SeedPolicy::Fixed(42),
            initializers: vec![
                InitializerKind::Zeros,
                InitializerKind::GlorotNormal,
                InitializerKind::HeUniform,
                InitializerKind::TruncatedNormal {
                    mean: 0.0,
                    std: 0.5,
                },
            ],
            dataset: DatasetSource::Synth(SynthSpec::default()),
            split: [0.7, 0.15, 0.15],
            split_seed: 99,
            happy_threshold: 0.75,
            batch_size: 16,
            feature_dim: 64,
            head_widths: [64, 32],
            extractor_seed: 7001,
            probe_seed: 4242,
            probe_size: 64,
            default_activation: ActivationKind::ReLU,
            default_loss: LossKind::BinaryCE,
        }
    }
}

impl ExperimentConfig {
    /// Fixed seed, 30 epochs, five trials.
    pub fn group_a() -> Self {
        ExperimentConfig::default()
    }

    /// Random recorded seeds, 30 epochs, five trials.
    pub fn group_b() -> Self {
        ExperimentConfig {
            group: GroupKind::B,
            seed: SeedPolicy::RandomRecorded,
            ..ExperimentConfig::default()
        }
    }

    /// One trial per initializer over 100 epochs.
    pub fn group_c() -> Self {
        ExperimentConfig {
            group: GroupKind::C,
            epochs: 100,
            trials: 4,
            ..ExperimentConfig::default()
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be >= 1".into()));
        }
        if self.epochs == 0 {
            return Err(HarnessError::Config("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(HarnessError::Config("batch_size must be >= 1".into()));
        }
        if self.feature_dim == 0 || self.head_widths.iter().any(|&w| w == 0) {
            return Err(HarnessError::Config(
                "feature_dim and head widths must be >= 1".into(),
            ));
        }
        if self.probe_size == 0 {
            return Err(HarnessError::Config("probe_size must be >= 1".into()));
        }
        if !(self.happy_threshold > 0.0 && self.happy_threshold < 1.0) {
            return Err(HarnessError::Config(format!(
                "happy_threshold must lie in (0, 1), got {}",
                self.happy_threshold
            )));
        }
        let sum: f64 = self.split.iter().sum();
        if self.split.iter().any(|&f| f < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(HarnessError::Config(format!(
                "split fractions must be non-negative and sum to 1, got {:?}",
                self.split
            )));
        }
        if self.group == GroupKind::C && self.trials != self.initializers.len() {
            return Err(HarnessError::Config(format!(
                "group C runs one trial per initializer: trials = {} but {} initializers",
                self.trials,
                self.initializers.len()
            )));
        }
        let mut max_swap = None;
        if let Some(p) = &self.activation_policy {
            max_swap = max_swap.max(p.to_policy()?.max_swap_epoch());
        }
        if let Some(p) = &self.loss_policy {
            max_swap = max_swap.max(p.to_policy()?.max_swap_epoch());
        }
        if let Some(last) = max_swap {
            if self.epochs < last {
                return Err(HarnessError::Config(format!(
                    "schedule violation: epochs ({}) ends before the last swap epoch ({last})",
                    self.epochs
                )));
            }
        }
        self.optimizer.build()?;
        Ok(())
    }

    /// Which swap schedules are active, for run bookkeeping.
    pub fn perturbation_name(&self) -> &'static str {
        match (self.activation_policy.is_some(), self.loss_policy.is_some()) {
            (false, false) => "none",
            (true, false) => "activation",
            (false, true) => "loss",
            (true, true) => "both",
        }
    }

    /// SHA-256 of the resolved config JSON.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(digest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_hash_is_stable() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.hash(), cfg.clone().hash());
        assert_eq!(cfg.hash().len(), 64);

        let other = ExperimentConfig {
            epochs: 31,
            ..ExperimentConfig::default()
        };
        assert_ne!(cfg.hash(), other.hash());
    }

    #[test]
    fn group_presets() {
        assert_eq!(ExperimentConfig::group_a().seed, SeedPolicy::Fixed(42));
        assert_eq!(ExperimentConfig::group_b().seed, SeedPolicy::RandomRecorded);
        let c = ExperimentConfig::group_c();
        assert_eq!(c.epochs, 100);
        assert_eq!(c.trials, 4);
        c.validate().unwrap();
    }

    #[test]
    fn schedule_violation_is_rejected() {
        let cfg = ExperimentConfig {
            epochs: 20,
            ..ExperimentConfig::default()
        };
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("schedule violation"), "{err}");
        // exactly reaching the last swap epoch is permitted
        let cfg = ExperimentConfig {
            epochs: 21,
            ..ExperimentConfig::default()
        };
        cfg.validate().unwrap();
    }

    #[test]
    fn group_c_trial_count_must_match_initializers() {
        let cfg = ExperimentConfig {
            trials: 3,
            ..ExperimentConfig::group_c()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_json_round_trip_with_unknown_key_rejection() {
        let cfg = ExperimentConfig::group_b();
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);

        let bad = json.replacen("\"epochs\"", "\"epochz\"", 1);
        assert!(serde_json::from_str::<ExperimentConfig>(&bad).is_err());
    }

    #[test]
    fn minimal_json_uses_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());

        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"optimizer": {"kind": "sgd"}, "seed": {"fixed": 7}}"#,
        )
        .unwrap();
        assert_eq!(cfg.optimizer, OptimizerConfig::Sgd { lr: 0.01 });
        assert_eq!(cfg.seed, SeedPolicy::Fixed(7));

        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"seed": "random-recorded"}"#).unwrap();
        assert_eq!(cfg.seed, SeedPolicy::RandomRecorded);
    }

    #[test]
    fn perturbation_names() {
        let mut cfg = ExperimentConfig::default();
        assert_eq!(cfg.perturbation_name(), "activation");
        cfg.loss_policy = Some(LossPolicyConfig::default());
        assert_eq!(cfg.perturbation_name(), "both");
        cfg.activation_policy = None;
        assert_eq!(cfg.perturbation_name(), "loss");
        cfg.loss_policy = None;
        assert_eq!(cfg.perturbation_name(), "none");
    }
}
