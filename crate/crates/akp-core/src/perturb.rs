//! Hot-swap schedules: replace the head's activation functions or the
//! trainer's loss function at fixed epochs without touching weights,
//! optimizer state or the RNG.
//!
//! Epochs are 0-indexed and a swap applies at the start of the named epoch.
//! Between swap points the active value cycles through the sequence (k swaps
//! elapsed selects `sequence[k mod len]`); from the last swap epoch onward
//! the policy holds `final_value`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::activation::ActivationKind;
use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::network::Network;

/// The default swap points shared by activation and loss schedules.
pub const DEFAULT_SWAP_EPOCHS: [usize; 7] = [3, 6, 9, 12, 15, 18, 21];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SwapTarget {
    Activation,
    Loss,
}

impl fmt::Display for SwapTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SwapTarget::Activation => "activation",
            SwapTarget::Loss => "loss",
        })
    }
}

/// One applied swap, as recorded in the run's event log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapEvent {
    pub epoch: usize,
    pub target: SwapTarget,
    pub old_value: String,
    pub new_value: String,
}

impl SwapEvent {
    pub fn csv_header() -> &'static str {
        "epoch,target,old,new"
    }

    pub fn to_csv_row(&self) -> String {
        format!("{},{},{},{}", self.epoch, self.target, self.old_value, self.new_value)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapPolicy<T> {
    sequence: Vec<T>,
    swap_epochs: Vec<usize>,
    final_value: T,
}

impl<T: Clone + PartialEq> SwapPolicy<T> {
    fn validated(sequence: Vec<T>, swap_epochs: Vec<usize>, final_value: T) -> Result<Self> {
        if sequence.is_empty() {
            return Err(Error::Policy("swap sequence must be non-empty".into()));
        }
        if swap_epochs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Policy(
                "swap epochs must be strictly increasing".into(),
            ));
        }
        Ok(SwapPolicy {
            sequence,
            swap_epochs,
            final_value,
        })
    }

    pub fn sequence(&self) -> &[T] {
        &self.sequence
    }

    pub fn swap_epochs(&self) -> &[usize] {
        &self.swap_epochs
    }

    pub fn final_value(&self) -> &T {
        &self.final_value
    }

    pub fn is_swap_epoch(&self, epoch: usize) -> bool {
        self.swap_epochs.contains(&epoch)
    }

    pub fn max_swap_epoch(&self) -> Option<usize> {
        self.swap_epochs.last().copied()
    }

    /// Value in force at the given epoch.
    pub fn active_value_at(&self, epoch: usize) -> T {
        if let Some(&last) = self.swap_epochs.last() {
            if epoch >= last {
                return self.final_value.clone();
            }
        }
        let elapsed = self.swap_epochs.iter().filter(|&&e| e <= epoch).count();
        self.sequence[elapsed % self.sequence.len()].clone()
    }
}

impl SwapPolicy<ActivationKind> {
    /// Activation schedule; softmax may not appear anywhere in it.
    pub fn activation(
        sequence: Vec<ActivationKind>,
        swap_epochs: Vec<usize>,
        final_value: ActivationKind,
    ) -> Result<Self> {
        if sequence.contains(&ActivationKind::Softmax) || final_value == ActivationKind::Softmax {
            return Err(Error::Policy(
                "softmax may only occupy the final layer slot".into(),
            ));
        }
        Self::validated(sequence, swap_epochs, final_value)
    }

    /// Tanh -> Softplus -> ReLU cycling at the default epochs, holding ReLU
    /// after the last swap.
    pub fn default_activation() -> Self {
        Self::activation(
            vec![
                ActivationKind::Tanh,
                ActivationKind::Softplus,
                ActivationKind::ReLU,
            ],
            DEFAULT_SWAP_EPOCHS.to_vec(),
            ActivationKind::ReLU,
        )
        .expect("default activation policy is valid")
    }
}

impl SwapPolicy<LossKind> {
    pub fn loss(
        sequence: Vec<LossKind>,
        swap_epochs: Vec<usize>,
        final_value: LossKind,
    ) -> Result<Self> {
        Self::validated(sequence, swap_epochs, final_value)
    }

    /// Poisson -> KLDivergence -> SparseCategoricalCE cycling at the default
    /// epochs, holding sparse cross-entropy after the last swap.
    pub fn default_loss() -> Self {
        Self::loss(
            vec![
                LossKind::Poisson,
                LossKind::KLDivergence,
                LossKind::SparseCategoricalCE,
            ],
            DEFAULT_SWAP_EPOCHS.to_vec(),
            LossKind::SparseCategoricalCE,
        )
        .expect("default loss policy is valid")
    }
}

/// At a swap epoch, write the scheduled activation into head layers 1 and 2.
/// Layer 3 and all weights are untouched. Returns the logged event, or None
/// when the epoch is not a swap point.
pub fn apply_activation_swap(
    net: &mut Network,
    policy: &SwapPolicy<ActivationKind>,
    epoch: usize,
) -> Result<Option<SwapEvent>> {
    if !policy.is_swap_epoch(epoch) {
        return Ok(None);
    }
    let new_value = policy.active_value_at(epoch);
    if new_value == ActivationKind::Softmax {
        return Err(Error::Policy(
            "softmax may not be assigned to layers 1-2".into(),
        ));
    }
    let old_value = net.head[0].activation;
    net.head[0].activation = new_value;
    net.head[1].activation = new_value;
    Ok(Some(SwapEvent {
        epoch,
        target: SwapTarget::Activation,
        old_value: old_value.to_string(),
        new_value: new_value.to_string(),
    }))
}

/// Loss-function counterpart of `apply_activation_swap`, rewriting the
/// trainer's loss slot.
pub fn apply_loss_swap(
    loss_slot: &mut LossKind,
    policy: &SwapPolicy<LossKind>,
    epoch: usize,
) -> Result<Option<SwapEvent>> {
    if !policy.is_swap_epoch(epoch) {
        return Ok(None);
    }
    let new_value = policy.active_value_at(epoch);
    let old_value = *loss_slot;
    *loss_slot = new_value;
    Ok(Some(SwapEvent {
        epoch,
        target: SwapTarget::Loss,
        old_value: old_value.to_string(),
        new_value: new_value.to_string(),
    }))
}
