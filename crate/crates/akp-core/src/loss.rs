//! Loss functions over a 2-class probability vector and an integer label,
//! with analytic gradients taken with respect to the pre-softmax logits.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probabilities are clamped to [EPS, 1] before any logarithm.
pub const PROB_EPS: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossKind {
    Poisson,
    KLDivergence,
    SparseCategoricalCE,
    BinaryCE,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LossKind::Poisson => "Poisson",
            LossKind::KLDivergence => "KLDivergence",
            LossKind::SparseCategoricalCE => "SparseCategoricalCE",
            LossKind::BinaryCE => "BinaryCE",
        };
        f.write_str(s)
    }
}

fn check_label(probs: &[f64], label: usize) -> Result<()> {
    if label >= probs.len() || label > 1 {
        return Err(Error::InvalidLabel(label));
    }
    Ok(())
}

/// Loss of one probability vector against a one-hot target.
///
/// SparseCategoricalCE and BinaryCE are -ln p[label]; KLDivergence against a
/// one-hot target reduces to the same value (0*ln 0 = 0); Poisson is the mean
/// over classes of p_k - y_k ln p_k.
pub fn loss(kind: LossKind, probs: &[f64], label: usize) -> Result<f64> {
    check_label(probs, label)?;
    let p: Vec<f64> = probs.iter().map(|v| v.clamp(PROB_EPS, 1.0)).collect();
    let value = match kind {
        LossKind::SparseCategoricalCE | LossKind::BinaryCE | LossKind::KLDivergence => {
            -p[label].ln()
        }
        LossKind::Poisson => {
            let k = p.len() as f64;
            p.iter()
                .enumerate()
                .map(|(i, &pi)| {
                    let y = if i == label { 1.0 } else { 0.0 };
                    pi - y * pi.ln()
                })
                .sum::<f64>()
                / k
        }
    };
    Ok(value)
}

/// Gradient of `loss` with respect to the logits that produced `probs`
/// through softmax. For the -ln p[label] family this is p - onehot(label);
/// Poisson picks up the 1/K mean factor.
pub fn loss_grad(kind: LossKind, probs: &[f64], label: usize) -> Result<Vec<f64>> {
    check_label(probs, label)?;
    let k = probs.len() as f64;
    let grad = probs
        .iter()
        .enumerate()
        .map(|(i, &pi)| {
            let y = if i == label { 1.0 } else { 0.0 };
            let g = pi - y;
            match kind {
                LossKind::Poisson => g / k,
                _ => g,
            }
        })
        .collect();
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_entropy_hand_value() {
        let v = loss(LossKind::SparseCategoricalCE, &[0.25, 0.75], 1).unwrap();
        assert!((v - 0.2876820724).abs() < 1e-9);
        let b = loss(LossKind::BinaryCE, &[0.25, 0.75], 1).unwrap();
        assert_eq!(v, b);
    }

    #[test]
    fn one_hot_kl_reduces_to_cross_entropy() {
        let kl = loss(LossKind::KLDivergence, &[0.25, 0.75], 1).unwrap();
        let ce = loss(LossKind::SparseCategoricalCE, &[0.25, 0.75], 1).unwrap();
        assert_eq!(kl, ce);
        assert!((kl - 0.2876820724).abs() < 1e-9);
    }

    #[test]
    fn poisson_hand_value() {
        // mean(0.25 - 0, 0.75 + 0.2876820724) = 0.6438410362
        let v = loss(LossKind::Poisson, &[0.25, 0.75], 1).unwrap();
        assert!((v - 0.6438410362).abs() < 1e-9);
    }

    #[test]
    fn clamp_keeps_logs_finite() {
        let v = loss(LossKind::SparseCategoricalCE, &[1.0, 0.0], 1).unwrap();
        assert!(v.is_finite());
        assert!((v - (-PROB_EPS.ln())).abs() < 1e-9);
    }

    #[test]
    fn cross_entropy_gradient_is_p_minus_y() {
        let g = loss_grad(LossKind::SparseCategoricalCE, &[0.25, 0.75], 1).unwrap();
        assert!((g[0] - 0.25).abs() < 1e-12);
        assert!((g[1] + 0.25).abs() < 1e-12);
    }

    #[test]
    fn gradient_vanishes_at_the_optimum() {
        for kind in [
            LossKind::Poisson,
            LossKind::KLDivergence,
            LossKind::SparseCategoricalCE,
            LossKind::BinaryCE,
        ] {
            let g = loss_grad(kind, &[0.0, 1.0], 1).unwrap();
            assert!(g.iter().all(|v| v.abs() < 1e-12), "{kind}: {g:?}");
        }
    }

    #[test]
    fn labels_outside_binary_range_error() {
        assert!(matches!(
            loss(LossKind::Poisson, &[0.5, 0.5], 2),
            Err(Error::InvalidLabel(2))
        ));
        assert!(loss_grad(LossKind::BinaryCE, &[0.5, 0.5], 9).is_err());
    }
}
