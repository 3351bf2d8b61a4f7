//! Elementwise activations for the swappable layers, plus the softmax head.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActivationKind {
    Tanh,
    Softplus,
    ReLU,
    Softmax,
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ActivationKind::Tanh => "Tanh",
            ActivationKind::Softplus => "Softplus",
            ActivationKind::ReLU => "ReLU",
            ActivationKind::Softmax => "Softmax",
        };
        f.write_str(s)
    }
}

/// Overflow-safe softplus: for large x the direct form exp(x) overflows, so
/// compute max(x, 0) + ln(1 + exp(-|x|)).
#[inline]
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Elementwise activation. Softmax is a vector operation and is rejected here.
pub fn activate(kind: ActivationKind, x: &Tensor) -> Result<Tensor> {
    let f: fn(f64) -> f64 = match kind {
        ActivationKind::Tanh => f64::tanh,
        ActivationKind::Softplus => softplus,
        ActivationKind::ReLU => |v| v.max(0.0),
        ActivationKind::Softmax => {
            return Err(Error::Usage(
                "softmax is applied per row via `softmax`, not elementwise".into(),
            ))
        }
    };
    let data = x.iter().map(|&v| f(v)).collect();
    Tensor::from_vec(x.shape(), data)
}

/// Elementwise derivative at the pre-activation value. ReLU'(0) = 0.
pub fn activate_grad(kind: ActivationKind, x: &Tensor) -> Result<Tensor> {
    let f: fn(f64) -> f64 = match kind {
        ActivationKind::Tanh => |v| 1.0 - v.tanh().powi(2),
        ActivationKind::Softplus => sigmoid,
        ActivationKind::ReLU => |v| if v > 0.0 { 1.0 } else { 0.0 },
        ActivationKind::Softmax => {
            return Err(Error::Usage(
                "softmax gradient is handled jointly with the loss".into(),
            ))
        }
    };
    let data = x.iter().map(|&v| f(v)).collect();
    Tensor::from_vec(x.shape(), data)
}

/// Max-subtracted softmax over one logit vector.
pub fn softmax(z: &[f64]) -> Result<Vec<f64>> {
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("softmax input must be finite".into()));
    }
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}
