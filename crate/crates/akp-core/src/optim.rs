//! SGD and RMSProp update rules. Optimizer state lives for the whole run and
//! is never reset by activation or loss swaps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SgdState {
    pub lr: f64,
}

impl SgdState {
    pub fn new(lr: f64) -> Result<Self> {
        if !(lr > 0.0) {
            return Err(Error::InvalidParameter(format!("sgd lr must be > 0, got {lr}")));
        }
        Ok(SgdState { lr })
    }
}

impl Default for SgdState {
    fn default() -> Self {
        SgdState { lr: 0.01 }
    }
}

#[derive(Clone, Debug)]
pub struct RmsPropState {
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
    /// Squared-gradient accumulators, one per parameter tensor, created on
    /// the first step and shape-checked thereafter.
    v: Vec<Tensor>,
}

impl RmsPropState {
    pub fn new(lr: f64, rho: f64, eps: f64) -> Result<Self> {
        if !(lr > 0.0) {
            return Err(Error::InvalidParameter(format!("rmsprop lr must be > 0, got {lr}")));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rmsprop rho must lie in (0, 1), got {rho}"
            )));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rmsprop eps must be > 0, got {eps}"
            )));
        }
        Ok(RmsPropState {
            lr,
            rho,
            eps,
            v: Vec::new(),
        })
    }

    pub fn accumulators(&self) -> &[Tensor] {
        &self.v
    }
}

impl Default for RmsPropState {
    fn default() -> Self {
        RmsPropState::new(0.001, 0.9, 1e-7).unwrap()
    }
}

#[derive(Clone, Debug)]
pub enum Optimizer {
    Sgd(SgdState),
    RmsProp(RmsPropState),
}

impl Optimizer {
    pub fn name(&self) -> &'static str {
        match self {
            Optimizer::Sgd(_) => "SGD",
            Optimizer::RmsProp(_) => "RMSProp",
        }
    }

    /// Apply one update in place. `params` and `grads` must align pairwise.
    pub fn step(&mut self, params: &mut [&mut Tensor], grads: &[&Tensor]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} parameter tensors but {} gradient tensors",
                params.len(),
                grads.len()
            )));
        }
        for (p, g) in params.iter().zip(grads.iter()) {
            if p.shape() != g.shape() {
                return Err(Error::ShapeMismatch(format!(
                    "parameter {:?} vs gradient {:?}",
                    p.shape(),
                    g.shape()
                )));
            }
        }
        match self {
            Optimizer::Sgd(state) => {
                for (p, g) in params.iter_mut().zip(grads.iter()) {
                    for (w, &gv) in p.data_mut().iter_mut().zip(g.iter()) {
                        *w -= state.lr * gv;
                    }
                }
            }
            Optimizer::RmsProp(state) => {
                if state.v.is_empty() {
                    state.v = grads.iter().map(|g| Tensor::zeros(g.shape())).collect();
                } else if state.v.len() != grads.len()
                    || state
                        .v
                        .iter()
                        .zip(grads.iter())
                        .any(|(v, g)| v.shape() != g.shape())
                {
                    return Err(Error::ShapeMismatch(
                        "rmsprop accumulators do not mirror the gradients".into(),
                    ));
                }
                for ((p, g), v) in params.iter_mut().zip(grads.iter()).zip(state.v.iter_mut()) {
                    for ((w, &gv), vv) in p
                        .data_mut()
                        .iter_mut()
                        .zip(g.iter())
                        .zip(v.data_mut().iter_mut())
                    {
                        *vv = state.rho * *vv + (1.0 - state.rho) * gv * gv;
                        *w -= state.lr * gv / (vv.sqrt() + state.eps);
                    }
                }
            }
        }
        Ok(())
    }
}
