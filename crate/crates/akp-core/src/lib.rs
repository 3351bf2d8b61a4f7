//! Desk-scale laboratory for training-perturbation experiments: small
//! two-class image classifiers whose activation and loss functions are
//! hot-swapped at fixed epochs, representation-similarity analytics over
//! the resulting model families, and a standalone Lotka-Volterra
//! population-dynamics simulator.
//!
//! Everything is deterministic given a seed: the PRNG is a documented
//! splitmix64 stream and all arithmetic is plain f64.

pub mod activation;
pub mod data;
pub mod error;
pub mod init;
pub mod loss;
pub mod lvdyn;
pub mod metrics;
pub mod network;
pub mod optim;
pub mod perturb;
pub mod repsim;
pub mod rng;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::Tensor;
