//! Weight initializers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Prng;
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum InitializerKind {
    Zeros,
    GlorotNormal,
    HeUniform,
    TruncatedNormal { mean: f64, std: f64 },
    UniformRandom { low: f64, high: f64 },
}

impl InitializerKind {
    pub fn name(&self) -> &'static str {
        match self {
            InitializerKind::Zeros => "Zeros",
            InitializerKind::GlorotNormal => "GlorotNormal",
            InitializerKind::HeUniform => "HeUniform",
            InitializerKind::TruncatedNormal { .. } => "TruncatedNormal",
            InitializerKind::UniformRandom { .. } => "UniformRandom",
        }
    }
}

/// Fill a tensor of the given shape.
///
/// GlorotNormal draws from N(0, 2/(fan_in+fan_out)); HeUniform from
/// U(+-sqrt(6/fan_in)); TruncatedNormal resamples anything outside
/// mean +- 2*std.
pub fn init_tensor(
    kind: InitializerKind,
    shape: &[usize],
    fan_in: usize,
    fan_out: usize,
    rng: &mut Prng,
) -> Result<Tensor> {
    if fan_in == 0 || fan_out == 0 {
        return Err(Error::InvalidParameter(
            "fan_in and fan_out must be >= 1".into(),
        ));
    }
    let n: usize = shape.iter().product();
    let data = match kind {
        InitializerKind::Zeros => vec![0.0; n],
        InitializerKind::GlorotNormal => {
            let std = (2.0 / (fan_in + fan_out) as f64).sqrt();
            (0..n).map(|_| std * rng.next_normal()).collect()
        }
        InitializerKind::HeUniform => {
            let limit = (6.0 / fan_in as f64).sqrt();
            (0..n).map(|_| rng.next_range(-limit, limit)).collect()
        }
        InitializerKind::TruncatedNormal { mean, std } => {
            if !(std > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "TruncatedNormal std must be > 0, got {std}"
                )));
            }
            (0..n)
                .map(|_| loop {
                    let v = mean + std * rng.next_normal();
                    if (v - mean).abs() <= 2.0 * std {
                        break v;
                    }
                })
                .collect()
        }
        InitializerKind::UniformRandom { low, high } => {
            if !(low < high) {
                return Err(Error::InvalidParameter(format!(
                    "UniformRandom needs low < high, got [{low}, {high})"
                )));
            }
            (0..n).map(|_| rng.next_range(low, high)).collect()
        }
    };
    Tensor::from_vec(shape, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_is_exactly_zero() {
        let mut rng = Prng::new(1);
        let t = init_tensor(InitializerKind::Zeros, &[3, 3], 3, 3, &mut rng).unwrap();
        assert_eq!(t.len(), 9);
        assert!(t.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn truncated_normal_stays_within_two_sigma() {
        let mut rng = Prng::new(5);
        let kind = InitializerKind::TruncatedNormal {
            mean: 0.0,
            std: 0.5,
        };
        let t = init_tensor(kind, &[100, 100], 100, 100, &mut rng).unwrap();
        assert!(t.iter().all(|&v| (-1.0..=1.0).contains(&v)));
    }

    #[test]
    fn glorot_normal_sample_variance_matches_fan_formula() {
        let mut rng = Prng::new(42);
        let t = init_tensor(InitializerKind::GlorotNormal, &[100_000], 100, 100, &mut rng).unwrap();
        let mean = t.iter().sum::<f64>() / t.len() as f64;
        let var = t.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / t.len() as f64;
        assert!((var - 0.01).abs() < 0.001, "var {var}");
    }

    #[test]
    fn he_uniform_respects_limits() {
        let mut rng = Prng::new(3);
        let t = init_tensor(InitializerKind::HeUniform, &[10_000], 6, 8, &mut rng).unwrap();
        let limit = (6.0f64 / 6.0).sqrt();
        assert!(t.iter().all(|&v| v >= -limit && v < limit));
        // draws actually reach toward both ends
        assert!(t.iter().any(|&v| v > 0.9 * limit));
        assert!(t.iter().any(|&v| v < -0.9 * limit));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let mut rng = Prng::new(1);
        let bad_std = InitializerKind::TruncatedNormal {
            mean: 0.0,
            std: 0.0,
        };
        assert!(matches!(
            init_tensor(bad_std, &[2], 1, 1, &mut rng),
            Err(Error::InvalidParameter(_))
        ));
        let bad_range = InitializerKind::UniformRandom {
            low: 1.0,
            high: 1.0,
        };
        assert!(matches!(
            init_tensor(bad_range, &[2], 1, 1, &mut rng),
            Err(Error::InvalidParameter(_))
        ));
        assert!(init_tensor(InitializerKind::Zeros, &[2], 0, 1, &mut rng).is_err());
    }

    #[test]
    fn same_seed_reproduces_same_tensor() {
        let a = init_tensor(
            InitializerKind::GlorotNormal,
            &[4, 4],
            4,
            4,
            &mut Prng::new(11),
        )
        .unwrap();
        let b = init_tensor(
            InitializerKind::GlorotNormal,
            &[4, 4],
            4,
            4,
            &mut Prng::new(11),
        )
        .unwrap();
        assert_eq!(a, b);
    }
}
