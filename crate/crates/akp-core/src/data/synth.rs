//! Synthetic imbalanced two-class image generator. Class 0 is a smooth
//! elliptical blob (the wing analog); class 1 adds a handful of bright
//! compact speckle clusters (the tumor analog). The i-th image of either
//! class draws its blob from the same per-index stream, so with zero pixel
//! noise a class-1 image differs from its class-0 counterpart only inside
//! the speckle discs.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rng::Prng;
use crate::tensor::Tensor;

use super::Dataset;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub n_class0: usize,
    pub n_class1: usize,
    /// Image side in pixels (images are square, single channel).
    pub side: usize,
    /// Standard deviation of additive Gaussian pixel noise.
    pub noise_std: f64,
    /// Probability of flipping a label, for label-noise studies.
    pub label_flip_rate: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_class0: 139,
            n_class1: 76,
            side: 32,
            noise_std: 0.35,
            label_flip_rate: 0.0,
            seed: 7,
        }
    }
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        use crate::error::Error;
        if self.n_class0 == 0 || self.n_class1 == 0 {
            return Err(Error::InvalidParameter(
                "class counts must be >= 1".into(),
            ));
        }
        if self.side < 8 {
            return Err(Error::InvalidParameter(format!(
                "side must be >= 8, got {}",
                self.side
            )));
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise_std must be >= 0, got {}",
                self.noise_std
            )));
        }
        if !(0.0..=1.0).contains(&self.label_flip_rate) {
            return Err(Error::InvalidParameter(format!(
                "label_flip_rate must lie in [0, 1], got {}",
                self.label_flip_rate
            )));
        }
        Ok(())
    }
}

const STREAM_BLOB: u64 = 0xB10B;
const STREAM_SPECKLE: u64 = 0x5BEC;
const STREAM_NOISE: u64 = 0x4013;
const STREAM_FLIP: u64 = 0xF11B;

fn render_blob(pixels: &mut [f64], side: usize, rng: &mut Prng) {
    let s = side as f64;
    let cx = s / 2.0 + rng.next_range(-s / 16.0, s / 16.0);
    let cy = s / 2.0 + rng.next_range(-s / 16.0, s / 16.0);
    let rx = s * rng.next_range(0.26, 0.36);
    let ry = s * rng.next_range(0.18, 0.28);
    let brightness = rng.next_range(0.55, 0.75);
    for y in 0..side {
        for x in 0..side {
            let dx = (x as f64 - cx) / rx;
            let dy = (y as f64 - cy) / ry;
            pixels[y * side + x] = brightness * (-(dx * dx + dy * dy)).exp();
        }
    }
}

fn render_speckles(pixels: &mut [f64], side: usize, rng: &mut Prng) {
    let s = side as f64;
    let clusters = 3 + (rng.next_u64() % 6) as usize; // 3..=8
    for _ in 0..clusters {
        let cx = s / 2.0 + rng.next_range(-s * 0.22, s * 0.22);
        let cy = s / 2.0 + rng.next_range(-s * 0.22, s * 0.22);
        let radius = rng.next_range(0.7, 1.6);
        let amplitude = rng.next_range(0.35, 0.65);
        // compact support: nothing outside 3 radii changes
        let reach = (3.0 * radius).ceil() as i64;
        let px = cx.round() as i64;
        let py = cy.round() as i64;
        for y in (py - reach).max(0)..=(py + reach).min(side as i64 - 1) {
            for x in (px - reach).max(0)..=(px + reach).min(side as i64 - 1) {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                let d2 = dx * dx + dy * dy;
                if d2 <= (3.0 * radius).powi(2) {
                    pixels[y as usize * side + x as usize] +=
                        amplitude * (-d2 / (radius * radius)).exp();
                }
            }
        }
    }
}

/// Generate the synthetic dataset: `n_class0` wing images followed by
/// `n_class1` tumor images, deterministic per seed.
pub fn synth_generate(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let side = spec.side;
    let n = spec.n_class0 + spec.n_class1;
    let mut data = Vec::with_capacity(n * side * side);
    let mut labels = Vec::with_capacity(n);

    for class in 0..2u8 {
        let count = if class == 0 { spec.n_class0 } else { spec.n_class1 };
        for idx in 0..count {
            let mut pixels = vec![0.0; side * side];
            let mut blob_rng = Prng::derive(spec.seed, &[STREAM_BLOB, idx as u64]);
            render_blob(&mut pixels, side, &mut blob_rng);
            if class == 1 {
                let mut speckle_rng = Prng::derive(spec.seed, &[STREAM_SPECKLE, idx as u64]);
                render_speckles(&mut pixels, side, &mut speckle_rng);
            }
            if spec.noise_std > 0.0 {
                let mut noise_rng =
                    Prng::derive(spec.seed, &[STREAM_NOISE, class as u64, idx as u64]);
                for p in pixels.iter_mut() {
                    *p += spec.noise_std * noise_rng.next_normal();
                }
            }
            for p in pixels.iter_mut() {
                *p = p.clamp(0.0, 1.0);
            }
            data.extend_from_slice(&pixels);
            labels.push(class);
        }
    }

    if spec.label_flip_rate > 0.0 {
        let mut flip_rng = Prng::derive(spec.seed, &[STREAM_FLIP]);
        for l in labels.iter_mut() {
            if flip_rng.next_f64() < spec.label_flip_rate {
                *l ^= 1;
            }
        }
    }

    Dataset::new(
        Tensor::from_vec(&[n, 1, side, side], data)?,
        labels,
    )
}
