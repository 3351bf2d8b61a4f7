//! Datasets: synthetic two-class wing images, netpbm ingestion, and
//! stratified splitting.

mod netpbm;
mod synth;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use netpbm::{load_image_dir, parse_netpbm, save_image_dir, write_pgm, write_ppm};
pub use synth::{synth_generate, SynthSpec};

use crate::error::{Error, Result};
use crate::rng::Prng;
use crate::tensor::Tensor;

/// Labeled image set. Images are [n, channels, h, w]; class 0 is the
/// no-tumor class, class 1 the tumor class.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Dataset {
    pub images: Tensor,
    pub labels: Vec<u8>,
}

impl Dataset {
    pub fn new(images: Tensor, labels: Vec<u8>) -> Result<Self> {
        if images.shape().len() != 4 {
            return Err(Error::ShapeMismatch(format!(
                "images must be [n, c, h, w], got {:?}",
                images.shape()
            )));
        }
        if images.shape()[0] != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} images but {} labels",
                images.shape()[0],
                labels.len()
            )));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::InvalidParameter("labels must be 0 or 1".into()));
        }
        Ok(Dataset { images, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// (class 0 count, class 1 count)
    pub fn class_counts(&self) -> (usize, usize) {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        (self.labels.len() - ones, ones)
    }

    /// Pixels of one image as a flat slice.
    pub fn image(&self, idx: usize) -> &[f64] {
        let stride: usize = self.images.shape()[1..].iter().product();
        &self.images.data()[idx * stride..(idx + 1) * stride]
    }

    /// Flattened view [n, c*h*w] for the classifier.
    pub fn flatten(&self) -> Tensor {
        let n = self.len();
        let stride: usize = self.images.shape()[1..].iter().product();
        Tensor::from_vec(&[n, stride], self.images.data().to_vec())
            .expect("flatten preserves element count")
    }

    /// Subset in the order of `indices`.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let stride: usize = self.images.shape()[1..].iter().product();
        let mut data = Vec::with_capacity(indices.len() * stride);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            data.extend_from_slice(self.image(i));
            labels.push(self.labels[i]);
        }
        let mut shape = self.images.shape().to_vec();
        shape[0] = indices.len();
        Dataset {
            images: Tensor::from_vec(&shape, data).expect("subset shape is consistent"),
            labels,
        }
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Largest-remainder apportionment of `n` items over the fractions; the
/// parts always sum to exactly `n`.
fn apportion(n: usize, fractions: &[f64; 3]) -> [usize; 3] {
    let ideal: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut counts: Vec<usize> = ideal.iter().map(|&x| x.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&i, &j| {
        let ri = ideal[i] - ideal[i].floor();
        let rj = ideal[j] - ideal[j].floor();
        rj.partial_cmp(&ri)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    for k in 0..(n - assigned) {
        counts[order[k % 3]] += 1;
    }
    [counts[0], counts[1], counts[2]]
}

/// Split into (train, val, test). With `stratified` the per-class
/// proportions of each part match the overall ratio within one sample; the
/// partition is exact either way.
pub fn split(
    ds: &Dataset,
    fractions: (f64, f64, f64),
    seed: u64,
    stratified: bool,
) -> Result<(Dataset, Dataset, Dataset)> {
    let f = [fractions.0, fractions.1, fractions.2];
    if f.iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "split fractions must be non-negative, got {f:?}"
        )));
    }
    let sum: f64 = f.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "split fractions must sum to 1, got {sum}"
        )));
    }

    let positive_parts = f.iter().filter(|&&x| x > 0.0).count();
    let mut part_indices: [Vec<usize>; 3] = [Vec::new(), Vec::new(), Vec::new()];

    let groups: Vec<Vec<usize>> = if stratified {
        let mut class0 = Vec::new();
        let mut class1 = Vec::new();
        for (i, &l) in ds.labels.iter().enumerate() {
            if l == 0 {
                class0.push(i);
            } else {
                class1.push(i);
            }
        }
        vec![class0, class1]
    } else {
        vec![(0..ds.len()).collect()]
    };

    for (g, mut indices) in groups.into_iter().enumerate() {
        if indices.is_empty() {
            continue;
        }
        if stratified && indices.len() < positive_parts {
            return Err(Error::Stratification(format!(
                "class {g} has {} samples but the split has {positive_parts} non-empty parts",
                indices.len()
            )));
        }
        let mut rng = Prng::derive(seed, &[0x5711, g as u64]);
        rng.shuffle(&mut indices);
        let counts = apportion(indices.len(), &f);
        let mut cursor = 0;
        for (part, &count) in counts.iter().enumerate() {
            part_indices[part].extend_from_slice(&indices[cursor..cursor + count]);
            cursor += count;
        }
    }

    // keep original ordering inside each part for readability
    for part in part_indices.iter_mut() {
        part.sort_unstable();
    }

    Ok((
        ds.subset(&part_indices[0]),
        ds.subset(&part_indices[1]),
        ds.subset(&part_indices[2]),
    ))
}
