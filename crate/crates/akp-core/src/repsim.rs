//! Representation-similarity analytics. A snapshot is the post-activation
//! matrix of one head layer over a fixed probe set; snapshots from different
//! models are comparable only when they were taken on the same probe set,
//! which is enforced through a probe fingerprint carried by every snapshot.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{forward, Network};
use crate::tensor::Tensor;

/// Perturbation intensity of the run a snapshot came from: no active swap
/// policy, one (activation- or loss-only), or both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StressLevel {
    None,
    Mild,
    Severe,
}

impl StressLevel {
    pub fn from_policies(activation_active: bool, loss_active: bool) -> Self {
        match (activation_active, loss_active) {
            (false, false) => StressLevel::None,
            (true, true) => StressLevel::Severe,
            _ => StressLevel::Mild,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StressLevel::None => "none",
            StressLevel::Mild => "mild",
            StressLevel::Severe => "severe",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Snapshot {
    pub model_id: String,
    pub epoch: usize,
    /// Head layer index, 1 or 2.
    pub layer: usize,
    pub stress: StressLevel,
    /// Hash of the probe tensor the matrix was evaluated on.
    pub probe_fingerprint: u64,
    /// Test accuracy of the finished run; present on final-epoch snapshots.
    pub test_accuracy: Option<f64>,
    /// [probe_count, unit_count] post-activation values.
    pub matrix: Tensor,
}

impl Snapshot {
    pub fn flat(&self) -> &[f64] {
        self.matrix.data()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Metadata attached to a captured snapshot.
#[derive(Clone, Debug)]
pub struct SnapshotMeta {
    pub model_id: String,
    pub epoch: usize,
    pub stress: StressLevel,
}

/// Evaluate the probe set and record the post-activation matrix of head
/// layer 1 or 2. Deterministic given the network and probe.
pub fn capture_snapshot(
    net: &Network,
    probe: &Tensor,
    layer: usize,
    meta: &SnapshotMeta,
) -> Result<Snapshot> {
    let (_, cache) = forward(net, probe)?;
    let matrix = cache.hidden_post(layer)?.clone();
    Ok(Snapshot {
        model_id: meta.model_id.clone(),
        epoch: meta.epoch,
        layer,
        stress: meta.stress,
        probe_fingerprint: probe.fingerprint(),
        test_accuracy: None,
        matrix,
    })
}

/// Sample Pearson correlation. Constant input is an error rather than a
/// silent zero.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "pearson over vectors of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData(
            "pearson needs at least two observations".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y.iter()) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation(
            "constant vector has no correlation".into(),
        ));
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

fn check_comparable(snaps: &[Snapshot]) -> Result<()> {
    let first = &snaps[0];
    for s in &snaps[1..] {
        if s.probe_fingerprint != first.probe_fingerprint {
            return Err(Error::Comparability(format!(
                "snapshot {} was taken on a different probe set than {}",
                s.model_id, first.model_id
            )));
        }
        if s.layer != first.layer {
            return Err(Error::Comparability(format!(
                "snapshot {} is layer {} but {} is layer {}",
                s.model_id, s.layer, first.model_id, first.layer
            )));
        }
        if s.matrix.shape() != first.matrix.shape() {
            return Err(Error::Comparability(format!(
                "snapshot matrices differ in shape: {:?} vs {:?}",
                s.matrix.shape(),
                first.matrix.shape()
            )));
        }
    }
    Ok(())
}

/// Pairwise Pearson correlation between flattened snapshots; symmetric with
/// unit diagonal.
pub fn similarity_matrix(snaps: &[Snapshot]) -> Result<Tensor> {
    if snaps.is_empty() {
        return Err(Error::InsufficientData("no snapshots".into()));
    }
    check_comparable(snaps)?;
    let n = snaps.len();
    let mut m = Tensor::zeros(&[n, n]);
    for i in 0..n {
        m.set(i, i, 1.0);
        for j in (i + 1)..n {
            let r = pearson(snaps[i].flat(), snaps[j].flat())?;
            m.set(i, j, r);
            m.set(j, i, r);
        }
    }
    Ok(m)
}

/// Jacobi eigendecomposition of a symmetric matrix stored row-major.
/// Returns (eigenvalues, eigenvectors as columns), sorted by descending
/// eigenvalue. Adequate for the small Gram matrices ordination produces.
fn jacobi_eigen(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cos = 1.0 / (t * t + 1.0).sqrt();
                let sin = t * cos;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = cos * akp - sin * akq;
                    a[k * n + q] = sin * akp + cos * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = cos * apk - sin * aqk;
                    a[q * n + k] = sin * apk + cos * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = cos * vkp - sin * vkq;
                    v[k * n + q] = sin * vkp + cos * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[j * n + j]
            .partial_cmp(&a[i * n + i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigvals: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut eigvecs = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        // fix sign: largest-magnitude entry positive, for deterministic output
        let mut pivot = 0;
        for k in 1..n {
            if v[k * n + old_col].abs() > v[pivot * n + old_col].abs() {
                pivot = k;
            }
        }
        let sign = if v[pivot * n + old_col] < 0.0 { -1.0 } else { 1.0 };
        for k in 0..n {
            eigvecs[k * n + new_col] = sign * v[k * n + old_col];
        }
    }
    (eigvals, eigvecs)
}

/// PCA ordination of flattened snapshots. Coordinates are the projections of
/// the mean-centered data onto the top principal axes, computed through the
/// Gram matrix so the cost scales with the snapshot count rather than the
/// flattened width.
pub fn pca_ordinate(snaps: &[Snapshot], dims: usize) -> Result<(Tensor, Vec<f64>)> {
    if snaps.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "ordination needs at least 2 snapshots, got {}",
            snaps.len()
        )));
    }
    check_comparable(snaps)?;
    let n = snaps.len();
    if dims == 0 || dims > n {
        return Err(Error::InvalidParameter(format!(
            "ordination dims must lie in 1..={n}, got {dims}"
        )));
    }
    let p = snaps[0].flat().len();

    // mean-center the flattened snapshots
    let mut mean = vec![0.0; p];
    for s in snaps {
        for (m, &v) in mean.iter_mut().zip(s.flat()) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let centered: Vec<Vec<f64>> = snaps
        .iter()
        .map(|s| s.flat().iter().zip(&mean).map(|(&v, &m)| v - m).collect())
        .collect();

    // Gram matrix G = Xc Xc^T shares non-zero eigenvalues with the covariance
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let dot: f64 = centered[i]
                .iter()
                .zip(&centered[j])
                .map(|(&x, &y)| x * y)
                .sum();
            gram[i * n + j] = dot;
            gram[j * n + i] = dot;
        }
    }

    let (eigvals, eigvecs) = jacobi_eigen(gram, n);
    let total: f64 = eigvals.iter().map(|&l| l.max(0.0)).sum();

    let mut coords = Tensor::zeros(&[n, dims]);
    let mut explained = Vec::with_capacity(dims);
    for comp in 0..dims {
        let lambda = eigvals[comp].max(0.0);
        let sigma = lambda.sqrt();
        for i in 0..n {
            coords.set(i, comp, eigvecs[i * n + comp] * sigma);
        }
        explained.push(if total > 0.0 { lambda / total } else { 0.0 });
    }
    Ok((coords, explained))
}

/// Family partition and similarity gap for a set of finished runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AkpReport {
    pub threshold: f64,
    pub happy: Vec<String>,
    pub unhappy: Vec<String>,
    /// Mean pairwise correlation within the happy family; absent with fewer
    /// than two members.
    pub happy_mean_r: Option<f64>,
    pub unhappy_mean_r: Option<f64>,
    /// happy_mean_r - unhappy_mean_r when both sides are populated.
    pub gap: Option<f64>,
}

fn mean_pairwise_r(snaps: &[&Snapshot]) -> Result<Option<f64>> {
    if snaps.len() < 2 {
        return Ok(None);
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..snaps.len() {
        for j in (i + 1)..snaps.len() {
            total += pearson(snaps[i].flat(), snaps[j].flat())?;
            pairs += 1;
        }
    }
    Ok(Some(total / pairs as f64))
}

/// Partition runs into happy (test accuracy >= threshold) and unhappy
/// families and compare mean intra-family representation similarity.
pub fn akp_report(runs: &[(Snapshot, f64)], happy_threshold: f64) -> Result<AkpReport> {
    if runs.is_empty() {
        return Err(Error::InsufficientData("no runs to partition".into()));
    }
    let all: Vec<Snapshot> = runs.iter().map(|(s, _)| s.clone()).collect();
    check_comparable(&all)?;

    let mut happy: Vec<&Snapshot> = Vec::new();
    let mut unhappy: Vec<&Snapshot> = Vec::new();
    for (snap, acc) in runs {
        if *acc >= happy_threshold {
            happy.push(snap);
        } else {
            unhappy.push(snap);
        }
    }
    let happy_mean_r = mean_pairwise_r(&happy)?;
    let unhappy_mean_r = mean_pairwise_r(&unhappy)?;
    let gap = match (happy_mean_r, unhappy_mean_r) {
        (Some(h), Some(u)) => Some(h - u),
        _ => None,
    };
    Ok(AkpReport {
        threshold: happy_threshold,
        happy: happy.iter().map(|s| s.model_id.clone()).collect(),
        unhappy: unhappy.iter().map(|s| s.model_id.clone()).collect(),
        happy_mean_r,
        unhappy_mean_r,
        gap,
    })
}
