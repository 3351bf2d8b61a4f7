//! Ordination checked against an independent eigendecomposition of the
//! covariance matrix. The library works through the Gram matrix of the
//! centered snapshots; the oracle here diagonalizes the p x p covariance
//! with its own rotation loop and projects onto its eigenvectors.

use akp_core::repsim::{pca_ordinate, Snapshot, StressLevel};
use akp_core::rng::Prng;
use akp_core::tensor::Tensor;

fn snap(id: &str, values: Vec<f64>) -> Snapshot {
    let n = values.len();
    Snapshot {
        model_id: id.to_string(),
        epoch: 0,
        layer: 1,
        stress: StressLevel::None,
        probe_fingerprint: 1,
        test_accuracy: None,
        matrix: Tensor::from_vec(&[1, n], values).unwrap(),
    }
}

/// Oracle eigensolver: cyclic rotations on a dense symmetric matrix,
/// written separately from the library's.
fn oracle_symmetric_eigen(mut m: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let p = m.len();
    let mut vecs = vec![vec![0.0; p]; p];
    for (i, row) in vecs.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..200 {
        let mut off = 0.0;
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    off += m[i][j] * m[i][j];
                }
            }
        }
        if off < 1e-28 {
            break;
        }
        for i in 0..p {
            for j in (i + 1)..p {
                if m[i][j].abs() < 1e-300 {
                    continue;
                }
                let phi = 0.5 * (2.0 * m[i][j]).atan2(m[j][j] - m[i][i]);
                let (s, c) = phi.sin_cos();
                for k in 0..p {
                    let (a, b) = (m[i][k], m[j][k]);
                    m[i][k] = c * a - s * b;
                    m[j][k] = s * a + c * b;
                }
                for k in 0..p {
                    let (a, b) = (m[k][i], m[k][j]);
                    m[k][i] = c * a - s * b;
                    m[k][j] = s * a + c * b;
                }
                for k in 0..p {
                    let (a, b) = (vecs[k][i], vecs[k][j]);
                    vecs[k][i] = c * a - s * b;
                    vecs[k][j] = s * a + c * b;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| m[b][b].partial_cmp(&m[a][a]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| m[i][i]).collect();
    let cols: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| (0..p).map(|k| vecs[k][i]).collect())
        .collect();
    (vals, cols)
}

#[test]
fn ordination_matches_covariance_eigendecomposition() {
    let mut rng = Prng::new(31);
    let n = 5usize;
    let p = 3usize;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| rng.next_normal()).collect())
        .collect();
    let snaps: Vec<Snapshot> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| snap(&format!("s{i}"), r.clone()))
        .collect();

    let (coords, explained) = pca_ordinate(&snaps, p).unwrap();

    // oracle path: covariance of the centered rows
    let mut mean = vec![0.0; p];
    for r in &rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n as f64;
        }
    }
    let centered: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();
    let mut cov = vec![vec![0.0; p]; p];
    for row in &centered {
        for i in 0..p {
            for j in 0..p {
                cov[i][j] += row[i] * row[j] / (n as f64 - 1.0);
            }
        }
    }
    let (vals, vecs) = oracle_symmetric_eigen(cov);

    // explained fractions agree
    let total: f64 = vals.iter().sum();
    for (f, v) in explained.iter().zip(&vals) {
        assert!((f - v / total).abs() < 1e-9, "{f} vs {}", v / total);
    }

    // coordinates agree up to a per-component sign
    for comp in 0..p {
        let oracle_coord: Vec<f64> = centered
            .iter()
            .map(|row| row.iter().zip(&vecs[comp]).map(|(a, b)| a * b).sum())
            .collect();
        let lib_coord: Vec<f64> = (0..n).map(|i| coords.at(i, comp)).collect();
        let same: f64 = oracle_coord
            .iter()
            .zip(&lib_coord)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let flipped: f64 = oracle_coord
            .iter()
            .zip(&lib_coord)
            .map(|(a, b)| (a + b).abs())
            .fold(0.0, f64::max);
        assert!(
            same.min(flipped) < 1e-9,
            "component {comp}: deviation {same:e} / flipped {flipped:e}"
        );
    }
}

#[test]
fn oracle_and_library_agree_on_larger_random_sets() {
    let mut rng = Prng::new(1234);
    let n = 8usize;
    let p = 6usize;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| rng.next_normal() * 2.0).collect())
        .collect();
    let snaps: Vec<Snapshot> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| snap(&format!("s{i}"), r.clone()))
        .collect();
    let (_, explained) = pca_ordinate(&snaps, 4).unwrap();

    let mut mean = vec![0.0; p];
    for r in &rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n as f64;
        }
    }
    let mut cov = vec![vec![0.0; p]; p];
    for r in &rows {
        for i in 0..p {
            for j in 0..p {
                cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]) / (n as f64 - 1.0);
            }
        }
    }
    let (vals, _) = oracle_symmetric_eigen(cov);
    let total: f64 = vals.iter().sum();
    for (f, v) in explained.iter().zip(&vals) {
        assert!((f - v / total).abs() < 1e-9);
    }
}
