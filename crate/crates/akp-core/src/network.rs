//! Two-class classifier: a frozen linear feature extractor standing in for a
//! pretrained backbone, followed by a trainable head of three dense layers.
//! The first two head activations are mutable slots so a swap schedule can
//! rewrite them mid-training; the last layer is always softmax.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::activation::{activate, activate_grad, softmax, ActivationKind};
use crate::error::{Error, Result};
use crate::init::{init_tensor, InitializerKind};
use crate::loss::{loss, loss_grad, LossKind};
use crate::rng::{mix64, Prng};
use crate::tensor::{matmul_transpose_a, matmul_transpose_b, Tensor};

pub const NUM_CLASSES: usize = 2;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DenseLayer {
    /// [out, in]
    pub weights: Tensor,
    /// [out]
    pub bias: Tensor,
    pub activation: ActivationKind,
}

impl DenseLayer {
    pub fn out_dim(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn in_dim(&self) -> usize {
        self.weights.shape()[1]
    }
}

#[derive(Clone, Debug)]
pub struct Network {
    /// Frozen projection [d_feat, d_in]; never receives gradient updates.
    pub extractor: Tensor,
    /// Exactly three dense layers; layer 3 ends in softmax over 2 classes.
    pub head: [DenseLayer; 3],
}

/// Widths of the trainable head, input side first.
#[derive(Clone, Copy, Debug)]
pub struct HeadShape {
    pub d_feat: usize,
    pub hidden1: usize,
    pub hidden2: usize,
}

impl Network {
    /// Build a network with a GlorotNormal extractor drawn from
    /// `extractor_rng` and a head drawn from `head_rng`. `layer1_init`
    /// selects the first dense layer's weight initializer; the remaining
    /// layers use GlorotNormal. Biases start at zero.
    pub fn build(
        d_in: usize,
        shape: HeadShape,
        hidden_activation: ActivationKind,
        layer1_init: InitializerKind,
        extractor_rng: &mut Prng,
        head_rng: &mut Prng,
    ) -> Result<Self> {
        if hidden_activation == ActivationKind::Softmax {
            return Err(Error::Policy(
                "softmax may only occupy the final layer slot".into(),
            ));
        }
        let extractor = init_tensor(
            InitializerKind::GlorotNormal,
            &[shape.d_feat, d_in],
            d_in,
            shape.d_feat,
            extractor_rng,
        )?;
        let dims = [
            (shape.hidden1, shape.d_feat),
            (shape.hidden2, shape.hidden1),
            (NUM_CLASSES, shape.hidden2),
        ];
        let mut layers = Vec::with_capacity(3);
        for (i, &(out, inp)) in dims.iter().enumerate() {
            let kind = if i == 0 {
                layer1_init
            } else {
                InitializerKind::GlorotNormal
            };
            let weights = init_tensor(kind, &[out, inp], inp, out, head_rng)?;
            let activation = if i == 2 {
                ActivationKind::Softmax
            } else {
                hidden_activation
            };
            layers.push(DenseLayer {
                weights,
                bias: Tensor::zeros(&[out]),
                activation,
            });
        }
        let head: [DenseLayer; 3] = layers.try_into().expect("three layers");
        Ok(Network { extractor, head })
    }

    pub fn d_in(&self) -> usize {
        self.extractor.shape()[1]
    }

    /// Content hash over extractor and head parameters; used to detect
    /// stale forward caches and to prove swaps leave weights untouched.
    pub fn fingerprint(&self) -> u64 {
        let mut h = self.extractor.fingerprint();
        for layer in &self.head {
            h = mix64(h ^ layer.weights.fingerprint());
            h = mix64(h ^ layer.bias.fingerprint());
        }
        h
    }

    /// Trainable parameters in a fixed order: w1, b1, w2, b2, w3, b3.
    /// The extractor is frozen and deliberately absent.
    pub fn head_params_mut(&mut self) -> Vec<&mut Tensor> {
        self.head
            .iter_mut()
            .flat_map(|l| [&mut l.weights, &mut l.bias])
            .collect()
    }
}

/// Per-layer intermediate values retained by `forward`. `pre` holds the
/// affine outputs z, `post` the activated values (softmax probabilities for
/// the final layer).
pub struct Cache {
    pub features: Tensor,
    pub pre: [Tensor; 3],
    pub post: [Tensor; 3],
    net_fingerprint: u64,
}

impl Cache {
    /// Post-activation matrix of head layer 1 or 2.
    pub fn hidden_post(&self, layer: usize) -> Result<&Tensor> {
        match layer {
            1 | 2 => Ok(&self.post[layer - 1]),
            _ => Err(Error::Usage(format!(
                "snapshot layer must be 1 or 2, got {layer}"
            ))),
        }
    }
}

fn affine(input: &Tensor, layer: &DenseLayer) -> Result<Tensor> {
    // input [n, in] x weights[out, in]^T + bias
    let mut z = matmul_transpose_b(input, &layer.weights)?;
    let out = layer.out_dim();
    for r in 0..z.rows() {
        for c in 0..out {
            let v = z.at(r, c) + layer.bias.data()[c];
            z.set(r, c, v);
        }
    }
    Ok(z)
}

/// Run a batch through the extractor and head. Returns softmax probabilities
/// [n, 2] and the cache needed by `backward` and by snapshot capture.
pub fn forward(net: &Network, batch: &Tensor) -> Result<(Tensor, Cache)> {
    if batch.shape().len() != 2 || batch.shape()[1] != net.d_in() {
        return Err(Error::ShapeMismatch(format!(
            "batch shape {:?} does not match input width {}",
            batch.shape(),
            net.d_in()
        )));
    }
    let features = matmul_transpose_b(batch, &net.extractor)?;

    let z1 = affine(&features, &net.head[0])?;
    let h1 = activate(net.head[0].activation, &z1)?;
    let z2 = affine(&h1, &net.head[1])?;
    let h2 = activate(net.head[1].activation, &z2)?;
    let z3 = affine(&h2, &net.head[2])?;

    let n = z3.rows();
    let mut probs = Tensor::zeros(&[n, NUM_CLASSES]);
    for r in 0..n {
        let p = softmax(z3.row(r))?;
        for c in 0..NUM_CLASSES {
            probs.set(r, c, p[c]);
        }
    }

    let cache = Cache {
        features,
        pre: [z1, z2, z3.clone()],
        post: [h1, h2, probs.clone()],
        net_fingerprint: net.fingerprint(),
    };
    Ok((probs, cache))
}

/// Gradients for the three head layers, same order as `head_params_mut`.
pub struct HeadGradients {
    pub weights: [Tensor; 3],
    pub biases: [Tensor; 3],
}

impl HeadGradients {
    pub fn flat(&self) -> Vec<&Tensor> {
        vec![
            &self.weights[0],
            &self.biases[0],
            &self.weights[1],
            &self.biases[1],
            &self.weights[2],
            &self.biases[2],
        ]
    }
}

/// Mean batch loss under `kind` for cached probabilities.
pub fn batch_loss(cache: &Cache, labels: &[usize], kind: LossKind) -> Result<f64> {
    let probs = &cache.post[2];
    if labels.len() != probs.rows() {
        return Err(Error::ShapeMismatch(format!(
            "{} labels for {} rows",
            labels.len(),
            probs.rows()
        )));
    }
    if labels.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (r, &label) in labels.iter().enumerate() {
        total += loss(kind, probs.row(r), label)?;
    }
    Ok(total / labels.len() as f64)
}

/// Backpropagate the mean-reduced loss through the head. The extractor is
/// frozen, so its gradient is never formed. Errors if the cache does not
/// match the network's current parameters.
pub fn backward(
    net: &Network,
    cache: &Cache,
    labels: &[usize],
    kind: LossKind,
) -> Result<HeadGradients> {
    if cache.net_fingerprint != net.fingerprint() {
        return Err(Error::Usage(
            "stale cache: network parameters changed since forward".into(),
        ));
    }
    let n = cache.post[2].rows();
    if labels.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{} labels for {} rows",
            labels.len(),
            n
        )));
    }

    // d(mean loss)/dz3, one row per sample
    let mut delta = Tensor::zeros(&[n, NUM_CLASSES]);
    for (r, &label) in labels.iter().enumerate() {
        let g = loss_grad(kind, cache.post[2].row(r), label)?;
        for c in 0..NUM_CLASSES {
            delta.set(r, c, g[c] / n as f64);
        }
    }

    let mut weights: Vec<Tensor> = Vec::with_capacity(3);
    let mut biases: Vec<Tensor> = Vec::with_capacity(3);

    for layer_idx in (0..3).rev() {
        let input = if layer_idx == 0 {
            &cache.features
        } else {
            &cache.post[layer_idx - 1]
        };
        // grad_W = delta^T x input -> [out, in]
        weights.push(matmul_transpose_a(&delta, input)?);
        let out_dim = net.head[layer_idx].out_dim();
        let mut b = Tensor::zeros(&[out_dim]);
        for r in 0..n {
            for c in 0..out_dim {
                b.data_mut()[c] += delta.at(r, c);
            }
        }
        biases.push(b);

        if layer_idx > 0 {
            // delta_prev = (delta x W) * act'(z_prev)
            let back = crate::tensor::matmul(&delta, &net.head[layer_idx].weights)?;
            let dact = activate_grad(
                net.head[layer_idx - 1].activation,
                &cache.pre[layer_idx - 1],
            )?;
            let mut next = back;
            for (v, d) in next.data_mut().iter_mut().zip(dact.iter()) {
                *v *= d;
            }
            delta = next;
        }
    }

    weights.reverse();
    biases.reverse();
    Ok(HeadGradients {
        weights: weights.try_into().expect("three layers"),
        biases: biases.try_into().expect("three layers"),
    })
}

/// Predicted class for a single input. Ties break toward class 0.
pub fn predict(net: &Network, x: &[f64]) -> Result<usize> {
    let batch = Tensor::from_vec(&[1, x.len()], x.to_vec())?;
    let (probs, _) = forward(net, &batch)?;
    Ok(argmax_row(probs.row(0)))
}

/// Index of the row maximum, lowest index on ties.
pub fn argmax_row(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Serialized network: one flat JSON document per model, with weights as
/// decimal arrays that reload bit-exactly at f64 precision.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub extractor: Tensor,
    pub layers: Vec<CheckpointLayer>,
    pub meta: CheckpointMeta,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckpointLayer {
    pub w: Tensor,
    pub b: Tensor,
    pub activation: ActivationKind,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub seed: u64,
    pub config_hash: String,
}

impl Checkpoint {
    pub fn from_network(net: &Network, seed: u64, config_hash: &str) -> Self {
        Checkpoint {
            extractor: net.extractor.clone(),
            layers: net
                .head
                .iter()
                .map(|l| CheckpointLayer {
                    w: l.weights.clone(),
                    b: l.bias.clone(),
                    activation: l.activation,
                })
                .collect(),
            meta: CheckpointMeta {
                seed,
                config_hash: config_hash.to_string(),
            },
        }
    }

    pub fn into_network(self) -> Result<Network> {
        if self.layers.len() != 3 {
            return Err(Error::ShapeMismatch(format!(
                "checkpoint must hold 3 head layers, got {}",
                self.layers.len()
            )));
        }
        let head: Vec<DenseLayer> = self
            .layers
            .into_iter()
            .map(|l| DenseLayer {
                weights: l.w,
                bias: l.b,
                activation: l.activation,
            })
            .collect();
        Ok(Network {
            extractor: self.extractor,
            head: head.try_into().expect("three layers"),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}
