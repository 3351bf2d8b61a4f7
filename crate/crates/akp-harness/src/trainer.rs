//! One training trial: minibatch updates with scheduled activation/loss
//! swaps, per-epoch curve logging, snapshot capture and final evaluation.
//! Everything is a pure function of (config, trial index, seed).

use akp_core::data::{load_image_dir, split, synth_generate, Dataset};
use akp_core::init::InitializerKind;
use akp_core::loss::LossKind;
use akp_core::metrics::{accuracy, confusion, CurvePoint, RunRecord, RunStatus};
use akp_core::network::{
    argmax_row, backward, batch_loss, forward, Checkpoint, HeadShape, Network,
};
use akp_core::perturb::{apply_activation_swap, apply_loss_swap, SwapEvent, SwapPolicy};
use akp_core::repsim::{capture_snapshot, Snapshot, SnapshotMeta, StressLevel};
use akp_core::rng::Prng;
use akp_core::tensor::Tensor;
use akp_core::activation::ActivationKind;

use crate::config::{DatasetSource, ExperimentConfig, GroupKind};
use crate::error::{HarnessError, Result};

const STREAM_HEAD_INIT: u64 = 0x11EAD;
const STREAM_SHUFFLE: u64 = 0x5F0F;
const STREAM_EXTRACTOR: u64 = 0xE87;
const STREAM_PROBE: u64 = 0x9806E;

pub struct TrialArtifacts {
    pub record: RunRecord,
    pub snapshots: Vec<Snapshot>,
    pub checkpoint: Checkpoint,
}

/// Flattened split plus usize labels, ready for the classifier.
struct Split {
    x: Tensor,
    y: Vec<usize>,
}

impl Split {
    fn from_dataset(ds: &Dataset) -> Split {
        Split {
            x: ds.flatten(),
            y: ds.labels.iter().map(|&l| l as usize).collect(),
        }
    }
}

fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    match &cfg.dataset {
        DatasetSource::Synth(spec) => Ok(synth_generate(spec)?),
        DatasetSource::Dir(path) => Ok(load_image_dir(path)?),
    }
}

/// Probe inputs shared by every trial of an experiment: a seeded draw from
/// the held-out validation + test pool.
fn build_probe(cfg: &ExperimentConfig, val: &Dataset, test: &Dataset) -> Tensor {
    let val_x = val.flatten();
    let test_x = test.flatten();
    let width = val_x.cols().max(test_x.cols());
    let pool: Vec<&[f64]> = (0..val_x.rows())
        .map(|i| val_x.row(i))
        .chain((0..test_x.rows()).map(|i| test_x.row(i)))
        .collect();
    let mut order: Vec<usize> = (0..pool.len()).collect();
    let mut rng = Prng::derive(cfg.probe_seed, &[STREAM_PROBE]);
    rng.shuffle(&mut order);
    let take = cfg.probe_size.min(pool.len());
    let mut data = Vec::with_capacity(take * width);
    for &i in order.iter().take(take) {
        data.extend_from_slice(pool[i]);
    }
    Tensor::from_vec(&[take, width], data).expect("probe rows share one width")
}

/// Evaluate accuracy and mean loss on a split. Empty splits report zeros.
fn evaluate(net: &Network, part: &Split, loss_kind: LossKind) -> Result<(f64, f64)> {
    if part.y.is_empty() {
        return Ok((0.0, 0.0));
    }
    let (probs, cache) = forward(net, &part.x)?;
    let loss = batch_loss(&cache, &part.y, loss_kind)?;
    let preds: Vec<usize> = (0..probs.rows()).map(|r| argmax_row(probs.row(r))).collect();
    Ok((accuracy(&preds, &part.y)?, loss))
}

/// Run one trial to completion (or to numeric failure, which is recorded
/// rather than raised). Deterministic given (config, trial index, seed).
pub fn train_one(cfg: &ExperimentConfig, trial_index: usize, seed: u64) -> Result<TrialArtifacts> {
    cfg.validate()?;
    let config_hash = cfg.hash();
    let model_id = format!("{}-trial{trial_index:02}", cfg.group.name());

    let dataset = load_dataset(cfg)?;
    let (train, val, test) = split(
        &dataset,
        (cfg.split[0], cfg.split[1], cfg.split[2]),
        cfg.split_seed,
        true,
    )?;
    if train.is_empty() {
        return Err(HarnessError::Config("training split is empty".into()));
    }
    let probe = build_probe(cfg, &val, &test);
    let train_split = Split::from_dataset(&train);
    let val_split = Split::from_dataset(&val);
    let test_split = Split::from_dataset(&test);
    let d_in = train_split.x.cols();

    let activation_policy: Option<SwapPolicy<ActivationKind>> = cfg
        .activation_policy
        .as_ref()
        .map(|p| p.to_policy())
        .transpose()?;
    let loss_policy: Option<SwapPolicy<LossKind>> =
        cfg.loss_policy.as_ref().map(|p| p.to_policy()).transpose()?;
    let stress = StressLevel::from_policies(activation_policy.is_some(), loss_policy.is_some());

    let layer1_init = if cfg.group == GroupKind::C {
        cfg.initializers[trial_index % cfg.initializers.len()]
    } else {
        InitializerKind::GlorotNormal
    };
    let initial_activation = activation_policy
        .as_ref()
        .map(|p| p.active_value_at(0))
        .unwrap_or(cfg.default_activation);
    let mut loss_slot = loss_policy
        .as_ref()
        .map(|p| p.active_value_at(0))
        .unwrap_or(cfg.default_loss);

    let mut net = Network::build(
        d_in,
        HeadShape {
            d_feat: cfg.feature_dim,
            hidden1: cfg.head_widths[0],
            hidden2: cfg.head_widths[1],
        },
        initial_activation,
        layer1_init,
        &mut Prng::derive(cfg.extractor_seed, &[STREAM_EXTRACTOR]),
        &mut Prng::derive(seed, &[STREAM_HEAD_INIT]),
    )?;
    let extractor_before = net.extractor.fingerprint();
    let mut optimizer = cfg.optimizer.build()?;
    let mut shuffle_rng = Prng::derive(seed, &[STREAM_SHUFFLE]);

    let mut curves: Vec<CurvePoint> = Vec::with_capacity(cfg.epochs);
    let mut events: Vec<SwapEvent> = Vec::new();
    let mut snapshots: Vec<Snapshot> = Vec::new();
    let mut failure: Option<(usize, String)> = None;

    let mut indices: Vec<usize> = (0..train_split.y.len()).collect();

    'epochs: for epoch in 0..cfg.epochs {
        if let Some(policy) = &activation_policy {
            if let Some(ev) = apply_activation_swap(&mut net, policy, epoch)? {
                events.push(ev);
            }
        }
        if let Some(policy) = &loss_policy {
            if let Some(ev) = apply_loss_swap(&mut loss_slot, policy, epoch)? {
                events.push(ev);
            }
        }
        if net.head[2].activation != ActivationKind::Softmax {
            return Err(HarnessError::Runtime(
                "final layer lost its softmax slot".into(),
            ));
        }

        shuffle_rng.shuffle(&mut indices);
        let mut correct = 0usize;
        let mut loss_sum = 0.0;
        for batch_indices in indices.chunks(cfg.batch_size) {
            let batch = train_split.x.gather_rows(batch_indices);
            let labels: Vec<usize> = batch_indices.iter().map(|&i| train_split.y[i]).collect();
            let (probs, cache) = forward(&net, &batch)?;
            let loss = batch_loss(&cache, &labels, loss_slot)?;
            if !loss.is_finite() {
                failure = Some((epoch, format!("non-finite training loss: {loss}")));
                break 'epochs;
            }
            loss_sum += loss * labels.len() as f64;
            for (r, &label) in labels.iter().enumerate() {
                if argmax_row(probs.row(r)) == label {
                    correct += 1;
                }
            }
            let grads = backward(&net, &cache, &labels, loss_slot)?;
            let grad_refs = grads.flat();
            let mut params = net.head_params_mut();
            optimizer.step(&mut params, &grad_refs)?;
        }
        let n_train = train_split.y.len() as f64;
        let (val_acc, val_loss) = evaluate(&net, &val_split, loss_slot)?;
        curves.push(CurvePoint {
            epoch,
            train_acc: correct as f64 / n_train,
            val_acc,
            train_loss: loss_sum / n_train,
            val_loss,
        });

        let is_swap_epoch = activation_policy
            .as_ref()
            .map(|p| p.is_swap_epoch(epoch))
            .unwrap_or(false)
            || loss_policy
                .as_ref()
                .map(|p| p.is_swap_epoch(epoch))
                .unwrap_or(false);
        if is_swap_epoch || epoch + 1 == cfg.epochs {
            let meta = SnapshotMeta {
                model_id: model_id.clone(),
                epoch,
                stress,
            };
            for layer in [1, 2] {
                snapshots.push(capture_snapshot(&net, &probe, layer, &meta)?);
            }
        }
    }

    if net.extractor.fingerprint() != extractor_before {
        return Err(HarnessError::Runtime(
            "frozen extractor was modified during training".into(),
        ));
    }

    let (status, confusion0, confusion1, test_accuracy) = match failure {
        Some((epoch, reason)) => (RunStatus::Failed { epoch, reason }, None, None, None),
        None => {
            let (probs, _) = forward(&net, &test_split.x)?;
            let preds: Vec<usize> = (0..probs.rows()).map(|r| argmax_row(probs.row(r))).collect();
            let acc = if preds.is_empty() {
                0.0
            } else {
                accuracy(&preds, &test_split.y)?
            };
            let c0 = confusion(&preds, &test_split.y, 0)?;
            let c1 = confusion(&preds, &test_split.y, 1)?;
            for snap in snapshots.iter_mut() {
                if snap.epoch + 1 == cfg.epochs {
                    snap.test_accuracy = Some(acc);
                }
            }
            (RunStatus::Completed, Some(c0), Some(c1), Some(acc))
        }
    };

    let record = RunRecord {
        model_id,
        group: cfg.group.name().to_string(),
        config_hash: config_hash.clone(),
        seed,
        optimizer: optimizer.name().to_string(),
        initializer: layer1_init.name().to_string(),
        perturbation: cfg.perturbation_name().to_string(),
        stress,
        status,
        curves,
        events,
        confusion_class0: confusion0,
        confusion_class1: confusion1,
        test_accuracy,
    };
    let checkpoint = Checkpoint::from_network(&net, seed, &config_hash);
    Ok(TrialArtifacts {
        record,
        snapshots,
        checkpoint,
    })
}
