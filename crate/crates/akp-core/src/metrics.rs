//! Confusion-matrix metrics, per-epoch curves and group aggregation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perturb::SwapEvent;
use crate::repsim::StressLevel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Count outcomes against a designated positive class.
pub fn confusion(preds: &[usize], labels: &[usize], positive_class: usize) -> Result<Confusion> {
    if preds.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions for {} labels",
            preds.len(),
            labels.len()
        )));
    }
    let mut c = Confusion {
        tp: 0,
        fp: 0,
        fn_: 0,
        tn: 0,
    };
    for (&p, &l) in preds.iter().zip(labels.iter()) {
        match (p == positive_class, l == positive_class) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// Precision, recall and F1 with the zero-division convention: a metric
/// whose denominator vanishes is 0, matching all-negative predictions being
/// reported as (0, 0, 0).
pub fn precision_recall_f1(c: &Confusion) -> (f64, f64, f64) {
    let p = if c.tp + c.fp > 0 {
        c.tp as f64 / (c.tp + c.fp) as f64
    } else {
        0.0
    };
    let r = if c.tp + c.fn_ > 0 {
        c.tp as f64 / (c.tp + c.fn_) as f64
    } else {
        0.0
    };
    let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    (p, r, f1)
}

/// F1 from already-rounded precision/recall, as printed tables report them.
pub fn f1_from_pr(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Fraction of correct predictions.
pub fn accuracy(preds: &[usize], labels: &[usize]) -> Result<f64> {
    if preds.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions for {} labels",
            preds.len(),
            labels.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::InsufficientData(
            "accuracy over an empty prediction set".into(),
        ));
    }
    let correct = preds
        .iter()
        .zip(labels.iter())
        .filter(|(p, l)| p == l)
        .count();
    Ok(correct as f64 / preds.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub epoch: usize,
    pub train_acc: f64,
    pub val_acc: f64,
    pub train_loss: f64,
    pub val_loss: f64,
}

impl CurvePoint {
    pub fn csv_header() -> &'static str {
        "epoch,train_acc,val_acc,train_loss,val_loss"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.epoch, self.train_acc, self.val_acc, self.train_loss, self.val_loss
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RunStatus {
    Completed,
    Failed { epoch: usize, reason: String },
}

/// Everything one trial leaves behind; the unit run_group aggregates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub model_id: String,
    pub group: String,
    pub config_hash: String,
    pub seed: u64,
    pub optimizer: String,
    pub initializer: String,
    /// Which swap schedules were active: none, activation, loss, or both.
    pub perturbation: String,
    pub stress: StressLevel,
    pub status: RunStatus,
    pub curves: Vec<CurvePoint>,
    pub events: Vec<SwapEvent>,
    /// Confusions with class 0 and class 1 as the positive class; absent
    /// when the run failed before evaluation.
    pub confusion_class0: Option<Confusion>,
    pub confusion_class1: Option<Confusion>,
    pub test_accuracy: Option<f64>,
}

impl RunRecord {
    pub fn completed(&self) -> bool {
        matches!(self.status, RunStatus::Completed)
    }
}

/// Per-class metric means over a group of runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassSummary {
    pub class: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecordMetrics {
    pub model_id: String,
    pub seed: u64,
    pub per_class: [(f64, f64, f64); 2],
    pub accuracy: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupSummary {
    pub classes: [ClassSummary; 2],
    pub accuracy: f64,
    /// Per-run values behind the means, for dispersion.
    pub records: Vec<RecordMetrics>,
    pub completed: usize,
    pub failed: usize,
}

/// Mean that sorts its inputs first, so aggregation is bit-identical under
/// record permutation.
fn stable_mean(values: &mut Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean per-class precision/recall/F1 and overall accuracy over completed
/// runs; failed runs only contribute to the failure count.
pub fn aggregate(records: &[RunRecord]) -> Result<GroupSummary> {
    if records.is_empty() {
        return Err(Error::InsufficientData("no run records".into()));
    }
    let mut per_record = Vec::new();
    let mut failed = 0usize;
    for rec in records {
        if !rec.completed() {
            failed += 1;
            continue;
        }
        let (c0, c1, acc) = match (rec.confusion_class0, rec.confusion_class1, rec.test_accuracy) {
            (Some(c0), Some(c1), Some(acc)) => (c0, c1, acc),
            _ => {
                failed += 1;
                continue;
            }
        };
        per_record.push(RecordMetrics {
            model_id: rec.model_id.clone(),
            seed: rec.seed,
            per_class: [precision_recall_f1(&c0), precision_recall_f1(&c1)],
            accuracy: acc,
        });
    }
    if per_record.is_empty() {
        return Err(Error::InsufficientData(
            "no completed runs to aggregate".into(),
        ));
    }
    let mut classes = Vec::with_capacity(2);
    for class in 0..2 {
        let mut p: Vec<f64> = per_record.iter().map(|m| m.per_class[class].0).collect();
        let mut r: Vec<f64> = per_record.iter().map(|m| m.per_class[class].1).collect();
        let mut f1: Vec<f64> = per_record.iter().map(|m| m.per_class[class].2).collect();
        classes.push(ClassSummary {
            class,
            precision: stable_mean(&mut p),
            recall: stable_mean(&mut r),
            f1: stable_mean(&mut f1),
        });
    }
    let mut accs: Vec<f64> = per_record.iter().map(|m| m.accuracy).collect();
    let accuracy = stable_mean(&mut accs);
    Ok(GroupSummary {
        classes: classes.try_into().map_err(|_| {
            Error::InsufficientData("class summary construction".into())
        })?,
        accuracy,
        records: per_record,
        completed: records.len() - failed,
        failed,
    })
}
