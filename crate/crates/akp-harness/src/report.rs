//! Group-level summary shaped like the experiment table: one row per
//! (group, perturbation, optimizer, class) with mean precision/recall/F1
//! and one overall accuracy per experiment block.

use serde::{Deserialize, Serialize};

use akp_core::metrics::{aggregate, RunRecord};

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportRow {
    pub group: String,
    pub perturbation: String,
    pub optimizer: String,
    pub class: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub trials: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("group,perturbation,optimizer,class,precision,recall,f1,accuracy\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.group, r.perturbation, r.optimizer, r.class, r.precision, r.recall, r.f1,
                r.accuracy
            ));
        }
        out
    }
}

/// Bucket records by (group, perturbation, optimizer), aggregate each
/// bucket, and emit two class rows per bucket.
pub fn build_report(records: &[RunRecord]) -> Result<Report> {
    if records.is_empty() {
        return Err(HarnessError::Runtime("no run records found".into()));
    }
    let mut keys: Vec<(String, String, String)> = records
        .iter()
        .map(|r| (r.group.clone(), r.perturbation.clone(), r.optimizer.clone()))
        .collect();
    keys.sort();
    keys.dedup();

    let mut rows = Vec::new();
    for (group, perturbation, optimizer) in keys {
        let bucket: Vec<RunRecord> = records
            .iter()
            .filter(|r| {
                r.group == group && r.perturbation == perturbation && r.optimizer == optimizer
            })
            .cloned()
            .collect();
        let summary = aggregate(&bucket)?;
        for class in 0..2 {
            rows.push(ReportRow {
                group: group.clone(),
                perturbation: perturbation.clone(),
                optimizer: optimizer.clone(),
                class,
                precision: summary.classes[class].precision,
                recall: summary.classes[class].recall,
                f1: summary.classes[class].f1,
                accuracy: summary.accuracy,
                trials: bucket.len(),
                failed: summary.failed,
            });
        }
    }
    Ok(Report { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use akp_core::metrics::{Confusion, RunStatus};
    use akp_core::repsim::StressLevel;

    fn record(group: &str, optimizer: &str, acc: f64) -> RunRecord {
        let c1 = Confusion {
            tp: 4,
            fp: 1,
            fn_: 2,
            tn: 9,
        };
        RunRecord {
            model_id: format!("{group}-x"),
            group: group.into(),
            config_hash: "h".into(),
            seed: 0,
            optimizer: optimizer.into(),
            initializer: "GlorotNormal".into(),
            perturbation: "activation".into(),
            stress: StressLevel::Mild,
            status: RunStatus::Completed,
            curves: vec![],
            events: vec![],
            confusion_class0: Some(Confusion {
                tp: 9,
                fp: 2,
                fn_: 1,
                tn: 4,
            }),
            confusion_class1: Some(c1),
            test_accuracy: Some(acc),
        }
    }

    #[test]
    fn report_rows_cover_buckets_and_classes() {
        let records = vec![
            record("A", "RMSProp", 0.8),
            record("A", "RMSProp", 0.9),
            record("A", "SGD", 0.6),
        ];
        let report = build_report(&records).unwrap();
        assert_eq!(report.rows.len(), 4);
        let rms: Vec<&ReportRow> = report
            .rows
            .iter()
            .filter(|r| r.optimizer == "RMSProp")
            .collect();
        assert_eq!(rms.len(), 2);
        assert!((rms[0].accuracy - 0.85).abs() < 1e-12);
        assert_eq!(rms[0].accuracy, rms[1].accuracy);
        assert_eq!(rms[0].trials, 2);

        let csv = report.to_csv();
        assert!(csv.starts_with("group,perturbation,optimizer,class"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(build_report(&[]).is_err());
    }
}
