//! Group execution: one seed policy applied over N independent trials,
//! optionally in parallel. Trials share nothing mutable, so parallel and
//! serial execution produce identical artifacts.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use akp_core::metrics::{aggregate, GroupSummary, RunRecord};

use crate::artifacts::write_trial;
use crate::config::{ExperimentConfig, SeedPolicy};
use crate::error::{HarnessError, Result};
use crate::trainer::train_one;

pub struct GroupOutcome {
    pub group_dir: PathBuf,
    pub records: Vec<RunRecord>,
    pub summary: GroupSummary,
}

/// Seeds for every trial under the configured policy. Random seeds are drawn
/// once here and then recorded, making "random" runs replayable.
pub fn trial_seeds(cfg: &ExperimentConfig) -> Vec<u64> {
    match cfg.seed {
        SeedPolicy::Fixed(s) => vec![s; cfg.trials],
        SeedPolicy::RandomRecorded => (0..cfg.trials).map(|_| rand::random::<u64>()).collect(),
    }
}

/// Run every trial of the group, write per-trial artifacts under
/// `out_root/<group>/trial<NN>/`, aggregate, and write `summary.json`.
/// `parallel` is the worker count; 1 means serial.
pub fn run_group(cfg: &ExperimentConfig, out_root: &Path, parallel: usize) -> Result<GroupOutcome> {
    cfg.validate()?;
    let workers = parallel.max(1).min(cfg.trials);
    let group_dir = out_root.join(cfg.group.name());
    std::fs::create_dir_all(&group_dir)?;

    let seeds = trial_seeds(cfg);
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; cfg.trials]);
    let first_error: Mutex<Option<HarnessError>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let trial = next.fetch_add(1, Ordering::SeqCst);
                if trial >= cfg.trials {
                    return;
                }
                let result = train_one(cfg, trial, seeds[trial]).and_then(|artifacts| {
                    let trial_dir = group_dir.join(format!("trial{trial:02}"));
                    write_trial(&trial_dir, &artifacts)?;
                    Ok(artifacts.record)
                });
                match result {
                    Ok(record) => {
                        slots.lock().expect("record slots")[trial] = Some(record);
                    }
                    Err(e) => {
                        let mut guard = first_error.lock().expect("error slot");
                        if guard.is_none() {
                            *guard = Some(e);
                        }
                        return;
                    }
                }
            });
        }
    });

    if let Some(e) = first_error.into_inner().expect("error slot") {
        return Err(e);
    }
    let records: Vec<RunRecord> = slots
        .into_inner()
        .expect("record slots")
        .into_iter()
        .map(|r| r.expect("every trial ran"))
        .collect();

    let summary = aggregate(&records)?;
    std::fs::write(
        group_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(GroupOutcome {
        group_dir,
        records,
        summary,
    })
}
