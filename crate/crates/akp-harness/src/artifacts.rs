//! Fixed on-disk layout for trial artifacts:
//!
//! ```text
//! out/<group>/trial<NN>/
//!   run.json          full run record
//!   curves.csv        epoch,train_acc,val_acc,train_loss,val_loss
//!   events.csv        epoch,target,old,new
//!   checkpoint.json   reloadable network
//!   snapshots/epoch<EEE>_layer<L>.json
//! ```

use std::path::{Path, PathBuf};

use akp_core::metrics::{CurvePoint, RunRecord};
use akp_core::perturb::SwapEvent;
use akp_core::repsim::Snapshot;

use crate::error::Result;
use crate::trainer::TrialArtifacts;

pub fn write_trial(trial_dir: &Path, artifacts: &TrialArtifacts) -> Result<()> {
    std::fs::create_dir_all(trial_dir.join("snapshots"))?;

    std::fs::write(
        trial_dir.join("run.json"),
        serde_json::to_string_pretty(&artifacts.record)?,
    )?;

    let mut curves = String::from(CurvePoint::csv_header());
    curves.push('\n');
    for point in &artifacts.record.curves {
        curves.push_str(&point.to_csv_row());
        curves.push('\n');
    }
    std::fs::write(trial_dir.join("curves.csv"), curves)?;

    let mut events = String::from(SwapEvent::csv_header());
    events.push('\n');
    for event in &artifacts.record.events {
        events.push_str(&event.to_csv_row());
        events.push('\n');
    }
    std::fs::write(trial_dir.join("events.csv"), events)?;

    artifacts.checkpoint.save(&trial_dir.join("checkpoint.json"))?;

    for snap in &artifacts.snapshots {
        let name = format!("epoch{:03}_layer{}.json", snap.epoch, snap.layer);
        snap.save(&trial_dir.join("snapshots").join(name))?;
    }
    Ok(())
}

fn walk_files(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            walk_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

/// All run records below `root`, in path order.
pub fn read_run_records(root: &Path) -> Result<Vec<RunRecord>> {
    let mut files = Vec::new();
    walk_files(root, &mut files)?;
    files.sort();
    let mut records = Vec::new();
    for path in files {
        if path.file_name().and_then(|n| n.to_str()) == Some("run.json") {
            let text = std::fs::read_to_string(&path)?;
            records.push(serde_json::from_str(&text)?);
        }
    }
    Ok(records)
}

/// All parseable snapshots below `root`, in path order. Files that are not
/// snapshot JSON are skipped.
pub fn read_snapshots(root: &Path) -> Result<Vec<Snapshot>> {
    let mut files = Vec::new();
    walk_files(root, &mut files)?;
    files.sort();
    let mut snaps = Vec::new();
    for path in files {
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let text = std::fs::read_to_string(&path)?;
        if let Ok(snap) = serde_json::from_str::<Snapshot>(&text) {
            snaps.push(snap);
        }
    }
    Ok(snaps)
}

/// Keep one snapshot per model: the requested layer at its latest epoch.
pub fn latest_per_model(snaps: Vec<Snapshot>, layer: usize) -> Vec<Snapshot> {
    let mut by_model: Vec<Snapshot> = Vec::new();
    for snap in snaps.into_iter().filter(|s| s.layer == layer) {
        match by_model.iter_mut().find(|s| s.model_id == snap.model_id) {
            Some(existing) if existing.epoch < snap.epoch => *existing = snap,
            Some(_) => {}
            None => by_model.push(snap),
        }
    }
    by_model
}
