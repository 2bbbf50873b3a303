//! Files written to a run directory.
//!
//! | file | content |
//! |---|---|
//! | `metrics.csv` | one row per epoch, see [`crate::metrics::header`] |
//! | `metadata.toml` | the full configuration plus resolved sizes, p and best epoch |
//! | `timing.csv` | wall-clock seconds per epoch (not reproducible) |
//! | `split.csv` | source-row indices of the training and unseen partitions |
//! | `confusion_<mode>.csv` | final test-set confusion matrix per eval mode |
//! | `mask_trace.csv` | every mask refresh (NSDropout runs with tracing) |
//! | `churn.csv` | per-slot, per-class mask changes between epochs |
//! | `final_masks.csv` | the last mask set of every slot, trace format |
//! | `model.nsdw` | final weights, binary checkpoint |

use std::fs;
use std::io::BufReader;
use std::path::Path;

use nsd_core::nn::save_checkpoint;
use nsd_core::nsdropout::trace::{masks_by_epoch, read_mask_trace, MaskTraceWriter};
use nsd_core::nsdropout::MaskSet;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::metrics::write_metrics_csv;
use crate::runner::RunOutcome;

pub const METRICS_FILE: &str = "metrics.csv";
pub const METADATA_FILE: &str = "metadata.toml";
pub const TIMING_FILE: &str = "timing.csv";
pub const SPLIT_FILE: &str = "split.csv";
pub const MASK_TRACE_FILE: &str = "mask_trace.csv";
pub const CHURN_FILE: &str = "churn.csv";
pub const FINAL_MASKS_FILE: &str = "final_masks.csv";
pub const MODEL_FILE: &str = "model.nsdw";

pub fn confusion_file(mode: nsd_core::nsdropout::EvalMode) -> String {
    format!("confusion_{}.csv", mode.name())
}

#[derive(Serialize)]
struct RunInfo {
    dataset: String,
    architecture: Vec<usize>,
    p: Vec<f64>,
    nsd_slots: Vec<usize>,
    budget: usize,
    stratified: bool,
    train_rows: usize,
    unseen_rows: usize,
    test_rows: usize,
    effective_learning_rate: f64,
    epochs_run: usize,
    best_epoch: usize,
    parameters: usize,
}

#[derive(Serialize)]
struct Metadata<'a> {
    run: RunInfo,
    config: &'a ExperimentConfig,
}

fn create(dir: &Path, name: &str) -> Result<fs::File> {
    let path = dir.join(name);
    fs::File::create(&path).map_err(|e| HarnessError::io(path, e))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn metadata_toml(out: &RunOutcome) -> String {
    let r = &out.resolved;
    let meta = Metadata {
        run: RunInfo {
            dataset: r.config.dataset.kind.name().to_string(),
            architecture: r.architecture.clone(),
            p: r.p.clone(),
            nsd_slots: out.slots.clone(),
            budget: r.budget,
            stratified: r.stratified,
            train_rows: out.split_sizes.train,
            unseen_rows: out.split_sizes.unseen,
            test_rows: out.split_sizes.test,
            effective_learning_rate: r.sgd().learning_rate,
            epochs_run: out.records.len(),
            best_epoch: out.best_epoch,
            parameters: out.network.parameter_count(),
        },
        config: &r.config,
    };
    toml::to_string(&meta).expect("metadata serializes")
}

/// Writes every artifact of `out` into `dir`, creating it if needed.
pub fn write_run(dir: &Path, out: &RunOutcome) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    write_metrics_csv(create(dir, METRICS_FILE)?, &out.modes, &out.records)?;
    write_text(dir, METADATA_FILE, &metadata_toml(out))?;

    let mut w = csv::Writer::from_writer(create(dir, TIMING_FILE)?);
    w.write_record(["epoch", "wall_time_s"])?;
    for r in &out.records {
        w.write_record([r.epoch.to_string(), format!("{:.3}", r.wall_time)])?;
    }
    w.flush().map_err(|e| HarnessError::io(dir.join(TIMING_FILE), e))?;

    let mut w = csv::Writer::from_writer(create(dir, SPLIT_FILE)?);
    w.write_record(["role", "source_index"])?;
    for (role, idx) in [("train", &out.partition.train), ("unseen", &out.partition.unseen)] {
        for i in idx {
            w.write_record([role, &i.to_string()])?;
        }
    }
    w.flush().map_err(|e| HarnessError::io(dir.join(SPLIT_FILE), e))?;

    for (mode, m) in &out.confusion {
        m.write_csv(create(dir, &confusion_file(*mode))?)?;
    }

    if let Some(trace) = &out.mask_trace {
        fs::write(dir.join(MASK_TRACE_FILE), trace).map_err(|e| HarnessError::io(dir.join(MASK_TRACE_FILE), e))?;
    }
    if !out.slots.is_empty() {
        let classes = out.network.classes();
        let mut w = csv::Writer::from_writer(create(dir, CHURN_FILE)?);
        let mut header = vec!["epoch".to_string(), "slot".into(), "mean".into()];
        header.extend((0..classes).map(|c| format!("class_{c}")));
        w.write_record(&header)?;
        for row in &out.churn {
            let mut rec = vec![row.epoch.to_string(), row.slot.to_string(), row.churn.mean.to_string()];
            rec.extend(row.churn.per_class.iter().map(usize::to_string));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| HarnessError::io(dir.join(CHURN_FILE), e))?;

        let epoch = out.records.len();
        let io = |e| HarnessError::io(dir.join(FINAL_MASKS_FILE), e);
        let mut tw = MaskTraceWriter::new(create(dir, FINAL_MASKS_FILE)?).map_err(io)?;
        for (slot, masks) in &out.final_masks {
            tw.write_masks(1, epoch, *slot, masks).map_err(io)?;
        }
    }
    save_checkpoint(&out.network, &dir.join(MODEL_FILE))?;
    Ok(())
}

/// Reads `final_masks.csv`: the mask set of each slot, keyed by slot position.
pub fn read_final_masks(dir: &Path, p_at: impl Fn(usize) -> f64) -> Result<Vec<(usize, MaskSet)>> {
    let path = dir.join(FINAL_MASKS_FILE);
    let file = fs::File::open(&path).map_err(|e| HarnessError::io(&path, e))?;
    let records = read_mask_trace(BufReader::new(file))?;
    let mut slots: Vec<usize> = records.iter().map(|r| r.slot).collect();
    slots.sort_unstable();
    slots.dedup();
    let mut out = Vec::new();
    for slot in slots {
        let (_, masks) = masks_by_epoch(&records, slot)?.pop().expect("slot has records");
        let rows: Vec<Vec<bool>> = masks.rows().map(<[bool]>::to_vec).collect();
        out.push((slot, MaskSet::from_rows(rows, p_at(slot))?));
    }
    Ok(out)
}
