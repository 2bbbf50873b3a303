//! Early-stop-then-retrain: a first run finds the epoch with the best unseen
//! validation accuracy, a second run from scratch with the same seed stops
//! there.

use crate::error::Result;
use crate::metrics::{best_epoch, MetricsRecord};

#[derive(Debug)]
pub struct RetrainResult<O> {
    pub phase1: O,
    pub best_epoch: usize,
    pub phase2: O,
}

/// Runs the schedule with `train(stop_at)`, where `stop_at = None` means the
/// configured number of epochs.
pub fn retrain_schedule<O, F>(mut train: F) -> Result<RetrainResult<O>>
where
    O: AsRef<[MetricsRecord]>,
    F: FnMut(Option<usize>) -> Result<O>,
{
    let phase1 = train(None)?;
    let best = best_epoch(phase1.as_ref()).ok_or_else(|| crate::HarnessError::Config("first phase produced no epochs".into()))?;
    let phase2 = train(Some(best))?;
    Ok(RetrainResult { phase1, best_epoch: best, phase2 })
}
