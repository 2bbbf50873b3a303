//! Per-epoch metrics and their CSV form.

use std::io::{BufRead, Write};

use nsd_core::nsdropout::EvalMode;

use crate::error::{HarnessError, Result};

/// One epoch of a run. Test accuracies are `None` on epochs where the test
/// split was not scored; `mask_churn` is `None` on the first epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub unseen_val_acc: f64,
    pub test_acc: Vec<Option<f64>>,
    pub mask_churn: Option<f64>,
    /// Seconds since the run started; kept out of the metrics CSV so that the
    /// CSV is reproducible byte for byte.
    pub wall_time: f64,
}

impl MetricsRecord {
    pub fn train_err(&self) -> f64 {
        1.0 - self.train_acc
    }

    pub fn unseen_val_err(&self) -> f64 {
        1.0 - self.unseen_val_acc
    }

    /// |train error − unseen validation error|.
    pub fn generalization_gap(&self) -> f64 {
        (self.train_err() - self.unseen_val_err()).abs()
    }
}

/// Epoch with the highest unseen validation accuracy; the earliest wins ties.
pub fn best_epoch(records: &[MetricsRecord]) -> Option<usize> {
    let mut best: Option<&MetricsRecord> = None;
    for r in records {
        if best.is_none_or(|b| r.unseen_val_acc > b.unseen_val_acc) {
            best = Some(r);
        }
    }
    best.map(|r| r.epoch)
}

pub fn header(modes: &[EvalMode]) -> Vec<String> {
    let mut h: Vec<String> = ["epoch", "train_loss", "train_acc", "unseen_val_acc"].iter().map(|s| s.to_string()).collect();
    h.extend(modes.iter().map(|m| format!("test_acc_{}", m.name())));
    h.push("mask_churn".into());
    h
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_metrics_csv<W: Write>(out: W, modes: &[EvalMode], records: &[MetricsRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(modes))?;
    for r in records {
        let mut rec = vec![r.epoch.to_string(), r.train_loss.to_string(), r.train_acc.to_string(), r.unseen_val_acc.to_string()];
        rec.extend(r.test_acc.iter().map(|&v| opt(v)));
        rec.push(opt(r.mask_churn));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a metrics CSV back; returns the eval modes named in the header and
/// the records (with zero wall time).
pub fn read_metrics_csv<R: BufRead>(input: R) -> Result<(Vec<EvalMode>, Vec<MetricsRecord>)> {
    let bad = |msg: String| HarnessError::Config(format!("metrics csv: {msg}"));
    let mut r = csv::Reader::from_reader(input);
    let head = r.headers()?.clone();
    let n = head.len();
    if n < 5 || &head[n - 1] != "mask_churn" {
        return Err(bad("unexpected header".into()));
    }
    let modes = (4..n - 1)
        .map(|i| {
            head[i]
                .strip_prefix("test_acc_")
                .and_then(|m| m.parse::<EvalMode>().ok())
                .ok_or_else(|| bad(format!("bad column {}", &head[i])))
        })
        .collect::<Result<Vec<_>>>()?;
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number {s:?}")));
    let opt_num = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
    let mut records = Vec::new();
    for row in r.records() {
        let row = row?;
        records.push(MetricsRecord {
            epoch: row[0].parse().map_err(|_| bad("bad epoch".into()))?,
            train_loss: num(&row[1])?,
            train_acc: num(&row[2])?,
            unseen_val_acc: num(&row[3])?,
            test_acc: (4..n - 1).map(|i| opt_num(&row[i])).collect::<Result<_>>()?,
            mask_churn: opt_num(&row[n - 1])?,
            wall_time: 0.0,
        });
    }
    Ok((modes, records))
}
