//! Dropout versus NSDropout comparison tables over p and over budget size.

use std::io::Write;
use std::path::Path;

use nsd_core::nsdropout::{drop_count, EvalMode};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, RegularizerKind, Sampling};
use crate::data::Source;
use crate::error::{HarnessError, Result};
use crate::output::write_run;
use crate::runner::{run_training, RunOutcome};

/// Regularizers compared in every sweep row.
pub const COMPARED: [RegularizerKind; 2] = [RegularizerKind::Dropout, RegularizerKind::Nsdropout];

/// Best-epoch errors of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub regularizer: RegularizerKind,
    pub best_epoch: usize,
    pub train_err: f64,
    pub unseen_val_err: f64,
    /// Test error per eval mode, at the best epoch when it was scored there
    /// and at the last scored epoch otherwise.
    pub test_err: Vec<f64>,
}

impl RunSummary {
    pub fn of(out: &RunOutcome) -> Self {
        let best = out.best_record();
        let test_acc = if best.test_acc.iter().all(Option::is_some) {
            &best.test_acc
        } else {
            &out.records
                .iter()
                .rev()
                .find(|r| r.test_acc.iter().all(Option::is_some))
                .expect("the last epoch is always scored")
                .test_acc
        };
        Self {
            regularizer: out.resolved.config.model.regularizer,
            best_epoch: out.best_epoch,
            train_err: best.train_err(),
            unseen_val_err: best.unseen_val_err(),
            test_err: test_acc.iter().map(|a| 1.0 - a.expect("checked above")).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub key: f64,
    pub runs: Vec<RunSummary>,
}

/// One row per swept value, one column group per regularizer.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonTable {
    pub key_name: &'static str,
    pub modes: Vec<EvalMode>,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec![self.key_name.to_string()];
        for reg in COMPARED {
            let r = reg.name();
            h.push(format!("{r}_best_epoch"));
            h.push(format!("{r}_train_err"));
            h.push(format!("{r}_unseen_val_err"));
            h.extend(self.modes.iter().map(|m| format!("{r}_test_err_{}", m.name())));
        }
        h
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for row in &self.rows {
            let mut rec = vec![row.key.to_string()];
            for s in &row.runs {
                rec.push(s.best_epoch.to_string());
                rec.push(s.train_err.to_string());
                rec.push(s.unseen_val_err.to_string());
                rec.extend(s.test_err.iter().map(f64::to_string));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs every configuration (on the rayon pool), optionally writing each run
/// into `out_dir/<name>`.
pub fn run_all(jobs: Vec<(String, ExperimentConfig)>, source: &Source, out_dir: Option<&Path>) -> Result<Vec<RunOutcome>> {
    jobs.into_par_iter()
        .map(|(name, cfg)| {
            let out = run_training(&cfg, source, None)?;
            if let Some(dir) = out_dir {
                write_run(&dir.join(name), &out)?;
            }
            Ok(out)
        })
        .collect()
}

fn with_regularizer(base: &ExperimentConfig, reg: RegularizerKind) -> ExperimentConfig {
    let mut c = base.clone();
    c.model.regularizer = reg;
    c
}

fn build_table(key_name: &'static str, keys: &[f64], outcomes: &[RunOutcome]) -> ComparisonTable {
    let modes = outcomes.first().map(|o| o.modes.clone()).unwrap_or_default();
    let rows = keys
        .iter()
        .zip(outcomes.chunks(COMPARED.len()))
        .map(|(&key, runs)| ComparisonRow { key, runs: runs.iter().map(RunSummary::of).collect() })
        .collect();
    ComparisonTable { key_name, modes, rows }
}

/// One dropout and one NSDropout run per p, with p applied at `position`
/// (0 = input, k = after hidden layer k) and zero elsewhere. Values that
/// would drop every unit of that layer are rejected before anything runs.
pub fn sweep_p(
    base: &ExperimentConfig,
    source: &Source,
    p_list: &[f64],
    position: usize,
    out_dir: Option<&Path>,
) -> Result<ComparisonTable> {
    let resolved = base.resolve(source.train_rows(), source.dim(), source.classes)?;
    let hidden = resolved.architecture.len() - 2;
    if position > hidden {
        return Err(HarnessError::Config(format!("position {position} does not exist in a network with {hidden} hidden layers")));
    }
    let units = resolved.architecture[position];
    for &p in p_list {
        if !(0.0..=1.0).contains(&p) {
            return Err(HarnessError::Config(format!("p value {p} outside [0, 1]")));
        }
        if drop_count(units, p) >= units {
            return Err(HarnessError::Config(format!("p = {p} would drop all {units} units at position {position}")));
        }
    }
    let mut jobs = Vec::new();
    for &p in p_list {
        for reg in COMPARED {
            let mut c = with_regularizer(base, reg);
            let mut ps = vec![0.0; hidden + 1];
            ps[position] = p;
            c.model.p = Some(ps);
            jobs.push((format!("p_{p}_{}", reg.name()), c));
        }
    }
    let outcomes = run_all(jobs, source, out_dir)?;
    Ok(build_table("p", p_list, &outcomes))
}

/// One dropout and one NSDropout run per budget, each drawn class-balanced;
/// both regularizers of a row share the same split.
pub fn sweep_size(base: &ExperimentConfig, source: &Source, sizes: &[usize], out_dir: Option<&Path>) -> Result<ComparisonTable> {
    if let Some(&n) = sizes.iter().find(|&&n| n > source.train_rows()) {
        return Err(HarnessError::Config(format!("size {n} exceeds the {} available training rows", source.train_rows())));
    }
    let mut jobs = Vec::new();
    for &n in sizes {
        for reg in COMPARED {
            let mut c = with_regularizer(base, reg);
            c.split.budget = Some(n);
            c.split.sampling = Sampling::Stratified;
            jobs.push((format!("n_{n}_{}", reg.name()), c));
        }
    }
    let outcomes = run_all(jobs, source, out_dir)?;
    let keys: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    Ok(build_table("n", &keys, &outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::DatasetKind;

    fn base() -> (ExperimentConfig, Source) {
        let mut c = ExperimentConfig::new(DatasetKind::Synthetic);
        c.dataset.synthetic.train = 400;
        c.dataset.synthetic.test = 100;
        c.model.architecture = Some(vec![20, 16, 4]);
        c.training.epochs = 4;
        let s = Source::load(&c.dataset, c.seed).unwrap();
        (c, s)
    }

    #[test]
    fn p_sweep_schema() {
        let (c, s) = base();
        let t = sweep_p(&c, &s, &[0.0, 0.25, 0.5], 1, None).unwrap();
        assert_eq!(t.rows.len(), 3);
        let width = t.header().len();
        assert_eq!(width, 1 + 2 * (3 + 2));
        for row in &t.rows {
            assert_eq!(row.runs.iter().map(|r| r.regularizer).collect::<Vec<_>>(), COMPARED);
        }
        let mut out = Vec::new();
        t.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().all(|l| l.split(',').count() == width));
    }

    #[test]
    fn zero_p_matches_baseline() {
        let (c, s) = base();
        let t = sweep_p(&c, &s, &[0.0], 1, None).unwrap();
        let baseline = RunSummary::of(&run_training(&c, &s, None).unwrap());
        for r in &t.rows[0].runs {
            assert_eq!(RunSummary { regularizer: RegularizerKind::None, ..r.clone() }, baseline);
        }
    }

    #[test]
    fn degenerate_p_is_rejected() {
        let (mut c, s) = base();
        c.model.architecture = Some(vec![20, 128, 4]);
        assert!(matches!(sweep_p(&c, &s, &[0.5, 0.999], 1, None), Err(HarnessError::Config(_))));
        assert!(sweep_p(&c, &s, &[1.2], 1, None).is_err());
        assert!(sweep_p(&c, &s, &[0.2], 2, None).is_err());
    }

    #[test]
    fn size_sweep_rows_share_splits() {
        let (c, s) = base();
        let dir = tempfile::tempdir().unwrap();
        let t = sweep_size(&c, &s, &[40, 200], Some(dir.path())).unwrap();
        assert_eq!(t.rows.iter().map(|r| r.key).collect::<Vec<_>>(), vec![40.0, 200.0]);
        for n in [40, 200] {
            let a = std::fs::read(dir.path().join(format!("n_{n}_dropout/split.csv"))).unwrap();
            let b = std::fs::read(dir.path().join(format!("n_{n}_nsdropout/split.csv"))).unwrap();
            assert_eq!(a, b);
        }
        assert!(sweep_size(&c, &s, &[401], None).is_err());
    }
}
