use std::io::BufReader;

use nsd_core::nn::accuracy;
use nsd_core::nsdropout::trace::{churn_series, read_mask_trace};
use nsd_harness::config::{DatasetKind, ExperimentConfig, RegularizerKind};
use nsd_harness::data::{prepare, Source};
use nsd_harness::metrics::{read_metrics_csv, write_metrics_csv};
use nsd_harness::output::{write_run, CHURN_FILE, MASK_TRACE_FILE, METRICS_FILE};
use nsd_harness::retrain::retrain_schedule;
use nsd_harness::runner::{evaluate, run_training, RunOutcome};

fn config(reg: RegularizerKind, epochs: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(DatasetKind::Synthetic);
    c.dataset.synthetic.train = 600;
    c.dataset.synthetic.test = 200;
    c.model.architecture = Some(vec![20, 24, 24, 4]);
    c.model.regularizer = reg;
    c.training.epochs = epochs;
    c.sgd.learning_rate = 0.1;
    c
}

fn source(c: &ExperimentConfig) -> Source {
    Source::load(&c.dataset, c.seed).unwrap()
}

fn csv_bytes(out: &RunOutcome) -> Vec<u8> {
    let mut b = Vec::new();
    write_metrics_csv(&mut b, &out.modes, &out.records).unwrap();
    b
}

#[test]
fn churn_equals_replay_of_the_mask_trace() {
    let c = config(RegularizerKind::Nsdropout, 12);
    let out = run_training(&c, &source(&c), None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_run(dir.path(), &out).unwrap();
    let file = std::fs::File::open(dir.path().join(MASK_TRACE_FILE)).unwrap();
    let records = read_mask_trace(BufReader::new(file)).unwrap();
    let mut per_slot = Vec::new();
    for &slot in &out.slots {
        let replay = churn_series(&records, slot).unwrap();
        assert_eq!(replay.len(), 11, "one value per epoch pair");
        let logged: Vec<f64> = out.churn.iter().filter(|r| r.slot == slot).map(|r| r.churn.mean).collect();
        assert_eq!(replay, logged);
        per_slot.push(replay);
    }
    // the metrics column is the mean over slots
    for (e, r) in out.records.iter().enumerate().skip(1) {
        let mean = per_slot.iter().map(|s| s[e - 1]).sum::<f64>() / per_slot.len() as f64;
        assert_eq!(r.mask_churn, Some(mean));
    }
    let churn_csv = std::fs::read_to_string(dir.path().join(CHURN_FILE)).unwrap();
    assert_eq!(churn_csv.lines().count(), 1 + 11 * out.slots.len());
}

#[test]
fn retrain_phase_two_is_a_prefix_of_phase_one() {
    let c = config(RegularizerKind::Nsdropout, 15);
    let s = source(&c);
    let r = retrain_schedule(|stop| run_training(&c, &s, stop)).unwrap();
    assert_eq!(r.phase2.records.len(), r.best_epoch);
    assert_eq!(r.phase1.records[..r.best_epoch].len(), r.phase2.records.len());
    for (a, b) in r.phase1.records.iter().zip(&r.phase2.records) {
        assert_eq!(
            (a.epoch, a.train_loss, a.train_acc, a.unseen_val_acc),
            (b.epoch, b.train_loss, b.train_acc, b.unseen_val_acc)
        );
        assert_eq!(a.test_acc, b.test_acc);
        assert_eq!(a.mask_churn, b.mask_churn);
    }
}

#[test]
fn identical_seeds_give_identical_metrics() {
    for reg in [RegularizerKind::None, RegularizerKind::Dropout, RegularizerKind::Nsdropout] {
        let c = config(reg, 6);
        let s = source(&c);
        let a = csv_bytes(&run_training(&c, &s, None).unwrap());
        let b = csv_bytes(&run_training(&c, &s, None).unwrap());
        assert_eq!(a, b, "{}", reg.name());
    }
    let c = config(RegularizerKind::Dropout, 6);
    let mut other = c.clone();
    other.seed = 2;
    let s = source(&c);
    assert_ne!(csv_bytes(&run_training(&c, &s, None).unwrap()), csv_bytes(&run_training(&other, &s, None).unwrap()));
}

#[test]
fn zero_p_runs_match_the_baseline_stream() {
    let base = config(RegularizerKind::None, 8);
    let s = source(&base);
    let expect = csv_bytes(&run_training(&base, &s, None).unwrap());
    for reg in [RegularizerKind::Dropout, RegularizerKind::Nsdropout] {
        let mut c = config(reg, 8);
        c.model.p = Some(vec![0.0; 3]);
        assert_eq!(csv_bytes(&run_training(&c, &s, None).unwrap()), expect, "{}", reg.name());
    }
}

#[test]
fn confusion_accuracy_matches_scored_accuracy() {
    let c = config(RegularizerKind::Nsdropout, 5);
    let s = source(&c);
    let mut out = run_training(&c, &s, None).unwrap();
    let data = prepare(&s, &c.resolve(s.train_rows(), s.dim(), s.classes).unwrap()).unwrap();
    let logits = evaluate(&mut out.network, &data.test.images, &data.test.labels, &out.modes).unwrap();
    for ((mode, m), l) in out.confusion.iter().zip(&logits) {
        let direct = accuracy(l, &data.test.labels);
        assert!((m.accuracy() - direct).abs() <= 1e-12, "{mode}");
        let counts = data.test.class_counts();
        for (t, row) in m.rows().iter().enumerate() {
            assert_eq!(row.iter().sum::<usize>(), counts[t]);
        }
    }
    assert_eq!(out.records.last().unwrap().test_acc[0], Some(out.confusion[0].1.accuracy()));
}

#[test]
fn metrics_file_reads_back() {
    let mut c = config(RegularizerKind::Dropout, 4);
    c.training.test_every = 3;
    let out = run_training(&c, &source(&c), None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_run(dir.path(), &out).unwrap();
    let f = std::fs::File::open(dir.path().join(METRICS_FILE)).unwrap();
    let (modes, records) = read_metrics_csv(BufReader::new(f)).unwrap();
    assert_eq!(modes, out.modes);
    assert_eq!(records.iter().map(|r| r.epoch).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
    let scored: Vec<bool> = records.iter().map(|r| r.test_acc[0].is_some()).collect();
    assert_eq!(scored, vec![false, false, true, true]);
    for r in &records {
        assert!((0.0..=1.0).contains(&r.train_acc) && (0.0..=1.0).contains(&r.unseen_val_acc));
    }
}
