use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use nsd_harness::config::{BatchMode, DatasetKind, EvalModeName, ExperimentConfig};
use nsd_harness::data::Source;
use nsd_harness::error::{HarnessError, Result};
use nsd_harness::evaluation::{check_gradients, evaluate_saved, saved_config};
use nsd_harness::metrics::write_metrics_csv;
use nsd_harness::output::{confusion_file, write_run, METRICS_FILE};
use nsd_harness::retrain::retrain_schedule;
use nsd_harness::runner::run_training;
use nsd_harness::sweep::{sweep_p, sweep_size, ComparisonTable};

/// Neuron-specific dropout experiments.
#[derive(Parser)]
#[command(name = "nsd", version)]
struct Cli {
    /// Log progress per epoch.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model and write its run directory.
    Train(Overrides),
    /// Train, then retrain from scratch up to the best validation epoch.
    Retrain(Overrides),
    /// Compare dropout and NSDropout over drop fractions.
    SweepP {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8")]
        p_list: Vec<f64>,
        /// Position receiving p: 0 is the input, k the output of hidden layer k.
        #[arg(long, default_value_t = 1)]
        position: usize,
    },
    /// Compare dropout and NSDropout over training budgets.
    SweepSize {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, value_delimiter = ',', default_value = "50,100,500,750,1000,5000,10000")]
        sizes: Vec<usize>,
    },
    /// Score a finished run directory on the test split.
    Eval {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        run_dir: PathBuf,
    },
    /// Finite-difference check of the configured network's gradients.
    Gradcheck {
        #[command(flatten)]
        overrides: Overrides,
        /// Training rows in the checked batch.
        #[arg(long, default_value_t = 32)]
        rows: usize,
        /// Check an evenly spaced subset of this many parameters.
        #[arg(long, default_value_t = 5000)]
        max_params: usize,
    },
}

/// Every configuration field as a flag; flags win over the config file.
#[derive(Args, Default)]
struct Overrides {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = serde_value::<DatasetKind>)]
    dataset: Option<DatasetKind>,
    /// Directory holding the dataset files (default: $NSD_DATA_ROOT/<dataset>).
    #[arg(long)]
    data_root: Option<PathBuf>,
    #[arg(long)]
    center: bool,
    #[arg(long)]
    zca: bool,
    #[arg(long)]
    zca_epsilon: Option<f64>,
    #[arg(long)]
    synthetic_train: Option<usize>,
    #[arg(long)]
    synthetic_test: Option<usize>,
    #[arg(long)]
    synthetic_dim: Option<usize>,
    #[arg(long)]
    synthetic_classes: Option<usize>,
    #[arg(long)]
    synthetic_noise: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Unit counts, e.g. 784,128,128,128,10.
    #[arg(long, value_delimiter = ',')]
    architecture: Option<Vec<usize>>,
    #[arg(long, value_parser = serde_value::<nsd_harness::config::RegularizerKind>)]
    regularizer: Option<nsd_harness::config::RegularizerKind>,
    /// Drop fraction per position, input first.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long, value_parser = serde_value::<nsd_harness::config::DeviationKind>)]
    deviation: Option<nsd_harness::config::DeviationKind>,
    #[arg(long)]
    nsd_lr_multiplier: Option<f64>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    train_frac: Option<f64>,
    #[arg(long, value_parser = serde_value::<nsd_harness::config::Sampling>)]
    sampling: Option<nsd_harness::config::Sampling>,
    #[arg(long)]
    epochs: Option<usize>,
    /// "full" or a batch size.
    #[arg(long)]
    batch: Option<BatchMode>,
    #[arg(long, value_parser = serde_value::<nsd_harness::config::RefreshPolicy>)]
    refresh: Option<nsd_harness::config::RefreshPolicy>,
    #[arg(long, value_delimiter = ',')]
    eval_modes: Option<Vec<EvalModeName>>,
    #[arg(long)]
    test_every: Option<usize>,
    #[arg(long)]
    no_trace: bool,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    l2_decay: Option<f64>,
    #[arg(long)]
    anneal: Option<f64>,
}

/// Parses a flag value with the same spelling as the config file.
fn serde_value<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    T::deserialize(toml::Value::String(s.to_string())).map_err(|e| e.to_string())
}

impl Overrides {
    fn base(&self) -> Result<ExperimentConfig> {
        match (&self.config, self.dataset) {
            (Some(path), _) => ExperimentConfig::load(path),
            (None, Some(kind)) => Ok(ExperimentConfig::new(kind)),
            (None, None) => Err(HarnessError::Config("pass --config or --dataset".into())),
        }
    }

    fn apply(&self, mut c: ExperimentConfig) -> ExperimentConfig {
        fn set<T: Clone>(slot: &mut T, v: &Option<T>) {
            if let Some(v) = v {
                *slot = v.clone();
            }
        }
        set(&mut c.dataset.kind, &self.dataset);
        if self.data_root.is_some() {
            c.dataset.root = self.data_root.clone();
        }
        c.dataset.center |= self.center;
        c.dataset.zca |= self.zca;
        set(&mut c.dataset.zca_epsilon, &self.zca_epsilon);
        let s = &mut c.dataset.synthetic;
        set(&mut s.train, &self.synthetic_train);
        set(&mut s.test, &self.synthetic_test);
        set(&mut s.dim, &self.synthetic_dim);
        set(&mut s.classes, &self.synthetic_classes);
        set(&mut s.noise, &self.synthetic_noise);
        set(&mut c.output, &self.output);
        set(&mut c.seed, &self.seed);
        if self.architecture.is_some() {
            c.model.architecture = self.architecture.clone();
        }
        set(&mut c.model.regularizer, &self.regularizer);
        if self.p.is_some() {
            c.model.p = self.p.clone();
        }
        set(&mut c.model.deviation, &self.deviation);
        set(&mut c.model.nsd_lr_multiplier, &self.nsd_lr_multiplier);
        if self.budget.is_some() {
            c.split.budget = self.budget;
        }
        set(&mut c.split.train_frac, &self.train_frac);
        set(&mut c.split.sampling, &self.sampling);
        set(&mut c.training.epochs, &self.epochs);
        set(&mut c.training.batch, &self.batch);
        set(&mut c.training.refresh, &self.refresh);
        set(&mut c.training.eval_modes, &self.eval_modes);
        set(&mut c.training.test_every, &self.test_every);
        c.training.trace_masks &= !self.no_trace;
        set(&mut c.sgd.learning_rate, &self.lr);
        set(&mut c.sgd.momentum, &self.momentum);
        set(&mut c.sgd.l2_decay, &self.l2_decay);
        if self.anneal.is_some() {
            c.sgd.anneal = self.anneal;
        }
        c
    }

    fn resolve(&self) -> Result<(ExperimentConfig, Source)> {
        let cfg = self.apply(self.base()?);
        let source = Source::load(&cfg.dataset, cfg.seed)?;
        // fail on configuration problems before any training starts
        cfg.resolve(source.train_rows(), source.dim(), source.classes)?;
        Ok((cfg, source))
    }
}

fn write_table(path: &Path, table: &ComparisonTable) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    table.write_csv(file)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn summarize(dir: &Path, out: &nsd_harness::RunOutcome) {
    let best = out.best_record();
    println!("run directory: {}", dir.display());
    println!(
        "best epoch {} of {}: train acc {:.4}, unseen validation acc {:.4}",
        out.best_epoch,
        out.records.len(),
        best.train_acc,
        best.unseen_val_acc
    );
    let last = out.records.last().expect("at least one epoch");
    for (mode, acc) in out.modes.iter().zip(&last.test_acc) {
        if let Some(a) = acc {
            println!("final test acc ({mode}): {a:.4}");
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(o) => {
            let (cfg, source) = o.resolve()?;
            let out = run_training(&cfg, &source, None)?;
            write_run(&cfg.output, &out)?;
            summarize(&cfg.output, &out);
        }
        Command::Retrain(o) => {
            let (cfg, source) = o.resolve()?;
            let r = retrain_schedule(|stop| run_training(&cfg, &source, stop))?;
            let (p1, p2) = (cfg.output.join("phase1"), cfg.output.join("phase2"));
            write_run(&p1, &r.phase1)?;
            write_run(&p2, &r.phase2)?;
            println!("best epoch {}; retrained model in {}", r.best_epoch, p2.display());
            summarize(&p2, &r.phase2);
        }
        Command::SweepP { overrides, p_list, position } => {
            let (cfg, source) = overrides.resolve()?;
            let table = sweep_p(&cfg, &source, &p_list, position, Some(&cfg.output))?;
            write_table(&cfg.output.join("sweep_p.csv"), &table)?;
        }
        Command::SweepSize { overrides, sizes } => {
            let (cfg, source) = overrides.resolve()?;
            let table = sweep_size(&cfg, &source, &sizes, Some(&cfg.output))?;
            write_table(&cfg.output.join("sweep_size.csv"), &table)?;
        }
        Command::Eval { overrides, run_dir } => {
            let saved = saved_config(&run_dir)?;
            let cfg = overrides.apply(saved);
            let source = Source::load(&cfg.dataset, cfg.seed)?;
            let eval_dir = run_dir.join("eval");
            std::fs::create_dir_all(&eval_dir).map_err(|e| HarnessError::io(&eval_dir, e))?;
            for r in evaluate_saved(&run_dir, &cfg, &source)? {
                let path = eval_dir.join(confusion_file(r.mode));
                let file = std::fs::File::create(&path).map_err(|e| HarnessError::io(&path, e))?;
                r.confusion.write_csv(file)?;
                println!("test acc ({}): {:.4}", r.mode, r.accuracy);
            }
        }
        Command::Gradcheck { overrides, rows, max_params } => {
            let (cfg, source) = overrides.resolve()?;
            let report = check_gradients(&cfg, &source, rows, Some(max_params))?;
            println!(
                "max relative error {:.3e} over {} parameters ({} skipped at ReLU kinks)",
                report.max_relative_error, report.checked, report.skipped_kinks
            );
            if report.max_relative_error >= 1e-5 {
                return Err(HarnessError::Diverged {
                    epoch: 0,
                    reason: format!("gradient check failed: {:?}", report.worst),
                    records: Vec::new(),
                });
            }
        }
    }
    Ok(())
}

/// On divergence, keeps the completed epochs next to a short diagnostic.
fn record_divergence(cfg: Option<ExperimentConfig>, err: &HarnessError) {
    let (Some(cfg), HarnessError::Diverged { epoch, reason, records }) = (cfg, err) else {
        return;
    };
    if std::fs::create_dir_all(&cfg.output).is_err() {
        return;
    }
    let modes: Vec<_> = cfg.training.eval_modes.iter().map(|&m| m.into()).collect();
    if let Ok(f) = std::fs::File::create(cfg.output.join(METRICS_FILE)) {
        let _ = write_metrics_csv(f, &modes, records);
    }
    let _ = std::fs::write(
        cfg.output.join("divergence.toml"),
        format!("epoch = {epoch}\nreason = {reason:?}\ncompleted_epochs = {}\n", records.len()),
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if cli.verbose { "info" } else { "warn" })).init();
    let cfg = match &cli.command {
        Command::Train(o) | Command::Retrain(o) => o.base().ok().map(|b| o.apply(b)),
        _ => None,
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            record_divergence(cfg, &e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
