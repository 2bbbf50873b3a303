//! Experiment configuration, read from TOML.
//!
//! ```toml
//! seed = 1
//! output = "runs/mnist-nsd"
//!
//! [dataset]
//! kind = "mnist"            # mnist | fashion-mnist | cifar10 | synthetic
//! root = "data/mnist"       # default: $NSD_DATA_ROOT/<kind directory>
//!
//! [model]
//! architecture = [784, 128, 128, 128, 10]
//! regularizer = "nsdropout" # none | dropout | nsdropout
//! p = [0.0, 0.5, 0.2, 0.2]  # per position: 0 = input, k = after hidden layer k
//!
//! [split]
//! budget = 10000
//!
//! [training]
//! epochs = 100
//! batch = "full"            # or a batch size
//! eval_modes = ["labeled", "predicted"]
//!
//! [sgd]
//! learning_rate = 0.02
//! momentum = 0.9
//! ```
//!
//! Every field has a default except `dataset.kind`.

use std::path::{Path, PathBuf};

use nsd_core::nn::{MlpSpec, Regularizer, SgdConfig};
use nsd_core::nsdropout::{Deviation, EvalMode};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Environment variable holding the directory that contains one
/// subdirectory per dataset.
pub const DATA_ROOT_ENV: &str = "NSD_DATA_ROOT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub training: TrainingConfig,
    #[serde(default)]
    pub sgd: SgdSection,
}

fn default_seed() -> u64 {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("runs/default")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    Mnist,
    FashionMnist,
    Cifar10,
    Synthetic,
}

impl DatasetKind {
    /// Directory name under the data root.
    pub fn dir_name(self) -> &'static str {
        match self {
            DatasetKind::Mnist => "mnist",
            DatasetKind::FashionMnist => "fashion-mnist",
            DatasetKind::Cifar10 => "cifar-10-batches-bin",
            DatasetKind::Synthetic => "synthetic",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::Mnist => "mnist",
            DatasetKind::FashionMnist => "fashion-mnist",
            DatasetKind::Cifar10 => "cifar10",
            DatasetKind::Synthetic => "synthetic",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub kind: DatasetKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<PathBuf>,
    /// Subtract training-split feature means from every split.
    #[serde(default)]
    pub center: bool,
    /// ZCA-whiten every split with a transform fitted on the training split.
    #[serde(default)]
    pub zca: bool,
    #[serde(default = "default_zca_epsilon")]
    pub zca_epsilon: f64,
    #[serde(default)]
    pub synthetic: SyntheticConfig,
}

fn default_zca_epsilon() -> f64 {
    nsd_core::datasets::ZCA_EPSILON
}

impl DatasetConfig {
    pub fn new(kind: DatasetKind) -> Self {
        Self {
            kind,
            root: None,
            center: false,
            zca: false,
            zca_epsilon: default_zca_epsilon(),
            synthetic: SyntheticConfig::default(),
        }
    }

    /// Explicit root, else `$NSD_DATA_ROOT/<dir>`, else `data/<dir>`.
    pub fn resolved_root(&self) -> PathBuf {
        if let Some(root) = &self.root {
            return root.clone();
        }
        let base = std::env::var_os(DATA_ROOT_ENV).map_or_else(|| PathBuf::from("data"), PathBuf::from);
        base.join(self.kind.dir_name())
    }
}

/// Class blobs generated in memory (`kind = "synthetic"`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticConfig {
    pub train: usize,
    pub test: usize,
    pub dim: usize,
    pub classes: usize,
    pub noise: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self { train: 1000, test: 500, dim: 20, classes: 4, noise: 0.25 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegularizerKind {
    #[default]
    None,
    Dropout,
    Nsdropout,
}

impl RegularizerKind {
    pub fn name(self) -> &'static str {
        match self {
            RegularizerKind::None => "none",
            RegularizerKind::Dropout => "dropout",
            RegularizerKind::Nsdropout => "nsdropout",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeviationKind {
    #[default]
    Absolute,
    Signed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Unit counts from input to output; defaults to three hidden layers of
    /// 128 units (256 for CIFAR-10).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub architecture: Option<Vec<usize>>,
    #[serde(default)]
    pub regularizer: RegularizerKind,
    /// Drop fraction per position; see [`default_p`] when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default)]
    pub deviation: DeviationKind,
    /// Learning-rate factor applied when the regularizer is NSDropout.
    #[serde(default = "one")]
    pub nsd_lr_multiplier: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            architecture: None,
            regularizer: RegularizerKind::None,
            p: None,
            deviation: DeviationKind::Absolute,
            nsd_lr_multiplier: 1.0,
        }
    }
}

/// How the budget is drawn from the source training set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// Stratified below 1000 rows (unless the budget is the whole source),
    /// random otherwise.
    #[default]
    Auto,
    Stratified,
    Random,
}

/// Budgets below this are drawn stratified under [`Sampling::Auto`].
pub const AUTO_STRATIFY_BELOW: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    /// Rows drawn from the source training set; defaults to `min(10000, N)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default = "default_train_frac")]
    pub train_frac: f64,
    #[serde(default)]
    pub sampling: Sampling,
}

fn default_train_frac() -> f64 {
    0.8
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self { budget: None, train_frac: 0.8, sampling: Sampling::Auto }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum BatchRepr {
    Size(usize),
    Word(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BatchRepr", into = "BatchRepr")]
pub enum BatchMode {
    #[default]
    Full,
    Size(usize),
}

impl TryFrom<BatchRepr> for BatchMode {
    type Error = String;

    fn try_from(r: BatchRepr) -> Result<Self, String> {
        match r {
            BatchRepr::Size(0) => Err("batch size must be positive".into()),
            BatchRepr::Size(n) => Ok(BatchMode::Size(n)),
            BatchRepr::Word(w) if w == "full" => Ok(BatchMode::Full),
            BatchRepr::Word(w) => Err(format!("batch must be \"full\" or a size, got {w:?}")),
        }
    }
}

impl From<BatchMode> for BatchRepr {
    fn from(b: BatchMode) -> Self {
        match b {
            BatchMode::Full => BatchRepr::Word("full".into()),
            BatchMode::Size(n) => BatchRepr::Size(n),
        }
    }
}

impl std::str::FromStr for BatchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.parse::<usize>() {
            Ok(n) => BatchMode::try_from(BatchRepr::Size(n)),
            Err(_) => BatchMode::try_from(BatchRepr::Word(s.to_string())),
        }
    }
}

/// When NSDropout masks are rebuilt.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefreshPolicy {
    /// Before every epoch, from the whole training split.
    #[default]
    PerEpoch,
    /// Before every mini-batch, from that batch.
    PerBatch,
    /// Once before the first epoch; masks stay frozen afterwards.
    Once,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalModeName {
    Labeled,
    Predicted,
    Union,
    Intersection,
    Off,
}

impl From<EvalModeName> for EvalMode {
    fn from(m: EvalModeName) -> Self {
        match m {
            EvalModeName::Labeled => EvalMode::Labeled,
            EvalModeName::Predicted => EvalMode::Predicted,
            EvalModeName::Union => EvalMode::Union,
            EvalModeName::Intersection => EvalMode::Intersection,
            EvalModeName::Off => EvalMode::Off,
        }
    }
}

impl std::str::FromStr for EvalModeName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s.parse::<EvalMode>().map_err(|e| e.to_string())? {
            EvalMode::Labeled => EvalModeName::Labeled,
            EvalMode::Predicted => EvalModeName::Predicted,
            EvalMode::Union => EvalModeName::Union,
            EvalMode::Intersection => EvalModeName::Intersection,
            EvalMode::Off => EvalModeName::Off,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingConfig {
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default)]
    pub batch: BatchMode,
    #[serde(default)]
    pub refresh: RefreshPolicy,
    /// Test-time mask rules to report; the first one also scores the
    /// training and unseen validation splits.
    #[serde(default = "default_eval_modes")]
    pub eval_modes: Vec<EvalModeName>,
    /// Score the test split every this many epochs (and at the last epoch).
    #[serde(default = "one_usize")]
    pub test_every: usize,
    /// Write the mask trace and churn files.
    #[serde(default = "yes")]
    pub trace_masks: bool,
}

fn default_epochs() -> usize {
    100
}

fn default_eval_modes() -> Vec<EvalModeName> {
    vec![EvalModeName::Labeled, EvalModeName::Predicted]
}

fn one_usize() -> usize {
    1
}

fn yes() -> bool {
    true
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            epochs: default_epochs(),
            batch: BatchMode::Full,
            refresh: RefreshPolicy::PerEpoch,
            eval_modes: default_eval_modes(),
            test_every: 1,
            trace_masks: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgdSection {
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_momentum")]
    pub momentum: f64,
    #[serde(default)]
    pub l2_decay: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anneal: Option<f64>,
}

fn default_lr() -> f64 {
    0.02
}

fn default_momentum() -> f64 {
    0.9
}

impl Default for SgdSection {
    fn default() -> Self {
        Self { learning_rate: default_lr(), momentum: default_momentum(), l2_decay: 0.0, anneal: None }
    }
}

/// Default drop fractions for a network with `hidden` hidden layers: 0.5
/// after the first hidden layer, 0.2 after the others, nothing at the input
/// except 0.2 for Fashion-MNIST.
pub fn default_p(kind: DatasetKind, hidden: usize) -> Vec<f64> {
    let mut p = vec![0.0; hidden + 1];
    if kind == DatasetKind::FashionMnist {
        p[0] = 0.2;
    }
    for (k, v) in p.iter_mut().enumerate().skip(1) {
        *v = if k == 1 { 0.5 } else { 0.2 };
    }
    p
}

/// Everything a run needs once the dataset shape is known.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedConfig {
    pub config: ExperimentConfig,
    pub architecture: Vec<usize>,
    pub p: Vec<f64>,
    pub budget: usize,
    pub stratified: bool,
}

impl ResolvedConfig {
    pub fn mlp_spec(&self) -> MlpSpec {
        let regularizer = match self.config.model.regularizer {
            RegularizerKind::None => Regularizer::None,
            RegularizerKind::Dropout => Regularizer::Dropout,
            RegularizerKind::Nsdropout => Regularizer::NsDropout(match self.config.model.deviation {
                DeviationKind::Absolute => Deviation::Absolute,
                DeviationKind::Signed => Deviation::Signed,
            }),
        };
        let mut spec = MlpSpec::new(self.architecture.clone());
        spec.regularizer = regularizer;
        spec.p = self.p.clone();
        spec
    }

    pub fn sgd(&self) -> SgdConfig {
        let s = &self.config.sgd;
        let multiplier = match self.config.model.regularizer {
            RegularizerKind::Nsdropout => self.config.model.nsd_lr_multiplier,
            _ => 1.0,
        };
        SgdConfig { learning_rate: s.learning_rate * multiplier, momentum: s.momentum, l2_decay: s.l2_decay, anneal: s.anneal }
    }

    pub fn eval_modes(&self) -> Vec<EvalMode> {
        self.config.training.eval_modes.iter().map(|&m| m.into()).collect()
    }
}

fn config_error(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn new(kind: DatasetKind) -> Self {
        Self {
            seed: default_seed(),
            output: default_output(),
            dataset: DatasetConfig::new(kind),
            model: ModelConfig::default(),
            split: SplitConfig::default(),
            training: TrainingConfig::default(),
            sgd: SgdSection::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_error(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks the configuration against a dataset with `source_rows`
    /// training rows of dimension `dim` and `classes` classes, and fills in
    /// defaults that depend on it.
    pub fn resolve(&self, source_rows: usize, dim: usize, classes: usize) -> Result<ResolvedConfig> {
        let architecture = self.model.architecture.clone().unwrap_or_else(|| {
            let h = if self.dataset.kind == DatasetKind::Cifar10 { 256 } else { 128 };
            vec![dim, h, h, h, classes]
        });
        if architecture.len() < 2 {
            return Err(config_error("architecture needs at least input and output sizes"));
        }
        if architecture[0] != dim {
            return Err(config_error(format!("architecture input {} does not match dataset dimension {dim}", architecture[0])));
        }
        if architecture[architecture.len() - 1] != classes {
            return Err(config_error(format!(
                "architecture output {} does not match {classes} classes",
                architecture[architecture.len() - 1]
            )));
        }
        let hidden = architecture.len() - 2;
        let p = match self.model.regularizer {
            RegularizerKind::None => vec![0.0; hidden + 1],
            _ => self.model.p.clone().unwrap_or_else(|| default_p(self.dataset.kind, hidden)),
        };
        if p.len() != hidden + 1 {
            return Err(config_error(format!(
                "p needs {} values (input plus {hidden} hidden positions), got {}",
                hidden + 1,
                p.len()
            )));
        }
        if let Some(bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(config_error(format!("p value {bad} outside [0, 1]")));
        }
        let budget = self.split.budget.unwrap_or(source_rows.min(10_000));
        if budget > source_rows {
            return Err(config_error(format!("budget {budget} exceeds the {source_rows} available training rows")));
        }
        if !(self.split.train_frac > 0.0 && self.split.train_frac < 1.0) {
            return Err(config_error("train_frac must lie strictly between 0 and 1"));
        }
        let stratified = match self.split.sampling {
            Sampling::Auto => budget < AUTO_STRATIFY_BELOW && budget < source_rows,
            Sampling::Stratified => true,
            Sampling::Random => false,
        };
        if self.training.epochs == 0 {
            return Err(config_error("epochs must be at least 1"));
        }
        if self.training.eval_modes.is_empty() {
            return Err(config_error("at least one eval mode is required"));
        }
        if self.training.test_every == 0 {
            return Err(config_error("test_every must be at least 1"));
        }
        if !(self.model.nsd_lr_multiplier.is_finite() && self.model.nsd_lr_multiplier > 0.0) {
            return Err(config_error("nsd_lr_multiplier must be finite and > 0"));
        }
        let resolved = ResolvedConfig { config: self.clone(), architecture, p, budget, stratified };
        resolved.sgd().validate().map_err(|e| config_error(e.to_string()))?;
        // builds the layer stack once to surface drop-everything fractions early
        nsd_core::nn::Network::<f64>::mlp(&resolved.mlp_spec(), &mut nsd_core::Rng::new(0))
            .map_err(|e| config_error(e.to_string()))?;
        Ok(resolved)
    }
}
