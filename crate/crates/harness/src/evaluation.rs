//! Re-scoring a saved run and gradient checks on configured networks.

use std::path::Path;

use nsd_core::nn::{accuracy, grad_check, load_checkpoint, GradCheckReport, GRAD_CHECK_EPSILON};
use nsd_core::nsdropout::EvalMode;
use nsd_core::Rng;
use serde::Deserialize;

use crate::config::{ExperimentConfig, ResolvedConfig};
use crate::confusion::ConfusionMatrix;
use crate::data::{prepare, Source};
use crate::error::{HarnessError, Result};
use crate::output::{read_final_masks, METADATA_FILE, MODEL_FILE};
use crate::runner::{build_network, evaluate, slot_positions};

const GRAD_CHECK_STREAM: u64 = 40;

#[derive(Deserialize)]
struct SavedMetadata {
    config: ExperimentConfig,
}

/// The configuration a run directory was produced with.
pub fn saved_config(dir: &Path) -> Result<ExperimentConfig> {
    let path = dir.join(METADATA_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
    let meta: SavedMetadata = toml::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    Ok(meta.config)
}

#[derive(Debug)]
pub struct EvalResult {
    pub mode: EvalMode,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
}

/// Rebuilds the network of a finished run from its checkpoint and final
/// masks and scores the test split under every configured eval mode.
pub fn evaluate_saved(dir: &Path, cfg: &ExperimentConfig, source: &Source) -> Result<Vec<EvalResult>> {
    let resolved = cfg.resolve(source.train_rows(), source.dim(), source.classes)?;
    let mut net = build_network(&resolved)?;
    net.load_parameters(&load_checkpoint(&dir.join(MODEL_FILE))?)?;
    let slots = slot_positions(&net);
    if !slots.is_empty() {
        let masks = read_final_masks(dir, |slot| resolved.p[slot])?;
        if masks.iter().map(|(s, _)| *s).collect::<Vec<_>>() != slots {
            return Err(HarnessError::Config("final masks do not match the network's slots".into()));
        }
        for (layer, (_, m)) in net.nsd_layers_mut().zip(masks) {
            layer.set_masks(m)?;
        }
    }
    let test = source_test(source, &resolved)?;
    let modes = resolved.eval_modes();
    let logits = evaluate(&mut net, &test.images, &test.labels, &modes)?;
    Ok(modes
        .iter()
        .zip(&logits)
        .map(|(&mode, l)| EvalResult {
            mode,
            accuracy: accuracy(l, &test.labels),
            confusion: ConfusionMatrix::from_predictions(test.classes, &test.labels, &l.argmax_rows()),
        })
        .collect())
}

fn source_test(source: &Source, resolved: &ResolvedConfig) -> Result<nsd_core::Dataset> {
    // preprocessing of the test split depends on training statistics
    Ok(prepare(source, resolved)?.test)
}

/// Gradient check of the configured network on its first `rows` training
/// rows, with masks refreshed from the training and unseen splits first.
pub fn check_gradients(
    cfg: &ExperimentConfig,
    source: &Source,
    rows: usize,
    max_params: Option<usize>,
) -> Result<GradCheckReport> {
    let resolved = cfg.resolve(source.train_rows(), source.dim(), source.classes)?;
    let data = prepare(source, &resolved)?;
    let mut net = build_network(&resolved)?;
    net.refresh_masks(&data.train.images, &data.train.labels, &data.unseen.images, &data.unseen.labels)?;
    let idx: Vec<usize> = (0..rows.min(data.train.len())).collect();
    let batch = data.train.select(&idx)?;
    let mut rng = Rng::stream(cfg.seed, GRAD_CHECK_STREAM);
    Ok(grad_check(&mut net, &batch.images, &batch.labels, GRAD_CHECK_EPSILON, max_params, &mut rng)?)
}
