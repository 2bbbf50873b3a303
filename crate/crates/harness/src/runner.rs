//! One training run: full-batch or mini-batch SGD with the configured
//! regularizer, mask refreshes, per-epoch scoring and final artifacts.

use std::time::Instant;

use nsd_core::nn::{accuracy, softmax_cross_entropy, Layer, Network, Phase, Sgd};
use nsd_core::nsdropout::trace::MaskTraceWriter;
use nsd_core::nsdropout::{mask_churn, resolve_eval_mask, Churn, EvalMode, MaskSelection, MaskSet};
use nsd_core::{Dataset, Error as CoreError, Matrix, Rng};

use crate::config::{BatchMode, ExperimentConfig, RefreshPolicy, ResolvedConfig};
use crate::confusion::ConfusionMatrix;
use crate::data::{prepare, Partition, Prepared, Source};
use crate::error::{HarnessError, Result};
use crate::metrics::{best_epoch, MetricsRecord};

const INIT_STREAM: u64 = 30;
const DROPOUT_STREAM: u64 = 31;
const BATCH_STREAM: u64 = 32;

/// Mask churn of one slot between an epoch and the one before it.
#[derive(Clone, Debug, PartialEq)]
pub struct ChurnRow {
    pub epoch: usize,
    pub slot: usize,
    pub churn: Churn,
}

/// Everything a finished run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub resolved: ResolvedConfig,
    pub modes: Vec<EvalMode>,
    pub records: Vec<MetricsRecord>,
    pub best_epoch: usize,
    pub network: Network<f64>,
    /// Position of every NSDropout slot: 0 is the input, k the output of
    /// hidden layer k.
    pub slots: Vec<usize>,
    pub churn: Vec<ChurnRow>,
    /// Mask trace CSV of every refresh, when tracing is on and the network
    /// has NSDropout slots.
    pub mask_trace: Option<Vec<u8>>,
    pub final_masks: Vec<(usize, MaskSet)>,
    /// Test-set confusion matrix of the final model per eval mode.
    pub confusion: Vec<(EvalMode, ConfusionMatrix)>,
    pub partition: Partition,
    pub split_sizes: SplitSizes,
    pub wall_time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitSizes {
    pub train: usize,
    pub unseen: usize,
    pub test: usize,
}

impl AsRef<[MetricsRecord]> for RunOutcome {
    fn as_ref(&self) -> &[MetricsRecord] {
        &self.records
    }
}

impl RunOutcome {
    pub fn best_record(&self) -> &MetricsRecord {
        &self.records[self.best_epoch - 1]
    }
}

/// The configured network with its seeded initial weights.
pub fn build_network(resolved: &ResolvedConfig) -> Result<Network<f64>> {
    Ok(Network::mlp(&resolved.mlp_spec(), &mut Rng::stream(resolved.config.seed, INIT_STREAM))?)
}

/// NSDropout slot positions in layer order.
pub fn slot_positions(net: &Network<f64>) -> Vec<usize> {
    let mut dense_seen = 0;
    let mut out = Vec::new();
    for l in net.layers() {
        match l {
            Layer::Dense(_) => dense_seen += 1,
            Layer::NsDropout(_) => out.push(dense_seen),
            _ => {}
        }
    }
    out
}

fn snapshot(net: &Network<f64>) -> Vec<MaskSet> {
    net.nsd_layers().map(|l| l.masks().clone()).collect()
}

/// Logits of `x` under each mode, sharing one unmasked pass between the
/// modes that need it.
pub fn evaluate(net: &mut Network<f64>, x: &Matrix<f64>, labels: &[usize], modes: &[EvalMode]) -> Result<Vec<Matrix<f64>>> {
    if !net.has_nsd() {
        let logits = net.forward(x, Phase::Eval, MaskSelection::Off, None)?;
        return Ok(vec![logits; modes.len()]);
    }
    let mut unmasked = None;
    let mut out = Vec::with_capacity(modes.len());
    for &mode in modes {
        if matches!(mode, EvalMode::Predicted | EvalMode::Off) && unmasked.is_none() {
            unmasked = Some(net.forward(x, Phase::Eval, MaskSelection::Off, None)?);
        }
        let logits = match mode {
            EvalMode::Off => unmasked.clone().expect("computed above"),
            _ => {
                let resolved = resolve_eval_mask(mode, Some(labels), unmasked.as_ref())?;
                net.forward(x, Phase::Eval, resolved.selection(), None)?
            }
        };
        out.push(logits);
    }
    Ok(out)
}

fn diverged(epoch: usize, reason: String, records: &[MetricsRecord]) -> HarnessError {
    HarnessError::Diverged { epoch, reason, records: records.to_vec() }
}

fn trace_io(e: std::io::Error) -> HarnessError {
    HarnessError::io("<mask trace>", e)
}

struct Tracer {
    writer: Option<MaskTraceWriter<Vec<u8>>>,
    refreshes: usize,
}

impl Tracer {
    fn record(&mut self, epoch: usize, slots: &[usize], net: &Network<f64>) -> Result<()> {
        self.refreshes += 1;
        if let Some(w) = &mut self.writer {
            for (&slot, layer) in slots.iter().zip(net.nsd_layers()) {
                w.write_masks(self.refreshes, epoch, slot, layer.masks()).map_err(trace_io)?;
            }
        }
        Ok(())
    }
}

/// Trains on prepared splits. `stop_at` ends the run after that epoch
/// instead of the configured count.
pub fn run_prepared(resolved: &ResolvedConfig, data: &Prepared, stop_at: Option<usize>) -> Result<RunOutcome> {
    let started = Instant::now();
    let cfg = &resolved.config;
    let epochs = stop_at.unwrap_or(cfg.training.epochs).min(cfg.training.epochs);
    if epochs == 0 {
        return Err(HarnessError::Config("a run needs at least one epoch".into()));
    }
    let modes = resolved.eval_modes();
    let mut net = build_network(resolved)?;
    let mut sgd = Sgd::new(resolved.sgd())?;
    let mut dropout_rng = Rng::stream(cfg.seed, DROPOUT_STREAM);
    let mut batch_rng = Rng::stream(cfg.seed, BATCH_STREAM);
    let slots = slot_positions(&net);
    let nsd = net.has_nsd();
    let mut tracer = Tracer {
        writer: if nsd && cfg.training.trace_masks { Some(MaskTraceWriter::new(Vec::new()).map_err(trace_io)?) } else { None },
        refreshes: 0,
    };

    let train: &Dataset = &data.train;
    let unseen = &data.unseen;
    let n = train.len();
    let mut records: Vec<MetricsRecord> = Vec::with_capacity(epochs);
    let mut churn_rows = Vec::new();
    let mut previous: Option<Vec<MaskSet>> = None;

    for epoch in 1..=epochs {
        let refresh_epoch = match cfg.training.refresh {
            RefreshPolicy::PerEpoch => true,
            RefreshPolicy::Once => epoch == 1,
            RefreshPolicy::PerBatch => false,
        };
        if nsd && refresh_epoch {
            net.refresh_masks(&train.images, &train.labels, &unseen.images, &unseen.labels)?;
            tracer.record(epoch, &slots, &net)?;
        }

        let batches: Vec<Vec<usize>> = match cfg.training.batch {
            BatchMode::Size(b) if b < n => {
                let order = batch_rng.permutation(n);
                order.chunks(b).map(<[usize]>::to_vec).collect()
            }
            _ => vec![Vec::new()],
        };
        let mut loss_sum = 0.0;
        for batch in &batches {
            let owned;
            let (x, labels) = if batch.is_empty() {
                (&train.images, &train.labels)
            } else {
                owned = train.select(batch)?;
                (&owned.images, &owned.labels)
            };
            if nsd && cfg.training.refresh == RefreshPolicy::PerBatch {
                net.refresh_masks(x, labels, &unseen.images, &unseen.labels)?;
                tracer.record(epoch, &slots, &net)?;
            }
            let logits = net.forward(x, Phase::Train, MaskSelection::PerRow(labels), Some(&mut dropout_rng))?;
            let (loss, dlogits) = softmax_cross_entropy(&logits, labels)?;
            if !loss.is_finite() {
                return Err(diverged(epoch, format!("training loss is {loss}"), &records));
            }
            loss_sum += loss * labels.len() as f64;
            net.backward(&dlogits)?;
            match sgd.step(&mut net) {
                Err(CoreError::NonFiniteGradient { layer }) => {
                    return Err(diverged(epoch, format!("non-finite gradient in dense layer {layer}"), &records));
                }
                other => other?,
            }
        }
        sgd.end_epoch();

        let mask_churn = if nsd {
            let current = snapshot(&net);
            let mean = match &previous {
                Some(prev) => {
                    let mut total = 0.0;
                    for ((&slot, cur), old) in slots.iter().zip(&current).zip(prev) {
                        let churn = mask_churn(cur, old)?;
                        total += churn.mean;
                        churn_rows.push(ChurnRow { epoch, slot, churn });
                    }
                    Some(total / slots.len() as f64)
                }
                None => None,
            };
            previous = Some(current);
            mean
        } else {
            (epoch > 1).then_some(0.0)
        };

        let first = &modes[..1];
        let train_acc = accuracy(&evaluate(&mut net, &train.images, &train.labels, first)?[0], &train.labels);
        let unseen_val_acc = accuracy(&evaluate(&mut net, &unseen.images, &unseen.labels, first)?[0], &unseen.labels);
        let test_acc = if epoch % cfg.training.test_every == 0 || epoch == epochs {
            evaluate(&mut net, &data.test.images, &data.test.labels, &modes)?
                .iter()
                .map(|l| Some(accuracy(l, &data.test.labels)))
                .collect()
        } else {
            vec![None; modes.len()]
        };
        let record = MetricsRecord {
            epoch,
            train_loss: loss_sum / n as f64,
            train_acc,
            unseen_val_acc,
            test_acc,
            mask_churn,
            wall_time: started.elapsed().as_secs_f64(),
        };
        log::info!(
            "epoch {epoch}: loss {:.4} train {:.4} unseen {:.4}",
            record.train_loss,
            record.train_acc,
            record.unseen_val_acc
        );
        records.push(record);
    }

    let confusion = evaluate(&mut net, &data.test.images, &data.test.labels, &modes)?
        .iter()
        .zip(&modes)
        .map(|(logits, &mode)| {
            (mode, ConfusionMatrix::from_predictions(data.test.classes, &data.test.labels, &logits.argmax_rows()))
        })
        .collect();
    let final_masks = slots.iter().copied().zip(snapshot(&net)).collect();
    Ok(RunOutcome {
        resolved: resolved.clone(),
        modes,
        best_epoch: best_epoch(&records).expect("at least one epoch"),
        records,
        network: net,
        slots,
        churn: churn_rows,
        mask_trace: tracer.writer.map(MaskTraceWriter::into_inner),
        final_masks,
        confusion,
        partition: data.partition.clone(),
        split_sizes: SplitSizes { train: data.train.len(), unseen: data.unseen.len(), test: data.test.len() },
        wall_time: started.elapsed().as_secs_f64(),
    })
}

/// Resolves `cfg` against `source`, prepares the splits and trains.
pub fn run_training(cfg: &ExperimentConfig, source: &Source, stop_at: Option<usize>) -> Result<RunOutcome> {
    let resolved = cfg.resolve(source.train_rows(), source.dim(), source.classes)?;
    let data = prepare(source, &resolved)?;
    run_prepared(&resolved, &data, stop_at)
}
