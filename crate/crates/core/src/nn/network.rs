use crate::error::{Error, Result};
use crate::ndcore::{Matrix, Rng};
use crate::nsdropout::{class_group, class_means, resolve_eval_mask, Deviation, EvalMode, MaskSelection, NsDropoutLayer};
use crate::scalar::Scalar;

use super::layers::{DenseLayer, Init, Phase, Relu, StandardDropout};

/// One slot of a feedforward stack.
#[derive(Clone, Debug)]
pub enum Layer<T> {
    Dense(DenseLayer<T>),
    Relu(Relu<T>),
    Dropout(StandardDropout<T>),
    NsDropout(NsDropoutLayer<T>),
}

/// Regularizer inserted into a multilayer perceptron.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Regularizer {
    #[default]
    None,
    Dropout,
    NsDropout(Deviation),
}

/// Multilayer perceptron description.
///
/// `sizes` lists unit counts from input to output, e.g. `[784, 128, 128, 10]`.
/// `p[k]` is the drop fraction (or drop probability) at position `k`: position
/// 0 is the network input, position `k ≥ 1` the output of hidden layer `k`.
/// Missing entries count as zero. With a regularizer, every hidden position
/// gets a slot even at `p = 0`; the input slot exists only when `p[0] > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpSpec {
    pub sizes: Vec<usize>,
    pub regularizer: Regularizer,
    pub p: Vec<f64>,
    pub init: Init,
}

impl MlpSpec {
    pub fn new(sizes: Vec<usize>) -> Self {
        Self { sizes, regularizer: Regularizer::None, p: Vec::new(), init: Init::He }
    }

    pub fn hidden_layers(&self) -> usize {
        self.sizes.len().saturating_sub(2)
    }

    pub fn p_at(&self, position: usize) -> f64 {
        self.p.get(position).copied().unwrap_or(0.0)
    }
}

/// Ordered layer stack ending in class logits.
#[derive(Clone, Debug)]
pub struct Network<T> {
    layers: Vec<Layer<T>>,
    input_dim: usize,
    classes: usize,
}

impl<T: Scalar> Network<T> {
    /// Checks that consecutive dense layers chain and returns the stack.
    pub fn from_layers(layers: Vec<Layer<T>>) -> Result<Self> {
        let mut input_dim = None;
        let mut width: Option<usize> = None;
        for layer in &layers {
            let (need, produce) = match layer {
                Layer::Dense(d) => (Some(d.in_units()), Some(d.out_units())),
                Layer::NsDropout(n) => (Some(n.units()), None),
                _ => (None, None),
            };
            if let Some(need) = need {
                match width {
                    Some(w) if w != need => {
                        return Err(Error::InvalidConfig(format!("layer expects {need} inputs but receives {w}")))
                    }
                    None => {
                        input_dim = Some(need);
                        width = Some(need);
                    }
                    _ => {}
                }
            }
            if let Some(p) = produce {
                width = Some(p);
            }
        }
        match (input_dim, width) {
            (Some(input_dim), Some(classes)) => Ok(Self { layers, input_dim, classes }),
            _ => Err(Error::InvalidConfig("network has no dense layer".into())),
        }
    }

    pub fn mlp(spec: &MlpSpec, rng: &mut Rng) -> Result<Self> {
        if spec.sizes.len() < 2 || spec.sizes.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "architecture {:?} needs at least an input and an output size, all non-zero",
                spec.sizes
            )));
        }
        let hidden = spec.hidden_layers();
        if spec.p.len() > hidden + 1 {
            return Err(Error::InvalidConfig(format!("{} drop values given for {} positions", spec.p.len(), hidden + 1)));
        }
        let classes = *spec.sizes.last().expect("checked length");
        let slot = |units: usize, p: f64| -> Result<Option<Layer<T>>> {
            Ok(match spec.regularizer {
                Regularizer::None => None,
                Regularizer::Dropout => Some(Layer::Dropout(StandardDropout::new(p)?)),
                Regularizer::NsDropout(dev) => {
                    Some(Layer::NsDropout(NsDropoutLayer::new(units, classes, p)?.with_deviation(dev)))
                }
            })
        };
        let mut layers = Vec::new();
        if spec.p_at(0) > 0.0 {
            layers.extend(slot(spec.sizes[0], spec.p_at(0))?);
        }
        for (k, pair) in spec.sizes.windows(2).enumerate() {
            layers.push(Layer::Dense(DenseLayer::new(pair[0], pair[1], spec.init, rng)));
            if k < hidden {
                layers.push(Layer::Relu(Relu::new()));
                layers.extend(slot(pair[1], spec.p_at(k + 1))?);
            }
        }
        Self::from_layers(layers)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer<T>] {
        &mut self.layers
    }

    pub fn dense_layers(&self) -> impl Iterator<Item = &DenseLayer<T>> {
        self.layers.iter().filter_map(|l| match l {
            Layer::Dense(d) => Some(d),
            _ => None,
        })
    }

    pub fn dense_layers_mut(&mut self) -> impl Iterator<Item = &mut DenseLayer<T>> {
        self.layers.iter_mut().filter_map(|l| match l {
            Layer::Dense(d) => Some(d),
            _ => None,
        })
    }

    pub fn nsd_layers(&self) -> impl Iterator<Item = &NsDropoutLayer<T>> {
        self.layers.iter().filter_map(|l| match l {
            Layer::NsDropout(n) => Some(n),
            _ => None,
        })
    }

    pub fn nsd_layers_mut(&mut self) -> impl Iterator<Item = &mut NsDropoutLayer<T>> {
        self.layers.iter_mut().filter_map(|l| match l {
            Layer::NsDropout(n) => Some(n),
            _ => None,
        })
    }

    pub fn has_nsd(&self) -> bool {
        self.nsd_layers().next().is_some()
    }

    pub fn parameter_count(&self) -> usize {
        self.dense_layers().map(DenseLayer::parameter_count).sum()
    }

    /// Active/inactive state of every ReLU input in the last training pass.
    pub(crate) fn relu_pattern(&self) -> Vec<bool> {
        self.layers
            .iter()
            .filter_map(|l| match l {
                Layer::Relu(r) => Some(r.active()),
                _ => None,
            })
            .flatten()
            .collect()
    }

    /// Makes standard dropout slots reuse their last mask (gradient checking).
    pub fn set_dropout_frozen(&mut self, frozen: bool) {
        for l in &mut self.layers {
            if let Layer::Dropout(d) = l {
                d.set_frozen(frozen);
            }
        }
    }

    /// Logits for a batch. `masks` selects the class mask each row goes
    /// through at NSDropout slots; `rng` drives standard dropout in training.
    pub fn forward(
        &mut self,
        x: &Matrix<T>,
        phase: Phase,
        masks: MaskSelection<'_>,
        mut rng: Option<&mut Rng>,
    ) -> Result<Matrix<T>> {
        let mut h = x.clone();
        for layer in &mut self.layers {
            h = match layer {
                Layer::Dense(d) => d.forward(&h, phase)?,
                Layer::Relu(r) => r.forward(&h, phase),
                Layer::Dropout(d) => d.forward(&h, phase, rng.as_deref_mut())?,
                Layer::NsDropout(n) => n.apply_mask(&h, masks)?,
            };
        }
        Ok(h)
    }

    /// Backpropagates the loss gradient with respect to the logits, filling
    /// every dense layer's parameter gradients.
    pub fn backward(&mut self, dlogits: &Matrix<T>) -> Result<()> {
        let first_dense =
            self.layers.iter().position(|l| matches!(l, Layer::Dense(_))).expect("constructor guarantees a dense layer");
        let mut g = dlogits.clone();
        for (i, layer) in self.layers.iter_mut().enumerate().rev() {
            if i < first_dense {
                break;
            }
            g = match layer {
                Layer::Dense(d) => match d.backward(&g, i > first_dense)? {
                    Some(dx) => dx,
                    None => break,
                },
                Layer::Relu(r) => r.backward(&g)?,
                Layer::Dropout(d) => d.backward(&g)?,
                Layer::NsDropout(n) => n.mask_backward(&g)?,
            };
        }
        Ok(())
    }

    /// Inputs reaching each NSDropout slot in an evaluation pass with masking
    /// off, input side first. Stops after the last slot.
    pub fn nsd_inputs(&mut self, x: &Matrix<T>) -> Result<Vec<Matrix<T>>> {
        let last = self.layers.iter().rposition(|l| matches!(l, Layer::NsDropout(_)));
        let Some(last) = last else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        let mut h = x.clone();
        for layer in &mut self.layers[..=last] {
            h = match layer {
                Layer::Dense(d) => d.forward(&h, Phase::Eval)?,
                Layer::Relu(r) => r.forward(&h, Phase::Eval),
                Layer::Dropout(d) => d.forward(&h, Phase::Eval, None)?,
                Layer::NsDropout(_) => {
                    out.push(h.clone());
                    h
                }
            };
        }
        Ok(out)
    }

    /// Rebuilds every NSDropout slot's masks from class means of the slot
    /// inputs on `train` versus `reference` data. Both passes run with masking
    /// off, so the means do not depend on the masks being replaced.
    pub fn refresh_masks(
        &mut self,
        train_x: &Matrix<T>,
        train_labels: &[usize],
        reference_x: &Matrix<T>,
        reference_labels: &[usize],
    ) -> Result<()> {
        if !self.has_nsd() {
            return Ok(());
        }
        for (x, labels) in [(train_x, train_labels), (reference_x, reference_labels)] {
            if labels.len() != x.rows() {
                return Err(Error::LabelCount { labels: labels.len(), rows: x.rows() });
            }
        }
        let train_groups = class_group(train_labels, self.classes)?;
        let reference_groups = class_group(reference_labels, self.classes)?;
        let train_acts = self.nsd_inputs(train_x)?;
        let reference_acts = self.nsd_inputs(reference_x)?;
        for ((slot, t), r) in self.nsd_layers_mut().zip(&train_acts).zip(&reference_acts) {
            let tm = class_means(t, &train_groups)?;
            let rm = class_means(r, &reference_groups)?;
            slot.refresh(&tm, &rm)?;
        }
        Ok(())
    }

    /// Evaluation-phase logits under an NSDropout test-time mask rule.
    ///
    /// Networks without NSDropout slots ignore `mode`. `Predicted` runs an
    /// unmasked pass first and masks each row with its argmax class.
    pub fn predict(&mut self, x: &Matrix<T>, mode: EvalMode, labels: Option<&[usize]>) -> Result<Matrix<T>> {
        if !self.has_nsd() || mode == EvalMode::Off {
            return self.forward(x, Phase::Eval, MaskSelection::Off, None);
        }
        let resolved = if mode == EvalMode::Predicted {
            let unmasked = self.forward(x, Phase::Eval, MaskSelection::Off, None)?;
            resolve_eval_mask(mode, labels, Some(&unmasked))?
        } else {
            resolve_eval_mask::<T>(mode, labels, None)?
        };
        self.forward(x, Phase::Eval, resolved.selection(), None)
    }
}
