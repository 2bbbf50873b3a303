use crate::error::Result;
use crate::ndcore::{Matrix, Rng};
use crate::nsdropout::MaskSelection;
use crate::scalar::Scalar;

use super::layers::Phase;
use super::loss::softmax_cross_entropy;
use super::network::Network;

/// Default central-difference step.
pub const GRAD_CHECK_EPSILON: f64 = 1e-5;

/// Gradients smaller than this are compared on an absolute scale: the
/// relative error is `|a − n| / max(|a|, |n|, GRAD_CHECK_FLOOR)`.
///
/// Rounding in the two loss evaluations leaves the central difference with an
/// absolute error of about `2⁻⁵³ · |L| / ε`, roughly 1e-11 at unit loss, so
/// relative errors of gradients far below 1e-6 measure that noise only.
pub const GRAD_CHECK_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Weight,
    Bias,
}

/// A single scalar parameter: dense layer (0-based), kind, flat index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParamRef {
    pub layer: usize,
    pub kind: ParamKind,
    pub index: usize,
}

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub worst: Option<ParamRef>,
    pub analytic: f64,
    pub numeric: f64,
    pub checked: usize,
    /// Parameters left out because the ±ε perturbation moved some ReLU input
    /// across zero, where the loss is not differentiable.
    pub skipped_kinks: usize,
}

fn param_mut<T: Scalar>(net: &mut Network<T>, p: ParamRef) -> &mut T {
    let d = net.dense_layers_mut().nth(p.layer).expect("param ref from this network");
    match p.kind {
        ParamKind::Weight => &mut d.weights_mut().as_mut_slice()[p.index],
        ParamKind::Bias => &mut d.bias_mut()[p.index],
    }
}

fn loss<T: Scalar>(net: &mut Network<T>, x: &Matrix<T>, labels: &[usize], rng: &mut Rng) -> Result<(f64, Vec<bool>)> {
    let logits = net.forward(x, Phase::Train, MaskSelection::PerRow(labels), Some(rng))?;
    Ok((softmax_cross_entropy(&logits, labels)?.0.as_f64(), net.relu_pattern()))
}

/// Compares backpropagated gradients with central differences
/// `(L(θ+ε) − L(θ−ε)) / 2ε` of the mean cross-entropy.
///
/// Runs in training phase with every mask frozen: NSDropout rows are chosen by
/// `labels` from the current mask sets, and standard dropout samples once from
/// `rng` and reuses that sample. `max_params` limits the check to an evenly
/// strided subset of parameters; `None` checks all of them. Parameters whose
/// perturbation changes which ReLU inputs are positive sit on a kink and are
/// skipped (counted in the report).
pub fn grad_check<T: Scalar>(
    net: &mut Network<T>,
    x: &Matrix<T>,
    labels: &[usize],
    epsilon: f64,
    max_params: Option<usize>,
    rng: &mut Rng,
) -> Result<GradCheckReport> {
    net.set_dropout_frozen(true);
    let result = check(net, x, labels, epsilon, max_params, rng);
    net.set_dropout_frozen(false);
    result
}

fn check<T: Scalar>(
    net: &mut Network<T>,
    x: &Matrix<T>,
    labels: &[usize],
    epsilon: f64,
    max_params: Option<usize>,
    rng: &mut Rng,
) -> Result<GradCheckReport> {
    let logits = net.forward(x, Phase::Train, MaskSelection::PerRow(labels), Some(rng))?;
    let (_, dlogits) = softmax_cross_entropy(&logits, labels)?;
    net.backward(&dlogits)?;

    let mut params = Vec::new();
    let mut analytic = Vec::new();
    for (layer, d) in net.dense_layers().enumerate() {
        for (index, g) in d.grad_weights().as_slice().iter().enumerate() {
            params.push(ParamRef { layer, kind: ParamKind::Weight, index });
            analytic.push(g.as_f64());
        }
        for (index, g) in d.grad_bias().iter().enumerate() {
            params.push(ParamRef { layer, kind: ParamKind::Bias, index });
            analytic.push(g.as_f64());
        }
    }
    let total = params.len();
    let take = max_params.unwrap_or(total).min(total);
    let chosen: Vec<usize> = if take == total { (0..total).collect() } else { (0..take).map(|i| i * total / take).collect() };

    let mut report =
        GradCheckReport { max_relative_error: 0.0, worst: None, analytic: 0.0, numeric: 0.0, checked: 0, skipped_kinks: 0 };
    for i in chosen {
        let p = params[i];
        let original = *param_mut(net, p);
        *param_mut(net, p) = original + T::lit(epsilon);
        let (plus, plus_pattern) = loss(net, x, labels, rng)?;
        *param_mut(net, p) = original - T::lit(epsilon);
        let (minus, minus_pattern) = loss(net, x, labels, rng)?;
        *param_mut(net, p) = original;
        if plus_pattern != minus_pattern {
            report.skipped_kinks += 1;
            continue;
        }
        report.checked += 1;
        let numeric = (plus - minus) / (2.0 * epsilon);
        let a = analytic[i];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(GRAD_CHECK_FLOOR);
        if rel > report.max_relative_error || report.worst.is_none() {
            report.max_relative_error = rel;
            report.worst = Some(p);
            report.analytic = a;
            report.numeric = numeric;
        }
    }
    Ok(report)
}
