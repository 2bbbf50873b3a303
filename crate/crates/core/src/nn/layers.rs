use crate::error::{Error, Result};
use crate::ndcore::{Matrix, Rng};
use crate::scalar::Scalar;

/// Training or evaluation behaviour for a forward pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Train,
    Eval,
}

/// Weight initialisation for dense layers. Biases always start at zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Init {
    /// Zero-mean Gaussian with standard deviation `sqrt(2 / in_units)`.
    He,
    /// Zero-mean Gaussian with a fixed standard deviation.
    Gaussian { std: f64 },
}

/// Fully connected layer computing `x · W + b` for a batch `x` (rows are samples).
#[derive(Clone, Debug)]
pub struct DenseLayer<T> {
    pub(crate) weights: Matrix<T>,
    pub(crate) bias: Vec<T>,
    pub(crate) grad_weights: Matrix<T>,
    pub(crate) grad_bias: Vec<T>,
    pub(crate) vel_weights: Matrix<T>,
    pub(crate) vel_bias: Vec<T>,
    input: Option<Matrix<T>>,
}

impl<T: Scalar> DenseLayer<T> {
    pub fn new(in_units: usize, out_units: usize, init: Init, rng: &mut Rng) -> Self {
        let std = match init {
            Init::He => (2.0 / in_units as f64).sqrt(),
            Init::Gaussian { std } => std,
        };
        let data = (0..in_units * out_units).map(|_| T::lit(rng.next_gaussian() * std)).collect();
        let weights = Matrix::new(in_units, out_units, data).expect("sized by construction");
        Self::from_parameters(weights, vec![T::zero(); out_units]).expect("sized by construction")
    }

    /// Layer with explicit parameters; `bias.len()` must equal the weight columns.
    pub fn from_parameters(weights: Matrix<T>, bias: Vec<T>) -> Result<Self> {
        if bias.len() != weights.cols() {
            return Err(Error::ShapeMismatch {
                op: "DenseLayer::from_parameters",
                left: weights.shape(),
                right: (1, bias.len()),
            });
        }
        let (i, o) = weights.shape();
        Ok(Self {
            grad_weights: Matrix::zeros(i, o),
            grad_bias: vec![T::zero(); o],
            vel_weights: Matrix::zeros(i, o),
            vel_bias: vec![T::zero(); o],
            weights,
            bias,
            input: None,
        })
    }

    pub fn in_units(&self) -> usize {
        self.weights.rows()
    }

    pub fn out_units(&self) -> usize {
        self.weights.cols()
    }

    pub fn weights(&self) -> &Matrix<T> {
        &self.weights
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut Matrix<T> {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut [T] {
        &mut self.bias
    }

    pub fn grad_weights(&self) -> &Matrix<T> {
        &self.grad_weights
    }

    pub fn grad_bias(&self) -> &[T] {
        &self.grad_bias
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.rows() * self.weights.cols() + self.bias.len()
    }

    /// Forward pass; the input is kept for the backward pass only in training.
    pub fn forward(&mut self, x: &Matrix<T>, phase: Phase) -> Result<Matrix<T>> {
        let mut out = x.matmul(&self.weights)?;
        out.add_row_broadcast(&self.bias)?;
        self.input = match phase {
            Phase::Train => Some(x.clone()),
            Phase::Eval => None,
        };
        Ok(out)
    }

    /// Fills the parameter gradients from `dy` and, when asked, returns the
    /// gradient with respect to the layer input.
    pub fn backward(&mut self, dy: &Matrix<T>, input_grad: bool) -> Result<Option<Matrix<T>>> {
        let x = self.input.as_ref().ok_or(Error::BackwardBeforeForward("dense"))?;
        self.grad_weights = x.matmul_tn(dy)?;
        self.grad_bias = dy.column_sums();
        if input_grad {
            Ok(Some(dy.matmul_nt(&self.weights)?))
        } else {
            Ok(None)
        }
    }

    pub fn zero_velocity(&mut self) {
        self.vel_weights = Matrix::zeros(self.in_units(), self.out_units());
        self.vel_bias = vec![T::zero(); self.out_units()];
    }
}

/// Rectified linear unit; the subgradient at exactly zero is zero.
#[derive(Clone, Debug, Default)]
pub struct Relu<T> {
    input: Option<Matrix<T>>,
}

impl<T: Scalar> Relu<T> {
    pub fn new() -> Self {
        Self { input: None }
    }

    pub fn forward(&mut self, x: &Matrix<T>, phase: Phase) -> Matrix<T> {
        let out = x.map(|v| if v > T::zero() { v } else { T::zero() });
        self.input = match phase {
            Phase::Train => Some(x.clone()),
            Phase::Eval => None,
        };
        out
    }

    /// Which cached inputs were strictly positive in the last training pass.
    pub(crate) fn active(&self) -> impl Iterator<Item = bool> + '_ {
        self.input.iter().flat_map(|x| x.as_slice().iter().map(|&v| v > T::zero()))
    }

    pub fn backward(&self, dy: &Matrix<T>) -> Result<Matrix<T>> {
        let x = self.input.as_ref().ok_or(Error::BackwardBeforeForward("relu"))?;
        dy.zip_map(x, |g, v| if v > T::zero() { g } else { T::zero() })
    }
}

/// Inverted dropout: in training each entry is kept with probability
/// `1 − drop_prob` and scaled by `1 / (1 − drop_prob)`; evaluation is the identity.
#[derive(Clone, Debug)]
pub struct StandardDropout<T> {
    drop_prob: f64,
    mask: Option<Matrix<T>>,
    frozen: bool,
}

impl<T: Scalar> StandardDropout<T> {
    pub fn new(drop_prob: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&drop_prob) {
            return Err(Error::InvalidDropProbability(drop_prob));
        }
        Ok(Self { drop_prob, mask: None, frozen: false })
    }

    pub fn drop_prob(&self) -> f64 {
        self.drop_prob
    }

    /// While frozen, training passes reuse the last sampled mask if the batch
    /// shape is unchanged. Used by gradient checking.
    pub fn set_frozen(&mut self, frozen: bool) {
        self.frozen = frozen;
    }

    pub fn last_mask(&self) -> Option<&Matrix<T>> {
        self.mask.as_ref()
    }

    pub fn forward(&mut self, x: &Matrix<T>, phase: Phase, rng: Option<&mut Rng>) -> Result<Matrix<T>> {
        if phase == Phase::Eval || self.drop_prob == 0.0 {
            self.mask = None;
            return Ok(x.clone());
        }
        let reuse = self.frozen && self.mask.as_ref().is_some_and(|m| m.shape() == x.shape());
        if !reuse {
            let rng = rng.ok_or(Error::MissingRng)?;
            let keep = 1.0 - self.drop_prob;
            let scale = T::lit(1.0 / keep);
            let data = (0..x.rows() * x.cols()).map(|_| if rng.next_uniform() < keep { scale } else { T::zero() }).collect();
            self.mask = Some(Matrix::new(x.rows(), x.cols(), data)?);
        }
        x.hadamard(self.mask.as_ref().expect("mask set above"))
    }

    pub fn backward(&self, dy: &Matrix<T>) -> Result<Matrix<T>> {
        match &self.mask {
            Some(m) => dy.hadamard(m),
            None => Ok(dy.clone()),
        }
    }
}
