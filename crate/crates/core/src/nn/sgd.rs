use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::network::Network;

/// Stochastic gradient descent with momentum, L2 decay and optional
/// per-epoch learning-rate annealing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub l2_decay: f64,
    /// Factor the learning rate is multiplied by after each epoch.
    pub anneal: Option<f64>,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self { learning_rate: 0.02, momentum: 0.9, l2_decay: 0.0, anneal: None }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(format!("sgd: {what}")));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be finite and > 0");
        }
        if !(0.0..=1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1]");
        }
        if !(self.l2_decay.is_finite() && self.l2_decay >= 0.0) {
            return bad("l2_decay must be finite and >= 0");
        }
        if let Some(a) = self.anneal {
            if !(a.is_finite() && a > 0.0) {
                return bad("anneal must be finite and > 0");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Sgd {
    config: SgdConfig,
    lr: f64,
}

impl Sgd {
    pub fn new(config: SgdConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { lr: config.learning_rate, config })
    }

    pub fn config(&self) -> &SgdConfig {
        &self.config
    }

    /// Current learning rate after annealing.
    pub fn learning_rate(&self) -> f64 {
        self.lr
    }

    /// `vel ← momentum·vel − lr·(grad + l2·param)`, `param ← param + vel` for
    /// every weight and bias. Fails before touching anything if a gradient is
    /// not finite, naming the dense layer (0-based).
    pub fn step<T: Scalar>(&self, net: &mut Network<T>) -> Result<()> {
        for (layer, d) in net.dense_layers().enumerate() {
            if !d.grad_weights.is_finite() || d.grad_bias.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteGradient { layer });
            }
        }
        let mu = T::lit(self.config.momentum);
        let lr = T::lit(self.lr);
        let l2 = T::lit(self.config.l2_decay);
        let update = |p: &mut [T], v: &mut [T], g: &[T]| {
            for ((p, v), &g) in p.iter_mut().zip(v.iter_mut()).zip(g) {
                *v = mu * *v - lr * (g + l2 * *p);
                *p += *v;
            }
        };
        for d in net.dense_layers_mut() {
            update(d.weights.as_mut_slice(), d.vel_weights.as_mut_slice(), d.grad_weights.as_slice());
            update(&mut d.bias, &mut d.vel_bias, &d.grad_bias);
        }
        Ok(())
    }

    /// Applies the annealing factor once.
    pub fn end_epoch(&mut self) {
        if let Some(a) = self.config.anneal {
            self.lr *= a;
        }
    }
}
