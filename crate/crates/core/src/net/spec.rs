use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::kinetic::KitiConfig;
use crate::{Error, Result};

/// Negative-side slope of [`Activation::LeakyRelu`].
pub const LEAKY_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    LeakyRelu,
    Sigmoid,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Self::Relu => z.max(0.0),
            Self::LeakyRelu => {
                if z > 0.0 {
                    z
                } else {
                    LEAKY_SLOPE * z
                }
            }
            Self::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Self::Tanh => z.tanh(),
        }
    }

    /// Derivative at pre-activation `z`, given `a = apply(z)`.
    #[inline]
    pub fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Self::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::LeakyRelu => {
                if z > 0.0 {
                    1.0
                } else {
                    LEAKY_SLOPE
                }
            }
            Self::Sigmoid => a * (1.0 - a),
            Self::Tanh => 1.0 - a * a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSpec {
    pub input_dim: usize,
    /// Width `m` shared by every hidden layer.
    pub hidden_dim: usize,
    pub output_dim: usize,
    /// Number of linear layers.
    pub depth: usize,
    pub activation: Activation,
    pub skip_connections: bool,
    /// Hidden-to-hidden layers (indices in `1..depth-1`) run through the
    /// collision operator.
    pub kiti_layers: BTreeSet<usize>,
    /// Initialization exponent: parameters ~ `N(0, (1/m^gamma)^2)`.
    pub gamma: f64,
    pub kiti: KitiConfig,
}

impl Default for NetworkSpec {
    fn default() -> Self {
        Self {
            input_dim: 5,
            hidden_dim: 50,
            output_dim: 1,
            depth: 3,
            activation: Activation::Relu,
            skip_connections: false,
            kiti_layers: BTreeSet::new(),
            gamma: 4.0,
            kiti: KitiConfig::default(),
        }
    }
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.input_dim == 0 || self.hidden_dim == 0 || self.output_dim == 0 {
            return bad("layer widths must be >= 1".into());
        }
        if self.depth < 2 {
            return bad(format!("depth must be >= 2, got {}", self.depth));
        }
        if let Some(&l) = self.kiti_layers.iter().find(|&&l| l == 0 || l >= self.depth - 1) {
            return bad(format!(
                "operator layer {l} is not a hidden-to-hidden layer (valid: 1..={})",
                self.depth as isize - 2
            ));
        }
        if !self.kiti_layers.is_empty() {
            self.kiti.validate()?;
            if self.hidden_dim % self.kiti.n_divide != 0 {
                return bad(format!(
                    "hidden width {} is not divisible by n_divide = {}",
                    self.hidden_dim, self.kiti.n_divide
                ));
            }
        }
        if !self.gamma.is_finite() {
            return bad("gamma must be finite".into());
        }
        Ok(())
    }

    /// Initialization standard deviation `1 / m^gamma`.
    pub fn init_std(&self) -> f64 {
        (self.hidden_dim as f64).powf(-self.gamma)
    }

    /// `(out, in)` shape of each linear layer.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        (0..self.depth)
            .map(|l| {
                let fan_in = if l == 0 { self.input_dim } else { self.hidden_dim };
                let fan_out = if l + 1 == self.depth { self.output_dim } else { self.hidden_dim };
                (fan_out, fan_in)
            })
            .collect()
    }

    pub fn is_hidden_to_hidden(&self, layer: usize) -> bool {
        layer >= 1 && layer + 1 < self.depth
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    /// Mini-batch size; `None` means full batch.
    pub batch: Option<usize>,
    pub seed: u64,
    /// Epochs (1-based, after that epoch's update) at which parameters are
    /// snapshotted.
    pub checkpoints: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            learning_rate: 0.04,
            optimizer: Optimizer::Sgd,
            batch: None,
            seed: 0,
            checkpoints: vec![1, 10, 50, 100],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be >= 0, got {}", self.learning_rate));
        }
        if self.batch == Some(0) {
            return bad("batch size must be >= 1".into());
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return bad("checkpoints must be strictly ascending".into());
        }
        if let Some(&c) = self.checkpoints.iter().find(|&&c| c == 0 || c > self.epochs) {
            return bad(format!("checkpoint {c} outside 1..={}", self.epochs));
        }
        Ok(())
    }
}
