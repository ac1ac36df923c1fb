use rand::Rng;

use crate::{rng, Error, Result};

pub const SINE_INPUT_DIM: usize = 5;
/// Sampling interval of each input coordinate.
pub const SINE_RANGE: (f64, f64) = (-4.0, 2.0);

/// Regression data, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
    pub input_dim: usize,
    pub output_dim: usize,
}

impl Dataset {
    pub fn new(inputs: Vec<f64>, targets: Vec<f64>, input_dim: usize, output_dim: usize) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 || inputs.len() % input_dim != 0 {
            return Err(Error::Shape("input length is not a multiple of input_dim".into()));
        }
        let n = inputs.len() / input_dim;
        if n == 0 || targets.len() != n * output_dim {
            return Err(Error::Shape(format!("{n} inputs but {} targets", targets.len())));
        }
        if inputs.iter().chain(&targets).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput { what: "dataset", index: 0 });
        }
        Ok(Self { inputs, targets, input_dim, output_dim })
    }

    pub fn len(&self) -> usize {
        self.inputs.len() / self.input_dim
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Rows `idx` gathered into a new dataset.
    pub fn select(&self, idx: &[usize]) -> Dataset {
        let mut inputs = Vec::with_capacity(idx.len() * self.input_dim);
        let mut targets = Vec::with_capacity(idx.len() * self.output_dim);
        for &i in idx {
            inputs.extend_from_slice(&self.inputs[i * self.input_dim..(i + 1) * self.input_dim]);
            targets.extend_from_slice(&self.targets[i * self.output_dim..(i + 1) * self.output_dim]);
        }
        Dataset { inputs, targets, input_dim: self.input_dim, output_dim: self.output_dim }
    }
}

/// `sum_i 3.5 sin(5 x_i + 1)`.
pub fn sine_target(x: &[f64]) -> f64 {
    x.iter().map(|&xi| 3.5 * (5.0 * xi + 1.0).sin()).sum()
}

/// `n` points uniform on `[-4, 2]^5` with the sine-sum target.
pub fn make_sine_dataset(n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidConfig("dataset size must be >= 1".into()));
    }
    let mut r = rng::derive(seed, &[rng::tag::DATASET]);
    let (lo, hi) = SINE_RANGE;
    let inputs: Vec<f64> = (0..n * SINE_INPUT_DIM).map(|_| r.random_range(lo..=hi)).collect();
    let targets = inputs.chunks_exact(SINE_INPUT_DIM).map(sine_target).collect();
    Dataset::new(inputs, targets, SINE_INPUT_DIM, 1)
}
