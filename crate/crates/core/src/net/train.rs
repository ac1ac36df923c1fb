use rand::seq::SliceRandom;

use super::{backward, forward, init_network, mse, Dataset, ForwardMode, NetworkSpec, Optimizer, ParameterSet, TrainConfig};
use crate::{rng, Error, Result};

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Parameters captured after a checkpoint epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub epoch: usize,
    pub params: ParameterSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRun {
    /// Training MSE of each epoch's forward passes, index `e - 1` for epoch `e`.
    pub losses: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub initial: ParameterSet,
    pub final_params: ParameterSet,
}

struct Adam {
    m: ParameterSet,
    v: ParameterSet,
    t: i32,
}

impl Adam {
    fn step(&mut self, params: &mut ParameterSet, grads: &ParameterSet, lr: f64) {
        self.t += 1;
        let c1 = 1.0 - ADAM_BETA1.powi(self.t);
        let c2 = 1.0 - ADAM_BETA2.powi(self.t);
        for ((p, g), (m, v)) in params
            .layers
            .iter_mut()
            .zip(&grads.layers)
            .zip(self.m.layers.iter_mut().zip(self.v.layers.iter_mut()))
        {
            let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
                for k in 0..p.len() {
                    m[k] = ADAM_BETA1 * m[k] + (1.0 - ADAM_BETA1) * g[k];
                    v[k] = ADAM_BETA2 * v[k] + (1.0 - ADAM_BETA2) * g[k] * g[k];
                    p[k] -= lr * (m[k] / c1) / ((v[k] / c2).sqrt() + ADAM_EPS);
                }
            };
            update(&mut p.weights, &g.weights, &mut m.weights, &mut v.weights);
            update(&mut p.bias, &g.bias, &mut m.bias, &mut v.bias);
        }
    }
}

/// Trains on MSE with full-batch (default) or mini-batch gradient descent or
/// Adam. Initialization, batch order and operator-layer randomness are all
/// derived from the configured seeds.
pub fn train(spec: &NetworkSpec, config: &TrainConfig, data: &Dataset) -> Result<TrainingRun> {
    spec.validate()?;
    config.validate()?;
    if data.input_dim != spec.input_dim || data.output_dim != spec.output_dim {
        return Err(Error::Shape(format!(
            "dataset is {}->{}, network is {}->{}",
            data.input_dim, data.output_dim, spec.input_dim, spec.output_dim
        )));
    }
    let initial = init_network(spec, &mut rng::derive(config.seed, &[rng::tag::NET_INIT]))?;
    let mut params = initial.clone();
    let mut adam = Adam { m: params.zeros_like(), v: params.zeros_like(), t: 0 };
    let n = data.len();
    let batch = config.batch.unwrap_or(n).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut losses = Vec::with_capacity(config.epochs);
    let mut snapshots = Vec::with_capacity(config.checkpoints.len());
    let mut step = 0u64;

    for epoch in 1..=config.epochs {
        if batch < n {
            order.shuffle(&mut rng::derive(config.seed, &[rng::tag::SHUFFLE, epoch as u64]));
        }
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch) {
            let sub;
            let part = if batch < n {
                sub = data.select(chunk);
                &sub
            } else {
                data
            };
            let (out, tape) = forward(&params, spec, &part.inputs, ForwardMode::Training { step }).map_err(|e| match e {
                // non-finite activations reaching an operator layer
                Error::NonFiniteInput { .. } => Error::DivergenceDetected { epoch, loss: f64::NAN },
                other => other,
            })?;
            let (loss, grad) = mse(&out, &part.targets);
            if !loss.is_finite() {
                return Err(Error::DivergenceDetected { epoch, loss });
            }
            epoch_loss += loss * chunk.len() as f64;
            let grads = backward(&tape, &params, &grad)?;
            match config.optimizer {
                Optimizer::Sgd => params.axpy(-config.learning_rate, &grads),
                Optimizer::Adam => adam.step(&mut params, &grads, config.learning_rate),
            }
            step += 1;
        }
        let loss = epoch_loss / n as f64;
        if !loss.is_finite() || params.to_flat().iter().any(|p| !p.is_finite()) {
            return Err(Error::DivergenceDetected { epoch, loss });
        }
        losses.push(loss);
        if config.checkpoints.binary_search(&epoch).is_ok() {
            snapshots.push(Snapshot { epoch, params: params.clone() });
        }
    }

    Ok(TrainingRun { losses, snapshots, initial, final_params: params })
}
