use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::NetworkSpec;
use crate::csv::{join_f64, parse_f64_row};
use crate::{Error, Result};

/// One linear layer, `weights` is `out_dim x in_dim` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub out_dim: usize,
    pub in_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(out_dim: usize, in_dim: usize) -> Self {
        Self { out_dim, in_dim, weights: vec![0.0; out_dim * in_dim], bias: vec![0.0; out_dim] }
    }

    /// Incoming weights of neuron `o`.
    pub fn row(&self, o: usize) -> &[f64] {
        &self.weights[o * self.in_dim..(o + 1) * self.in_dim]
    }
}

/// All trainable parameters, layer by layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    pub layers: Vec<Layer>,
}

impl ParameterSet {
    pub fn zeros_like(&self) -> Self {
        Self { layers: self.layers.iter().map(|l| Layer::zeros(l.out_dim, l.in_dim)).collect() }
    }

    pub fn shapes(&self) -> Vec<(usize, usize)> {
        self.layers.iter().map(|l| (l.out_dim, l.in_dim)).collect()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Weights then bias for each layer in order.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            v.extend_from_slice(&l.weights);
            v.extend_from_slice(&l.bias);
        }
        v
    }

    pub fn from_flat(shapes: &[(usize, usize)], flat: &[f64]) -> Result<Self> {
        let need: usize = shapes.iter().map(|(o, i)| o * i + o).sum();
        if need != flat.len() {
            return Err(Error::Shape(format!("expected {need} parameters, got {}", flat.len())));
        }
        let mut at = 0;
        let layers = shapes
            .iter()
            .map(|&(o, i)| {
                let weights = flat[at..at + o * i].to_vec();
                at += o * i;
                let bias = flat[at..at + o].to_vec();
                at += o;
                Layer { out_dim: o, in_dim: i, weights, bias }
            })
            .collect();
        Ok(Self { layers })
    }

    /// In-place `self += scale * other`.
    pub fn axpy(&mut self, scale: f64, other: &ParameterSet) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights.iter_mut().zip(&b.weights).for_each(|(x, y)| *x += scale * y);
            a.bias.iter_mut().zip(&b.bias).for_each(|(x, y)| *x += scale * y);
        }
    }

    /// Snapshot file: a shape header followed by one line with the flat
    /// parameter vector.
    ///
    /// ```text
    /// # epoch=<e> shapes=<out>x<in>;<out>x<in>;...
    /// w,w,...,b,b,...
    /// ```
    pub fn to_snapshot_csv(&self, epoch: usize) -> String {
        let shapes: Vec<String> = self.layers.iter().map(|l| format!("{}x{}", l.out_dim, l.in_dim)).collect();
        format!("# epoch={epoch} shapes={}\n{}\n", shapes.join(";"), join_f64(&self.to_flat()))
    }

    /// Inverse of [`to_snapshot_csv`](Self::to_snapshot_csv); returns the epoch too.
    pub fn from_snapshot_csv(text: &str) -> Result<(usize, Self)> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty snapshot".into()))?;
        let header = header
            .strip_prefix("# ")
            .ok_or_else(|| Error::Parse(format!("bad snapshot header {header:?}")))?;
        let mut epoch = None;
        let mut shapes = None;
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("epoch", e)) => epoch = e.parse::<usize>().ok(),
                Some(("shapes", s)) => {
                    shapes = s
                        .split(';')
                        .map(|p| {
                            let (o, i) = p.split_once('x')?;
                            Some((o.parse::<usize>().ok()?, i.parse::<usize>().ok()?))
                        })
                        .collect::<Option<Vec<_>>>()
                }
                _ => {}
            }
        }
        let (epoch, shapes) = epoch
            .zip(shapes)
            .ok_or_else(|| Error::Parse("snapshot header needs epoch= and shapes=".into()))?;
        let flat = parse_f64_row(lines.next().unwrap_or(""))?;
        Ok((epoch, Self::from_flat(&shapes, &flat)?))
    }
}

/// Every weight and bias drawn i.i.d. from `N(0, sigma^2)`, `sigma = 1/m^gamma`.
pub fn init_network<R: Rng + ?Sized>(spec: &NetworkSpec, rng: &mut R) -> Result<ParameterSet> {
    spec.validate()?;
    let normal = Normal::new(0.0, spec.init_std())
        .map_err(|e| Error::InvalidConfig(format!("init std {}: {e}", spec.init_std())))?;
    let layers = spec
        .layer_shapes()
        .into_iter()
        .map(|(o, i)| {
            let weights = (0..o * i).map(|_| normal.sample(rng)).collect();
            let bias = (0..o).map(|_| normal.sample(rng)).collect();
            Layer { out_dim: o, in_dim: i, weights, bias }
        })
        .collect();
    Ok(ParameterSet { layers })
}
