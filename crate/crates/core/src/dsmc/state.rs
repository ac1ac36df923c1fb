use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{DsmcConfig, InitialDistribution};
use crate::kinetic::unit_vector;
use crate::{rng, Result};

/// Simulator state. Positions and velocities are `N x dim`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GasState {
    pub dim: usize,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    pub cell_of: Vec<usize>,
    pub time: f64,
    pub step: u64,
    /// Fractional candidate count carried to the next step, per cell.
    pub candidate_remainders: Vec<f64>,
    /// Running estimate of the largest relative speed, per cell; `None` until
    /// the cell first holds two particles.
    pub v_r_max: Vec<Option<f64>>,
}

impl GasState {
    pub fn len(&self) -> usize {
        self.cell_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_of.is_empty()
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.velocities[i * self.dim..(i + 1) * self.dim]
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    /// Recomputes `cell_of` and returns the members of each cell in
    /// ascending particle order.
    pub fn sort_into_cells(&mut self, config: &DsmcConfig) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); config.num_cells()];
        for i in 0..self.len() {
            let c = config.cell_of(&self.positions[i * self.dim..(i + 1) * self.dim]);
            self.cell_of[i] = c;
            members[c].push(i);
        }
        members
    }
}

/// Uniform positions in the box and velocities from the configured initial
/// distribution, drawn from the `seed` stream.
pub fn init_gas(config: &DsmcConfig) -> Result<GasState> {
    config.validate()?;
    let dim = config.dimensionality;
    let n = config.num_particles;
    let mut rng = rng::derive(config.seed, &[rng::tag::DSMC_INIT]);

    let mut positions = Vec::with_capacity(n * dim);
    for _ in 0..n {
        for &l in &config.box_size {
            positions.push(rng.random::<f64>() * l);
        }
    }

    let t = config.initial_temperature;
    let velocities = match config.initial_distribution {
        InitialDistribution::Maxwell => {
            let normal = Normal::new(0.0, t.sqrt()).expect("temperature validated");
            (0..n * dim).map(|_| normal.sample(&mut rng)).collect()
        }
        InitialDistribution::Bimodal => {
            let lo = (0.4 * dim as f64 * t).sqrt();
            let hi = (1.6 * dim as f64 * t).sqrt();
            let mut v = vec![0.0; n * dim];
            for row in v.chunks_exact_mut(dim) {
                let s = if rng.random::<bool>() { hi } else { lo };
                unit_vector(dim, &mut rng, row);
                row.iter_mut().for_each(|c| *c *= s);
            }
            v
        }
    };

    let cells = config.num_cells();
    let mut state = GasState {
        dim,
        positions,
        velocities,
        cell_of: vec![0; n],
        time: 0.0,
        step: 0,
        candidate_remainders: vec![0.0; cells],
        v_r_max: vec![None; cells],
    };
    state.sort_into_cells(config);
    Ok(state)
}
