//! Hard-sphere direct simulation Monte Carlo.
//!
//! Each step drifts every particle in a straight line, applies the wall model,
//! sorts particles into cells and, per cell, draws a no-time-counter number of
//! candidate pairs that are accepted with probability `v_r / v_r_max` and
//! scattered isotropically in the center-of-mass frame. Units are `m = k_B = 1`.

mod collide;
mod config;
mod state;
mod stats;
mod step;

pub use collide::{candidate_count, collide_cell, hard_sphere_scatter, sample_scatter_direction, CellStats};
pub use config::{DsmcConfig, InitialDistribution, WallModel};
pub use state::{init_gas, GasState};
pub use stats::{
    kinetic_energy, l2_distance, maxwell_reference, maxwell_speed_density, speed_histogram,
    temperature, total_momentum, timeseries_header, timeseries_row, Histogram,
};
pub use step::{drift_and_walls, dsmc_step, StepStats};
