use super::{collide_cell, DsmcConfig, GasState, WallModel};
use crate::rng;

/// Moves every particle by `tau * v`, then applies the wall model: specular
/// walls mirror the position back inside and flip the normal velocity
/// component; periodic walls wrap the position.
pub fn drift_and_walls(state: &mut GasState, config: &DsmcConfig) {
    let dim = state.dim;
    let tau = config.tau;
    for (x_row, v_row) in state
        .positions
        .chunks_exact_mut(dim)
        .zip(state.velocities.chunks_exact_mut(dim))
    {
        for k in 0..dim {
            let l = config.box_size[k];
            let mut x = x_row[k] + tau * v_row[k];
            match config.wall_model {
                WallModel::Specular => {
                    while !(0.0..=l).contains(&x) {
                        x = if x < 0.0 { -x } else { 2.0 * l - x };
                        v_row[k] = -v_row[k];
                    }
                }
                WallModel::Periodic => {
                    x = x.rem_euclid(l);
                    if x >= l {
                        x = 0.0;
                    }
                }
            }
            x_row[k] = x;
        }
    }
}

/// Per-step totals over all cells.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub candidates: usize,
    pub accepted: usize,
    pub expected_candidates: f64,
}

/// Drift, walls, cell sort and per-cell collisions; advances time by `tau`.
///
/// Each cell draws from its own stream keyed by `(seed, step, cell)`.
pub fn dsmc_step(state: &mut GasState, config: &DsmcConfig) -> StepStats {
    drift_and_walls(state, config);
    let members = state.sort_into_cells(config);
    let mut stats = StepStats::default();
    for (cell, m) in members.iter().enumerate() {
        if m.len() < 2 {
            continue;
        }
        let mut r = rng::derive(config.seed, &[rng::tag::DSMC_CELL, state.step, cell as u64]);
        let s = collide_cell(state, cell, m, config, &mut r);
        stats.candidates += s.candidates;
        stats.accepted += s.accepted;
        stats.expected_candidates += s.expected_candidates;
    }
    state.step += 1;
    state.time += config.tau;
    stats
}
