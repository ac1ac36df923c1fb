use super::forward::check_report;
use super::kinematics::norm_of_diff;
use super::{pair_index, reshape_to_particles, CollisionReport, KitiConfig};
use crate::Result;

/// Relative speeds below this are treated as the kink of `|v_i - v_j|`.
pub const NON_DIFFERENTIABLE_SPEED: f64 = 1e-12;

/// Vector-Jacobian product of the collision operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Vjp {
    pub grad_x: Vec<f64>,
    pub grad_v: Vec<f64>,
    /// Set when an accepted pair had (numerically) zero relative speed; the
    /// gradient there uses `d|u|/du = 0`.
    pub non_differentiable: bool,
}

/// Pulls `upstream` (gradient w.r.t. the output positions) back to `x` and `v`
/// through the training-mode map, holding the report's mask and scatter
/// directions constant.
///
/// With `A_i` the accepted partners of `i`, `k_i = |A_i|`, `w = dt * upstream`
/// and `u_ij` the unit relative velocity:
///
/// ```text
/// grad_x_i = g_i (1 + k_i/2) / (1 + k_i) + sum_{j in A_i} g_j / (2 (1 + k_j))
/// grad_v_i = w_i + sum_{j in A_i} ((w_j - w_i) + u_ij <n_ij, w_i - w_j>) / 2
/// ```
///
/// Without the midpoint pull `grad_x = upstream`.
pub fn kitinet_vjp(
    x: &[f64],
    v: &[f64],
    config: &KitiConfig,
    report: &CollisionReport,
    upstream: &[f64],
) -> Result<Vjp> {
    check_report(x.len(), config, report)?;
    if upstream.len() != x.len() {
        return Err(crate::Error::Shape(format!(
            "upstream gradient has length {}, expected {}",
            upstream.len(),
            x.len()
        )));
    }
    let batch = reshape_to_particles(x, v, config.n_divide)?;
    let (n, dim) = (report.n, report.dim);
    let dt = config.dt;

    let mut grad_x = if config.update_positions {
        vec![0.0; n * dim]
    } else {
        upstream.to_vec()
    };
    let mut grad_v: Vec<f64> = upstream.iter().map(|g| dt * g).collect();
    let mut non_differentiable = false;
    let mut u = vec![0.0; dim];

    for i in 0..n {
        let k_i = report.counts[i] as f64;
        let g_i = &upstream[i * dim..(i + 1) * dim];
        if config.update_positions {
            let self_w = (1.0 + 0.5 * k_i) / (1.0 + k_i);
            for d in 0..dim {
                grad_x[i * dim + d] += self_w * g_i[d];
            }
        }
        if report.counts[i] == 0 {
            continue;
        }
        for j in 0..n {
            if !report.accepted[pair_index(n, i, j)] {
                continue;
            }
            let g_j = &upstream[j * dim..(j + 1) * dim];
            if config.update_positions {
                let w = 0.5 / (1.0 + report.counts[j] as f64);
                for d in 0..dim {
                    grad_x[i * dim + d] += w * g_j[d];
                }
            }

            let (vi, vj) = (batch.velocity(i), batch.velocity(j));
            let speed = norm_of_diff(vi, vj);
            if speed < NON_DIFFERENTIABLE_SPEED {
                non_differentiable = true;
                u.iter_mut().for_each(|c| *c = 0.0);
            } else {
                for d in 0..dim {
                    u[d] = (vi[d] - vj[d]) / speed;
                }
            }
            let n_ij = report.direction(i, j);
            let proj: f64 = (0..dim).map(|d| n_ij[d] * dt * (g_i[d] - g_j[d])).sum();
            for d in 0..dim {
                grad_v[i * dim + d] += 0.5 * (dt * (g_j[d] - g_i[d]) + u[d] * proj);
            }
        }
    }

    Ok(Vjp { grad_x, grad_v, non_differentiable })
}
