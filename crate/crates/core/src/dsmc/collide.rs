use std::f64::consts::PI;

use rand::Rng;

use super::{DsmcConfig, GasState};

/// Headroom applied to a cell's first measured maximum relative speed.
pub const V_R_MAX_HEADROOM: f64 = 1.05;

/// No-time-counter candidate count for a cell.
///
/// Evaluates `N_c (N_c - 1) F_N pi d^2 v_r_max tau / (2 V_c)`, adds the carried
/// remainder and returns the integer part together with the new remainder, so
/// the long-run mean equals the real-valued formula.
pub fn candidate_count(n_c: usize, v_r_max: f64, config: &DsmcConfig, remainder: f64) -> (usize, f64) {
    if n_c < 2 {
        return (0, remainder);
    }
    let n = n_c as f64;
    let expected = n * (n - 1.0) * config.f_n * PI * config.diameter * config.diameter * v_r_max * config.tau
        / (2.0 * config.cell_volume());
    let total = expected + remainder;
    let m = total.floor();
    (m as usize, total - m)
}

/// Isotropic unit vector for the post-collision relative velocity: polar
/// angles `phi = 2 pi R2`, `theta = acos(2 R3 - 1)` in 3-D, a single uniform
/// angle in 2-D.
pub fn sample_scatter_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> [f64; 3] {
    match dim {
        2 => {
            let a = 2.0 * PI * rng.random::<f64>();
            [a.cos(), a.sin(), 0.0]
        }
        3 => {
            let phi = 2.0 * PI * rng.random::<f64>();
            let theta = (2.0 * rng.random::<f64>() - 1.0).acos();
            [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
        }
        _ => panic!("DSMC supports 2 or 3 dimensions, got {dim}"),
    }
}

/// Hard-sphere collision: keeps the center-of-mass velocity and the relative
/// speed, points the relative velocity along `dir`.
pub fn hard_sphere_scatter(vi: &mut [f64], vj: &mut [f64], dir: &[f64]) {
    let dim = vi.len();
    let speed = vi.iter().zip(vj.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    for k in 0..dim {
        let cm = 0.5 * (vi[k] + vj[k]);
        let half = 0.5 * speed * dir[k];
        vi[k] = cm + half;
        vj[k] = cm - half;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CellStats {
    pub candidates: usize,
    pub accepted: usize,
    /// Real-valued candidate expectation before the remainder carry.
    pub expected_candidates: f64,
    /// Largest relative speed among accepted pairs.
    pub max_accepted_speed: f64,
}

fn rel_speed(state: &GasState, i: usize, j: usize) -> f64 {
    state
        .velocity(i)
        .iter()
        .zip(state.velocity(j))
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn two_rows(v: &mut [f64], dim: usize, i: usize, j: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert_ne!(i, j);
    if i < j {
        let (a, b) = v.split_at_mut(j * dim);
        (&mut a[i * dim..(i + 1) * dim], &mut b[..dim])
    } else {
        let (a, b) = v.split_at_mut(i * dim);
        (&mut b[..dim], &mut a[j * dim..(j + 1) * dim])
    }
}

/// Collides particles within one cell. Candidate pairs are drawn uniformly
/// (with replacement) over distinct pairs and accepted when
/// `v_r / v_r_max > R1`; positions are untouched.
pub fn collide_cell<R: Rng + ?Sized>(
    state: &mut GasState,
    cell: usize,
    members: &[usize],
    config: &DsmcConfig,
    rng: &mut R,
) -> CellStats {
    let n_c = members.len();
    if n_c < 2 {
        return CellStats::default();
    }
    let v_r_max = match state.v_r_max[cell] {
        Some(v) => v,
        None => {
            let mut m = 0.0_f64;
            for (a, &i) in members.iter().enumerate() {
                for &j in &members[a + 1..] {
                    m = m.max(rel_speed(state, i, j));
                }
            }
            let m = m * V_R_MAX_HEADROOM;
            state.v_r_max[cell] = Some(m);
            m
        }
    };
    let (m_cand, rem) = candidate_count(n_c, v_r_max, config, state.candidate_remainders[cell]);
    let expected = candidate_count(n_c, v_r_max, config, 0.0);
    state.candidate_remainders[cell] = rem;

    let mut vmax = v_r_max;
    let mut accepted = 0;
    let mut max_accepted_speed = 0.0_f64;
    let dim = state.dim;
    for _ in 0..m_cand {
        let a = rng.random_range(0..n_c);
        let mut b = rng.random_range(0..n_c - 1);
        if b >= a {
            b += 1;
        }
        let (i, j) = (members[a], members[b]);
        let vr = rel_speed(state, i, j);
        if vr > vmax {
            vmax = vr;
        }
        let r1: f64 = rng.random();
        if vmax > 0.0 && vr / vmax > r1 {
            let dir = sample_scatter_direction(dim, rng);
            let (vi, vj) = two_rows(&mut state.velocities, dim, i, j);
            hard_sphere_scatter(vi, vj, &dir[..dim]);
            accepted += 1;
            max_accepted_speed = max_accepted_speed.max(vr);
        }
    }
    state.v_r_max[cell] = Some(vmax);
    CellStats {
        candidates: m_cand,
        accepted,
        expected_candidates: expected.0 as f64 + expected.1,
        max_accepted_speed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsmc::init_gas;
    use crate::rng;

    #[test]
    fn candidate_count_hand_value() {
        let c = DsmcConfig {
            f_n: 1.0,
            diameter: 0.1,
            tau: 0.1,
            box_size: vec![1.0, 1.0],
            cells_per_axis: vec![1, 1],
            ..Default::default()
        };
        let (m, r) = candidate_count(10, 2.0, &c, 0.0);
        let expect = 10.0 * 9.0 * PI * 0.01 * 2.0 * 0.1 / 2.0;
        assert_eq!(m, 0);
        assert!((r - expect).abs() < 1e-12);
        assert!((r - 0.2827).abs() < 1e-4);
        // remainder carries across calls
        let (m, r2) = candidate_count(10, 2.0, &c, 0.9);
        assert_eq!(m, 1);
        assert!((r2 - (expect + 0.9 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn too_few_particles_give_no_candidates() {
        let c = DsmcConfig::default();
        assert_eq!(candidate_count(0, 5.0, &c, 0.3), (0, 0.3));
        assert_eq!(candidate_count(1, 5.0, &c, 0.3), (0, 0.3));
    }

    #[test]
    fn remainder_mean_matches_formula() {
        let c = DsmcConfig { f_n: 1.0, diameter: 0.1, tau: 0.1, ..Default::default() };
        let (m0, r0) = candidate_count(7, 1.3, &c, 0.0);
        let expect = m0 as f64 + r0;
        assert!(r0 > 0.1 && r0 < 0.9);
        let mut rem = 0.0;
        let mut total = 0usize;
        let steps = 10_000;
        for _ in 0..steps {
            let (m, r) = candidate_count(7, 1.3, &c, rem);
            total += m;
            rem = r;
        }
        let mean = total as f64 / steps as f64;
        assert!((mean / expect - 1.0).abs() < 0.01, "{mean} vs {expect}");
    }

    #[test]
    fn scatter_conserves_momentum_and_energy() {
        let mut r = rng::root(2);
        for dim in [2, 3] {
            for _ in 0..1000 {
                let mut vi: Vec<f64> = (0..dim).map(|_| r.random::<f64>() * 4.0 - 2.0).collect();
                let mut vj: Vec<f64> = (0..dim).map(|_| r.random::<f64>() * 4.0 - 2.0).collect();
                let (pi0, pj0) = (vi.clone(), vj.clone());
                let dir = sample_scatter_direction(dim, &mut r);
                hard_sphere_scatter(&mut vi, &mut vj, &dir[..dim]);
                let e = |a: &[f64]| a.iter().map(|x| x * x).sum::<f64>();
                let e0 = e(&pi0) + e(&pj0);
                assert!(((e(&vi) + e(&vj)) - e0).abs() / e0 < 1e-10);
                for k in 0..dim {
                    let p0 = pi0[k] + pj0[k];
                    assert!((vi[k] + vj[k] - p0).abs() <= 1e-10 * (pi0[k].abs() + pj0[k].abs()).max(1e-300));
                }
                // post-collision relative velocity points along the sampled direction
                let rel: Vec<f64> = (0..dim).map(|k| vi[k] - vj[k]).collect();
                let s = e(&rel).sqrt();
                for k in 0..dim {
                    assert!((rel[k] / s - dir[k]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn scatter_directions_are_isotropic() {
        let mut r = rng::root(17);
        for dim in [2, 3] {
            let mut sum = [0.0; 3];
            let samples = 100_000;
            for _ in 0..samples {
                let d = sample_scatter_direction(dim, &mut r);
                let norm: f64 = d.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-12);
                for k in 0..3 {
                    sum[k] += d[k];
                }
            }
            let mean_norm = sum.iter().map(|s| (s / samples as f64).powi(2)).sum::<f64>().sqrt();
            assert!(mean_norm < 0.02, "dim {dim}: {mean_norm}");
        }
    }

    #[test]
    fn accepted_pairs_never_exceed_estimate() {
        let c = DsmcConfig { num_particles: 400, cells_per_axis: vec![1, 1], f_n: 1e4, ..Default::default() };
        let mut s = init_gas(&c).unwrap();
        let members: Vec<usize> = (0..s.len()).collect();
        let mut r = rng::root(0);
        let before_e: f64 = s.velocities.iter().map(|v| v * v).sum();
        let stats = collide_cell(&mut s, 0, &members, &c, &mut r);
        assert!(stats.accepted > 0);
        assert!(stats.max_accepted_speed > 0.0);
        assert!(stats.max_accepted_speed <= s.v_r_max[0].unwrap());
        let after_e: f64 = s.velocities.iter().map(|v| v * v).sum();
        assert!((after_e - before_e).abs() / before_e < 1e-12);
    }
}
