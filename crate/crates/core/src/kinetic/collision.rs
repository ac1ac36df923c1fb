use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{pair_index, PairwiseKinematics, ParticleBatch};
use crate::csv::{fmt_f64, CsvBuf};
use crate::{Error, Result};

/// Isotropic unit vector in `dim` dimensions (normalized Gaussian; `±1` when
/// `dim == 1`).
pub(crate) fn unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R, out: &mut [f64]) {
    if dim == 1 {
        out[0] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return;
    }
    loop {
        let mut norm2 = 0.0;
        for o in out.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *o = g;
            norm2 += g * g;
        }
        if norm2 > 1e-200 {
            let inv = 1.0 / norm2.sqrt();
            out.iter_mut().for_each(|o| *o *= inv);
            return;
        }
    }
}

/// Scatter directions for every ordered pair: `dirs[i][j]` is isotropic on the
/// unit sphere for `i < j`, `dirs[j][i] = -dirs[i][j]`, diagonal zero.
///
/// Pairs are drawn in `(i, j)` lexicographic order, so the result is a pure
/// function of the generator state.
pub fn sample_scatter_directions<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> Vec<f64> {
    let mut dirs = vec![0.0; n * n * dim];
    let mut u = vec![0.0; dim];
    for i in 0..n {
        for j in i + 1..n {
            unit_vector(dim, rng, &mut u);
            let ij = pair_index(n, i, j) * dim;
            let ji = pair_index(n, j, i) * dim;
            for k in 0..dim {
                dirs[ij + k] = u[k];
                dirs[ji + k] = -u[k];
            }
        }
    }
    dirs
}

/// Acceptance test for every unordered pair.
///
/// A pair is accepted when `v_r * exp(-x_r) / max(v_r) > 1 - coll_coef`. With
/// no relative motion anywhere (`max(v_r) == 0`) nothing is accepted.
pub fn collision_mask(kin: &PairwiseKinematics, coll_coef: f64) -> (Vec<bool>, f64) {
    let n = kin.n;
    let v_r_max = kin.v_r.iter().copied().fold(0.0_f64, f64::max);
    let mut accepted = vec![false; n * n];
    if v_r_max == 0.0 {
        return (accepted, 0.0);
    }
    let threshold = 1.0 - coll_coef;
    for i in 0..n {
        for j in i + 1..n {
            let ij = pair_index(n, i, j);
            let damped = kin.v_r[ij] * (-kin.x_r[ij]).exp();
            if damped / v_r_max > threshold {
                accepted[ij] = true;
                accepted[pair_index(n, j, i)] = true;
            }
        }
    }
    (accepted, v_r_max)
}

/// Velocity change of `i` when colliding with `j`:
/// `v_cm + v_r / 2 * dir[i][j] - v_i`, for every ordered pair.
pub fn compute_delta_v(kin: &PairwiseKinematics, directions: &[f64], batch: &ParticleBatch) -> Vec<f64> {
    let (n, dim) = (kin.n, kin.dim);
    let mut dv = vec![0.0; n * n * dim];
    for i in 0..n {
        let vi = batch.velocity(i);
        for j in 0..n {
            if i == j {
                continue;
            }
            let ij = pair_index(n, i, j);
            let half_vr = 0.5 * kin.v_r[ij];
            for k in 0..dim {
                let o = ij * dim + k;
                dv[o] = kin.v_cm[o] + half_vr * directions[o] - vi[k];
            }
        }
    }
    dv
}

/// Frozen outcome of one training-mode collision round; replaying it makes the
/// forward map deterministic so it can be differentiated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub n: usize,
    pub dim: usize,
    /// `N x N`, symmetric, false diagonal.
    pub accepted: Vec<bool>,
    /// `N x N x dim` unit vectors, antisymmetric.
    pub directions: Vec<f64>,
    /// `N x N x dim` velocity changes (all pairs, accepted or not).
    pub delta_v: Vec<f64>,
    /// Accepted collisions per particle.
    pub counts: Vec<usize>,
    pub v_r_max: f64,
}

impl CollisionReport {
    /// Assembles a report, deriving `counts` from the mask.
    pub fn from_parts(
        n: usize,
        dim: usize,
        accepted: Vec<bool>,
        directions: Vec<f64>,
        delta_v: Vec<f64>,
        v_r_max: f64,
    ) -> Result<Self> {
        if accepted.len() != n * n || directions.len() != n * n * dim || delta_v.len() != n * n * dim {
            return Err(Error::Shape(format!("report arrays do not match n={n}, dim={dim}")));
        }
        for i in 0..n {
            if accepted[pair_index(n, i, i)] {
                return Err(Error::Shape(format!("particle {i} collides with itself")));
            }
            for j in i + 1..n {
                if accepted[pair_index(n, i, j)] != accepted[pair_index(n, j, i)] {
                    return Err(Error::Shape(format!("mask is not symmetric at ({i}, {j})")));
                }
            }
        }
        let counts = (0..n)
            .map(|i| accepted[i * n..(i + 1) * n].iter().filter(|&&a| a).count())
            .collect();
        Ok(Self { n, dim, accepted, directions, delta_v, counts, v_r_max })
    }

    pub fn is_accepted(&self, i: usize, j: usize) -> bool {
        self.accepted[pair_index(self.n, i, j)]
    }

    pub fn direction(&self, i: usize, j: usize) -> &[f64] {
        let o = pair_index(self.n, i, j) * self.dim;
        &self.directions[o..o + self.dim]
    }

    pub fn delta_v(&self, i: usize, j: usize) -> &[f64] {
        let o = pair_index(self.n, i, j) * self.dim;
        &self.delta_v[o..o + self.dim]
    }

    pub fn accepted_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| (i + 1..self.n).map(move |j| (i, j)))
            .filter(move |&(i, j)| self.is_accepted(i, j))
    }

    pub fn num_collisions(&self) -> usize {
        self.counts.iter().sum::<usize>() / 2
    }

    /// One row per accepted pair `i < j`: indices, scatter direction and both
    /// velocity changes.
    pub fn to_csv(&self) -> String {
        let mut cols = vec!["i".to_string(), "j".to_string()];
        for prefix in ["dir", "dv_ij", "dv_ji"] {
            cols.extend((0..self.dim).map(|k| format!("{prefix}_{k}")));
        }
        let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
        let mut out = CsvBuf::with_header(&cols);
        for (i, j) in self.accepted_pairs() {
            let mut row = vec![i.to_string(), j.to_string()];
            row.extend(self.direction(i, j).iter().map(|&x| fmt_f64(x)));
            row.extend(self.delta_v(i, j).iter().map(|&x| fmt_f64(x)));
            row.extend(self.delta_v(j, i).iter().map(|&x| fmt_f64(x)));
            out.row(row);
        }
        out.into_string()
    }
}

/// Applies accepted velocity changes, the optional midpoint pull and the
/// straight-line step. The returned batch carries post-collision velocities.
pub fn apply_update(
    batch: &ParticleBatch,
    report: &CollisionReport,
    kin: &PairwiseKinematics,
    dt: f64,
    update_positions: bool,
) -> ParticleBatch {
    let (n, dim) = (batch.len(), batch.dim());
    let mut x_new = Vec::with_capacity(n * dim);
    let mut v_new = Vec::with_capacity(n * dim);
    let mut v_acc = vec![0.0; dim];
    let mut x_acc = vec![0.0; dim];

    for i in 0..n {
        let xi = batch.position(i);
        let vi = batch.velocity(i);
        let k = report.counts[i];
        if k == 0 {
            // Untouched particles follow the plain residual step bit for bit.
            for d in 0..dim {
                x_new.push(xi[d] + dt * vi[d]);
                v_new.push(vi[d]);
            }
            continue;
        }
        v_acc.copy_from_slice(vi);
        x_acc.copy_from_slice(xi);
        for j in 0..n {
            if !report.accepted[pair_index(n, i, j)] {
                continue;
            }
            let dv = report.delta_v(i, j);
            let xm = kin.x_cm(i, j);
            for d in 0..dim {
                v_acc[d] += dv[d];
                x_acc[d] += xm[d];
            }
        }
        let inv = 1.0 / (1 + k) as f64;
        for d in 0..dim {
            let x_star = if update_positions { x_acc[d] * inv } else { xi[d] };
            x_new.push(x_star + dt * v_acc[d]);
            v_new.push(v_acc[d]);
        }
    }
    ParticleBatch::from_raw(n, dim, x_new, v_new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetic::{pairwise_kinematics, reshape_to_particles};
    use crate::rng;

    fn report_for(batch: &ParticleBatch, dirs: Vec<f64>, accepted: Vec<bool>) -> (CollisionReport, PairwiseKinematics) {
        let kin = pairwise_kinematics(batch);
        let dv = compute_delta_v(&kin, &dirs, batch);
        let vmax = kin.v_r.iter().copied().fold(0.0, f64::max);
        let r = CollisionReport::from_parts(batch.len(), batch.dim(), accepted, dirs, dv, vmax).unwrap();
        (r, kin)
    }

    #[test]
    fn directions_are_unit_and_antisymmetric() {
        let mut r = rng::root(3);
        for dim in [1, 2, 3, 7] {
            let n = 5;
            let d = sample_scatter_directions(n, dim, &mut r);
            for i in 0..n {
                for j in 0..n {
                    let o = (i * n + j) * dim;
                    let u = &d[o..o + dim];
                    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if i == j {
                        assert_eq!(norm, 0.0);
                        continue;
                    }
                    assert!((norm - 1.0).abs() < 1e-12);
                    let o2 = (j * n + i) * dim;
                    for k in 0..dim {
                        assert_eq!(d[o2 + k], -u[k]);
                    }
                    if dim == 1 {
                        assert!(u[0] == 1.0 || u[0] == -1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn isotropic_mean_is_small() {
        // 10^5 independent 3-D directions: mean norm ~ 1/sqrt(3e5)
        let mut r = rng::root(11);
        let mut u = [0.0; 3];
        let mut sum = [0.0; 3];
        let samples = 100_000;
        for _ in 0..samples {
            unit_vector(3, &mut r, &mut u);
            for k in 0..3 {
                sum[k] += u[k];
            }
        }
        let mean_norm = sum.iter().map(|s| (s / samples as f64).powi(2)).sum::<f64>().sqrt();
        assert!(mean_norm < 0.02, "mean norm {mean_norm}");
    }

    #[test]
    fn zero_slack_accepts_nothing() {
        let b = reshape_to_particles(&[0., 0.1, 0.2, 5.], &[1., -1., 3., 0.], 1).unwrap();
        let kin = pairwise_kinematics(&b);
        let (mask, vmax) = collision_mask(&kin, 0.0);
        assert!(vmax > 0.0);
        assert!(mask.iter().all(|a| !a));
    }

    #[test]
    fn coincident_fastest_pair_accepted() {
        let b = reshape_to_particles(&[1., 1.], &[2., -1.], 1).unwrap();
        let kin = pairwise_kinematics(&b);
        let (mask, vmax) = collision_mask(&kin, 0.5);
        assert_eq!(vmax, 3.0);
        assert_eq!(mask, vec![false, true, true, false]);
    }

    #[test]
    fn no_relative_motion_means_no_collisions() {
        let b = reshape_to_particles(&[0., 1., 2.], &[0.3; 3], 1).unwrap();
        let kin = pairwise_kinematics(&b);
        let (mask, vmax) = collision_mask(&kin, 1.0);
        assert_eq!(vmax, 0.0);
        assert!(mask.iter().all(|a| !a));
    }

    #[test]
    fn delta_v_head_on_swap() {
        let b = reshape_to_particles(&[0., 0.], &[1., -1.], 1).unwrap();
        let kin = pairwise_kinematics(&b);
        let dv = compute_delta_v(&kin, &[0., -1., 1., 0.], &b);
        assert_eq!(dv[1], -2.0);
        assert_eq!(dv[2], 2.0);
        let dv = compute_delta_v(&kin, &[0., 1., -1., 0.], &b);
        assert_eq!(dv[1], 0.0);
        assert_eq!(dv[2], 0.0);
    }

    #[test]
    fn delta_v_vanishes_for_equal_velocities() {
        let b = reshape_to_particles(&[0., 0., 1., 1.], &[0.5, -0.5, 0.5, -0.5], 2).unwrap();
        let kin = pairwise_kinematics(&b);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let dirs = vec![0., 0., s, s, -s, -s, 0., 0.];
        let dv = compute_delta_v(&kin, &dirs, &b);
        assert!(dv.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn midpoint_pull_for_single_collision() {
        let b = reshape_to_particles(&[0., 2.], &[1., -1.], 1).unwrap();
        let (r, kin) = report_for(&b, vec![0., 1., -1., 0.], vec![false, true, true, false]);
        assert_eq!(r.counts, vec![1, 1]);
        // scatter back onto incoming velocities: dv = 0, so x' = x* + dt * v
        let out = apply_update(&b, &r, &kin, 1.0, true);
        assert_eq!(out.positions, vec![0.5 + 1.0, 1.5 - 1.0]);
        let out = apply_update(&b, &r, &kin, 1.0, false);
        assert_eq!(out.positions, vec![1.0, 1.0]);
    }

    #[test]
    fn no_collisions_is_plain_residual_step() {
        let b = reshape_to_particles(&[0.1, -0.2, 0.3], &[1.5, 2.5, -0.5], 1).unwrap();
        let (r, kin) = report_for(&b, vec![0.0; 9], vec![false; 9]);
        let out = apply_update(&b, &r, &kin, 0.7, true);
        let expect: Vec<f64> = [0.1, -0.2, 0.3].iter().zip([1.5, 2.5, -0.5]).map(|(x, v)| x + 0.7 * v).collect();
        assert_eq!(out.positions, expect);
    }

    #[test]
    fn report_rejects_asymmetric_mask() {
        let e = CollisionReport::from_parts(2, 1, vec![false, true, false, false], vec![0.; 4], vec![0.; 4], 1.0);
        assert!(e.is_err());
        let e = CollisionReport::from_parts(2, 1, vec![true, false, false, false], vec![0.; 4], vec![0.; 4], 1.0);
        assert!(e.is_err());
    }

    #[test]
    fn report_csv_lists_accepted_pairs() {
        let b = reshape_to_particles(&[0., 2.], &[1., -1.], 1).unwrap();
        let (r, _) = report_for(&b, vec![0., -1., 1., 0.], vec![false, true, true, false]);
        assert_eq!(r.to_csv(), "i,j,dir_0,dv_ij_0,dv_ji_0\n0,1,-1,-2,2\n");
    }
}
