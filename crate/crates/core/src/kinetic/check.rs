//! Invariant suite for the collision operator, run by `kitinet kernel-check`.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{
    apply_update, compute_delta_v, kitinet_forward, kitinet_replay, kitinet_vjp, pairwise_kinematics,
    reshape_to_particles, sample_scatter_directions, simulate, CollisionReport, KitiConfig,
};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub metric: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    fn at_most(name: &'static str, metric: f64, tolerance: f64) -> Self {
        Self { name, metric, tolerance, pass: metric <= tolerance }
    }
}

pub const MOMENTUM_TOL: f64 = 1e-10;
pub const ENERGY_TOL: f64 = 1e-10;
pub const GRADIENT_TOL: f64 = 1e-5;
pub const FD_STEP: f64 = 1e-6;
/// Gradient points are resampled until every pairwise relative speed exceeds this.
pub const MIN_PAIR_SPEED: f64 = 1e-3;

pub fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// `|sum v' - sum v| / sum |v|`, worst component.
pub fn momentum_error(v_before: &[f64], v_after: &[f64], dim: usize) -> f64 {
    let scale = v_before.iter().map(|v| v.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    (0..dim)
        .map(|d| {
            let b: f64 = v_before.iter().skip(d).step_by(dim).sum();
            let a: f64 = v_after.iter().skip(d).step_by(dim).sum();
            (a - b).abs() / scale
        })
        .fold(0.0, f64::max)
}

fn min_pair_speed(v: &[f64], dim: usize) -> f64 {
    let n = v.len() / dim;
    let mut m = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            let s: f64 = (0..dim).map(|d| (v[i * dim + d] - v[j * dim + d]).powi(2)).sum();
            m = m.min(s.sqrt());
        }
    }
    m
}

/// Norm-wise relative error between the analytic VJP and central differences
/// of the frozen-report map `<replay(x, v), g>`.
pub fn gradient_error(
    x: &[f64],
    v: &[f64],
    config: &KitiConfig,
    report: &CollisionReport,
    upstream: &[f64],
) -> crate::Result<f64> {
    let an = kitinet_vjp(x, v, config, report, upstream)?;
    let objective = |x: &[f64], v: &[f64]| -> crate::Result<f64> {
        Ok(kitinet_replay(x, v, config, report)?
            .iter()
            .zip(upstream)
            .map(|(a, b)| a * b)
            .sum())
    };
    let mut fd = Vec::with_capacity(2 * x.len());
    for k in 0..x.len() {
        let (mut p, mut m) = (x.to_vec(), x.to_vec());
        p[k] += FD_STEP;
        m[k] -= FD_STEP;
        fd.push((objective(&p, v)? - objective(&m, v)?) / (2.0 * FD_STEP));
    }
    for k in 0..v.len() {
        let (mut p, mut m) = (v.to_vec(), v.to_vec());
        p[k] += FD_STEP;
        m[k] -= FD_STEP;
        fd.push((objective(x, &p)? - objective(x, &m)?) / (2.0 * FD_STEP));
    }
    let analytic: Vec<f64> = an.grad_x.iter().chain(&an.grad_v).copied().collect();
    let diff = analytic.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let scale = fd.iter().map(|b| b * b).sum::<f64>().sqrt().max(1e-12);
    Ok(diff / scale)
}

/// Runs the operator on a random matching (each particle in at most one
/// accepted pair) and returns the worst per-pair relative energy error.
pub fn matching_energy_error<R: Rng + ?Sized>(x: &[f64], v: &[f64], dim: usize, rng: &mut R) -> f64 {
    let batch = reshape_to_particles(x, v, dim).expect("valid trial input");
    let n = batch.len();
    let kin = pairwise_kinematics(&batch);
    let dirs = sample_scatter_directions(n, dim, rng);
    let dv = compute_delta_v(&kin, &dirs, &batch);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut accepted = vec![false; n * n];
    let pairs: Vec<(usize, usize)> = order.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    for &(i, j) in &pairs {
        accepted[i * n + j] = true;
        accepted[j * n + i] = true;
    }
    let report = CollisionReport::from_parts(n, dim, accepted, dirs, dv, 0.0).expect("matching is symmetric");
    let out = apply_update(&batch, &report, &kin, 1.0, true);
    let e = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>();
    pairs
        .iter()
        .map(|&(i, j)| {
            let before = e(batch.velocity(i)) + e(batch.velocity(j));
            let after = e(out.velocity(i)) + e(out.velocity(j));
            (after - before).abs() / before.max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

/// Reduction, conservation, monotonicity, gradient and determinism checks on
/// `trials` random inputs of length `features`.
pub fn run_suite(config: &KitiConfig, features: usize, trials: usize) -> Vec<CheckResult> {
    let dim = config.n_divide;
    let mut rng = rng::derive(config.seed, &[rng::tag::KERNEL, 0xC4EC]);
    let train = KitiConfig { training: true, ..*config };

    let mut reduction_worst = 0.0_f64;
    let mut reduction_mismatch = false;
    let mut momentum = 0.0_f64;
    let mut energy = 0.0_f64;
    let mut monotone_violations = 0usize;
    let mut gradient = 0.0_f64;
    let mut nondeterministic = 0usize;

    for t in 0..trials {
        let x = gaussian_vec(&mut rng, features);
        let v = gaussian_vec(&mut rng, features);
        let seed = rng.random::<u64>();

        let zero = KitiConfig { coll_coef: 0.0, ..train };
        let (out, _) = kitinet_forward(&x, &v, &zero, &mut rng::root(seed)).expect("valid input");
        let infer = KitiConfig { training: false, ..zero };
        let (plain, _) = kitinet_forward(&x, &v, &infer, &mut rng::root(seed)).expect("valid input");
        for ((o, p), (xi, vi)) in out.iter().zip(&plain).zip(x.iter().zip(&v)) {
            let direct = xi + config.dt * vi;
            reduction_worst = reduction_worst.max((o - direct).abs()).max((o - p).abs());
            reduction_mismatch |= o.to_bits() != direct.to_bits() || o.to_bits() != p.to_bits();
        }

        let batch = reshape_to_particles(&x, &v, dim).expect("valid input");
        let (after, report) = simulate(&batch, &train, &mut rng::root(seed));
        momentum = momentum.max(momentum_error(&v, &after.velocities, dim));

        let (again, report2) = simulate(&batch, &train, &mut rng::root(seed));
        if again != after || report2 != report {
            nondeterministic += 1;
        }

        let loose = KitiConfig { coll_coef: (train.coll_coef + 0.25).min(1.0), ..train };
        let (_, wider) = simulate(&batch, &loose, &mut rng::root(seed));
        monotone_violations += report
            .accepted
            .iter()
            .zip(&wider.accepted)
            .filter(|(a, b)| **a && !**b)
            .count();

        energy = energy.max(matching_energy_error(&x, &v, dim, &mut rng));

        if t < trials.min(100) {
            let mut vg = v.clone();
            while min_pair_speed(&vg, dim) <= MIN_PAIR_SPEED {
                vg = gaussian_vec(&mut rng, features);
            }
            let (_, rep) = kitinet_forward(&x, &vg, &train, &mut rng::root(seed)).expect("valid input");
            let g = gaussian_vec(&mut rng, features);
            let err = gradient_error(&x, &vg, &train, &rep.expect("training report"), &g).expect("fresh report");
            gradient = gradient.max(err);
        }
    }

    vec![
        CheckResult {
            name: "reduction",
            metric: reduction_worst,
            tolerance: 0.0,
            pass: !reduction_mismatch,
        },
        CheckResult::at_most("momentum", momentum, MOMENTUM_TOL),
        CheckResult::at_most("matching_energy", energy, ENERGY_TOL),
        CheckResult::at_most("mask_monotonicity", monotone_violations as f64, 0.0),
        CheckResult::at_most("gradient", gradient, GRADIENT_TOL),
        CheckResult::at_most("determinism", nondeterministic as f64, 0.0),
    ]
}
