use rand::Rng;

use super::{
    apply_update, collision_mask, compute_delta_v, pairwise_kinematics, reshape_to_particles,
    sample_scatter_directions, CollisionReport, KitiConfig, ParticleBatch,
};
use crate::{Error, Result};

/// One training-mode collision round on an already reshaped batch. Returns the
/// post-step batch (positions `x'`, velocities `v'`) and the frozen report.
pub fn simulate<R: Rng + ?Sized>(
    batch: &ParticleBatch,
    config: &KitiConfig,
    rng: &mut R,
) -> (ParticleBatch, CollisionReport) {
    let kin = pairwise_kinematics(batch);
    let directions = sample_scatter_directions(batch.len(), batch.dim(), rng);
    let delta_v = compute_delta_v(&kin, &directions, batch);
    let (accepted, v_r_max) = collision_mask(&kin, config.coll_coef);
    let report = CollisionReport::from_parts(batch.len(), batch.dim(), accepted, directions, delta_v, v_r_max)
        .expect("internally built report is well formed");
    let out = apply_update(batch, &report, &kin, config.dt, config.update_positions);
    (out, report)
}

fn residual_step(x: &[f64], v: &[f64], dt: f64) -> Vec<f64> {
    x.iter().zip(v).map(|(xi, vi)| xi + dt * vi).collect()
}

/// The collision operator on a flat feature vector.
///
/// Inference mode (`config.training == false`) returns `x + dt * v` and no
/// report. Training mode runs [`simulate`] and returns the report needed to
/// replay or differentiate the pass.
pub fn kitinet_forward<R: Rng + ?Sized>(
    x: &[f64],
    v: &[f64],
    config: &KitiConfig,
    rng: &mut R,
) -> Result<(Vec<f64>, Option<CollisionReport>)> {
    let batch = reshape_to_particles(x, v, config.n_divide)?;
    if !config.training {
        return Ok((residual_step(x, v, config.dt), None));
    }
    let (out, report) = simulate(&batch, config, rng);
    Ok((out.into_flat().0, Some(report)))
}

pub(crate) fn check_report(len: usize, config: &KitiConfig, report: &CollisionReport) -> Result<()> {
    if report.dim != config.n_divide || report.n * report.dim != len {
        return Err(Error::StaleReport(format!(
            "report is {} particles x {} dims, input is {} features with n_divide = {}",
            report.n, report.dim, len, config.n_divide
        )));
    }
    Ok(())
}

/// Re-evaluates the training-mode map at `(x, v)` holding the report's mask
/// and scatter directions fixed. At the original inputs this reproduces the
/// forward output exactly.
pub fn kitinet_replay(x: &[f64], v: &[f64], config: &KitiConfig, report: &CollisionReport) -> Result<Vec<f64>> {
    check_report(x.len(), config, report)?;
    let batch = reshape_to_particles(x, v, config.n_divide)?;
    let kin = pairwise_kinematics(&batch);
    let delta_v = compute_delta_v(&kin, &report.directions, &batch);
    let frozen = CollisionReport { delta_v, ..report.clone() };
    Ok(apply_update(&batch, &frozen, &kin, config.dt, config.update_positions)
        .into_flat()
        .0)
}
