use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{reshape_to_particles, simulate, CollisionReport, KitiConfig};
use crate::{Error, Result};

/// Output of the acceleration-carrying variant.
#[derive(Debug, Clone, PartialEq)]
pub struct AEditionOutput {
    pub x: Vec<f64>,
    /// Post-collision velocity, carried into the next layer.
    pub v: Vec<f64>,
    pub report: Option<CollisionReport>,
}

/// Variant that reads the residual `a` as an acceleration and carries a
/// velocity state between layers.
///
/// The collision round starts from `v_state + dt * a`. When `v_state` is
/// `None` (first layer) it is drawn from `N(0, v_init_std^2)` using `rng`
/// before any scatter direction is sampled.
pub fn a_edition_forward<R: Rng + ?Sized>(
    x: &[f64],
    a: &[f64],
    v_state: Option<&[f64]>,
    v_init_std: f64,
    config: &KitiConfig,
    rng: &mut R,
) -> Result<AEditionOutput> {
    let v0: Vec<f64> = match v_state {
        Some(v) => {
            if v.len() != a.len() {
                return Err(Error::Shape(format!(
                    "velocity state has length {}, expected {}",
                    v.len(),
                    a.len()
                )));
            }
            v.to_vec()
        }
        None => {
            let normal = Normal::new(0.0, v_init_std)
                .map_err(|e| Error::InvalidConfig(format!("v_init_std: {e}")))?;
            (0..a.len()).map(|_| normal.sample(rng)).collect()
        }
    };
    let v: Vec<f64> = v0.iter().zip(a).map(|(v, a)| v + config.dt * a).collect();
    let batch = reshape_to_particles(x, &v, config.n_divide)?;
    if !config.training {
        let x_new = x.iter().zip(&v).map(|(x, v)| x + config.dt * v).collect();
        return Ok(AEditionOutput { x: x_new, v, report: None });
    }
    let (out, report) = simulate(&batch, config, rng);
    let (x_new, v_new) = out.into_flat();
    Ok(AEditionOutput { x: x_new, v: v_new, report: Some(report) })
}
