use serde::{Deserialize, Serialize};

use crate::{rng, Error, Result};

/// Hyper-parameters of the collision operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KitiConfig {
    /// Straight-line step length.
    pub dt: f64,
    /// Dimension of the particle space; must divide the feature length.
    pub n_divide: usize,
    /// Acceptance slack in `[0, 1]`; `0` disables collisions.
    pub coll_coef: f64,
    pub seed: u64,
    /// Pull positions toward accepted collision midpoints before the step.
    pub update_positions: bool,
    pub training: bool,
}

impl Default for KitiConfig {
    fn default() -> Self {
        Self {
            dt: 1.0,
            n_divide: 1,
            coll_coef: 0.5,
            seed: 0,
            update_positions: true,
            training: true,
        }
    }
}

impl KitiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.n_divide == 0 {
            return Err(Error::InvalidConfig("n_divide must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.coll_coef) {
            return Err(Error::InvalidConfig(format!(
                "coll_coef must lie in [0, 1], got {}",
                self.coll_coef
            )));
        }
        Ok(())
    }

    /// The operator's own random stream, keyed by `seed`.
    pub fn rng(&self) -> rng::RngStream {
        rng::derive(self.seed, &[rng::tag::KERNEL])
    }
}
