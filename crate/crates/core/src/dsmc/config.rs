use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallModel {
    Specular,
    Periodic,
}

/// Initial velocity distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialDistribution {
    /// Gaussian components with variance `initial_temperature`.
    Maxwell,
    /// Isotropic directions with two speeds, `|v|^2 = 0.4 d T` or `1.6 d T`
    /// with equal probability; same mean energy as `Maxwell`.
    Bimodal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DsmcConfig {
    pub num_particles: usize,
    /// Physical molecules represented by one simulated particle.
    pub f_n: f64,
    pub diameter: f64,
    /// Time step.
    pub tau: f64,
    pub box_size: Vec<f64>,
    pub cells_per_axis: Vec<usize>,
    pub wall_model: WallModel,
    pub dimensionality: usize,
    pub seed: u64,
    pub initial_temperature: f64,
    pub initial_distribution: InitialDistribution,
}

impl Default for DsmcConfig {
    fn default() -> Self {
        Self {
            num_particles: 10_000,
            f_n: 100.0,
            diameter: 1e-3,
            tau: 0.01,
            box_size: vec![1.0, 1.0],
            cells_per_axis: vec![10, 10],
            wall_model: WallModel::Periodic,
            dimensionality: 2,
            seed: 0,
            initial_temperature: 1.0,
            initial_distribution: InitialDistribution::Maxwell,
        }
    }
}

impl DsmcConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !matches!(self.dimensionality, 2 | 3) {
            return bad(format!("dimensionality must be 2 or 3, got {}", self.dimensionality));
        }
        if self.box_size.len() != self.dimensionality || self.cells_per_axis.len() != self.dimensionality {
            return bad("box_size and cells_per_axis need one entry per dimension".into());
        }
        if self.box_size.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return bad("box extents must be positive".into());
        }
        if self.cells_per_axis.contains(&0) {
            return bad("cells_per_axis entries must be >= 1".into());
        }
        if self.num_particles == 0 {
            return bad("num_particles must be >= 1".into());
        }
        for (name, v) in [
            ("f_n", self.f_n),
            ("diameter", self.diameter),
            ("tau", self.tau),
            ("initial_temperature", self.initial_temperature),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be > 0, got {v}"));
            }
        }
        let min_edge = self.cell_edges().into_iter().fold(f64::INFINITY, f64::min);
        if self.diameter >= 0.1 * min_edge {
            log::warn!(
                "particle diameter {} is not small compared with the cell edge {}",
                self.diameter,
                min_edge
            );
        }
        Ok(())
    }

    pub fn num_cells(&self) -> usize {
        self.cells_per_axis.iter().product()
    }

    pub fn cell_edges(&self) -> Vec<f64> {
        self.box_size.iter().zip(&self.cells_per_axis).map(|(l, &c)| l / c as f64).collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.box_size.iter().product::<f64>() / self.num_cells() as f64
    }

    /// Flat cell index of a position inside the box.
    pub fn cell_of(&self, pos: &[f64]) -> usize {
        let mut idx = 0;
        for k in 0..self.dimensionality {
            let n = self.cells_per_axis[k];
            let c = ((pos[k] / self.box_size[k]) * n as f64).floor();
            let c = (c.max(0.0) as usize).min(n - 1);
            idx = idx * n + c;
        }
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_geometry() {
        let c = DsmcConfig {
            box_size: vec![2.0, 1.0],
            cells_per_axis: vec![4, 2],
            ..Default::default()
        };
        assert_eq!(c.num_cells(), 8);
        assert_eq!(c.cell_volume(), 0.25);
        assert_eq!(c.cell_of(&[0.0, 0.0]), 0);
        assert_eq!(c.cell_of(&[0.6, 0.7]), 3);
        assert_eq!(c.cell_of(&[2.0, 1.0]), 7);
    }

    #[test]
    fn validation() {
        assert!(DsmcConfig::default().validate().is_ok());
        let c = DsmcConfig { dimensionality: 4, ..Default::default() };
        assert!(c.validate().is_err());
        let c = DsmcConfig { box_size: vec![1.0], ..Default::default() };
        assert!(c.validate().is_err());
        let c = DsmcConfig { tau: -1.0, ..Default::default() };
        assert!(c.validate().is_err());
    }
}
