use std::f64::consts::PI;

use super::GasState;
use crate::csv::fmt_f64;
use crate::{Error, Result};

pub fn total_momentum(state: &GasState) -> Vec<f64> {
    let dim = state.dim;
    (0..dim)
        .map(|k| state.velocities.iter().skip(k).step_by(dim).sum())
        .collect()
}

pub fn kinetic_energy(state: &GasState) -> f64 {
    0.5 * state.velocities.iter().map(|v| v * v).sum::<f64>()
}

/// Temperature from the peculiar velocities, `sum |v - u|^2 / (dim N)`.
pub fn temperature(state: &GasState) -> f64 {
    let n = state.len() as f64;
    let mean: Vec<f64> = total_momentum(state).iter().map(|p| p / n).collect();
    let sq: f64 = state
        .velocities
        .chunks_exact(state.dim)
        .map(|v| v.iter().zip(&mean).map(|(a, m)| (a - m) * (a - m)).sum::<f64>())
        .sum();
    sq / (state.dim as f64 * n)
}

/// Histogram of peculiar speeds normalized as a density over all particles.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub densities: Vec<f64>,
}

impl Histogram {
    pub fn integral(&self) -> f64 {
        self.densities
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, w)| d * (w[1] - w[0]))
            .sum()
    }
}

/// Speed density on `bins` equal bins over `[0, max_speed]`. With no
/// `max_speed` the range ends at the fastest particle and the histogram
/// integrates to one; with a fixed range, particles beyond it are counted in
/// the normalization but not in any bin.
pub fn speed_histogram(state: &GasState, bins: usize, max_speed: Option<f64>) -> Result<Histogram> {
    if bins < 10 {
        return Err(Error::InvalidConfig(format!("histogram needs >= 10 bins, got {bins}")));
    }
    let n = state.len();
    let mean: Vec<f64> = total_momentum(state).iter().map(|p| p / n as f64).collect();
    let speeds: Vec<f64> = state
        .velocities
        .chunks_exact(state.dim)
        .map(|v| v.iter().zip(&mean).map(|(a, m)| (a - m) * (a - m)).sum::<f64>().sqrt())
        .collect();
    let top = match max_speed {
        Some(s) if s > 0.0 => s,
        Some(s) => return Err(Error::InvalidConfig(format!("max_speed must be > 0, got {s}"))),
        None => speeds.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE),
    };
    let width = top / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|b| b as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    for &s in &speeds {
        if s > top {
            continue;
        }
        let b = ((s / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let densities = counts.iter().map(|&c| c as f64 / (n as f64 * width)).collect();
    Ok(Histogram { edges, densities })
}

/// Maxwell-Boltzmann speed density at temperature `t` (`m = k_B = 1`).
pub fn maxwell_speed_density(s: f64, t: f64, dim: usize) -> f64 {
    match dim {
        2 => s / t * (-s * s / (2.0 * t)).exp(),
        3 => (2.0 / PI).sqrt() * s * s / t.powf(1.5) * (-s * s / (2.0 * t)).exp(),
        _ => panic!("speed density defined for 2 or 3 dimensions, got {dim}"),
    }
}

fn maxwell_cdf(s: f64, t: f64, dim: usize) -> f64 {
    let z = s * s / (2.0 * t);
    match dim {
        2 => -(-z).exp_m1(),
        3 => libm::erf(s / (2.0 * t).sqrt()) - (2.0 / PI).sqrt() * s / t.sqrt() * (-z).exp(),
        _ => panic!("speed density defined for 2 or 3 dimensions, got {dim}"),
    }
}

/// Reference density averaged over each bin (exact bin integral / width).
pub fn maxwell_reference(t: f64, dim: usize, edges: &[f64]) -> Vec<f64> {
    edges
        .windows(2)
        .map(|w| (maxwell_cdf(w[1], t, dim) - maxwell_cdf(w[0], t, dim)) / (w[1] - w[0]))
        .collect()
}

/// `sqrt(sum_b (h_b - r_b)^2 width_b)`, the L2 norm of the density difference.
pub fn l2_distance(hist: &Histogram, reference: &[f64]) -> f64 {
    hist.densities
        .iter()
        .zip(reference)
        .zip(hist.edges.windows(2))
        .map(|((h, r), w)| (h - r) * (h - r) * (w[1] - w[0]))
        .sum::<f64>()
        .sqrt()
}

pub fn timeseries_header(dim: usize) -> Vec<String> {
    let mut cols = vec!["step".to_string(), "time".to_string()];
    for axis in ["x", "y", "z"].iter().take(dim) {
        cols.push(format!("total_momentum_{axis}"));
    }
    cols.extend(["kinetic_energy", "temperature", "l2_to_maxwell"].map(String::from));
    cols
}

/// Time-series record; `l2_to_maxwell` compares against the density at the
/// gas's own temperature.
pub fn timeseries_row(state: &GasState, bins: usize, max_speed: f64) -> Result<Vec<String>> {
    let t = temperature(state);
    let hist = speed_histogram(state, bins, Some(max_speed))?;
    let l2 = l2_distance(&hist, &maxwell_reference(t, state.dim, &hist.edges));
    let mut row = vec![state.step.to_string(), fmt_f64(state.time)];
    row.extend(total_momentum(state).into_iter().map(fmt_f64));
    row.push(fmt_f64(kinetic_energy(state)));
    row.push(fmt_f64(t));
    row.push(fmt_f64(l2));
    Ok(row)
}
