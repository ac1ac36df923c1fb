use crate::{Error, Result};

/// `N` particles in `dim`-dimensional space, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleBatch {
    n: usize,
    dim: usize,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
}

impl ParticleBatch {
    pub(crate) fn from_raw(n: usize, dim: usize, positions: Vec<f64>, velocities: Vec<f64>) -> Self {
        debug_assert_eq!(positions.len(), n * dim);
        debug_assert_eq!(velocities.len(), n * dim);
        Self { n, dim, positions, velocities }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.velocities[i * self.dim..(i + 1) * self.dim]
    }

    /// Row-major flattening; inverse of [`reshape_to_particles`].
    pub fn into_flat(self) -> (Vec<f64>, Vec<f64>) {
        (self.positions, self.velocities)
    }
}

pub(crate) fn check_finite(what: &'static str, xs: &[f64]) -> Result<()> {
    match xs.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFiniteInput { what, index }),
        None => Ok(()),
    }
}

/// Views `x` and `v` as `D / n_divide` particles in `n_divide` dimensions.
pub fn reshape_to_particles(x: &[f64], v: &[f64], n_divide: usize) -> Result<ParticleBatch> {
    if x.len() != v.len() {
        return Err(Error::Shape(format!(
            "position length {} != velocity length {}",
            x.len(),
            v.len()
        )));
    }
    if n_divide == 0 || x.len() % n_divide != 0 {
        return Err(Error::NonDivisibleDimension { len: x.len(), n_divide });
    }
    check_finite("x", x)?;
    check_finite("v", v)?;
    Ok(ParticleBatch::from_raw(
        x.len() / n_divide,
        n_divide,
        x.to_vec(),
        v.to_vec(),
    ))
}
