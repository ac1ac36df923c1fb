use super::{pair_index, ParticleBatch};

/// Pairwise relative and center-of-mass quantities for every ordered pair.
///
/// `x_r`, `v_r` are `N x N`; `x_cm`, `v_cm` are `N x N x dim`, all row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseKinematics {
    pub n: usize,
    pub dim: usize,
    pub x_r: Vec<f64>,
    pub v_r: Vec<f64>,
    pub x_cm: Vec<f64>,
    pub v_cm: Vec<f64>,
}

impl PairwiseKinematics {
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.x_r[pair_index(self.n, i, j)]
    }

    pub fn rel_speed(&self, i: usize, j: usize) -> f64 {
        self.v_r[pair_index(self.n, i, j)]
    }

    pub fn x_cm(&self, i: usize, j: usize) -> &[f64] {
        let k = pair_index(self.n, i, j) * self.dim;
        &self.x_cm[k..k + self.dim]
    }

    pub fn v_cm(&self, i: usize, j: usize) -> &[f64] {
        let k = pair_index(self.n, i, j) * self.dim;
        &self.v_cm[k..k + self.dim]
    }
}

pub(crate) fn norm_of_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// Relative distance/speed and midpoint position/velocity for all pairs.
///
/// Each unordered pair is computed once and mirrored, so the symmetric
/// entries are bit-identical.
pub fn pairwise_kinematics(batch: &ParticleBatch) -> PairwiseKinematics {
    let n = batch.len();
    let dim = batch.dim();
    let mut x_r = vec![0.0; n * n];
    let mut v_r = vec![0.0; n * n];
    let mut x_cm = vec![0.0; n * n * dim];
    let mut v_cm = vec![0.0; n * n * dim];

    for i in 0..n {
        let (xi, vi) = (batch.position(i), batch.velocity(i));
        let d = pair_index(n, i, i) * dim;
        x_cm[d..d + dim].copy_from_slice(xi);
        v_cm[d..d + dim].copy_from_slice(vi);
        for j in i + 1..n {
            let (xj, vj) = (batch.position(j), batch.velocity(j));
            let dx = norm_of_diff(xi, xj);
            let dv = norm_of_diff(vi, vj);
            let ij = pair_index(n, i, j);
            let ji = pair_index(n, j, i);
            x_r[ij] = dx;
            x_r[ji] = dx;
            v_r[ij] = dv;
            v_r[ji] = dv;
            for k in 0..dim {
                let xm = 0.5 * (xi[k] + xj[k]);
                let vm = 0.5 * (vi[k] + vj[k]);
                x_cm[ij * dim + k] = xm;
                x_cm[ji * dim + k] = xm;
                v_cm[ij * dim + k] = vm;
                v_cm[ji * dim + k] = vm;
            }
        }
    }

    PairwiseKinematics { n, dim, x_r, v_r, x_cm, v_cm }
}
