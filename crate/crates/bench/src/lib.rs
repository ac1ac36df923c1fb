//! Input builders shared by the benchmarks.

use kitinet_core::kinetic::check::gaussian_vec;
use kitinet_core::rng;

/// Random `(x, v)` feature vectors of length `len`.
pub fn features(len: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut r = rng::root(seed);
    (gaussian_vec(&mut r, len), gaussian_vec(&mut r, len))
}
