//! Collision-based residual operator.
//!
//! A length-`D` feature vector `x` and its residual `v` are read as `N = D /
//! n_divide` particles in `n_divide`-dimensional space (row-major, one
//! particle per row). In training mode the particles undergo a single round of
//! simulated hard-sphere collisions: every unordered pair gets an isotropic
//! scatter direction, pairs are accepted when their relative speed damped by
//! `exp(-distance)` is close enough to the batch maximum, accepted velocity
//! changes are summed, positions are pulled toward the pair midpoints, and the
//! particles take a straight-line step of length `dt`. In inference mode the
//! operator is the plain residual step `x + dt * v`.
//!
//! Everything is `O(D * N)` in time and memory.

mod a_edition;
mod batch;
pub mod check;
mod collision;
mod config;
mod forward;
mod kinematics;
mod vjp;

pub use a_edition::{a_edition_forward, AEditionOutput};
pub use batch::{reshape_to_particles, ParticleBatch};
pub(crate) use collision::unit_vector;
pub use collision::{
    apply_update, collision_mask, compute_delta_v, sample_scatter_directions, CollisionReport,
};
pub use config::KitiConfig;
pub use forward::{kitinet_forward, kitinet_replay, simulate};
pub use kinematics::{pairwise_kinematics, PairwiseKinematics};
pub use vjp::{kitinet_vjp, Vjp, NON_DIFFERENTIABLE_SPEED};

#[inline]
pub(crate) fn pair_index(n: usize, i: usize, j: usize) -> usize {
    i * n + j
}
