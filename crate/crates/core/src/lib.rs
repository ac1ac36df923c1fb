//! Collision-based residual operator and the machinery around it.
//!
//! * [`kinetic`]: the residual operator that treats a feature vector as
//!   particle positions and its residual as velocities, lets the particles
//!   collide, then takes a straight-line step. Includes the reverse-mode
//!   gradient and the acceleration-carrying variant.
//! * [`dsmc`]: a hard-sphere direct simulation Monte Carlo solver used as the
//!   physical reference for the operator.
//! * [`net`]: a small dense-network engine (fully connected and skip
//!   architectures) with optional operator layers, trained by its own
//!   reverse-mode pass.
//! * [`condense`]: cosine-similarity condensation diagnostics over weight
//!   snapshots.

pub mod condense;
pub mod csv;
pub mod dsmc;
mod error;
pub mod kinetic;
pub mod net;
pub mod rng;

pub use error::{Error, Result};
pub use kinetic::{CollisionReport, KitiConfig, ParticleBatch};
pub use rng::{RngStream, RNG_FAMILY};
