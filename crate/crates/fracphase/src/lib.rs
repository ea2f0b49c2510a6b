//! Multivariate fractional phase-type distributions.
//!
//! Building blocks, bottom up:
//! - [`numerics`]: Gamma, scalar/matrix Mittag-Leffler, matrix exponential,
//!   linear solves, numerical Caputo derivative.
//! - [`random`]: seeded RNG streams, positive stable and Mittag-Leffler
//!   variates.
//! - [`phase_type`]: classical PH(π, T) distributions and path sampling.
//! - [`frac_phase`]: fractional PH_α via Mittag-Leffler sojourns.
//! - [`mph`]: multivariate reward classes MPH* and MPH*_α, projections and
//!   power transforms.
//! - [`constructors`]: feed-forward and bivariate-block builders plus the
//!   built-in demo preset.
//! - [`verify`]: statistical and analytic self-checks with machine-readable
//!   reports.
//! - [`model`]: JSON model-file (de)serialization shared with the CLI.

pub mod constructors;
pub mod error;
pub mod frac_phase;
pub mod model;
pub mod mph;
pub mod numerics;
pub mod phase_type;
pub mod random;
pub mod verify;

pub use error::{Error, Result};
