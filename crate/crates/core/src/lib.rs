//! Change acceleration and detection.
//!
//! A latent binary state switches irreversibly from "unchanged" to "changed"
//! at a random time whose law depends on the treatments assigned. Each
//! treatment has its own pre- and post-change response law. The goal is to
//! drive the system into the changed state quickly and to declare the change
//! as soon as possible while keeping the false-alarm probability below a
//! level `alpha`.
//!
//! - [`model`]: response and change-point models and the simulated system.
//! - [`posterior`]: the posterior odds filter and the single-treatment
//!   Shiryaev rule.
//! - [`procedures`]: the training/assessment procedure, treatment quality
//!   metrics, threshold calibration and performance bounds.
//! - [`dp`]: the optimal policy by value iteration (Markovian models with
//!   finite response spaces).
//! - [`evaluation`]: the parallel Monte Carlo harness and CSV reports.
//! - [`config`]: model files.

// Parameter guards are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dp;
pub mod error;
pub mod evaluation;
pub mod exec;
pub mod model;
pub mod posterior;
pub mod procedures;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};

/// Crate version.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `git describe` of the source tree at build time, or `unknown`.
pub const GIT_DESCRIBE: &str = match option_env!("CHANGE_ACCEL_GIT_DESCRIBE") {
    Some(s) => s,
    None => "unknown",
};
