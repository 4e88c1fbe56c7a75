//! Numerical laboratory for fractional Gagliardo seminorms under symmetric
//! decreasing rearrangement.
//!
//! The crate computes regional seminorms, full-space seminorms through a
//! splitting into domain, cross, and outside contributions, nonlocal
//! boundary quantities (tail kernels, Hardy-type bounds, radial comparison
//! integrals), and runs the experiment drivers that probe where
//! rearrangement increases or decreases each quantity.
//!
//! Start with the `examples/` directory: each example is a runnable tour of
//! one capability. The `gagliardo` binary exposes the same drivers for
//! scripted runs.

pub mod config;
pub mod constants;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod kernel;
pub mod rearrange;
pub mod report;
pub mod seminorm;

pub use error::{Error, Result};
