//! Derivative-free optimization toolkit built around negative-curvature
//! exploitation.
//!
//! The crate provides:
//!
//! - [`rng`], [`vector`], [`matrix`], [`quadrature`]: deterministic sampling,
//!   vector arithmetic, a dense symmetric eigensolver and adaptive quadrature.
//!   These kernels are generic over the scalar type (any [`scalar::Real`],
//!   i.e. `f32` or `f64`); the rest of the crate pins `f64` through the
//!   aliases below.
//! - [`objective`]: the benchmark objectives (quartic saddle, Rastrigin,
//!   leading eigenvector, quadratic saddle) with evaluation counting, known
//!   optima and analytic oracles.
//! - [`dfpi`]: the derivative-free power iteration that extracts a
//!   negative-curvature direction from function evaluations, with
//!   finite-difference and SPSA gradient back ends.
//! - [`search`]: the five search loops (two-step random search, RSPI, STP,
//!   BDS, AHDS) behind a uniform `run` interface producing [`search::RunTrace`]s.
//! - [`analysis`]: Monte-Carlo and quadrature verification of the sphere-cap
//!   and escape-probability bounds, plus the closed-form step radii.
//! - [`harness`]: JSON-configured experiment runner with named presets,
//!   min/median/max aggregation and CSV output.

pub mod analysis;
pub mod dfpi;
pub mod error;
pub mod harness;
pub mod matrix;
pub mod objective;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod search;
pub mod vector;

pub use error::{Error, Result};

/// Dense real vector over `f64`, the iterate/direction representation used by
/// the objectives, algorithms and harness.
pub type Vector = vector::Vector<f64>;
/// Dense symmetric matrix over `f64`.
pub type SymMatrix = matrix::SymMatrix<f64>;
