//! Min-max hierarchies for surfaces at desk scale.
//!
//! The crate evaluates parametrized immersions into Euclidean space and round
//! spheres, computes the area, the curvature energy `F = ∫(1+|𝕀|²)²` and the
//! relaxed area `A^σ = Area + σ²F` with their variations and Jacobi spectra,
//! realizes the Rayleigh-quotient eigenvalue hierarchy with explicit sweep
//! families, constructs sweep-outs of `S³`, measures varifold and flat-norm
//! distances, and runs cut-off pseudo-gradient flows of `A^σ`.

pub mod ambient;
pub mod basis;
pub mod chart;
pub mod complex;
pub mod energy;
pub mod flow;
pub mod degree;
pub mod eigenbasis;
pub mod error;
pub mod hierarchy;
pub mod laplacian;
pub mod lp;
pub mod quadrature;
pub mod report;
pub mod s3;
pub mod sample;
pub mod spectrum;
pub mod varifold;
pub mod variation;

pub use error::{Error, Result};
