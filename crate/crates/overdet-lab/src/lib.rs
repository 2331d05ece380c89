//! Numerical laboratory for the overdetermined clamped-plate problem on
//! Fourier-perturbed disks.
//!
//! Solves Δ²u = 1 with clamped conditions (u = ∂u/∂ν = 0) and the torsion
//! problem −Δψ = 1 by spectral collocation, then verifies the integral
//! identities, positivity certificates, weighted trace inequalities, and
//! shape-stability exponents that connect the boundary deviation ‖Δu − c‖ to
//! the geometric gap ρ₂ − ρ₁.

pub mod bundle;
pub mod ddops;
pub mod dense;
pub mod disc;
pub mod error;
pub mod grid;
pub mod interp;
pub mod ops;
pub mod quad;
pub mod geometry;
pub mod radial;
pub mod rng;
pub mod shape;
pub mod solve;
pub mod tol;

pub use error::{Error, Result};
