//! Numerical laboratory for first-order evolution systems with boundary
//! control, built on a summation-by-parts discretization of the half-line
//! Dirac operator.
//!
//! Layers, bottom up:
//! - [`numerics`]: weighted dense algebra, quadrature;
//! - [`green`]: the discrete Green system, its self-adjoint extension and
//!   deficiency modes;
//! - [`free_dynamics`]: spectral propagator and Duhamel integrals;
//! - [`boundary_control`]: three solvers for the boundary-control problem;
//! - [`analysis`]: reachable sets, duality identities, deficiency indices and
//!   part classification.

pub mod error;
pub mod numerics;
pub mod green;
pub mod free_dynamics;
pub mod boundary_control;
pub mod analysis;

pub use error::{Error, Result};
