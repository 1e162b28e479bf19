//! Spectral fractional Laplacians with nonzero Dirichlet and Neumann
//! boundary data.
//!
//! A nonhomogeneous problem is split into a harmonic lifting of the boundary
//! data ([`fem2d`]) and a zero-boundary fractional problem, solved either
//! through the truncated Caffarelli–Silvestre extension ([`extension`]) or
//! by a truncated eigen-series ([`spectral`]). [`solvers`] composes the two
//! parts, and [`error_metrics`] and [`experiments`] measure convergence.
//! [`properties`] checks the operator identities numerically.

pub mod error;
pub mod error_metrics;
pub mod experiments;
pub mod extension;
pub mod fem2d;
pub mod functions;
pub mod mesh;
pub mod properties;
pub mod quadrature;
pub mod solvers;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
