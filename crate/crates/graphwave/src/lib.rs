//! Stationary sine-Gordon waves on a Y-junction metric graph.
//!
//! The crate builds the kink and kink/anti-kink stationary states of the
//! sine-Gordon equation on a Y-junction (one incoming edge, two outgoing
//! edges) coupled at the vertex by a delta-prime interaction, assembles the
//! linearized Schrodinger-type operator on the graph, computes its low-lying
//! spectrum and Morse index (on the full space and on the symmetry
//! subspaces), and integrates the time-dependent equation to measure
//! growing-mode rates.
//!
//! Module map:
//! - [`graph`]: junction geometry, grids, vertex conditions, inner products.
//! - [`profiles`]: closed-form stationary families and their shift maps.
//! - [`spectral`]: Galerkin assembly, eigenvalue solver, subspace
//!   restrictions, quadratic forms, branch continuation, free resolvent.
//! - [`evolution`]: Stormer-Verlet time stepping with vertex enforcement,
//!   energy diagnostics and growth-rate fits.
//! - [`linalg`]: tridiagonal-chain linear algebra shared by the above.

pub mod evolution;
pub mod graph;
pub mod linalg;
pub mod profiles;
pub mod spectral;

pub use graph::{GraphFunction, GridDescription, VertexCondition, YJunction};
pub use profiles::{ProfileClass, ProfileFamily, StationaryProfile};
pub use spectral::{
    EigenSolution, LinearizedOperator, Potential, SpectrumReport, SubspaceKind,
};
