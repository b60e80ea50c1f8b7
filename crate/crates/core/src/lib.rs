//! Numerical verification toolkit for interior second-derivative estimates of
//! the two-dimensional Monge-Ampère equation `det D²u = f`.
//!
//! The crate is split along the four stages of a verification run:
//!
//! * [`eigenperturb`]: first and second derivatives of eigenvalues and unit
//!   eigenvectors of symmetric matrices, with closed-form and
//!   finite-difference cross-checks.
//! * [`ma_solver`]: manufactured problems on a disc and a damped Newton solver
//!   for the nine-point discretization of `det D²u = f`.
//! * [`aux_certificate`]: the Hessian eigen-field `τ`, the weight `η`, the
//!   test function `φ = η^β g(½|Du|²) u_ττ`, its maximum and the identities
//!   that hold there.
//! * [`sweep`]: experiment sweeps, empirical constant fitting and reports.

pub mod aux_certificate;
pub mod eigenperturb;
pub mod error;
pub mod ma_solver;
pub mod sweep;

pub use aux_certificate::{AuxConfig, CertificateReport, TauField};
pub use eigenperturb::{EigenDerivatives, EigenSystem, IndexConvention, SymmetricMatrix};
pub use error::{Error, Result};
pub use ma_solver::{ClassBounds, DiscGrid, ExactSolutionSpec, ProblemSpec, SolutionField, SolverConfig};
pub use sweep::{RunSpec, SweepConfig, SweepRecord};
