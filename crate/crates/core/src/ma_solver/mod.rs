//! Finite-difference Newton solver for `det D²u = f` on a disc with
//! Dirichlet data, plus diagnostics on the discrete solution.

mod band;
mod family;
mod field;
mod grid;
mod identities;
mod jet;
mod newton;
mod operator;
mod problem;

pub use band::BandMatrix;
pub use family::ExactSolutionSpec;
pub use field::{SolutionField, SolveSummary};
pub use grid::{Arm, ArmEnd, DiscGrid, GridNode, LineStencil, NodeClass, DIRECTIONS, INSIDE_TOL};
pub use identities::{identity_residuals, residuals_at, IdentityResiduals};
pub use jet::{jet_at, Jet};
pub use newton::{initial_iterate, solve, solve_from, IterationRecord, SolverConfig};
pub use operator::{
    all_gradients, all_hessians, class_counts, discrete_gradient, discrete_hessian, jacobian,
    min_eigenvalue, residual,
};
pub use problem::{ClassBounds, ProblemSpec};

use crate::error::Result;

/// Build the problem for `family` on `B_radius` with spacing `h` and solve it.
pub fn solve_manufactured(
    family: &ExactSolutionSpec,
    radius: f64,
    h: f64,
    cfg: &SolverConfig,
) -> Result<SolutionField> {
    let spec = ProblemSpec::manufacture(family, DiscGrid::new(radius, h)?)?;
    solve(&spec, cfg)
}
