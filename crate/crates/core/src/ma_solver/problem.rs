use serde::Serialize;

use super::family::ExactSolutionSpec;
use super::grid::DiscGrid;
use crate::error::{Error, Result};

/// Relative slack when checking sampled `f` against the declared `[m, M]`.
const BOUND_SLACK: f64 = 1e-12;

/// Discrete Dirichlet problem `det D²u = f` in `B_R`, `u = g` on `∂B_R`.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub grid: DiscGrid,
    pub family: Option<ExactSolutionSpec>,
    /// `f` at each unknown.
    pub f: Vec<f64>,
    pub grad_f: Vec<[f64; 2]>,
    /// `(f11, f12, f22)` at each unknown.
    pub hess_f: Vec<[f64; 3]>,
    /// `g` at each of [`DiscGrid::boundary_points`].
    pub g: Vec<f64>,
    pub bounds: ClassBounds,
    /// `sup |∇f|` over the closed disc (sampled).
    pub sup_grad_f: f64,
    pub sup_hess_f: f64,
}

/// Structural constants `0 < m ≤ f ≤ M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct ClassBounds {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
}

impl ClassBounds {
    pub fn new(m: f64, big_m: f64) -> Result<Self> {
        if !(m > 0.0 && m <= big_m && big_m.is_finite()) {
            return Err(Error::InvalidProblem(format!("need 0 < m <= M, got m = {m}, M = {big_m}")));
        }
        Ok(Self { m, big_m })
    }

    pub fn hull(&self, other: &Self) -> Self {
        Self { m: self.m.min(other.m), big_m: self.big_m.max(other.big_m) }
    }

    pub fn contains(&self, other: &Self) -> bool {
        self.m <= other.m && other.big_m <= self.big_m
    }
}

impl ProblemSpec {
    /// Sample `f` and `g` from a manufactured solution on the grid.
    pub fn manufacture(family: &ExactSolutionSpec, grid: DiscGrid) -> Result<Self> {
        family.check_convex(grid.radius())?;
        let (m, big_m) = family.rhs_bounds(grid.radius());
        let bounds = ClassBounds::new(m, big_m)?;
        let nodes = grid.nodes();
        let f = nodes.iter().map(|n| family.rhs(n.x)).collect();
        let grad_f: Vec<[f64; 2]> = nodes.iter().map(|n| family.rhs_gradient(n.x)).collect();
        let hess_f: Vec<[f64; 3]> = nodes.iter().map(|n| family.rhs_hessian(n.x)).collect();
        let g = grid.boundary_points().iter().map(|&p| family.value(p)).collect();

        // Suprema over the closed disc: nodes plus boundary points.
        let mut sup_grad_f = 0.0f64;
        let mut sup_hess_f = 0.0f64;
        for x in nodes.iter().map(|n| n.x).chain(grid.boundary_points().iter().copied()) {
            let gf = family.rhs_gradient(x);
            sup_grad_f = sup_grad_f.max(gf[0].hypot(gf[1]));
            sup_hess_f = sup_hess_f.max(spectral_norm(family.rhs_hessian(x)));
        }
        let spec = Self {
            grid,
            family: Some(family.clone()),
            f,
            grad_f,
            hess_f,
            g,
            bounds,
            sup_grad_f,
            sup_hess_f,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Widen the structural constants, e.g. to those of a whole class.
    pub fn with_bounds(mut self, bounds: ClassBounds) -> Result<Self> {
        if !bounds.contains(&self.bounds) {
            return Err(Error::InvalidProblem(format!(
                "class bounds [{}, {}] do not enclose [{}, {}]",
                bounds.m, bounds.big_m, self.bounds.m, self.bounds.big_m
            )));
        }
        self.bounds = bounds;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.len();
        if self.f.len() != n || self.grad_f.len() != n || self.hess_f.len() != n {
            return Err(Error::InvalidProblem("nodal data length mismatch".into()));
        }
        if self.g.len() != self.grid.boundary_points().len() {
            return Err(Error::InvalidProblem("boundary data length mismatch".into()));
        }
        let ClassBounds { m, big_m } = self.bounds;
        let slack = BOUND_SLACK * big_m.abs().max(1.0);
        for (k, &v) in self.f.iter().enumerate() {
            if !v.is_finite() || v <= 0.0 || v < m - slack || v > big_m + slack {
                return Err(Error::InvalidProblem(format!(
                    "f = {v} at node {k} outside [m, M] = [{m}, {big_m}]"
                )));
            }
        }
        if self.g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("non-finite boundary data".into()));
        }
        Ok(())
    }

    pub fn m(&self) -> f64 {
        self.bounds.m
    }

    pub fn big_m(&self) -> f64 {
        self.bounds.big_m
    }

    /// Exact nodal values, if manufactured.
    pub fn exact_values(&self) -> Option<Vec<f64>> {
        let fam = self.family.as_ref()?;
        Some(self.grid.nodes().iter().map(|n| fam.value(n.x)).collect())
    }
}

/// Largest `|eigenvalue|` of a symmetric 2×2 given as `(a, b, c)`.
pub(crate) fn spectral_norm(h: [f64; 3]) -> f64 {
    let mean = 0.5 * (h[0] + h[2]);
    let rad = (0.5 * (h[0] - h[2])).hypot(h[1]);
    mean.abs() + rad
}
