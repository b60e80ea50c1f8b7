use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::newton::IterationRecord;
use super::operator::{all_gradients, all_hessians, min_eigenvalue, residual};
use super::problem::{spectral_norm, ProblemSpec};
use crate::error::{Error, Result};

/// Converged nodal solution with its discrete derivatives.
#[derive(Debug, Clone)]
pub struct SolutionField {
    pub problem: ProblemSpec,
    pub u: Vec<f64>,
    pub du: Vec<[f64; 2]>,
    /// `(u11, u12, u22)` per node.
    pub hess: Vec<[f64; 3]>,
    /// Max `|det D²_h u - f|` over interior nodes.
    pub residual_norm: f64,
    /// Min `λ_min(D²_h u)` over interior nodes.
    pub convexity_margin: f64,
    pub iterations: usize,
    pub history: Vec<IterationRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveSummary {
    pub residual_norm: f64,
    pub convexity_margin: f64,
    pub error_vs_exact: Option<f64>,
    pub iterations: usize,
}

impl SolutionField {
    pub fn from_nodal(problem: ProblemSpec, u: Vec<f64>, history: Vec<IterationRecord>) -> Result<Self> {
        let grid = &problem.grid;
        let hess = all_hessians(grid, &u, &problem.g);
        let du = all_gradients(grid, &u, &problem.g);
        let res = residual(&problem, &u);
        let (residual_norm, convexity_margin) = super::operator::interior_summary(grid, &hess, &res);
        let iterations = history.last().map_or(0, |r| r.iteration);
        Ok(Self { problem, u, du, hess, residual_norm, convexity_margin, iterations, history })
    }

    /// Field built from the manufactured solution's nodal values.
    pub fn from_exact(problem: ProblemSpec) -> Option<Result<Self>> {
        let u = problem.exact_values()?;
        Some(Self::from_nodal(problem, u, Vec::new()))
    }

    pub fn grid(&self) -> &super::DiscGrid {
        &self.problem.grid
    }

    /// Max nodal `|u - u*|`.
    pub fn error_vs_exact(&self) -> Option<f64> {
        let exact = self.problem.exact_values()?;
        Some(self.u.iter().zip(exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Max `|D_h u|` over nodes with `|x| ≤ radius`.
    pub fn sup_grad_within(&self, radius: f64) -> f64 {
        self.within(radius).map(|n| self.du[n][0].hypot(self.du[n][1])).fold(0.0, f64::max)
    }

    pub fn sup_abs_within(&self, radius: f64) -> f64 {
        self.within(radius).map(|n| self.u[n].abs()).fold(0.0, f64::max)
    }

    pub fn sup_grad(&self) -> f64 {
        self.sup_grad_within(f64::INFINITY)
    }

    fn within(&self, radius: f64) -> impl Iterator<Item = usize> + '_ {
        let r2 = radius * radius;
        self.grid()
            .nodes()
            .iter()
            .enumerate()
            .filter(move |(_, n)| n.x[0] * n.x[0] + n.x[1] * n.x[1] <= r2)
            .map(|(k, _)| k)
    }

    pub fn hessian_at_origin(&self) -> [f64; 3] {
        self.hess[self.grid().origin()]
    }

    /// Spectral norm of `D²_h u(0)`.
    pub fn hessian_norm_at_origin(&self) -> f64 {
        spectral_norm(self.hessian_at_origin())
    }

    pub fn min_eigenvalue_at(&self, n: usize) -> f64 {
        min_eigenvalue(self.hess[n])
    }

    pub fn summary(&self) -> SolveSummary {
        SolveSummary {
            residual_norm: self.residual_norm,
            convexity_margin: self.convexity_margin,
            error_vs_exact: self.error_vs_exact(),
            iterations: self.iterations,
        }
    }

    /// Columns `x1, x2, u, u1, u2, u11, u12, u22`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["x1", "x2", "u", "u1", "u2", "u11", "u12", "u22"])?;
        for (n, node) in self.grid().nodes().iter().enumerate() {
            let vals = [
                node.x[0],
                node.x[1],
                self.u[n],
                self.du[n][0],
                self.du[n][1],
                self.hess[n][0],
                self.hess[n][1],
                self.hess[n][2],
            ];
            w.write_record(vals.iter().map(|v| format!("{v:e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        crate::sweep::write_atomic(path, |f| f.write_all(&bytes))
    }

    /// Rebuild a field from [`Self::write_csv`] output. Rows must list the
    /// grid nodes of `problem` in order; derivatives are recomputed from `u`.
    pub fn read_csv(problem: ProblemSpec, path: &Path, history: Vec<IterationRecord>) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let nodes = problem.grid.nodes();
        let tol = 1e-9 * problem.grid.radius();
        let mut u = Vec::with_capacity(nodes.len());
        for (k, row) in rdr.records().enumerate() {
            let row = row?;
            let num = |i: usize| -> Result<f64> {
                row.get(i)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::InvalidInput(format!("row {k}: bad value in column {i}")))
            };
            let Some(node) = nodes.get(k) else {
                return Err(Error::InvalidInput(format!("more rows than the {} grid nodes", nodes.len())));
            };
            let (x1, x2) = (num(0)?, num(1)?);
            if (x1 - node.x[0]).abs() > tol || (x2 - node.x[1]).abs() > tol {
                return Err(Error::InvalidInput(format!("row {k} is at ({x1}, {x2}), expected {:?}", node.x)));
            }
            u.push(num(2)?);
        }
        if u.len() != nodes.len() {
            return Err(Error::InvalidInput(format!("{} rows for {} grid nodes", u.len(), nodes.len())));
        }
        Self::from_nodal(problem, u, history)
    }
}
