use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::band::BandMatrix;
use super::field::SolutionField;
use super::grid::ArmEnd;
use super::operator::{all_hessians, global_margin, interior_summary, jacobian, residual};
use super::problem::ProblemSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Interior residual target; `None` means `1e-10 · max(1, M)`.
    pub tol: Option<f64>,
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Smallest eigenvalue of the initial quadratic, as a multiple of `√m`.
    pub eigen_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: None, max_iterations: 50, max_halvings: 30, eigen_floor: 1e-2 }
    }
}

impl SolverConfig {
    pub fn tolerance(&self, big_m: f64) -> f64 {
        self.tol.unwrap_or(1e-10 * big_m.max(1.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Max `|F|` over interior nodes.
    pub residual_norm: f64,
    /// Euclidean norm of `F` over all unknowns.
    pub residual_l2: f64,
    pub convexity_margin: f64,
    pub step_length: f64,
    pub update_norm: f64,
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Convex quadratic `q` fitted to the boundary data in least squares, with
/// `det D²q` equal to the mean of `f`, plus the discrete harmonic lift of the
/// remaining boundary mismatch `g - q`. Returns nodal values.
pub fn initial_iterate(spec: &ProblemSpec, floor: f64) -> Result<Vec<f64>> {
    let grid = &spec.grid;
    let pts = grid.boundary_points();
    let r = grid.radius();
    // On the circle |x|² = R², so the trace part is absorbed into the constant.
    let basis = |p: [f64; 2]| [1.0, p[0] / r, p[1] / r, 0.5 * (p[0] * p[0] - p[1] * p[1]), p[0] * p[1]];
    let coef = if pts.len() >= 5 {
        let a = DMatrix::from_fn(pts.len(), 5, |i, j| basis(pts[i])[j]);
        let b = DVector::from_column_slice(&spec.g);
        a.svd(true, true)
            .solve(&b, 1e-12)
            .map_err(|e| Error::InvalidProblem(format!("boundary fit failed: {e}")))?
    } else {
        let mean = spec.g.iter().sum::<f64>() / spec.g.len().max(1) as f64;
        DVector::from_column_slice(&[mean, 0.0, 0.0, 0.0, 0.0])
    };
    let (c0, b1, b2, d1, d2) = (coef[0], coef[1] / r, coef[2] / r, coef[3], coef[4]);
    let fbar = spec.f.iter().sum::<f64>() / spec.f.len() as f64;
    let aniso = d1.hypot(d2);
    let lower = floor * spec.m().sqrt();
    let alpha = (fbar + aniso * aniso).sqrt().max(aniso + lower);
    let c = c0 - 0.5 * alpha * r * r;
    let q = |[x, y]: [f64; 2]| {
        c + b1 * x + b2 * y + 0.5 * alpha * (x * x + y * y) + 0.5 * d1 * (x * x - y * y) + d2 * x * y
    };
    let mismatch: Vec<f64> = pts.iter().zip(&spec.g).map(|(&p, g)| g - q(p)).collect();
    let mut u: Vec<f64> = grid.nodes().iter().map(|n| q(n.x)).collect();
    if mismatch.iter().any(|v| *v != 0.0) {
        let lift = harmonic_lift(spec, &mismatch)?;
        u.iter_mut().zip(lift).for_each(|(a, b)| *a += b);
    }
    Ok(u)
}

/// Solve `Δ_h w = 0` in the disc with `w = data` at the boundary points,
/// using the axis lines of the Shortley–Weller stencil.
fn harmonic_lift(spec: &ProblemSpec, data: &[f64]) -> Result<Vec<f64>> {
    let grid = &spec.grid;
    let bw = grid.bandwidth();
    let mut a = BandMatrix::zeros(grid.len(), bw, bw);
    let mut rhs = vec![0.0; grid.len()];
    for (n, node) in grid.nodes().iter().enumerate() {
        for line in &node.lines[..2] {
            let (wm, wc, wp) = line.second_weights();
            a.add(n, n, wc);
            for (arm, w) in [(line.minus, wm), (line.plus, wp)] {
                match arm.end {
                    ArmEnd::Node(m) => a.add(n, m, w),
                    ArmEnd::Boundary(b) => rhs[n] -= w * data[b],
                }
            }
        }
    }
    a.solve(&rhs)
}

/// Damped Newton on `det D²_h u = f`, keeping the discrete Hessian positive
/// definite at every unknown. Without that, nodes next to the boundary can
/// settle on the concave branch of `det = f`.
pub fn solve(spec: &ProblemSpec, cfg: &SolverConfig) -> Result<SolutionField> {
    spec.validate()?;
    let u0 = initial_iterate(spec, cfg.eigen_floor)?;
    solve_from(spec, cfg, u0)
}

/// Newton from a caller-supplied starting iterate.
pub fn solve_from(spec: &ProblemSpec, cfg: &SolverConfig, u0: Vec<f64>) -> Result<SolutionField> {
    if u0.len() != spec.grid.len() {
        return Err(Error::InvalidProblem("initial iterate length mismatch".into()));
    }
    let tol = cfg.tolerance(spec.big_m());
    let grid = &spec.grid;
    let mut u = u0;
    let mut hess = all_hessians(grid, &u, &spec.g);
    let mut res = residual(spec, &u);
    let (mut rnorm, mut margin) = interior_summary(grid, &hess, &res);
    let mut rl2 = l2(&res);
    let mut history = vec![IterationRecord {
        iteration: 0,
        residual_norm: rnorm,
        residual_l2: rl2,
        convexity_margin: margin,
        step_length: 0.0,
        update_norm: 0.0,
    }];
    let start_margin = global_margin(&hess);
    if !(start_margin > 0.0) {
        return Err(Error::ConvexityLost { margin: start_margin, history });
    }

    for it in 1..=cfg.max_iterations {
        let neg: Vec<f64> = res.iter().map(|r| -r).collect();
        let delta = jacobian(spec, &hess).solve(&neg)?;
        let scale = u.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let update_norm = delta.iter().fold(0.0f64, |m, v| m.max(v.abs()));

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + alpha * d).collect();
            let th = all_hessians(grid, &trial, &spec.g);
            let tr = residual(spec, &trial);
            let (tn, tm) = interior_summary(grid, &th, &tr);
            let tl2 = l2(&tr);
            if global_margin(&th) > 0.0 && (tl2 < rl2 || tn <= tol) {
                accepted = Some((trial, th, tr, tn, tm, tl2));
                break;
            }
            alpha *= 0.5;
        }
        let Some((nu, nh, nr, nn, nm, nl2)) = accepted else {
            // Every trial step broke convexity or failed to reduce the residual.
            let trial: Vec<f64> =
                u.iter().zip(&delta).map(|(a, d)| a + alpha * d).collect();
            let tm = global_margin(&all_hessians(grid, &trial, &spec.g));
            return if tm > 0.0 {
                Err(Error::NonConvergence { history })
            } else {
                Err(Error::ConvexityLost { margin: tm, history })
            };
        };
        u = nu;
        hess = nh;
        res = nr;
        rnorm = nn;
        margin = nm;
        rl2 = nl2;
        history.push(IterationRecord {
            iteration: it,
            residual_norm: rnorm,
            residual_l2: rl2,
            convexity_margin: margin,
            step_length: alpha,
            update_norm: alpha * update_norm,
        });
        if rnorm <= tol && alpha * update_norm <= 1e-9 * scale {
            return SolutionField::from_nodal(spec.clone(), u, history);
        }
    }
    Err(Error::NonConvergence { history })
}
