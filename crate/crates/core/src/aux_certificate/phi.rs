use rayon::prelude::*;
use serde::Serialize;

use super::eta::{eta_factors, sigma_membership};
use super::tau::TauField;
use super::AuxConfig;
use crate::error::{Error, Result};
use crate::ma_solver::SolutionField;

/// `ln φ` at each node of `Σ`, `None` outside. Kept in log form since
/// `g(½|Du|²)` can be astronomically large.
#[derive(Debug, Clone, Serialize)]
pub struct PhiField {
    pub log_phi: Vec<Option<f64>>,
    pub eta: Vec<Option<f64>>,
    pub u_tau_tau: Vec<f64>,
}

impl PhiField {
    pub fn in_sigma(&self, n: usize) -> bool {
        self.log_phi[n].is_some()
    }

    pub fn sigma_count(&self) -> usize {
        self.log_phi.iter().filter(|v| v.is_some()).count()
    }
}

pub fn phi_field(sol: &SolutionField, tau: &TauField, cfg: &AuxConfig) -> PhiField {
    let nodes = sol.problem.grid.nodes();
    let per: Vec<(Option<f64>, Option<f64>, f64)> = (0..nodes.len())
        .into_par_iter()
        .map(|n| {
            let x = nodes[n].x;
            let utt = tau.u_tau_tau(&sol.hess, n);
            if !sigma_membership(x, tau.tau[n], cfg) {
                return (None, None, utt);
            }
            let (a, b) = eta_factors(x, tau.tau[n], cfg);
            let du = sol.du[n];
            let half_sq = 0.5 * (du[0] * du[0] + du[1] * du[1]);
            let log_phi = cfg.beta * (a.ln() + b.ln()) + cfg.log_g(half_sq) + utt.ln();
            (Some(log_phi), Some(a * b), utt)
        })
        .collect();
    let mut out = PhiField {
        log_phi: Vec::with_capacity(per.len()),
        eta: Vec::with_capacity(per.len()),
        u_tau_tau: Vec::with_capacity(per.len()),
    };
    for (p, e, u) in per {
        out.log_phi.push(p);
        out.eta.push(e);
        out.u_tau_tau.push(u);
    }
    out
}

/// Discrete maximum of `φ` over `Σ`.
#[derive(Debug, Clone, Serialize)]
pub struct InteriorMax {
    pub node: usize,
    pub x0: [f64; 2],
    pub log_phi_max: f64,
    /// Every lattice point within `2h` of `x0` is a node of `Σ`.
    pub interior: bool,
    pub degenerate: bool,
}

/// Argmax of `ln φ`; ties go to the lexicographically smallest `(x₁, x₂)`.
/// Fails with `DegenerateField` when every `Σ` node is degenerate; the
/// maximum is still attached to the error path by [`super::certify`].
pub fn locate_interior_max(sol: &SolutionField, tau: &TauField, phi: &PhiField) -> Result<InteriorMax> {
    let best = argmax(sol, phi).ok_or(Error::EmptySigma)?;
    let any_regular = (0..phi.log_phi.len()).any(|n| phi.in_sigma(n) && !tau.degenerate[n]);
    if !any_regular {
        return Err(Error::DegenerateField);
    }
    Ok(describe(sol, tau, phi, best))
}

pub(crate) fn argmax(sol: &SolutionField, phi: &PhiField) -> Option<usize> {
    let nodes = sol.problem.grid.nodes();
    let mut best: Option<usize> = None;
    for (n, v) in phi.log_phi.iter().enumerate() {
        let Some(v) = *v else { continue };
        best = match best {
            None => Some(n),
            Some(b) => {
                let bv = phi.log_phi[b].expect("in sigma");
                let (xn, xb) = (nodes[n].x, nodes[b].x);
                if v > bv || (v == bv && (xn[0], xn[1]) < (xb[0], xb[1])) {
                    Some(n)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

pub(crate) fn describe(sol: &SolutionField, tau: &TauField, phi: &PhiField, n: usize) -> InteriorMax {
    let node = sol.problem.grid.node(n);
    InteriorMax {
        node: n,
        x0: node.x,
        log_phi_max: phi.log_phi[n].expect("in sigma"),
        interior: sigma_neighbourhood(sol, phi, n, 2),
        degenerate: tau.degenerate[n],
    }
}

/// All lattice points within `reach·h` of node `n` are `Σ` nodes.
pub(crate) fn sigma_neighbourhood(sol: &SolutionField, phi: &PhiField, n: usize, reach: i64) -> bool {
    let grid = &sol.problem.grid;
    let node = grid.node(n);
    for a in -reach..=reach {
        for b in -reach..=reach {
            if a * a + b * b > reach * reach {
                continue;
            }
            match grid.index_of(node.i + a, node.j + b) {
                Some(m) if phi.in_sigma(m) => {}
                _ => return false,
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aux_certificate::build_tau_field;
    use crate::ma_solver::{solve_manufactured, ExactSolutionSpec, SolverConfig};

    #[test]
    fn phi_at_origin_of_quadratic() {
        let sol = solve_manufactured(
            &ExactSolutionSpec::Quadratic { a: 2.0, b: 0.0, c: 1.0 },
            1.0,
            1.0 / 16.0,
            &SolverConfig::default(),
        )
        .unwrap();
        let cfg = AuxConfig::for_solution(&sol);
        let tau = build_tau_field(&sol, &cfg);
        let phi = phi_field(&sol, &tau, &cfg);
        let o = sol.problem.grid.origin();
        // φ(0) = r^{4β} · g(0) · 2
        let expected = 16.0 * cfg.r.ln() + 2.0f64.ln();
        assert!((phi.log_phi[o].unwrap() - expected).abs() < 1e-9);
        assert!(phi.log_phi.iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn constant_field_tie_break() {
        let sol = solve_manufactured(
            &ExactSolutionSpec::Quadratic { a: 2.0, b: 0.0, c: 1.0 },
            1.0,
            0.25,
            &SolverConfig::default(),
        )
        .unwrap();
        let cfg = AuxConfig::for_solution(&sol);
        let tau = build_tau_field(&sol, &cfg);
        let mut phi = phi_field(&sol, &tau, &cfg);
        for v in phi.log_phi.iter_mut().flatten() {
            *v = 1.0;
        }
        let best = locate_interior_max(&sol, &tau, &phi).unwrap();
        let smallest = (0..sol.problem.grid.len())
            .filter(|&n| phi.in_sigma(n))
            .map(|n| sol.problem.grid.node(n).x)
            .min_by(|a, b| (a[0], a[1]).partial_cmp(&(b[0], b[1])).unwrap())
            .unwrap();
        assert_eq!(best.x0, smallest);
    }
}
