//! Identities at the maximum of `φ`, `η`-derivative checks and the per-run
//! invariants of `η`, `Σ` and `φ`.

use serde::Serialize;

use super::eta::{eta, eta_factors, sigma_membership};
use super::phi::{sigma_neighbourhood, PhiField};
use super::tau::TauField;
use super::AuxConfig;
use crate::eigenperturb::eigen2x2;
use crate::error::{Error, Result};
use crate::ma_solver::{jet_at, Jet, SolutionField};

/// Minimum relative gap `(λ₁ - λ₂)/λ₁` for a node to enter the
/// `η`-derivative sample; below it `1/(λ₁ - λ₂)` amplifies difference noise.
pub const ETA_CHECK_MIN_REL_GAP: f64 = 0.1;

/// Minimum sample size for [`eta_derivative_check`].
pub const ETA_CHECK_MIN_SAMPLES: usize = 4;

/// Slack on `η ≤ r⁴` for rounding in `⟨x,τ⟩² ≤ |x|²`.
pub const ETA_BOUND_REL_SLACK: f64 = 1e-14;

/// Jet of `u` at a node in the principal frame of its Hessian,
/// `x = R x'` with `R = [τ, τ⊥]`.
#[derive(Debug, Clone, Copy)]
pub struct LocalFrame {
    pub tau: [f64; 2],
    /// Node position in the rotated frame.
    pub x: [f64; 2],
    pub lambda1: f64,
    pub lambda2: f64,
    pub jet: Jet,
}

impl LocalFrame {
    /// `⟨x, ∂_i τ⟩ = x'₂ u'_{12i} / (λ₁ - λ₂)`.
    pub fn x_dot_dtau(&self) -> [f64; 2] {
        let gap = self.lambda1 - self.lambda2;
        let u = &self.jet.d3;
        [self.x[1] * u[0][1][0] / gap, self.x[1] * u[0][1][1] / gap]
    }

    /// `(η, ∂'₁η, ∂'₂η)` in adapted coordinates, where `⟨x,τ⟩ = x'₁`.
    pub fn eta_with_gradient(&self, cfg: &AuxConfig) -> (f64, [f64; 2]) {
        let r2 = cfg.r * cfg.r;
        let [x1, x2] = self.x;
        let q = self.x_dot_dtau();
        let e = (r2 - x2 * x2) * (r2 - x1 * x1);
        let d1 = -2.0 * x1 * (r2 - x2 * x2) + 2.0 * x1 * q[0] * (x2 * x2 - x1 * x1);
        let d2 = -2.0 * x2 * (r2 - x1 * x1) + 2.0 * x1 * q[1] * (x2 * x2 - x1 * x1);
        (e, [d1, d2])
    }
}

/// Principal frame at node `n`, with `τ` signed to agree with `align`.
pub fn frame_at(sol: &SolutionField, n: usize, align: [f64; 2]) -> Option<LocalFrame> {
    let jet = jet_at(&sol.problem.grid, &sol.u, n)?;
    let e = eigen2x2(jet.d2[0][0], jet.d2[0][1], jet.d2[1][1]);
    let mut tau = e.tau;
    if tau[0] * align[0] + tau[1] * align[1] < 0.0 {
        tau = [-tau[0], -tau[1]];
    }
    let rotated = jet.rotated(tau);
    let x = sol.problem.grid.node(n).x;
    let xr = [tau[0] * x[0] + tau[1] * x[1], -tau[1] * x[0] + tau[0] * x[1]];
    Some(LocalFrame {
        tau,
        x: xr,
        lambda1: rotated.d2[0][0],
        lambda2: rotated.d2[1][1],
        jet: rotated,
    })
}

/// The two components of the first-order condition for `ln φ` at node `n`,
///
/// `r · [u'_{11i}/u'_{11} + β η_i/η + (g'/g) Σ_k u'_k u'_{ki}]`,
///
/// which vanish at a true interior critical point.
pub fn critical_point_residual(
    sol: &SolutionField,
    tau: &TauField,
    phi: &PhiField,
    cfg: &AuxConfig,
    n: usize,
) -> Result<[f64; 2]> {
    if !phi.in_sigma(n) {
        return Err(Error::NotCheckable("node is outside Σ".into()));
    }
    if tau.degenerate[n] {
        return Err(Error::NotCheckable("Hessian eigenvalues coincide at the node".into()));
    }
    if !sigma_neighbourhood(sol, phi, n, 1) {
        return Err(Error::NotCheckable("node is within one grid step of ∂Σ".into()));
    }
    let f = frame_at(sol, n, tau.tau[n])
        .ok_or_else(|| Error::NotCheckable("third differences unavailable this close to ∂B_R".into()))?;
    if cfg.is_degenerate(f.lambda1, f.lambda2) {
        return Err(Error::NotCheckable("difference Hessian is degenerate at the node".into()));
    }
    let (e, de) = f.eta_with_gradient(cfg);
    let j = &f.jet;
    let res = |i: usize| {
        let grad_term: f64 = (0..2).map(|k| j.d1[k] * j.d2[k][i]).sum();
        cfg.r * (j.d3[0][0][i] / f.lambda1 + cfg.beta * de[i] / e + cfg.g_ratio() * grad_term)
    };
    Ok([res(0), res(1)])
}

/// Critical-point residual at a sub-grid estimate of the maximizer.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RefinedCriticalPoint {
    pub x: [f64; 2],
    /// Offset from the grid argmax in units of `h`.
    pub offset: [f64; 2],
    /// Residual components in the principal frame at the grid argmax.
    pub residual: [f64; 2],
}

/// Newton step on the quadratic fit of `ln φ` over the 3×3 block at `n`,
/// taken only along directions of clearly negative curvature and kept inside
/// the block, then the residual field interpolated to that point by
/// tensor-product quadratics.
///
/// On a ring of maxima the grid argmax sits an `O(h)` distance from the
/// critical set with an erratic constant; the refined point removes that
/// location error.
pub fn refine_critical_point(
    sol: &SolutionField,
    tau: &TauField,
    phi: &PhiField,
    cfg: &AuxConfig,
    n: usize,
) -> Result<RefinedCriticalPoint> {
    let grid = &sol.problem.grid;
    let h = grid.h();
    let centre = grid.node(n);
    let base = frame_at(sol, n, tau.tau[n])
        .ok_or_else(|| Error::NotCheckable("third differences unavailable at the argmax".into()))?;
    let mut logs = [[0.0; 3]; 3];
    let mut res = [[[0.0; 2]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            let m = grid
                .index_of(centre.i + a as i64 - 1, centre.j + b as i64 - 1)
                .ok_or_else(|| Error::NotCheckable("argmax block leaves the grid".into()))?;
            logs[a][b] = phi.log_phi[m].ok_or_else(|| Error::NotCheckable("argmax block leaves Σ".into()))?;
            let r = critical_point_residual(sol, tau, phi, cfg, m)?;
            let f = frame_at(sol, m, base.tau).expect("checked by critical_point_residual");
            let perp = [-f.tau[1], f.tau[0]];
            res[a][b] = [r[0] * f.tau[0] + r[1] * perp[0], r[0] * f.tau[1] + r[1] * perp[1]];
        }
    }
    let g = [(logs[2][1] - logs[0][1]) / (2.0 * h), (logs[1][2] - logs[1][0]) / (2.0 * h)];
    let hxx = (logs[2][1] - 2.0 * logs[1][1] + logs[0][1]) / (h * h);
    let hyy = (logs[1][2] - 2.0 * logs[1][1] + logs[1][0]) / (h * h);
    let hxy = (logs[2][2] - logs[2][0] - logs[0][2] + logs[0][0]) / (4.0 * h * h);
    let e = eigen2x2(hxx, hxy, hyy);
    let scale = e.lambda1.abs().max(e.lambda2.abs());
    let mut step = [0.0; 2];
    for (mu, v) in [(e.lambda1, e.tau), (e.lambda2, e.tau_perp())] {
        if mu < -1e-3 * scale {
            let c = -(v[0] * g[0] + v[1] * g[1]) / mu;
            step[0] += c * v[0];
            step[1] += c * v[1];
        }
    }
    let len = step[0].abs().max(step[1].abs());
    if len > h {
        step = [step[0] * h / len, step[1] * h / len];
    }
    let t = [step[0] / h, step[1] / h];
    let weights = |t: f64| [0.5 * t * (t - 1.0), 1.0 - t * t, 0.5 * t * (t + 1.0)];
    let (wx, wy) = (weights(t[0]), weights(t[1]));
    let mut v = [0.0; 2];
    for a in 0..3 {
        for b in 0..3 {
            v[0] += wx[a] * wy[b] * res[a][b][0];
            v[1] += wx[a] * wy[b] * res[a][b][1];
        }
    }
    let perp = [-base.tau[1], base.tau[0]];
    Ok(RefinedCriticalPoint {
        x: [centre.x[0] + step[0], centre.x[1] + step[1]],
        offset: t,
        residual: [v[0] * base.tau[0] + v[1] * base.tau[1], v[0] * perp[0] + v[1] * perp[1]],
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EtaDerivativeResiduals {
    /// Max `|∂'_i⟨x,τ⟩ - (δ_{i1} + x'₂ u'_{12i}/(λ₁-λ₂))|`.
    pub tau_id: f64,
    /// Max `|∂'_i η (differenced) - η_i (analytic)| / r³`.
    pub eta_d: f64,
    pub samples: usize,
}

/// Compare centered differences of `⟨x,τ(x)⟩` and `η` with their analytic
/// derivatives at the given nodes. Nodes that are degenerate, have a small
/// relative gap, lack a jet, or have a degenerate axis neighbour are skipped.
pub fn eta_derivative_check(
    sol: &SolutionField,
    tau: &TauField,
    cfg: &AuxConfig,
    samples: &[usize],
) -> Result<EtaDerivativeResiduals> {
    let grid = &sol.problem.grid;
    let h = grid.h();
    let mut out = EtaDerivativeResiduals { tau_id: 0.0, eta_d: 0.0, samples: 0 };
    let good = |m: usize| {
        !tau.degenerate[m] && tau.gap(m) >= ETA_CHECK_MIN_REL_GAP * tau.lambda1[m].abs()
    };
    'nodes: for &n in samples {
        if !good(n) {
            continue;
        }
        let node = grid.node(n);
        let mut nb = [0usize; 4];
        for (k, (di, dj)) in [(1, 0), (-1, 0), (0, 1), (0, -1)].into_iter().enumerate() {
            match grid.index_of(node.i + di, node.j + dj) {
                Some(m) if good(m) => nb[k] = m,
                _ => continue 'nodes,
            }
        }
        let Some(f) = frame_at(sol, n, tau.tau[n]) else { continue };
        let t0 = tau.tau[n];
        let s_at = |m: usize| {
            let mut t = tau.tau[m];
            if t[0] * t0[0] + t[1] * t0[1] < 0.0 {
                t = [-t[0], -t[1]];
            }
            let x = grid.node(m).x;
            x[0] * t[0] + x[1] * t[1]
        };
        let eta_at = |m: usize| eta(grid.node(m).x, tau.tau[m], cfg);
        let grad = |v: &dyn Fn(usize) -> f64| {
            [(v(nb[0]) - v(nb[1])) / (2.0 * h), (v(nb[2]) - v(nb[3])) / (2.0 * h)]
        };
        let to_frame = |g: [f64; 2]| {
            [f.tau[0] * g[0] + f.tau[1] * g[1], -f.tau[1] * g[0] + f.tau[0] * g[1]]
        };
        let ds = to_frame(grad(&s_at));
        let de = to_frame(grad(&eta_at));
        let q = f.x_dot_dtau();
        let (_, de_exact) = f.eta_with_gradient(cfg);
        let r3 = cfg.r.powi(3);
        for i in 0..2 {
            let expected = if i == 0 { 1.0 + q[0] } else { q[1] };
            out.tau_id = out.tau_id.max((ds[i] - expected).abs());
            out.eta_d = out.eta_d.max((de[i] - de_exact[i]).abs() / r3);
        }
        out.samples += 1;
    }
    if out.samples < ETA_CHECK_MIN_SAMPLES {
        return Err(Error::InsufficientSample { found: out.samples, needed: ETA_CHECK_MIN_SAMPLES });
    }
    Ok(out)
}

/// Max over non-degenerate nodes of `|η_ρ(ρx) - η(x)| / r⁴`, where `η_ρ` is
/// built from the Hessian field rotated by `quarter_turns · 90°`.
pub fn eta_rotation_defect(sol: &SolutionField, tau: &TauField, cfg: &AuxConfig, quarter_turns: u32) -> f64 {
    let grid = &sol.problem.grid;
    let turns = quarter_turns % 4;
    let rot_ij = |(i, j): (i64, i64)| (0..turns).fold((i, j), |(a, b), _| (-b, a));
    let rot_h = |h: [f64; 3]| (0..turns).fold(h, |[a, b, c], _| [c, -b, a]);
    let mut hess = vec![[0.0; 3]; grid.len()];
    let mut image = vec![0usize; grid.len()];
    for (n, node) in grid.nodes().iter().enumerate() {
        let (i, j) = rot_ij((node.i, node.j));
        let m = grid.index_of(i, j).expect("disc lattice is invariant under quarter turns");
        hess[m] = rot_h(sol.hess[n]);
        image[n] = m;
    }
    let rotated = TauField::from_hessians(&hess, cfg);
    let r4 = cfg.r.powi(4);
    let mut worst = 0.0f64;
    for (n, node) in grid.nodes().iter().enumerate() {
        if tau.degenerate[n] {
            continue;
        }
        let m = image[n];
        let a = eta(node.x, tau.tau[n], cfg);
        let b = eta(grid.node(m).x, rotated.tau[m], cfg);
        worst = worst.max((a - b).abs() / r4);
    }
    worst
}

/// Exhaustive per-node checks on one run.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantSuite {
    /// `0 < η ≤ r⁴` at every `Σ` node.
    pub eta_bound: bool,
    /// Every node with `|x| < r` is in `Σ`; none with `|x| ≥ R` is.
    pub enclosure: bool,
    /// `η`, `Σ` membership and `ln φ` are bit-identical under `τ → -τ`.
    pub sign_invariance: bool,
    /// Worst quarter-turn rotation defect of `η`, in units of `r⁴`.
    pub rotation_defect: f64,
    pub rotation_invariance: bool,
    /// `φ > 0` and finite on `Σ`.
    pub phi_positive: bool,
    /// `max φ` over `Σ` nodes within `2h` of `∂Σ`, divided by `max φ`.
    pub boundary_phi_ratio: f64,
}

pub const ROTATION_TOL: f64 = 1e-10;

impl InvariantSuite {
    /// The gating checks; the boundary ratio is reported only.
    pub fn all_pass(&self) -> bool {
        self.eta_bound && self.enclosure && self.sign_invariance && self.rotation_invariance && self.phi_positive
    }
}

pub fn invariant_suite(sol: &SolutionField, tau: &TauField, phi: &PhiField, cfg: &AuxConfig) -> InvariantSuite {
    let grid = &sol.problem.grid;
    let r2 = cfg.r * cfg.r;
    let r4 = r2 * r2;
    let big_r2 = grid.radius() * grid.radius();
    let mut eta_bound = true;
    let mut enclosure = true;
    let mut sign_invariance = true;
    let mut phi_positive = true;
    for (n, node) in grid.nodes().iter().enumerate() {
        let x = node.x;
        let t = tau.tau[n];
        let in_sigma = phi.in_sigma(n);
        let rho2 = x[0] * x[0] + x[1] * x[1];
        if (rho2 < r2 && !in_sigma) || (rho2 >= big_r2 && in_sigma) {
            enclosure = false;
        }
        let neg = [-t[0], -t[1]];
        if eta(x, t, cfg).to_bits() != eta(x, neg, cfg).to_bits()
            || sigma_membership(x, t, cfg) != sigma_membership(x, neg, cfg)
            || eta_factors(x, t, cfg) != eta_factors(x, neg, cfg)
        {
            sign_invariance = false;
        }
        let mut flipped = tau.clone_node(n);
        flipped.tau[0] = neg;
        if flipped.u_tau_tau(&[sol.hess[n]], 0).to_bits() != tau.u_tau_tau(&sol.hess, n).to_bits() {
            sign_invariance = false;
        }
        if in_sigma {
            let e = phi.eta[n].expect("in sigma");
            if !(e > 0.0 && e <= r4 * (1.0 + ETA_BOUND_REL_SLACK)) {
                eta_bound = false;
            }
            let lp = phi.log_phi[n].expect("in sigma");
            if !lp.is_finite() {
                phi_positive = false;
            }
        }
    }
    let rotation_defect = (1..4).map(|k| eta_rotation_defect(sol, tau, cfg, k)).fold(0.0, f64::max);
    let max_log = phi.log_phi.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let band_log = (0..grid.len())
        .filter(|&n| phi.in_sigma(n) && !sigma_neighbourhood(sol, phi, n, 2))
        .filter_map(|n| phi.log_phi[n])
        .fold(f64::NEG_INFINITY, f64::max);
    InvariantSuite {
        eta_bound,
        enclosure,
        sign_invariance,
        rotation_defect,
        rotation_invariance: rotation_defect <= ROTATION_TOL,
        phi_positive,
        boundary_phi_ratio: (band_log - max_log).exp(),
    }
}

impl TauField {
    fn clone_node(&self, n: usize) -> TauField {
        TauField {
            tau: vec![self.tau[n]],
            lambda1: vec![self.lambda1[n]],
            lambda2: vec![self.lambda2[n]],
            degenerate: vec![self.degenerate[n]],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aux_certificate::{build_tau_field, phi_field};
    use crate::ma_solver::{solve_manufactured, ExactSolutionSpec, SolverConfig};

    fn setup(fam: ExactSolutionSpec, h: f64) -> (SolutionField, TauField, PhiField, AuxConfig) {
        let sol = solve_manufactured(&fam, 1.0, h, &SolverConfig::default()).unwrap();
        let cfg = AuxConfig::for_solution(&sol);
        let tau = build_tau_field(&sol, &cfg);
        let phi = phi_field(&sol, &tau, &cfg);
        (sol, tau, phi, cfg)
    }

    #[test]
    fn quadratic_critical_point_at_origin_is_zero() {
        let (sol, tau, phi, cfg) = setup(ExactSolutionSpec::Quadratic { a: 2.0, b: 0.0, c: 1.0 }, 1.0 / 16.0);
        let r = critical_point_residual(&sol, &tau, &phi, &cfg, sol.problem.grid.origin()).unwrap();
        assert!(r[0].abs() < 1e-8 && r[1].abs() < 1e-8, "{r:?}");
        // Away from the origin the condition fails by O(1).
        let off = sol.problem.grid.index_of(4, 2).unwrap();
        let r = critical_point_residual(&sol, &tau, &phi, &cfg, off).unwrap();
        assert!(r[0].abs() + r[1].abs() > 0.1);
    }

    #[test]
    fn degenerate_node_is_not_checkable() {
        let (sol, tau, phi, cfg) = setup(ExactSolutionSpec::Quadratic { a: 1.0, b: 0.0, c: 1.0 }, 1.0 / 16.0);
        assert!(matches!(
            critical_point_residual(&sol, &tau, &phi, &cfg, sol.problem.grid.origin()),
            Err(Error::NotCheckable(_))
        ));
    }

    #[test]
    fn invariants_hold_on_manufactured_runs() {
        for fam in [
            ExactSolutionSpec::Quadratic { a: 2.0, b: 0.3, c: 1.0 },
            ExactSolutionSpec::ExponentialRadial { kappa: 1.0 },
            ExactSolutionSpec::Tilted { a: 2.0, b: 0.3, c: 1.0, eps: 0.05, omega: [2.0, 1.0] },
        ] {
            let (sol, tau, phi, cfg) = setup(fam.clone(), 1.0 / 16.0);
            let s = invariant_suite(&sol, &tau, &phi, &cfg);
            assert!(s.all_pass(), "{fam:?}: {s:?}");
        }
    }

    #[test]
    fn quadratic_tau_identity_is_exact() {
        // τ is constant, so ⟨x,τ⟩ is linear and differenced exactly; η is a
        // quartic, so its centered difference carries an O(h²) error.
        let fam = ExactSolutionSpec::Quadratic { a: 2.0, b: 0.3, c: 1.0 };
        let mut prev = None;
        for h in [1.0 / 16.0, 1.0 / 32.0] {
            let (sol, tau, _, cfg) = setup(fam.clone(), h);
            let all: Vec<usize> = (0..sol.problem.grid.len()).collect();
            let r = eta_derivative_check(&sol, &tau, &cfg, &all).unwrap();
            assert!(r.tau_id < 1e-8, "{r:?}");
            if let Some(p) = prev {
                let ratio: f64 = p / r.eta_d;
                assert!((ratio - 4.0).abs() < 0.5, "{ratio}");
            }
            prev = Some(r.eta_d);
        }
    }

    #[test]
    fn tilted_eta_derivatives_converge() {
        let fam = ExactSolutionSpec::Tilted { a: 2.0, b: 0.3, c: 1.0, eps: 0.05, omega: [2.0, 1.0] };
        let mut prev: Option<EtaDerivativeResiduals> = None;
        for h in [1.0 / 16.0, 1.0 / 32.0] {
            let (sol, tau, _, cfg) = setup(fam.clone(), h);
            let all: Vec<usize> = (0..sol.problem.grid.len())
                .filter(|&n| {
                    let x = sol.problem.grid.node(n).x;
                    x[0].hypot(x[1]) <= 0.5
                })
                .collect();
            let r = eta_derivative_check(&sol, &tau, &cfg, &all).unwrap();
            if let Some(p) = prev {
                assert!(p.tau_id / r.tau_id > 1.5, "{p:?} -> {r:?}");
                assert!(p.eta_d / r.eta_d > 1.5, "{p:?} -> {r:?}");
            }
            prev = Some(r);
        }
    }
}
