use serde::Serialize;

use super::case::{bound_check, classify_case, CaseLabel};
use super::checks::{
    critical_point_residual, eta_derivative_check, invariant_suite, refine_critical_point, InvariantSuite,
    RefinedCriticalPoint,
};
use super::phi::{argmax, describe, locate_interior_max, phi_field};
use super::tau::build_tau_field;
use super::AuxConfig;
use crate::error::{Error, Result};
use crate::ma_solver::{identity_residuals, IdentityResiduals, SolutionField};

#[derive(Debug, Clone, Serialize)]
pub struct Residuals {
    /// Critical-point condition at `x0`, component along `τ(x0)`, in units of `λ₁/r`.
    pub cp1: Option<f64>,
    /// Component along `τ⊥(x0)`.
    pub cp2: Option<f64>,
    pub tau_id: Option<f64>,
    pub eta_d: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Margins {
    pub eta_lambda_ratio: f64,
    pub c1_empirical: f64,
    pub log_c1_empirical: f64,
    pub case_a_log_margin: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    /// `full`, or `report_only` when every `Σ` node is degenerate.
    pub mode: String,
    pub x0: [f64; 2],
    pub phi_max: f64,
    pub log_phi_max: f64,
    pub x0_interior: bool,
    pub x0_degenerate: bool,
    pub eta_at_x0: f64,
    pub lambda1_at_x0: f64,
    pub case_label: CaseLabel,
    pub eta_lambda: f64,
    pub threshold: f64,
    pub residuals: Residuals,
    pub margins: Margins,
    pub degenerate_fraction: f64,
    pub sigma_nodes: usize,
    /// Differentiated-equation residuals over `B_r`.
    pub identity_residuals: Option<IdentityResiduals>,
    /// Diagnostic only: the critical-point condition interpolated to a
    /// sub-grid estimate of the maximizer.
    pub refined_max: Option<RefinedCriticalPoint>,
    pub invariants: InvariantSuite,
    pub config: AuxConfig,
    pub notes: Vec<String>,
}

/// Run every check of the auxiliary-function argument on a solved field.
pub fn certify(sol: &SolutionField, cfg: &AuxConfig) -> Result<CertificateReport> {
    let tau = build_tau_field(sol, cfg);
    let phi = phi_field(sol, &tau, cfg);
    let mut notes = Vec::new();
    let (max, mode) = match locate_interior_max(sol, &tau, &phi) {
        Ok(m) => (m, "full"),
        Err(Error::DegenerateField) => {
            notes.push("every Σ node is degenerate; identities at x0 are not checked".to_string());
            let n = argmax(sol, &phi).ok_or(Error::EmptySigma)?;
            (describe(sol, &tau, &phi, n), "report_only")
        }
        Err(e) => return Err(e),
    };
    let n0 = max.node;

    let mut cp_node = None;
    let mut refined = None;
    if mode == "full" {
        match critical_point_residual(sol, &tau, &phi, cfg, n0) {
            Ok(r) => cp_node = Some(r),
            Err(Error::NotCheckable(why)) => notes.push(format!("critical point not checkable: {why}")),
            Err(e) => return Err(e),
        }
        if cp_node.is_some() {
            match refine_critical_point(sol, &tau, &phi, cfg, n0) {
                Ok(r) => refined = Some(r),
                Err(Error::NotCheckable(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    let (cp1, cp2) = match cp_node {
        Some([a, b]) => (Some(a), Some(b)),
        None => (None, None),
    };

    let sigma: Vec<usize> = (0..sol.problem.grid.len()).filter(|&n| phi.in_sigma(n)).collect();
    let (tau_id, eta_d) = match eta_derivative_check(sol, &tau, cfg, &sigma) {
        Ok(r) => (Some(r.tau_id), Some(r.eta_d)),
        Err(Error::InsufficientSample { found, needed }) => {
            notes.push(format!("eta derivative check skipped: {found} usable nodes, {needed} needed"));
            (None, None)
        }
        Err(e) => return Err(e),
    };

    let identities = match identity_residuals(sol, cfg.r) {
        Ok(r) => Some(r),
        Err(Error::InsufficientSample { found, needed }) => {
            notes.push(format!("identity residuals skipped: {found} usable nodes, {needed} needed"));
            None
        }
        Err(e) => return Err(e),
    };

    let eta0 = phi.eta[n0].expect("x0 in sigma");
    let lambda1 = tau.lambda1[n0];
    let eta_lambda = eta0 * lambda1;
    let origin = sol.problem.grid.origin();
    let split = classify_case(eta_lambda, sol, cfg, phi.u_tau_tau[origin]);
    let bounds = bound_check(sol, cfg, eta_lambda);
    let invariants = invariant_suite(sol, &tau, &phi, cfg);
    let degenerate = sigma.iter().filter(|&&n| tau.degenerate[n]).count();

    Ok(CertificateReport {
        mode: mode.to_string(),
        x0: max.x0,
        phi_max: max.log_phi_max.exp(),
        log_phi_max: max.log_phi_max,
        x0_interior: max.interior,
        x0_degenerate: max.degenerate,
        eta_at_x0: eta0,
        lambda1_at_x0: lambda1,
        case_label: split.label,
        eta_lambda,
        threshold: split.threshold,
        residuals: Residuals { cp1, cp2, tau_id, eta_d },
        margins: Margins {
            eta_lambda_ratio: bounds.eta_lambda_ratio,
            c1_empirical: bounds.c1_empirical,
            log_c1_empirical: bounds.log_c1_empirical,
            case_a_log_margin: split.case_a_log_margin,
        },
        degenerate_fraction: degenerate as f64 / sigma.len() as f64,
        sigma_nodes: sigma.len(),
        identity_residuals: identities,
        refined_max: refined,
        invariants,
        config: cfg.clone(),
        notes,
    })
}
