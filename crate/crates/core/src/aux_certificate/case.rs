use serde::{Deserialize, Serialize};

use super::AuxConfig;
use crate::ma_solver::SolutionField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseLabel {
    /// `η λ₁ ≤` threshold at `x0`: the direct bound applies.
    A,
    /// `η λ₁ >` threshold: the maximum-principle computation applies.
    B,
}

impl CaseLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseLabel::A => "A",
            CaseLabel::B => "B",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseSplit {
    pub label: CaseLabel,
    pub eta_lambda: f64,
    /// `10³ (1 + M + r sup|∇f| + (M/m) sup|Du|/r) r⁴`.
    pub threshold: f64,
    /// Case A only: `ln(10³(1 + M + r sup|∇f|)) + (c0 + 2M/m) sup|Du|²/r² - ln u_ττ(0)`.
    pub case_a_log_margin: Option<f64>,
}

/// Split on `η(x0) λ₁(x0)` against the threshold; in case A also evaluate the
/// direct bound `u_ττ(0) ≤ 10³(1 + M + r sup|∇f|) e^{(c0 + 2M/m) sup|Du|²/r²}`.
pub fn classify_case(eta_lambda: f64, sol: &SolutionField, cfg: &AuxConfig, u_tt_origin: f64) -> CaseSplit {
    let p = &sol.problem;
    let (m, big_m) = (p.m(), p.big_m());
    let r = cfg.r;
    let sup_du = sol.sup_grad();
    let threshold =
        cfg.threshold_factor * (1.0 + big_m + r * p.sup_grad_f + (big_m / m) * (sup_du / r)) * r.powi(4);
    let label = if eta_lambda <= threshold { CaseLabel::A } else { CaseLabel::B };
    let case_a_log_margin = (label == CaseLabel::A).then(|| {
        (cfg.threshold_factor * (1.0 + big_m + r * p.sup_grad_f)).ln()
            + (cfg.c0 + 2.0 * big_m / m) * sup_du * sup_du / (r * r)
            - u_tt_origin.ln()
    });
    CaseSplit { label, eta_lambda, threshold, case_a_log_margin }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundMargins {
    /// `η(x0) λ₁(x0) / ((1 + sup|Du|/r) r⁴)`.
    pub eta_lambda_ratio: f64,
    /// `|D²u(0)| / e^{(c0 + 2) sup|Du|²/r²}`.
    pub c1_empirical: f64,
    pub log_c1_empirical: f64,
    /// `sup|Du|²/r²`.
    pub s_r: f64,
}

pub fn bound_check(sol: &SolutionField, cfg: &AuxConfig, eta_lambda: f64) -> BoundMargins {
    let r = cfg.r;
    let sup_du = sol.sup_grad();
    let s_r = sup_du * sup_du / (r * r);
    let log_c1 = sol.hessian_norm_at_origin().ln() - (cfg.c0 + 2.0) * s_r;
    BoundMargins {
        eta_lambda_ratio: eta_lambda / ((1.0 + sup_du / r) * r.powi(4)),
        c1_empirical: log_c1.exp(),
        log_c1_empirical: log_c1,
        s_r,
    }
}
