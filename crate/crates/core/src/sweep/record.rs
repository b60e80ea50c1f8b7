use serde::{Deserialize, Serialize};

use super::Triple;
use crate::aux_certificate::{certify, AuxConfig, CaseLabel};
use crate::error::Result;
use crate::ma_solver::{solve, DiscGrid, ProblemSpec, SolutionField, SolverConfig};

/// One row of the sweep table. Field order is the CSV column order: the
/// fixed columns first, then the `B_{R/2}` variant and solver statistics.
/// Metric cells are empty on failed rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub family: String,
    pub params: String,
    #[serde(rename = "R")]
    pub radius: f64,
    pub h: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    /// `sup |D_h u|` over grid nodes in `B_R`.
    pub sup_du: Option<f64>,
    /// Spectral norm of `D²_h u` at the origin node.
    pub d2u0: Option<f64>,
    /// `sup|Du|² / R²`.
    #[serde(rename = "s_R")]
    pub s_big_r: Option<f64>,
    /// `sup|Du|² / r²` with `r = R/√2`, so `s_r = 2 s_R`.
    pub s_r: Option<f64>,
    pub case: Option<CaseLabel>,
    pub eta_lambda_ratio: Option<f64>,
    pub c1_empirical: Option<f64>,
    pub error_class: Option<String>,
    pub r: f64,
    pub eta_lambda: Option<f64>,
    pub threshold: Option<f64>,
    pub case_a_log_margin: Option<f64>,
    /// `sup |D_h u|` over `B_{R/2}`.
    pub sup_du_half: Option<f64>,
    /// `sup|Du|²_{B_{R/2}} / (R/2)²`.
    pub s_half: Option<f64>,
    /// `osc u` over `B_R`.
    pub osc_u: Option<f64>,
    /// `16 sup|u|² / R⁴`.
    pub s_u: Option<f64>,
    pub iterations: Option<usize>,
    pub solver_residual: Option<f64>,
    pub error_vs_exact: Option<f64>,
    pub invariants_pass: Option<bool>,
}

impl SweepRecord {
    fn skeleton(t: &Triple) -> Self {
        let (m, big_m) = match &t.class {
            Ok(c) => (c.m, c.big_m),
            Err(_) => t.member.rhs_bounds(t.radius),
        };
        Self {
            family: t.family_id.clone(),
            params: t.member.params_string(),
            radius: t.radius,
            h: t.h,
            m,
            big_m,
            sup_du: None,
            d2u0: None,
            s_big_r: None,
            s_r: None,
            case: None,
            eta_lambda_ratio: None,
            c1_empirical: None,
            error_class: None,
            r: t.radius / std::f64::consts::SQRT_2,
            eta_lambda: None,
            threshold: None,
            case_a_log_margin: None,
            sup_du_half: None,
            s_half: None,
            osc_u: None,
            s_u: None,
            iterations: None,
            solver_residual: None,
            error_vs_exact: None,
            invariants_pass: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error_class.is_none()
    }

    /// Case label recomputed from the stored `η λ₁` and threshold.
    pub fn recomputed_case(&self) -> Option<CaseLabel> {
        let (el, th) = (self.eta_lambda?, self.threshold?);
        Some(if el <= th { CaseLabel::A } else { CaseLabel::B })
    }
}

pub(super) fn run_triple(t: &Triple, solver: &SolverConfig) -> SweepRecord {
    let mut rec = SweepRecord::skeleton(t);
    let class = match &t.class {
        Ok(c) => *c,
        Err(e) => {
            rec.error_class = Some(e.clone());
            return rec;
        }
    };
    let sol = match solve_triple(t, class, solver) {
        Ok(s) => s,
        Err(e) => {
            rec.error_class = Some(e.class().to_string());
            return rec;
        }
    };
    fill_solution(&mut rec, &sol);
    match certify(&sol, &AuxConfig::for_solution(&sol)) {
        Ok(c) => {
            rec.case = Some(c.case_label);
            rec.eta_lambda_ratio = Some(c.margins.eta_lambda_ratio);
            rec.c1_empirical = Some(c.margins.c1_empirical);
            rec.eta_lambda = Some(c.eta_lambda);
            rec.threshold = Some(c.threshold);
            rec.case_a_log_margin = c.margins.case_a_log_margin;
            rec.invariants_pass = Some(c.invariants.all_pass());
        }
        Err(e) => rec.error_class = Some(e.class().to_string()),
    }
    rec
}

fn solve_triple(t: &Triple, class: crate::ma_solver::ClassBounds, cfg: &SolverConfig) -> Result<SolutionField> {
    let spec = ProblemSpec::manufacture(&t.member, DiscGrid::new(t.radius, t.h)?)?.with_bounds(class)?;
    solve(&spec, cfg)
}

fn fill_solution(rec: &mut SweepRecord, sol: &SolutionField) {
    let radius = rec.radius;
    let sup_du = sol.sup_grad();
    let half = sol.sup_grad_within(0.5 * radius);
    let (lo, hi) = sol.u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let sup_u = sol.sup_abs_within(radius);
    rec.sup_du = Some(sup_du);
    rec.d2u0 = Some(sol.hessian_norm_at_origin());
    let s_big_r = sup_du * sup_du / (radius * radius);
    rec.s_big_r = Some(s_big_r);
    // r² = R²/2 exactly; dividing by the rounded r² would break s_r = 2 s_R.
    rec.s_r = Some(2.0 * s_big_r);
    rec.sup_du_half = Some(half);
    rec.s_half = Some(half * half / (0.25 * radius * radius));
    rec.osc_u = Some(hi - lo);
    rec.s_u = Some(16.0 * sup_u * sup_u / radius.powi(4));
    rec.iterations = Some(sol.iterations);
    rec.solver_residual = Some(sol.residual_norm);
    rec.error_vs_exact = sol.error_vs_exact();
}
