//! The auxiliary function `φ = η^β g(½|Du|²) u_ττ` on a solved field, its
//! maximum over `Σ`, and the identities and bounds that hold there.

mod case;
mod checks;
mod eta;
mod phi;
mod report;
mod tau;

use serde::{Deserialize, Serialize};

pub use case::{bound_check, classify_case, BoundMargins, CaseLabel, CaseSplit};
pub use checks::{
    critical_point_residual, eta_derivative_check, eta_rotation_defect, frame_at, invariant_suite,
    refine_critical_point, EtaDerivativeResiduals, InvariantSuite, LocalFrame, RefinedCriticalPoint,
};
pub use eta::{eta, eta_factors, sigma_membership};
pub use phi::{locate_interior_max, phi_field, InteriorMax, PhiField};
pub use report::{certify, CertificateReport, Margins, Residuals};
pub use tau::{build_tau_field, TauField};

use crate::ma_solver::SolutionField;

/// Constants of the auxiliary function. Values that differ from the defaults
/// for the problem are listed in `overrides`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxConfig {
    pub beta: f64,
    /// `g(t) = exp(c0 t / r²)`.
    pub c0: f64,
    pub r: f64,
    pub threshold_factor: f64,
    /// Relative gap floor: a node is degenerate when `λ₁ - λ₂ ≤ gap_tol · max(1, |λ₁|)`.
    pub gap_tol: f64,
    #[serde(default)]
    pub overrides: Vec<String>,
}

pub const DEFAULT_BETA: f64 = 4.0;
pub const DEFAULT_THRESHOLD_FACTOR: f64 = 1e3;
pub const DEFAULT_GAP_TOL: f64 = 1e-8;

impl AuxConfig {
    /// `β = 4`, `c0 = 32/m`, `r = R/√2`.
    pub fn new(radius: f64, m: f64) -> Self {
        Self {
            beta: DEFAULT_BETA,
            c0: 32.0 / m,
            r: radius / std::f64::consts::SQRT_2,
            threshold_factor: DEFAULT_THRESHOLD_FACTOR,
            gap_tol: DEFAULT_GAP_TOL,
            overrides: Vec::new(),
        }
    }

    pub fn for_solution(sol: &SolutionField) -> Self {
        Self::new(sol.problem.grid.radius(), sol.problem.m())
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        if beta != self.beta {
            self.beta = beta;
            self.overrides.push(format!("beta={beta}"));
        }
        self
    }

    pub fn with_c0(mut self, c0: f64) -> Self {
        if c0 != self.c0 {
            self.c0 = c0;
            self.overrides.push(format!("c0={c0}"));
        }
        self
    }

    pub fn with_r(mut self, r: f64) -> Self {
        if r != self.r {
            self.r = r;
            self.overrides.push(format!("r={r}"));
        }
        self
    }

    /// `ln g(t)`.
    pub fn log_g(&self, t: f64) -> f64 {
        self.c0 * t / (self.r * self.r)
    }

    pub fn g(&self, t: f64) -> f64 {
        self.log_g(t).exp()
    }

    /// `g'/g`, a constant.
    pub fn g_ratio(&self) -> f64 {
        self.c0 / (self.r * self.r)
    }

    pub fn is_degenerate(&self, lambda1: f64, lambda2: f64) -> bool {
        lambda1 - lambda2 <= self.gap_tol * lambda1.abs().max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = AuxConfig::new(2.0, 0.5);
        assert_eq!(c.beta, 4.0);
        assert_eq!(c.c0, 64.0);
        assert!((c.r - 2.0f64.sqrt()).abs() < 1e-15);
        assert!(c.overrides.is_empty());
        let c = c.with_beta(4.0).with_c0(10.0).with_r(1.0);
        assert_eq!(c.overrides, vec!["c0=10".to_string(), "r=1".to_string()]);
        assert_eq!(c.log_g(0.5), 5.0);
        assert_eq!(c.g_ratio(), 10.0);
    }
}
