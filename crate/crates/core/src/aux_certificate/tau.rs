use rayon::prelude::*;
use serde::Serialize;

use super::AuxConfig;
use crate::eigenperturb::{eigen2x2_closed_form, SymmetricMatrix};
use crate::ma_solver::SolutionField;

/// Unit eigenvector of the largest discrete Hessian eigenvalue at each node.
#[derive(Debug, Clone, Serialize)]
pub struct TauField {
    pub tau: Vec<[f64; 2]>,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    /// Nodes where `τ` is undefined; there `τ = e₁`.
    pub degenerate: Vec<bool>,
}

impl TauField {
    /// From per-node Hessians `(h11, h12, h22)`.
    pub fn from_hessians(hess: &[[f64; 3]], cfg: &AuxConfig) -> Self {
        let per: Vec<([f64; 2], f64, f64, bool)> = hess
            .par_iter()
            .map(|h| {
                let w = SymmetricMatrix::new(2, vec![h[0], h[1], h[1], h[2]])
                    .expect("2x2 built symmetric");
                let e = eigen2x2_closed_form(&w).expect("n = 2");
                let (l1, l2) = (e.eigenvalues[0], e.eigenvalues[1]);
                if cfg.is_degenerate(l1, l2) {
                    ([1.0, 0.0], l1, l2, true)
                } else {
                    ([e.eigenvectors[0][0], e.eigenvectors[0][1]], l1, l2, false)
                }
            })
            .collect();
        let mut out = Self {
            tau: Vec::with_capacity(per.len()),
            lambda1: Vec::with_capacity(per.len()),
            lambda2: Vec::with_capacity(per.len()),
            degenerate: Vec::with_capacity(per.len()),
        };
        for (t, l1, l2, d) in per {
            out.tau.push(t);
            out.lambda1.push(l1);
            out.lambda2.push(l2);
            out.degenerate.push(d);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn gap(&self, n: usize) -> f64 {
        self.lambda1[n] - self.lambda2[n]
    }

    /// `u_ττ` from the Hessian; `λ₁` at degenerate nodes.
    pub fn u_tau_tau(&self, hess: &[[f64; 3]], n: usize) -> f64 {
        if self.degenerate[n] {
            return self.lambda1[n];
        }
        let [a, b, c] = hess[n];
        let [t1, t2] = self.tau[n];
        a * t1 * t1 + 2.0 * b * t1 * t2 + c * t2 * t2
    }
}

pub fn build_tau_field(sol: &SolutionField, cfg: &AuxConfig) -> TauField {
    TauField::from_hessians(&sol.hess, cfg)
}
