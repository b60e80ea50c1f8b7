//! Residuals of `det D²u = f` differentiated once and twice, evaluated in the
//! principal frame of `D²u` at a node.

use serde::Serialize;

use super::field::SolutionField;
use super::jet::jet_at;
use crate::eigenperturb::eigen2x2;
use crate::error::{Error, Result};

/// Minimum number of sampled nodes.
pub const MIN_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResiduals {
    /// Max over samples and `i` of `|u'_22i - (f'_i/λ₁ - (f/λ₁) u'_11i/u'_11)|`.
    pub first: f64,
    /// Second differentiation, direction pair `(1, 1)`.
    pub second_11: f64,
    /// Second differentiation, direction pair `(1, 2)`.
    pub second_12: f64,
    pub samples: usize,
}

impl IdentityResiduals {
    pub fn as_array(&self) -> [f64; 3] {
        [self.first, self.second_11, self.second_12]
    }
}

/// Residuals at one node, `[first_1, first_2, second_11, second_12]`, or
/// `None` if the jet is unavailable.
pub fn residuals_at(field: &SolutionField, n: usize) -> Option<[f64; 4]> {
    let p = &field.problem;
    let jet = jet_at(&p.grid, &field.u, n)?;
    let e = eigen2x2(jet.d2[0][0], jet.d2[0][1], jet.d2[1][1]);
    let tau = e.tau;
    let r = jet.rotated(tau);
    let l1 = r.d2[0][0];
    let l2 = r.d2[1][1];
    let f = p.f[n];
    // Rotate ∇f and ∇²f into the same frame.
    let rot = [[tau[0], -tau[1]], [tau[1], tau[0]]];
    let gf = p.grad_f[n];
    let hf = [[p.hess_f[n][0], p.hess_f[n][1]], [p.hess_f[n][1], p.hess_f[n][2]]];
    let mut f1 = [0.0; 2];
    let mut f2 = [[0.0; 2]; 2];
    for a in 0..2 {
        f1[a] = (0..2).map(|i| rot[i][a] * gf[i]).sum();
        for b in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    f2[a][b] += rot[i][a] * rot[j][b] * hf[i][j];
                }
            }
        }
    }
    let u = &r.d3;
    let w = &r.d4;
    let first = |i: usize| u[1][1][i] - (f1[i] / l1 - (f / l1) * u[0][0][i] / l1);
    let s11 = l2 * w[0][0][0][0] + l1 * w[1][1][0][0]
        - (f2[0][0] + 2.0 * u[0][0][1].powi(2) - 2.0 * f1[0] * u[0][0][0] / l1
            + 2.0 * f * (u[0][0][0] / l1).powi(2));
    let s12 = l2 * w[0][0][0][1] + l1 * w[1][1][0][1]
        - (f2[0][1] + f1[0] * u[0][0][1] / l1 - f1[1] * u[0][0][0] / l1);
    Some([first(0), first(1), s11, s12])
}

/// Max residuals over nodes with an available jet and `|x| ≤ radius`.
pub fn identity_residuals(field: &SolutionField, radius: f64) -> Result<IdentityResiduals> {
    let grid = &field.problem.grid;
    let r2 = radius * radius;
    let mut out = IdentityResiduals { first: 0.0, second_11: 0.0, second_12: 0.0, samples: 0 };
    for (n, node) in grid.nodes().iter().enumerate() {
        if node.x[0] * node.x[0] + node.x[1] * node.x[1] > r2 {
            continue;
        }
        if let Some(r) = residuals_at(field, n) {
            out.first = out.first.max(r[0].abs()).max(r[1].abs());
            out.second_11 = out.second_11.max(r[2].abs());
            out.second_12 = out.second_12.max(r[3].abs());
            out.samples += 1;
        }
    }
    if out.samples < MIN_SAMPLES {
        return Err(Error::InsufficientSample { found: out.samples, needed: MIN_SAMPLES });
    }
    Ok(out)
}
