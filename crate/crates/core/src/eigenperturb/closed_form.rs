use super::{canonical_sign, EigenSystem, SymmetricMatrix};
use crate::error::{Error, Result};

/// Eigen-decomposition of `[[u11, u12], [u12, u22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen2 {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Unit eigenvector of `lambda1`; `(1, 0)` when the eigenvalues coincide.
    pub tau: [f64; 2],
}

impl Eigen2 {
    pub fn gap(&self) -> f64 {
        self.lambda1 - self.lambda2
    }

    /// Unit eigenvector of `lambda2`, a quarter turn from `tau`.
    pub fn tau_perp(&self) -> [f64; 2] {
        [-self.tau[1], self.tau[0]]
    }
}

/// Radical formulas for the eigenvalues, and the eigenvector
/// `(λ1 - u22, u12)` (equivalently `(u12, λ1 - u11)`), choosing whichever form
/// avoids cancellation. The sign of `tau` is not normalized.
pub fn eigen2x2(u11: f64, u12: f64, u22: f64) -> Eigen2 {
    let d = u11 - u22;
    // sqrt((u11 - u22)² + 4 u12 u21) for a symmetric matrix
    let s = d.hypot(2.0 * u12);
    let tr = u11 + u22;
    let lambda1 = 0.5 * (tr + s);
    let lambda2 = 0.5 * (tr - s);
    if s == 0.0 {
        return Eigen2 { lambda1, lambda2, tau: [1.0, 0.0] };
    }
    let (a, b) = if d >= 0.0 { (0.5 * (d + s), u12) } else { (u12, 0.5 * (s - d)) };
    let norm = a.hypot(b);
    Eigen2 { lambda1, lambda2, tau: [a / norm, b / norm] }
}

/// Closed-form eigen-system of a 2×2 symmetric matrix, with the
/// largest-component-positive sign convention.
pub fn eigen2x2_closed_form(w: &SymmetricMatrix) -> Result<EigenSystem> {
    if w.n() != 2 {
        return Err(Error::InvalidDimension(w.n()));
    }
    let e = eigen2x2(w.get(0, 0), w.get(0, 1), w.get(1, 1));
    if e.gap() == 0.0 {
        return Ok(EigenSystem::from_sorted(
            vec![e.lambda1, e.lambda2],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        ));
    }
    let mut t1 = e.tau.to_vec();
    let mut t2 = e.tau_perp().to_vec();
    canonical_sign(&mut t1);
    canonical_sign(&mut t2);
    Ok(EigenSystem::from_sorted(vec![e.lambda1, e.lambda2], vec![t1, t2]))
}
