//! Central-difference derivatives of `eigen_decompose`, used as an oracle for
//! the closed-form kernels. Perturbations are symmetric, so the result is in
//! the folded ([`IndexConvention::Symmetric`]) convention.

use super::{
    eigen_decompose, gap_tolerance, EigenDerivatives, EigenSystem, IndexConvention,
    SymmetricMatrix,
};
use crate::error::{Error, Result};

struct Tracker<'a> {
    base: &'a EigenSystem,
    k: usize,
}

impl Tracker<'_> {
    /// `(λ_k, τ^k)` at `w`, with `τ^k` signed to overlap the base vector.
    fn eval(&self, w: &SymmetricMatrix) -> Result<(f64, Vec<f64>)> {
        let e = eigen_decompose(w)?;
        let mut tau = e.eigenvectors[self.k].clone();
        let dot: f64 = tau.iter().zip(&self.base.eigenvectors[self.k]).map(|(a, b)| a * b).sum();
        if dot < 0.0 {
            tau.iter_mut().for_each(|x| *x = -*x);
        }
        Ok((e.eigenvalues[self.k], tau))
    }
}

/// `k` indexes the eigenvalues in descending order. Requires `gap_k > 10 h`.
pub fn fd_eigen_derivatives(w: &SymmetricMatrix, k: usize, h: f64) -> Result<EigenDerivatives> {
    let n = w.n();
    if k >= n {
        return Err(Error::InvalidInput(format!("eigen index {k} out of range for n = {n}")));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("step must be positive, got {h}")));
    }
    let base = eigen_decompose(w)?;
    let gap = base.gap_of(k);
    let tol = gap_tolerance(&base.eigenvalues);
    if gap <= tol {
        return Err(Error::DegenerateEigenvalue { k, gap, tol });
    }
    if gap <= 10.0 * h {
        return Err(Error::StepTooLarge { h, gap });
    }
    let tracker = Tracker { base: &base, k };
    let (l0, t0) = (base.eigenvalues[k], base.eigenvectors[k].clone());

    let coords: Vec<(usize, usize)> =
        (0..n).flat_map(|p| (p..n).map(move |q| (p, q))).collect();
    let mut out = EigenDerivatives::zeros(n, k, IndexConvention::Symmetric);

    for &(p, q) in &coords {
        let (lp, tp) = tracker.eval(&w.bumped(p, q, h))?;
        let (lm, tm) = tracker.eval(&w.bumped(p, q, -h))?;
        let dl = (lp - lm) / (2.0 * h);
        let d2l = (lp - 2.0 * l0 + lm) / (h * h);
        out.d_lambda[[p, q]] = dl;
        out.d_lambda[[q, p]] = dl;
        out.d2_lambda[[p, q, p, q]] = d2l;
        out.d2_lambda[[q, p, q, p]] = d2l;
        out.d2_lambda[[p, q, q, p]] = d2l;
        out.d2_lambda[[q, p, p, q]] = d2l;
        for i in 0..n {
            let dt = (tp[i] - tm[i]) / (2.0 * h);
            let d2t = (tp[i] - 2.0 * t0[i] + tm[i]) / (h * h);
            out.d_tau[[i, p, q]] = dt;
            out.d_tau[[i, q, p]] = dt;
            for (a, b) in [(p, q), (q, p)] {
                for (c, d) in [(p, q), (q, p)] {
                    out.d2_tau[[i, a, b, c, d]] = d2t;
                }
            }
        }
    }

    for (ai, &(p, q)) in coords.iter().enumerate() {
        for &(r, s) in &coords[ai + 1..] {
            let wp = w.bumped(p, q, h);
            let wm = w.bumped(p, q, -h);
            let (lpp, tpp) = tracker.eval(&wp.bumped(r, s, h))?;
            let (lpm, tpm) = tracker.eval(&wp.bumped(r, s, -h))?;
            let (lmp, tmp) = tracker.eval(&wm.bumped(r, s, h))?;
            let (lmm, tmm) = tracker.eval(&wm.bumped(r, s, -h))?;
            let scale = 1.0 / (4.0 * h * h);
            let d2l = (lpp - lpm - lmp + lmm) * scale;
            let slots = [(p, q), (q, p)];
            let slots2 = [(r, s), (s, r)];
            for &(a, b) in &slots {
                for &(c, d) in &slots2 {
                    out.d2_lambda[[a, b, c, d]] = d2l;
                    out.d2_lambda[[c, d, a, b]] = d2l;
                }
            }
            for i in 0..n {
                let d2t = (tpp[i] - tpm[i] - tmp[i] + tmm[i]) * scale;
                for &(a, b) in &slots {
                    for &(c, d) in &slots2 {
                        out.d2_tau[[i, a, b, c, d]] = d2t;
                        out.d2_tau[[i, c, d, a, b]] = d2t;
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::derivatives_at_diagonal;
    use super::*;

    #[test]
    fn matches_diagonal_first_derivative() {
        let w = SymmetricMatrix::diagonal(&[3.0, 1.0]).unwrap();
        let fd = fd_eigen_derivatives(&w, 0, 1e-5).unwrap();
        let exact = derivatives_at_diagonal(&w, 0).unwrap().fold();
        for (a, b) in fd.d_lambda.iter().zip(exact.d_lambda.iter()) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_gap_is_rejected() {
        let w = SymmetricMatrix::identity(2).unwrap();
        assert!(matches!(
            fd_eigen_derivatives(&w, 0, 1e-5),
            Err(Error::DegenerateEigenvalue { .. })
        ));
        let w = SymmetricMatrix::diagonal(&[1.0, 1.0 + 5e-5]).unwrap();
        assert!(matches!(fd_eigen_derivatives(&w, 0, 1e-5), Err(Error::StepTooLarge { .. })));
    }
}
