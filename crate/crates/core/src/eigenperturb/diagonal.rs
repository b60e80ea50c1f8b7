//! Closed-form derivatives at a diagonal matrix `W = diag(λ_1, …, λ_n)`,
//! where `λ_k = W_kk` and `τ^k = e_k`. Here `k` is the diagonal position, not
//! the rank in sorted order.

use ndarray::{Array2, Array3, Array4, Array5};

use super::{gap_tolerance, separation, EigenDerivatives, IndexConvention, SymmetricMatrix};
use crate::error::{Error, Result};

fn checked_spectrum(w: &SymmetricMatrix, k: usize) -> Result<Vec<f64>> {
    if !w.is_diagonal() {
        return Err(Error::InvalidInput("matrix is not diagonal".into()));
    }
    let n = w.n();
    if k >= n {
        return Err(Error::InvalidInput(format!("eigen index {k} out of range for n = {n}")));
    }
    let lambda = w.diag();
    let gap = separation(&lambda, k);
    let tol = gap_tolerance(&lambda);
    if gap <= tol {
        return Err(Error::DegenerateEigenvalue { k, gap, tol });
    }
    Ok(lambda)
}

/// `∂λ_k/∂W_pq = 1` if `p = q = k`, zero otherwise.
pub fn dlambda_at_diagonal(w: &SymmetricMatrix, k: usize) -> Result<Array2<f64>> {
    let lambda = checked_spectrum(w, k)?;
    let n = lambda.len();
    let mut out = Array2::zeros((n, n));
    out[[k, k]] = 1.0;
    Ok(out)
}

/// `∂τ^k_i/∂W_ik = 1/(λ_k - λ_i)` for `i != k`; the `τ^k_k` component has zero
/// derivative; everything else vanishes.
pub fn dtau_at_diagonal(w: &SymmetricMatrix, k: usize) -> Result<Array3<f64>> {
    let lambda = checked_spectrum(w, k)?;
    let n = lambda.len();
    let mut out = Array3::zeros((n, n, n));
    for i in (0..n).filter(|&i| i != k) {
        out[[i, i, k]] = 1.0 / (lambda[k] - lambda[i]);
    }
    Ok(out)
}

/// `∂²λ_k/∂W_kq ∂W_qk = 1/(λ_k - λ_q)` for `q != k` (both slot orders); zero
/// otherwise.
pub fn d2lambda_at_diagonal(w: &SymmetricMatrix, k: usize) -> Result<Array4<f64>> {
    let lambda = checked_spectrum(w, k)?;
    let n = lambda.len();
    let mut out = Array4::zeros((n, n, n, n));
    for q in (0..n).filter(|&q| q != k) {
        let v = 1.0 / (lambda[k] - lambda[q]);
        out[[k, q, q, k]] = v;
        out[[q, k, k, q]] = v;
    }
    Ok(out)
}

/// Second derivatives of `τ^k`:
///
/// * `∂²τ^k_k/∂W_pk∂W_pk = -1/(λ_k - λ_p)²`, `p != k`
/// * `∂²τ^k_i/∂W_ik∂W_ii = 1/(λ_k - λ_i)²`, `i != k`
/// * `∂²τ^k_i/∂W_ik∂W_kk = -1/(λ_k - λ_i)²`, `i != k`
/// * `∂²τ^k_i/∂W_iq∂W_qk = 1/((λ_k - λ_i)(λ_k - λ_q))`, `i, q, k` distinct
///
/// each stored in both slot orders; zero elsewhere.
pub fn d2tau_at_diagonal(w: &SymmetricMatrix, k: usize) -> Result<Array5<f64>> {
    let lambda = checked_spectrum(w, k)?;
    let n = lambda.len();
    let mut out = Array5::zeros((n, n, n, n, n));
    let mut set = |i: usize, pq: (usize, usize), rs: (usize, usize), v: f64| {
        out[[i, pq.0, pq.1, rs.0, rs.1]] = v;
        out[[i, rs.0, rs.1, pq.0, pq.1]] = v;
    };
    for p in (0..n).filter(|&p| p != k) {
        let inv = 1.0 / (lambda[k] - lambda[p]);
        set(k, (p, k), (p, k), -inv * inv);
    }
    for i in (0..n).filter(|&i| i != k) {
        let inv_i = 1.0 / (lambda[k] - lambda[i]);
        set(i, (i, k), (i, i), inv_i * inv_i);
        set(i, (i, k), (k, k), -inv_i * inv_i);
        for q in (0..n).filter(|&q| q != i && q != k) {
            let inv_q = 1.0 / (lambda[k] - lambda[q]);
            set(i, (i, q), (q, k), inv_i * inv_q);
        }
    }
    Ok(out)
}

/// All four diagonal kernels bundled, in the independent-entry convention.
pub fn derivatives_at_diagonal(w: &SymmetricMatrix, k: usize) -> Result<EigenDerivatives> {
    Ok(EigenDerivatives {
        k,
        convention: IndexConvention::Independent,
        d_lambda: dlambda_at_diagonal(w, k)?,
        d_tau: dtau_at_diagonal(w, k)?,
        d2_lambda: d2lambda_at_diagonal(w, k)?,
        d2_tau: d2tau_at_diagonal(w, k)?,
    })
}
