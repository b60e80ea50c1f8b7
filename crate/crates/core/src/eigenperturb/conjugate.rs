use ndarray::{Array2, ArrayD, Axis, Ix2, Ix3, Ix4, Ix5};

use super::{
    derivatives_at_diagonal, eigen_decompose, gap_tolerance, EigenDerivatives, SymmetricMatrix,
};
use crate::error::{Error, Result};

/// `out[.., p, ..] = Σ_a q[p, a] t[.., a, ..]` along `axis`.
fn transform_axis(t: &ArrayD<f64>, axis: usize, q: &Array2<f64>) -> ArrayD<f64> {
    let n = q.nrows();
    let mut out = ArrayD::zeros(t.raw_dim());
    for p in 0..n {
        let mut slot = out.index_axis_mut(Axis(axis), p);
        for a in 0..n {
            let c = q[[p, a]];
            if c != 0.0 {
                slot.scaled_add(c, &t.index_axis(Axis(axis), a));
            }
        }
    }
    out
}

fn transform_all(t: ArrayD<f64>, q: &Array2<f64>) -> ArrayD<f64> {
    (0..t.ndim()).fold(t, |acc, axis| transform_axis(&acc, axis, q))
}

/// Derivatives of the `k`-th largest eigenpair at a general symmetric `W`.
///
/// With `W = Q D Qᵀ`, the eigenpair of `W + E` is `(λ_k(D + QᵀEQ), Q τ^k(D + QᵀEQ))`,
/// so every index of the diagonal tensors is pushed through `Q`. The
/// eigenvector field is the one through the canonically signed `τ^k(W)`.
pub fn conjugate_to_general(w: &SymmetricMatrix, k: usize) -> Result<EigenDerivatives> {
    let n = w.n();
    if k >= n {
        return Err(Error::InvalidInput(format!("eigen index {k} out of range for n = {n}")));
    }
    let base = eigen_decompose(w)?;
    let gap = base.gap_of(k);
    let tol = gap_tolerance(&base.eigenvalues);
    if gap <= tol {
        return Err(Error::DegenerateEigenvalue { k, gap, tol });
    }
    let d = SymmetricMatrix::diagonal(&base.eigenvalues)?;
    let local = derivatives_at_diagonal(&d, k)?;
    let q = base.q_matrix();

    let push = |t: ArrayD<f64>| transform_all(t, &q);
    Ok(EigenDerivatives {
        k,
        convention: local.convention,
        d_lambda: push(local.d_lambda.into_dyn()).into_dimensionality::<Ix2>().expect("rank 2"),
        d_tau: push(local.d_tau.into_dyn()).into_dimensionality::<Ix3>().expect("rank 3"),
        d2_lambda: push(local.d2_lambda.into_dyn()).into_dimensionality::<Ix4>().expect("rank 4"),
        d2_tau: push(local.d2_tau.into_dyn()).into_dimensionality::<Ix5>().expect("rank 5"),
    })
}
