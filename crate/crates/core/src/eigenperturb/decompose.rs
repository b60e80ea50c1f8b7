use nalgebra::{DMatrix, SymmetricEigen};

use super::{canonical_sign, EigenSystem, SymmetricMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS_PER_DIM: usize = 1000;

/// General symmetric eigen-decomposition, eigenvalues descending and each
/// eigenvector signed so its largest-magnitude component is positive.
pub fn eigen_decompose(w: &SymmetricMatrix) -> Result<EigenSystem> {
    let n = w.n();
    let m = DMatrix::from_row_slice(n, n, w.as_slice());
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, MAX_SWEEPS_PER_DIM * n)
        .ok_or_else(|| Error::EigenNonConvergence { matrix: w.rows() })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let eigenvalues = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let eigenvectors = order
        .iter()
        .map(|&j| {
            let mut v: Vec<f64> = eig.eigenvectors.column(j).iter().copied().collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            canonical_sign(&mut v);
            v
        })
        .collect();
    Ok(EigenSystem::from_sorted(eigenvalues, eigenvectors))
}
