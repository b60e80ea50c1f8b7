//! Perturbation derivatives of eigenvalues and unit eigenvectors of
//! symmetric matrices.
//!
//! Derivatives are taken with respect to the *independent* entries `W[p][q]`:
//! `W[p][q]` and `W[q][p]` are treated as separate variables, and the
//! eigenvector `τ^k` is the unit right eigenvector continued from the base
//! point. This is the convention in which the diagonal-point formulas are
//! stated. [`EigenDerivatives::fold`] converts to derivatives along the
//! symmetric coordinate directions `e_p e_qᵀ + e_q e_pᵀ` (`p != q`) and
//! `e_p e_pᵀ`, which is what a caller perturbing a symmetric matrix needs and
//! what the finite-difference oracle measures.
//!
//! Tensor layouts (all dense, `n <= 6` in practice):
//!
//! | field        | shape             | entry                              |
//! |--------------|-------------------|------------------------------------|
//! | `d_lambda`   | `[p, q]`          | `∂λ_k / ∂W_pq`                     |
//! | `d_tau`      | `[i, p, q]`       | `∂τ^k_i / ∂W_pq`                   |
//! | `d2_lambda`  | `[p, q, r, s]`    | `∂²λ_k / ∂W_pq ∂W_rs`              |
//! | `d2_tau`     | `[i, p, q, r, s]` | `∂²τ^k_i / ∂W_pq ∂W_rs`            |
//!
//! All indices are zero-based.

mod closed_form;
mod conjugate;
mod decompose;
mod diagonal;
mod fd;

use ndarray::{Array2, Array3, Array4, Array5};
use serde::Serialize;

use crate::error::{Error, Result};

pub use closed_form::{eigen2x2, eigen2x2_closed_form, Eigen2};
pub use conjugate::conjugate_to_general;
pub use decompose::eigen_decompose;
pub use diagonal::{
    d2lambda_at_diagonal, d2tau_at_diagonal, derivatives_at_diagonal, dlambda_at_diagonal,
    dtau_at_diagonal,
};
pub use fd::fd_eigen_derivatives;

/// Relative gap below which an eigenvalue is treated as repeated.
pub const GAP_TOL_REL: f64 = 1e-8;

/// Absolute degeneracy tolerance `1e-8 · max(1, max|λ|)`.
pub fn gap_tolerance(eigenvalues: &[f64]) -> f64 {
    let scale = eigenvalues.iter().fold(1.0_f64, |acc, l| acc.max(l.abs()));
    GAP_TOL_REL * scale
}

/// Dense symmetric `n × n` matrix, stored row-major. Symmetry is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        if data.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if data[i * n + j] != data[j * n + i] {
                    return Err(Error::NotSymmetric { i, j });
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("rows are not square".into()));
        }
        Self::new(n, rows.iter().flatten().copied().collect())
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            data[i * n + i] = *d;
        }
        Self::new(n, data)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::diagonal(&vec![1.0; n])
    }

    /// Builds `Q diag(λ) Qᵀ` from orthonormal columns, symmetrizing the
    /// rounding noise.
    pub fn from_spectrum(eigenvalues: &[f64], q: &Array2<f64>) -> Result<Self> {
        let n = eigenvalues.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..n).map(|a| q[[i, a]] * eigenvalues[a] * q[[j, a]]).sum();
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self::new(n, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j) == 0.0))
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Adds `delta` to `W[p][q]` and `W[q][p]` (once when `p == q`).
    pub fn bumped(&self, p: usize, q: usize, delta: f64) -> Self {
        let mut out = self.clone();
        out.data[p * self.n + q] += delta;
        if p != q {
            out.data[q * self.n + p] += delta;
        }
        out
    }

    /// `self + eps · dir`.
    pub fn perturbed(&self, dir: &SymmetricMatrix, eps: f64) -> Self {
        assert_eq!(self.n, dir.n, "dimension mismatch");
        let data = self.data.iter().zip(&dir.data).map(|(a, b)| a + eps * b).collect();
        Self { n: self.n, data }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Eigenvalues sorted descending with matching unit eigenvectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` is `τ^k`.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Smallest difference between adjacent eigenvalues.
    pub gap: f64,
}

impl EigenSystem {
    pub(crate) fn from_sorted(eigenvalues: Vec<f64>, eigenvectors: Vec<Vec<f64>>) -> Self {
        let gap = eigenvalues
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::INFINITY, f64::min);
        Self { eigenvalues, eigenvectors, gap }
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Distance from `λ_k` to the nearest other eigenvalue.
    pub fn gap_of(&self, k: usize) -> f64 {
        separation(&self.eigenvalues, k)
    }

    /// Eigenvectors as the columns of an orthogonal matrix.
    pub fn q_matrix(&self) -> Array2<f64> {
        let n = self.n();
        Array2::from_shape_fn((n, n), |(i, a)| self.eigenvectors[a][i])
    }
}

pub(crate) fn separation(values: &[f64], k: usize) -> f64 {
    values
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != k)
        .map(|(_, v)| (values[k] - v).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Flips `v` so its largest-magnitude component is positive (first index wins ties).
pub(crate) fn canonical_sign(v: &mut [f64]) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IndexConvention {
    /// `W[p][q]` and `W[q][p]` are independent variables.
    Independent,
    /// Derivatives along `e_p e_qᵀ + e_q e_pᵀ` (or `e_p e_pᵀ`); symmetric in `(p, q)`.
    Symmetric,
}

/// First and second derivatives of `(λ_k, τ^k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDerivatives {
    pub k: usize,
    pub convention: IndexConvention,
    pub d_lambda: Array2<f64>,
    pub d_tau: Array3<f64>,
    pub d2_lambda: Array4<f64>,
    pub d2_tau: Array5<f64>,
}

fn orientations(p: usize, q: usize) -> impl Iterator<Item = (usize, usize)> {
    let second = (p != q).then_some((q, p));
    std::iter::once((p, q)).chain(second)
}

impl EigenDerivatives {
    pub fn zeros(n: usize, k: usize, convention: IndexConvention) -> Self {
        Self {
            k,
            convention,
            d_lambda: Array2::zeros((n, n)),
            d_tau: Array3::zeros((n, n, n)),
            d2_lambda: Array4::zeros((n, n, n, n)),
            d2_tau: Array5::zeros((n, n, n, n, n)),
        }
    }

    pub fn n(&self) -> usize {
        self.d_lambda.nrows()
    }

    /// Sums the `(p, q)` and `(q, p)` slots of every derivative index, giving
    /// derivatives along symmetric coordinate directions. Idempotent on
    /// already-folded tensors.
    pub fn fold(&self) -> EigenDerivatives {
        if self.convention == IndexConvention::Symmetric {
            return self.clone();
        }
        let n = self.n();
        let mut out = EigenDerivatives::zeros(n, self.k, IndexConvention::Symmetric);
        for p in 0..n {
            for q in 0..n {
                for (a, b) in orientations(p, q) {
                    out.d_lambda[[p, q]] += self.d_lambda[[a, b]];
                    for i in 0..n {
                        out.d_tau[[i, p, q]] += self.d_tau[[i, a, b]];
                    }
                    for r in 0..n {
                        for s in 0..n {
                            for (c, d) in orientations(r, s) {
                                out.d2_lambda[[p, q, r, s]] += self.d2_lambda[[a, b, c, d]];
                                for i in 0..n {
                                    out.d2_tau[[i, p, q, r, s]] += self.d2_tau[[i, a, b, c, d]];
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// First-order directional derivatives `(Dλ[E], Dτ[E])`.
    pub fn first_directional(&self, dir: &SymmetricMatrix) -> (f64, Vec<f64>) {
        let n = self.n();
        let w = self.direction_weights(dir);
        let mut dl = 0.0;
        let mut dt = vec![0.0; n];
        for p in 0..n {
            for q in 0..n {
                let e = w[p * n + q];
                if e == 0.0 {
                    continue;
                }
                dl += self.d_lambda[[p, q]] * e;
                for (i, t) in dt.iter_mut().enumerate() {
                    *t += self.d_tau[[i, p, q]] * e;
                }
            }
        }
        (dl, dt)
    }

    /// Second-order directional derivatives `(D²λ[E, E], D²τ[E, E])`.
    pub fn second_directional(&self, dir: &SymmetricMatrix) -> (f64, Vec<f64>) {
        let n = self.n();
        let w = self.direction_weights(dir);
        let mut dl = 0.0;
        let mut dt = vec![0.0; n];
        for p in 0..n {
            for q in 0..n {
                let e1 = w[p * n + q];
                if e1 == 0.0 {
                    continue;
                }
                for r in 0..n {
                    for s in 0..n {
                        let e = e1 * w[r * n + s];
                        if e == 0.0 {
                            continue;
                        }
                        dl += self.d2_lambda[[p, q, r, s]] * e;
                        for (i, t) in dt.iter_mut().enumerate() {
                            *t += self.d2_tau[[i, p, q, r, s]] * e;
                        }
                    }
                }
            }
        }
        (dl, dt)
    }

    /// Entry weights of `dir` in this convention: all entries for
    /// independent indexing, the upper triangle for folded tensors.
    fn direction_weights(&self, dir: &SymmetricMatrix) -> Vec<f64> {
        let n = self.n();
        let mut w = dir.as_slice().to_vec();
        if self.convention == IndexConvention::Symmetric {
            for p in 0..n {
                for q in 0..p {
                    w[p * n + q] = 0.0;
                }
            }
        }
        w
    }

    /// Largest absolute difference of first-order and second-order tensors.
    pub fn max_abs_diff(&self, other: &EigenDerivatives) -> (f64, f64) {
        let d1 = max_abs_diff(self.d_lambda.iter(), other.d_lambda.iter())
            .max(max_abs_diff(self.d_tau.iter(), other.d_tau.iter()));
        let d2 = max_abs_diff(self.d2_lambda.iter(), other.d2_lambda.iter())
            .max(max_abs_diff(self.d2_tau.iter(), other.d2_tau.iter()));
        (d1, d2)
    }

    /// Relative errors `(first, second)` of `other` against `self`, each
    /// normalized by the largest entry of the corresponding tensors of `self`.
    pub fn relative_errors(&self, other: &EigenDerivatives) -> (f64, f64) {
        let (d1, d2) = self.max_abs_diff(other);
        let s1 = max_abs(self.d_lambda.iter()).max(max_abs(self.d_tau.iter()));
        let s2 = max_abs(self.d2_lambda.iter()).max(max_abs(self.d2_tau.iter()));
        (d1 / s1.max(f64::MIN_POSITIVE), d2 / s2.max(f64::MIN_POSITIVE))
    }
}

fn max_abs<'a>(a: impl Iterator<Item = &'a f64>) -> f64 {
    a.fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn max_abs_diff<'a>(a: impl Iterator<Item = &'a f64>, b: impl Iterator<Item = &'a f64>) -> f64 {
    a.zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}
