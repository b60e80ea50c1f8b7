use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eigenperturb::{derivatives_at_diagonal, fd_eigen_derivatives, SymmetricMatrix};
use crate::error::{Error, Result};

/// Random diagonal matrices compared against the finite-difference oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigcheckConfig {
    pub sizes: Vec<usize>,
    /// Matrices per size.
    pub draws: usize,
    pub seed: u64,
    pub step: f64,
    /// Smallest gap between adjacent diagonal entries.
    pub min_gap: f64,
    pub tol_first: f64,
    pub tol_second: f64,
}

impl Default for EigcheckConfig {
    fn default() -> Self {
        Self {
            sizes: vec![2, 3, 4],
            draws: 100,
            seed: 0,
            step: 1e-5,
            min_gap: 0.5,
            tol_first: 1e-6,
            tol_second: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigcheckFailure {
    pub n: usize,
    pub draw: usize,
    pub k: usize,
    pub diagonal: Vec<f64>,
    pub rel_err_first: f64,
    pub rel_err_second: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigcheckSummary {
    pub draws: usize,
    pub max_rel_err_first: f64,
    pub max_rel_err_second: f64,
    pub failures: Vec<EigcheckFailure>,
}

impl EigcheckSummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Diagonal in descending order: the last entry is uniform in `[-2, 2]`, each
/// earlier one exceeds its successor by `min_gap + U[0, 2]`.
fn draw_diagonal(rng: &mut ChaCha8Rng, n: usize, min_gap: f64) -> Vec<f64> {
    let mut d = vec![0.0; n];
    d[n - 1] = rng.gen_range(-2.0..=2.0);
    for i in (0..n - 1).rev() {
        d[i] = d[i + 1] + min_gap + rng.gen_range(0.0..=2.0);
    }
    d
}

/// Every eigenpair of every draw: closed-form kernels (folded to symmetric
/// directions) against central differences of the eigensolver.
pub fn run_eigcheck(cfg: &EigcheckConfig) -> Result<EigcheckSummary> {
    if cfg.sizes.iter().any(|&n| n < 2) {
        return Err(Error::InvalidDimension(cfg.sizes.iter().copied().min().unwrap_or(0)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut summary =
        EigcheckSummary { draws: 0, max_rel_err_first: 0.0, max_rel_err_second: 0.0, failures: Vec::new() };
    for &n in &cfg.sizes {
        for draw in 0..cfg.draws {
            let diagonal = draw_diagonal(&mut rng, n, cfg.min_gap);
            let w = SymmetricMatrix::diagonal(&diagonal)?;
            summary.draws += 1;
            for k in 0..n {
                let exact = derivatives_at_diagonal(&w, k)?.fold();
                let fd = fd_eigen_derivatives(&w, k, cfg.step)?;
                let (e1, e2) = exact.relative_errors(&fd);
                summary.max_rel_err_first = summary.max_rel_err_first.max(e1);
                summary.max_rel_err_second = summary.max_rel_err_second.max(e2);
                if !(e1 <= cfg.tol_first && e2 <= cfg.tol_second) {
                    summary.failures.push(EigcheckFailure {
                        n,
                        draw,
                        k,
                        diagonal: diagonal.clone(),
                        rel_err_first: e1,
                        rel_err_second: e2,
                    });
                }
            }
        }
    }
    Ok(summary)
}
