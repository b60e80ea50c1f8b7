//! Banded LU with partial pivoting.

use crate::error::{Error, Result};

/// Square band matrix stored column by column with room for pivoting fill:
/// entry `(i, j)` lives at `data[j * ldab + kl + ku + i - j]`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self { n, kl, ku, ldab, data: vec![0.0; n * ldab] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + self.ku >= j && j + self.kl >= i, "({i}, {j}) outside band");
        j * self.ldab + self.kl + self.ku + i - j
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + self.ku < j || j + self.kl < i {
            return 0.0;
        }
        self.data[self.slot(i, j)]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (j, xj) in x.iter().enumerate() {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for (i, yi) in y.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *yi += self.get(i, j) * xj;
            }
        }
        y
    }

    /// Factor in place and solve `A x = b`.
    pub fn solve(mut self, b: &[f64]) -> Result<Vec<f64>> {
        let (n, kl, ku, ldab) = (self.n, self.kl, self.ku, self.ldab);
        let kv = kl + ku;
        let mut piv = vec![0usize; n];
        let mut ju = 0usize;
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = scale * f64::EPSILON * n as f64;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let diag = j * ldab + kv;
            let mut p = 0;
            let mut best = self.data[diag].abs();
            for r in 1..=km {
                let v = self.data[diag + r].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > tiny) {
                return Err(Error::SingularJacobian { column: j });
            }
            piv[j] = j + p;
            ju = ju.max((j + ku + p).min(n - 1));
            if p != 0 {
                for c in j..=ju {
                    let a = c * ldab + kv + j - c;
                    let b = c * ldab + kv + j + p - c;
                    self.data.swap(a, b);
                }
            }
            let inv = 1.0 / self.data[diag];
            for r in 1..=km {
                self.data[diag + r] *= inv;
            }
            for c in (j + 1)..=ju {
                let top = self.data[c * ldab + kv + j - c];
                if top != 0.0 {
                    for r in 1..=km {
                        let l = self.data[diag + r];
                        self.data[c * ldab + kv + j + r - c] -= l * top;
                    }
                }
            }
        }

        let mut x = b.to_vec();
        for j in 0..n {
            if piv[j] != j {
                x.swap(j, piv[j]);
            }
            let km = kl.min(n - 1 - j);
            let xj = x[j];
            if xj != 0.0 {
                for r in 1..=km {
                    x[j + r] -= self.data[j * ldab + kv + r] * xj;
                }
            }
        }
        for j in (0..n).rev() {
            x[j] /= self.data[j * ldab + kv];
            let xj = x[j];
            let top = j.saturating_sub(kv);
            for i in top..j {
                x[i] -= self.data[j * ldab + kv + i - j] * xj;
            }
        }
        Ok(x)
    }
}
