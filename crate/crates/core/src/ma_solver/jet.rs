//! Centered finite-difference jets up to fourth order on the lattice.

use super::grid::DiscGrid;

/// Derivatives of a scalar field at one node. Tensors are fully symmetric and
/// stored dense for easy rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: [f64; 2],
    pub d2: [[f64; 2]; 2],
    pub d3: [[[f64; 2]; 2]; 2],
    pub d4: [[[[f64; 2]; 2]; 2]; 2],
}

/// 1-D centered stencils on offsets `-2..=2`; all second-order accurate.
const D0: [f64; 5] = [0.0, 0.0, 1.0, 0.0, 0.0];
const D1: [f64; 5] = [0.0, -0.5, 0.0, 0.5, 0.0];
const D2: [f64; 5] = [0.0, 1.0, -2.0, 1.0, 0.0];
const D3: [f64; 5] = [-0.5, 1.0, 0.0, -1.0, 0.5];
const D4: [f64; 5] = [1.0, -4.0, 6.0, -4.0, 1.0];
const STENCILS: [[f64; 5]; 5] = [D0, D1, D2, D3, D4];

/// Jet of `values` at node `n`, or `None` unless the whole 5×5 block around
/// it consists of unknowns and `|x| ≤ R - 2h`.
pub fn jet_at(grid: &DiscGrid, values: &[f64], n: usize) -> Option<Jet> {
    let node = grid.node(n);
    let h = grid.h();
    let reach = grid.radius() - 2.0 * h;
    if node.x[0].hypot(node.x[1]) > reach {
        return None;
    }
    let mut block = [[0.0; 5]; 5];
    for (a, row) in block.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            let m = grid.index_of(node.i + a as i64 - 2, node.j + b as i64 - 2)?;
            *v = values[m];
        }
    }
    // ∂^p_1 ∂^q_2 via the tensor product of 1-D stencils.
    let mixed = |p: usize, q: usize| -> f64 {
        let (sx, sy) = (&STENCILS[p], &STENCILS[q]);
        let mut acc = 0.0;
        for a in 0..5 {
            if sx[a] == 0.0 {
                continue;
            }
            for b in 0..5 {
                acc += sx[a] * sy[b] * block[a][b];
            }
        }
        acc / h.powi((p + q) as i32)
    };
    let mut jet = Jet {
        value: block[2][2],
        d1: [0.0; 2],
        d2: [[0.0; 2]; 2],
        d3: [[[0.0; 2]; 2]; 2],
        d4: [[[[0.0; 2]; 2]; 2]; 2],
    };
    let ones = |idx: &[usize]| idx.iter().filter(|&&i| i == 0).count();
    for i in 0..2 {
        jet.d1[i] = mixed(ones(&[i]), 1 - ones(&[i]));
        for j in 0..2 {
            let p = ones(&[i, j]);
            jet.d2[i][j] = mixed(p, 2 - p);
            for k in 0..2 {
                let p = ones(&[i, j, k]);
                jet.d3[i][j][k] = mixed(p, 3 - p);
                for l in 0..2 {
                    let p = ones(&[i, j, k, l]);
                    jet.d4[i][j][k][l] = mixed(p, 4 - p);
                }
            }
        }
    }
    Some(jet)
}

impl Jet {
    /// Components in the frame `x = R x'` with `R = [τ, τ⊥]`, `τ⊥ = (-τ₂, τ₁)`.
    pub fn rotated(&self, tau: [f64; 2]) -> Jet {
        let r = [[tau[0], -tau[1]], [tau[1], tau[0]]];
        let mut out = *self;
        for a in 0..2 {
            out.d1[a] = (0..2).map(|i| r[i][a] * self.d1[i]).sum();
            for b in 0..2 {
                let mut s2 = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        s2 += r[i][a] * r[j][b] * self.d2[i][j];
                    }
                }
                out.d2[a][b] = s2;
                for c in 0..2 {
                    let mut s3 = 0.0;
                    for i in 0..2 {
                        for j in 0..2 {
                            for k in 0..2 {
                                s3 += r[i][a] * r[j][b] * r[k][c] * self.d3[i][j][k];
                            }
                        }
                    }
                    out.d3[a][b][c] = s3;
                    for d in 0..2 {
                        let mut s4 = 0.0;
                        for i in 0..2 {
                            for j in 0..2 {
                                for k in 0..2 {
                                    for l in 0..2 {
                                        s4 += r[i][a] * r[j][b] * r[k][c] * r[l][d] * self.d4[i][j][k][l];
                                    }
                                }
                            }
                        }
                        out.d4[a][b][c][d] = s4;
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(x: [f64; 2]) -> f64 {
        // Quartic: its third and fourth derivatives are reproduced exactly
        // up to rounding by centered stencils.
        let [a, b] = x;
        1.0 + 2.0 * a - b + 0.5 * a * a + a * b + 0.3 * a.powi(3) - 0.7 * a * a * b
            + 0.2 * a.powi(4)
            + 0.4 * a * a * b * b
            - 0.1 * a * b.powi(3)
    }

    #[test]
    fn reproduces_quartic_derivatives() {
        let grid = DiscGrid::new(1.0, 0.05).unwrap();
        let vals: Vec<f64> = grid.nodes().iter().map(|n| poly(n.x)).collect();
        let n = grid.index_of(3, -2).unwrap();
        let j = jet_at(&grid, &vals, n).unwrap();
        let [a, b] = grid.node(n).x;
        assert!((j.d4[0][0][0][0] - 0.2 * 24.0).abs() < 1e-6);
        assert!((j.d4[0][0][1][1] - 0.4 * 4.0).abs() < 1e-6);
        assert!((j.d4[0][1][1][1] - (-0.6)).abs() < 1e-6);
        let u111 = 0.3 * 6.0 + 0.2 * 24.0 * a;
        assert!((j.d3[0][0][0] - u111).abs() < 1e-6);
        let u112 = -1.4 + 1.6 * b;
        assert!((j.d3[0][0][1] - u112).abs() < 1e-6);
        assert!((j.d3[1][0][0] - u112).abs() < 1e-6);
    }

    #[test]
    fn needs_full_block() {
        let grid = DiscGrid::new(1.0, 0.1).unwrap();
        let vals = vec![0.0; grid.len()];
        assert!(jet_at(&grid, &vals, grid.origin()).is_some());
        assert!(jet_at(&grid, &vals, grid.index_of(9, 0).unwrap()).is_none());
    }

    #[test]
    fn rotation_by_quarter_turn() {
        let grid = DiscGrid::new(1.0, 0.05).unwrap();
        let vals: Vec<f64> = grid.nodes().iter().map(|n| poly(n.x)).collect();
        let j = jet_at(&grid, &vals, grid.origin()).unwrap();
        // τ = e₂ gives x' = (x₂, -x₁).
        let r = j.rotated([0.0, 1.0]);
        assert!((r.d1[0] - j.d1[1]).abs() < 1e-12);
        assert!((r.d1[1] + j.d1[0]).abs() < 1e-12);
        assert!((r.d4[0][0][0][0] - j.d4[1][1][1][1]).abs() < 1e-9);
    }
}
