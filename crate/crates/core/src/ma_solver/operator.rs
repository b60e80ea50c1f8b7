//! Discrete Hessian, the residual `det D²_h u - f` and its Jacobian.

use rayon::prelude::*;

use super::band::BandMatrix;
use super::grid::{ArmEnd, DiscGrid, LineStencil, NodeClass};
use super::problem::ProblemSpec;

#[inline]
fn arm_value(end: ArmEnd, u: &[f64], g: &[f64]) -> f64 {
    match end {
        ArmEnd::Node(m) => u[m],
        ArmEnd::Boundary(b) => g[b],
    }
}

#[inline]
fn second(line: &LineStencil, centre: f64, u: &[f64], g: &[f64]) -> f64 {
    let (wm, wc, wp) = line.second_weights();
    wm * arm_value(line.minus.end, u, g) + wc * centre + wp * arm_value(line.plus.end, u, g)
}

#[inline]
fn first(line: &LineStencil, centre: f64, u: &[f64], g: &[f64]) -> f64 {
    let (wm, wc, wp) = line.first_weights();
    wm * arm_value(line.minus.end, u, g) + wc * centre + wp * arm_value(line.plus.end, u, g)
}

/// `(u11, u12, u22)` at node `n`; the mixed term comes from the two diagonal
/// lines, `u12 = (u_ξξ - u_ηη) / 2`.
pub fn discrete_hessian(grid: &DiscGrid, u: &[f64], g: &[f64], n: usize) -> [f64; 3] {
    let node = grid.node(n);
    let c = u[n];
    let dxx = second(&node.lines[0], c, u, g);
    let dyy = second(&node.lines[1], c, u, g);
    let dpp = second(&node.lines[2], c, u, g);
    let dmm = second(&node.lines[3], c, u, g);
    [dxx, 0.5 * (dpp - dmm), dyy]
}

pub fn discrete_gradient(grid: &DiscGrid, u: &[f64], g: &[f64], n: usize) -> [f64; 2] {
    let node = grid.node(n);
    [first(&node.lines[0], u[n], u, g), first(&node.lines[1], u[n], u, g)]
}

pub fn all_hessians(grid: &DiscGrid, u: &[f64], g: &[f64]) -> Vec<[f64; 3]> {
    (0..grid.len()).into_par_iter().map(|n| discrete_hessian(grid, u, g, n)).collect()
}

pub fn all_gradients(grid: &DiscGrid, u: &[f64], g: &[f64]) -> Vec<[f64; 2]> {
    (0..grid.len()).into_par_iter().map(|n| discrete_gradient(grid, u, g, n)).collect()
}

pub fn min_eigenvalue(h: [f64; 3]) -> f64 {
    0.5 * (h[0] + h[2]) - (0.5 * (h[0] - h[2])).hypot(h[1])
}

/// `F(u)_n = det D²_h u(x_n) - f(x_n)` for every unknown.
pub fn residual(spec: &ProblemSpec, u: &[f64]) -> Vec<f64> {
    all_hessians(&spec.grid, u, &spec.g)
        .into_iter()
        .zip(&spec.f)
        .map(|(h, f)| h[0] * h[2] - h[1] * h[1] - f)
        .collect()
}

/// Max `|F|` and min `λ_min(D²_h u)` over interior nodes.
pub fn interior_summary(grid: &DiscGrid, hess: &[[f64; 3]], res: &[f64]) -> (f64, f64) {
    let mut rmax = 0.0f64;
    let mut margin = f64::INFINITY;
    for n in grid.interior_indices() {
        rmax = rmax.max(res[n].abs());
        margin = margin.min(min_eigenvalue(hess[n]));
    }
    (rmax, margin)
}

/// Row `n` of the Jacobian: `D_yy δ_xx + D_xx δ_yy - 2 D_xy δ_xy`.
fn jacobian_row(grid: &DiscGrid, hess: [f64; 3], n: usize) -> Vec<(usize, f64)> {
    let node = grid.node(n);
    let [dxx, dxy, dyy] = hess;
    // Coefficients multiplying each line's second difference.
    let coef = [dyy, dxx, -dxy, dxy];
    let mut row = Vec::with_capacity(9);
    let mut centre = 0.0;
    for (line, c) in node.lines.iter().zip(coef) {
        let (wm, wc, wp) = line.second_weights();
        centre += c * wc;
        for (arm, w) in [(line.minus, wm), (line.plus, wp)] {
            if let ArmEnd::Node(m) = arm.end {
                row.push((m, c * w));
            }
        }
    }
    row.push((n, centre));
    row
}

pub fn jacobian(spec: &ProblemSpec, hess: &[[f64; 3]]) -> BandMatrix {
    let grid = &spec.grid;
    let bw = grid.bandwidth();
    let rows: Vec<Vec<(usize, f64)>> =
        (0..grid.len()).into_par_iter().map(|n| jacobian_row(grid, hess[n], n)).collect();
    let mut a = BandMatrix::zeros(grid.len(), bw, bw);
    for (n, row) in rows.into_iter().enumerate() {
        for (m, v) in row {
            a.add(n, m, v);
        }
    }
    a
}

/// Min `λ_min(D²_h u)` over every unknown.
pub fn global_margin(hess: &[[f64; 3]]) -> f64 {
    hess.iter().map(|h| min_eigenvalue(*h)).fold(f64::INFINITY, f64::min)
}

/// Count of nodes per class, `(interior, boundary_adjacent)`.
pub fn class_counts(grid: &DiscGrid) -> (usize, usize) {
    let interior = grid.nodes().iter().filter(|n| n.class == NodeClass::Interior).count();
    (interior, grid.len() - interior)
}
