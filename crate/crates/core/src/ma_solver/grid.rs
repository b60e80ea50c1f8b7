//! Uniform lattice restricted to an open disc, with Shortley–Weller arms
//! along four directions.

use serde::Serialize;

use crate::error::{Error, Result};

/// Nodes closer than `R·(1 - INSIDE_TOL)` to the origin are unknowns.
pub const INSIDE_TOL: f64 = 1e-12;

/// Lattice steps of the four stencil lines: `e₁`, `e₂`, `e₁+e₂`, `e₁-e₂`.
pub const DIRECTIONS: [(i64, i64); 4] = [(1, 0), (0, 1), (1, 1), (1, -1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    /// All eight lattice neighbours are unknowns.
    Interior,
    /// At least one arm is cut short by the circle.
    BoundaryAdjacent,
    /// Lattice point outside the open disc.
    Exterior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArmEnd {
    Node(usize),
    /// Index into [`DiscGrid::boundary_points`].
    Boundary(usize),
}

/// One side of a stencil line. `t ∈ (0, 1]` is the fraction of a full lattice
/// step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arm {
    pub end: ArmEnd,
    pub t: f64,
}

/// Three-point line through a node, possibly with unequal arms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineStencil {
    pub minus: Arm,
    pub plus: Arm,
    /// Length of a full lattice step along this line.
    pub step: f64,
}

impl LineStencil {
    /// Weights `(minus, centre, plus)` of the second directional derivative
    /// from the quadratic through the three points.
    pub fn second_weights(&self) -> (f64, f64, f64) {
        let a = self.minus.t * self.step;
        let b = self.plus.t * self.step;
        (2.0 / (a * (a + b)), -2.0 / (a * b), 2.0 / (b * (a + b)))
    }

    /// Weights `(minus, centre, plus)` of the first directional derivative.
    pub fn first_weights(&self) -> (f64, f64, f64) {
        let a = self.minus.t * self.step;
        let b = self.plus.t * self.step;
        (-b / (a * (a + b)), (b - a) / (a * b), a / (b * (a + b)))
    }

    pub fn is_full(&self) -> bool {
        matches!(self.minus.end, ArmEnd::Node(_)) && matches!(self.plus.end, ArmEnd::Node(_))
    }
}

#[derive(Debug, Clone)]
pub struct GridNode {
    pub i: i64,
    pub j: i64,
    pub x: [f64; 2],
    pub class: NodeClass,
    /// One line per entry of [`DIRECTIONS`].
    pub lines: [LineStencil; 4],
}

/// Lattice `h·ℤ²` intersected with the open disc `B_R`, unknowns ordered
/// row by row (`x₂` outer, `x₁` inner).
#[derive(Debug, Clone)]
pub struct DiscGrid {
    radius: f64,
    h: f64,
    half: i64,
    lookup: Vec<Option<usize>>,
    nodes: Vec<GridNode>,
    boundary_points: Vec<[f64; 2]>,
}

impl DiscGrid {
    pub fn new(radius: f64, h: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidGrid(format!("radius must be positive, got {radius}")));
        }
        if !(h > 0.0 && h.is_finite()) || h >= radius {
            return Err(Error::InvalidGrid(format!("spacing {h} must lie in (0, R = {radius})")));
        }
        let half = (radius / h).ceil() as i64 + 1;
        let width = (2 * half + 1) as usize;
        if width > 20_000 {
            return Err(Error::InvalidGrid(format!("R/h = {} is too fine", radius / h)));
        }
        let limit = radius * radius * (1.0 - INSIDE_TOL);
        let coord = |i: i64, j: i64| [i as f64 * h, j as f64 * h];
        let inside = |i: i64, j: i64| {
            let x = coord(i, j);
            x[0] * x[0] + x[1] * x[1] < limit
        };

        let mut lookup = vec![None; width * width];
        let mut positions = Vec::new();
        for j in -half..=half {
            for i in -half..=half {
                if inside(i, j) {
                    lookup[((j + half) as usize) * width + (i + half) as usize] = Some(positions.len());
                    positions.push((i, j));
                }
            }
        }
        let at = |i: i64, j: i64| -> Option<usize> {
            if i.abs() > half || j.abs() > half {
                return None;
            }
            lookup[((j + half) as usize) * width + (i + half) as usize]
        };

        let mut boundary_points = Vec::new();
        let mut nodes = Vec::with_capacity(positions.len());
        for &(i, j) in &positions {
            let x = coord(i, j);
            let mut full = true;
            let mut arm = |di: i64, dj: i64| -> Arm {
                if let Some(n) = at(i + di, j + dj) {
                    return Arm { end: ArmEnd::Node(n), t: 1.0 };
                }
                full = false;
                let d = [di as f64 * h, dj as f64 * h];
                let t = exit_fraction(x, d, radius);
                boundary_points.push([x[0] + t * d[0], x[1] + t * d[1]]);
                Arm { end: ArmEnd::Boundary(boundary_points.len() - 1), t }
            };
            let lines = DIRECTIONS.map(|(di, dj)| {
                let minus = arm(-di, -dj);
                let plus = arm(di, dj);
                let step = h * ((di * di + dj * dj) as f64).sqrt();
                LineStencil { minus, plus, step }
            });
            let class = if full { NodeClass::Interior } else { NodeClass::BoundaryAdjacent };
            nodes.push(GridNode { i, j, x, class, lines });
        }
        if nodes.is_empty() {
            return Err(Error::InvalidGrid("no lattice points inside the disc".into()));
        }
        Ok(Self { radius, h, half, lookup, nodes, boundary_points })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[GridNode] {
        &self.nodes
    }

    pub fn node(&self, n: usize) -> &GridNode {
        &self.nodes[n]
    }

    pub fn boundary_points(&self) -> &[[f64; 2]] {
        &self.boundary_points
    }

    /// Unknown index at lattice position `(i, j)`.
    pub fn index_of(&self, i: i64, j: i64) -> Option<usize> {
        if i.abs() > self.half || j.abs() > self.half {
            return None;
        }
        let width = (2 * self.half + 1) as usize;
        self.lookup[((j + self.half) as usize) * width + (i + self.half) as usize]
    }

    pub fn class_at(&self, i: i64, j: i64) -> NodeClass {
        self.index_of(i, j).map_or(NodeClass::Exterior, |n| self.nodes[n].class)
    }

    /// Index of the node at the origin; always present.
    pub fn origin(&self) -> usize {
        self.index_of(0, 0).expect("origin is a lattice node")
    }

    /// Largest difference between indices coupled by a stencil.
    pub fn bandwidth(&self) -> usize {
        let mut bw = 0;
        for (n, node) in self.nodes.iter().enumerate() {
            for line in &node.lines {
                for arm in [line.minus, line.plus] {
                    if let ArmEnd::Node(m) = arm.end {
                        bw = bw.max(n.abs_diff(m));
                    }
                }
            }
        }
        bw
    }

    pub fn interior_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().enumerate().filter(|(_, n)| n.class == NodeClass::Interior).map(|(k, _)| k)
    }
}

/// Smallest `t > 0` with `|x + t d| = R`, for `x` strictly inside.
fn exit_fraction(x: [f64; 2], d: [f64; 2], radius: f64) -> f64 {
    let a = d[0] * d[0] + d[1] * d[1];
    let b = 2.0 * (x[0] * d[0] + x[1] * d[1]);
    let c = x[0] * x[0] + x[1] * x[1] - radius * radius;
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    // c < 0 so the roots have opposite signs; pick the stable formula.
    let t = if b > 0.0 { -2.0 * c / (b + disc) } else { (disc - b) / (2.0 * a) };
    t.clamp(f64::MIN_POSITIVE, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_classes() {
        let g = DiscGrid::new(1.0, 0.25).unwrap();
        // Lattice points of (1/4)ℤ² strictly inside the unit disc: i² + j² < 16.
        let expected = (-4i64..=4)
            .flat_map(|i| (-4i64..=4).map(move |j| (i, j)))
            .filter(|(i, j)| i * i + j * j < 16)
            .count();
        assert_eq!(g.len(), expected);
        assert_eq!(g.class_at(0, 0), NodeClass::Interior);
        assert_eq!(g.class_at(3, 0), NodeClass::BoundaryAdjacent);
        assert_eq!(g.class_at(4, 0), NodeClass::Exterior);
        assert_eq!(g.node(g.origin()).x, [0.0, 0.0]);
    }

    #[test]
    fn boundary_arms_land_on_circle() {
        let g = DiscGrid::new(1.3, 0.1).unwrap();
        for p in g.boundary_points() {
            assert!((p[0].hypot(p[1]) - 1.3).abs() < 1e-12);
        }
        for node in g.nodes() {
            for line in &node.lines {
                for arm in [line.minus, line.plus] {
                    assert!(arm.t > 0.0 && arm.t <= 1.0);
                }
            }
        }
    }

    #[test]
    fn weights_are_exact_on_quadratics() {
        let line = LineStencil {
            minus: Arm { end: ArmEnd::Boundary(0), t: 0.3 },
            plus: Arm { end: ArmEnd::Node(0), t: 1.0 },
            step: 0.1,
        };
        // p(s) = 2 + 3s + 5s², p'' = 10, p'(0) = 3.
        let p = |s: f64| 2.0 + 3.0 * s + 5.0 * s * s;
        let vals = (p(-0.03), p(0.0), p(0.1));
        let (a, b, c) = line.second_weights();
        assert!((a * vals.0 + b * vals.1 + c * vals.2 - 10.0).abs() < 1e-10);
        let (a, b, c) = line.first_weights();
        assert!((a * vals.0 + b * vals.1 + c * vals.2 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ordering_is_row_major() {
        let g = DiscGrid::new(1.0, 0.1).unwrap();
        for w in g.nodes().windows(2) {
            assert!((w[0].j, w[0].i) < (w[1].j, w[1].i));
        }
        assert!(g.bandwidth() <= 2 * (1.0f64 / 0.1).ceil() as usize + 2);
    }

    #[test]
    fn rejects_bad_spacing() {
        assert!(DiscGrid::new(1.0, 0.0).is_err());
        assert!(DiscGrid::new(1.0, 2.0).is_err());
        assert!(DiscGrid::new(-1.0, 0.1).is_err());
    }
}
