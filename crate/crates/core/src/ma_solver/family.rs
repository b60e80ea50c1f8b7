//! Exact convex solutions with closed-form `det D²u*`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Manufactured solution families.
///
/// Serialized adjacently tagged: `{"family": "exponential_radial", "params": {"kappa": 1.0}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum ExactSolutionSpec {
    /// `u* = (a x₁² + 2b x₁x₂ + c x₂²) / 2`.
    Quadratic { a: f64, b: f64, c: f64 },
    /// `u* = κ⁻¹ exp(κ|x|²/2)`.
    ExponentialRadial { kappa: f64 },
    /// `u* = (a x₁² + 2b x₁x₂ + c x₂²) / 2 + ε cos(ω·x)`.
    Tilted { a: f64, b: f64, c: f64, eps: f64, omega: [f64; 2] },
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

impl ExactSolutionSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Quadratic { .. } => "quadratic",
            Self::ExponentialRadial { .. } => "exponential_radial",
            Self::Tilted { .. } => "tilted",
        }
    }

    /// Compact `key=value` list separated by `;`.
    pub fn params_string(&self) -> String {
        match self {
            Self::Quadratic { a, b, c } => format!("a={a};b={b};c={c}"),
            Self::ExponentialRadial { kappa } => format!("kappa={kappa}"),
            Self::Tilted { a, b, c, eps, omega } => {
                format!("a={a};b={b};c={c};eps={eps};omega1={};omega2={}", omega[0], omega[1])
            }
        }
    }

    pub fn is_radial(&self) -> bool {
        match self {
            Self::Quadratic { a, b, c } => a == c && *b == 0.0,
            Self::ExponentialRadial { .. } => true,
            Self::Tilted { .. } => false,
        }
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        match *self {
            Self::Quadratic { a, b, c } => quad(a, b, c, x),
            Self::ExponentialRadial { kappa } => (0.5 * kappa * dot(x, x)).exp() / kappa,
            Self::Tilted { a, b, c, eps, omega } => quad(a, b, c, x) + eps * dot(omega, x).cos(),
        }
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        match *self {
            Self::Quadratic { a, b, c } => [a * x[0] + b * x[1], b * x[0] + c * x[1]],
            Self::ExponentialRadial { kappa } => {
                let e = (0.5 * kappa * dot(x, x)).exp();
                [e * x[0], e * x[1]]
            }
            Self::Tilted { a, b, c, eps, omega } => {
                let s = eps * dot(omega, x).sin();
                [a * x[0] + b * x[1] - s * omega[0], b * x[0] + c * x[1] - s * omega[1]]
            }
        }
    }

    /// `(u11, u12, u22)`.
    pub fn hessian(&self, x: [f64; 2]) -> [f64; 3] {
        match *self {
            Self::Quadratic { a, b, c } => [a, b, c],
            Self::ExponentialRadial { kappa } => {
                let e = (0.5 * kappa * dot(x, x)).exp();
                [
                    e * (1.0 + kappa * x[0] * x[0]),
                    e * kappa * x[0] * x[1],
                    e * (1.0 + kappa * x[1] * x[1]),
                ]
            }
            Self::Tilted { a, b, c, eps, omega } => {
                let k = eps * dot(omega, x).cos();
                [a - k * omega[0] * omega[0], b - k * omega[0] * omega[1], c - k * omega[1] * omega[1]]
            }
        }
    }

    /// `f = det D²u*`.
    pub fn rhs(&self, x: [f64; 2]) -> f64 {
        match *self {
            Self::Quadratic { a, b, c } => a * c - b * b,
            Self::ExponentialRadial { kappa } => {
                let r2 = dot(x, x);
                (kappa * r2).exp() * (1.0 + kappa * r2)
            }
            Self::Tilted { a, b, c, eps, omega } => {
                a * c - b * b - eps * adj_form(a, b, c, omega) * dot(omega, x).cos()
            }
        }
    }

    pub fn rhs_gradient(&self, x: [f64; 2]) -> [f64; 2] {
        match *self {
            Self::Quadratic { .. } => [0.0, 0.0],
            Self::ExponentialRadial { kappa } => {
                let r2 = dot(x, x);
                let s = 2.0 * kappa * (kappa * r2).exp() * (2.0 + kappa * r2);
                [s * x[0], s * x[1]]
            }
            Self::Tilted { a, b, c, eps, omega } => {
                let s = eps * adj_form(a, b, c, omega) * dot(omega, x).sin();
                [s * omega[0], s * omega[1]]
            }
        }
    }

    /// `(f11, f12, f22)`.
    pub fn rhs_hessian(&self, x: [f64; 2]) -> [f64; 3] {
        match *self {
            Self::Quadratic { .. } => [0.0; 3],
            Self::ExponentialRadial { kappa } => {
                let r2 = dot(x, x);
                let e = 2.0 * kappa * (kappa * r2).exp();
                let diag = 2.0 + kappa * r2;
                let off = 2.0 * kappa * (3.0 + kappa * r2);
                [e * (diag + off * x[0] * x[0]), e * off * x[0] * x[1], e * (diag + off * x[1] * x[1])]
            }
            Self::Tilted { a, b, c, eps, omega } => {
                let s = eps * adj_form(a, b, c, omega) * dot(omega, x).cos();
                [s * omega[0] * omega[0], s * omega[0] * omega[1], s * omega[1] * omega[1]]
            }
        }
    }

    /// Fails with `NotConvex` unless `D²u*` is positive definite on the
    /// closed disc of radius `radius`.
    pub fn check_convex(&self, radius: f64) -> Result<()> {
        match *self {
            Self::Quadratic { a, b, c } => {
                if a > 0.0 && a * c - b * b > 0.0 {
                    Ok(())
                } else {
                    Err(Error::NotConvex(format!("ac - b² = {} with a = {a}", a * c - b * b)))
                }
            }
            Self::ExponentialRadial { kappa } => {
                if kappa > 0.0 && kappa.is_finite() {
                    Ok(())
                } else {
                    Err(Error::NotConvex(format!("kappa = {kappa} must be positive")))
                }
            }
            Self::Tilted { a, b, c, eps, omega } => {
                let _ = radius;
                // D²u* = A - t ωωᵀ with t = ε cos(ω·x) ∈ [-|ε|, |ε|]:
                // det = det A - t K and the (1,1) entry is a - t ω₁².
                let det = a * c - b * b;
                let k = adj_form(a, b, c, omega);
                let worst_det = det - eps.abs() * k;
                let worst_a = a - eps.abs() * omega[0] * omega[0];
                if a > 0.0 && det > 0.0 && worst_det > 0.0 && worst_a > 0.0 {
                    Ok(())
                } else {
                    Err(Error::NotConvex(format!(
                        "perturbation too large: det A - |eps| K = {worst_det}, a - |eps| w1² = {worst_a}"
                    )))
                }
            }
        }
    }

    /// `(m, M)`: the extrema of `f` over the closed disc.
    pub fn rhs_bounds(&self, radius: f64) -> (f64, f64) {
        match *self {
            Self::Quadratic { a, b, c } => {
                let f = a * c - b * b;
                (f, f)
            }
            Self::ExponentialRadial { kappa } => {
                let r2 = radius * radius;
                (1.0, (kappa * r2).exp() * (1.0 + kappa * r2))
            }
            Self::Tilted { a, b, c, eps, omega } => {
                // f = det A - ε K cos θ, θ = ω·x ranging over [-|ω|R, |ω|R].
                let det = a * c - b * b;
                let k = adj_form(a, b, c, omega);
                let span = (omega[0].hypot(omega[1]) * radius).min(std::f64::consts::PI);
                let cos_min = span.cos();
                let lo = det - eps * k * if eps >= 0.0 { 1.0 } else { cos_min };
                let hi = det - eps * k * if eps >= 0.0 { cos_min } else { 1.0 };
                (lo, hi)
            }
        }
    }
}

fn quad(a: f64, b: f64, c: f64, x: [f64; 2]) -> f64 {
    0.5 * (a * x[0] * x[0] + 2.0 * b * x[0] * x[1] + c * x[1] * x[1])
}

/// `ωᵀ adj(A) ω` with `adj([[a, b], [b, c]]) = [[c, -b], [-b, a]]`.
fn adj_form(a: f64, b: f64, c: f64, omega: [f64; 2]) -> f64 {
    c * omega[0] * omega[0] - 2.0 * b * omega[0] * omega[1] + a * omega[1] * omega[1]
}
