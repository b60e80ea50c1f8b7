use super::AuxConfig;

/// The two factors `(r² - |x|² + ⟨x,τ⟩², r² - ⟨x,τ⟩²)`.
pub fn eta_factors(x: [f64; 2], tau: [f64; 2], cfg: &AuxConfig) -> (f64, f64) {
    let s = x[0] * tau[0] + x[1] * tau[1];
    let s2 = s * s;
    let r2 = cfg.r * cfg.r;
    (r2 - (x[0] * x[0] + x[1] * x[1]) + s2, r2 - s2)
}

pub fn eta(x: [f64; 2], tau: [f64; 2], cfg: &AuxConfig) -> f64 {
    let (a, b) = eta_factors(x, tau, cfg);
    a * b
}

/// Both factors of `η` strictly positive.
pub fn sigma_membership(x: [f64; 2], tau: [f64; 2], cfg: &AuxConfig) -> bool {
    let (a, b) = eta_factors(x, tau, cfg);
    a > 0.0 && b > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> AuxConfig {
        AuxConfig::new(2.0f64.sqrt(), 1.0)
    }

    #[test]
    fn product_formula_examples() {
        let c = cfg();
        let r = c.r;
        assert!((eta([0.0, 0.0], [0.6, 0.8], &c) - r.powi(4)).abs() < 1e-15);
        let v = eta([r / 2.0, 0.0], [1.0, 0.0], &c);
        assert!((v - 0.75 * r.powi(4)).abs() < 1e-15);
        let x = [0.3, -0.4];
        let adapted = (r * r - x[1] * x[1]) * (r * r - x[0] * x[0]);
        assert!((eta(x, [1.0, 0.0], &c) - adapted).abs() < 1e-15);
    }

    #[test]
    fn membership_edges() {
        let c = cfg();
        assert!(!sigma_membership([c.r, 0.0], [0.0, 1.0], &c));
        assert!(sigma_membership([0.99 * c.r, 0.0], [0.0, 1.0], &c));
        let big_r = c.r * std::f64::consts::SQRT_2;
        for k in 0..64 {
            let a = k as f64 * 0.1;
            let tau = [a.cos(), a.sin()];
            assert!(!sigma_membership([big_r, 0.0], tau, &c));
            assert!(!sigma_membership([0.0, -big_r * 1.01], tau, &c));
        }
    }
}
