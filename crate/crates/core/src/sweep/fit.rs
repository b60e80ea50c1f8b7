use serde::Serialize;

use super::group_by_class;
use super::record::SweepRecord;
use crate::error::{Error, Result};
use crate::ma_solver::ClassBounds;

/// Fewest usable records `fit_constants` accepts.
pub const MIN_RECORDS: usize = 3;

/// Upper envelope `ln|D²u(0)| ≤ ln Ĉ₁ + Ĉ₂ s_r` over one `(m, M)` class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantFit {
    pub class: ClassBounds,
    pub records: usize,
    pub c1_hat: f64,
    pub log_c1_hat: f64,
    /// Slope over `s_r = sup|Du|²/r²`, clamped at zero.
    pub c2_hat_r: f64,
    /// The same slope restated over `s_R = sup|Du|²/R²` (`2 Ĉ₂`).
    pub c2_hat_big_r: f64,
    /// Unclamped least-squares slope.
    pub c2_least_squares: f64,
    /// `c0 + 2 = 32/m + 2`, the exponent over `r²` produced by the case-B chain.
    pub c2_reference: f64,
    pub c2_within_reference: bool,
    /// `ln Ĉ₁ + Ĉ₂ s_r - ln|D²u(0)|` per record, in input order.
    pub slack: Vec<f64>,
    pub min_slack: f64,
}

/// Least squares on `(s_r, ln|D²u(0)|)`, slope clamped at zero, intercept
/// lifted to the largest residual so every record lies under the envelope.
/// Failed records are ignored.
pub fn fit_constants(records: &[SweepRecord]) -> Result<ConstantFit> {
    let usable: Vec<&SweepRecord> =
        records.iter().filter(|r| r.is_ok() && r.s_r.is_some() && r.d2u0.is_some()).collect();
    if usable.len() < MIN_RECORDS {
        return Err(Error::InsufficientData { found: usable.len(), needed: MIN_RECORDS });
    }
    let (m, big_m) = (usable[0].m, usable[0].big_m);
    if usable.iter().any(|r| r.m.to_bits() != m.to_bits() || r.big_m.to_bits() != big_m.to_bits()) {
        return Err(Error::MixedClass);
    }
    let xs: Vec<f64> = usable.iter().map(|r| r.s_r.expect("filtered")).collect();
    let ys: Vec<f64> = usable.iter().map(|r| r.d2u0.expect("filtered").ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let ls = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let c2 = ls.max(0.0);
    let offsets: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - c2 * x).collect();
    let log_c1 = offsets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack: Vec<f64> = offsets.iter().map(|o| log_c1 - o).collect();
    let reference = 32.0 / m + 2.0;
    Ok(ConstantFit {
        class: ClassBounds { m, big_m },
        records: usable.len(),
        c1_hat: log_c1.exp(),
        log_c1_hat: log_c1,
        c2_hat_r: c2,
        c2_hat_big_r: 2.0 * c2,
        c2_least_squares: ls,
        c2_reference: reference,
        c2_within_reference: c2 <= reference,
        min_slack: slack.iter().copied().fold(f64::INFINITY, f64::min),
        slack,
    })
}

/// Fit outcome for one `(m, M)` class of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct ClassFit {
    pub class: ClassBounds,
    pub families: Vec<String>,
    pub fit: Option<ConstantFit>,
    pub error: Option<String>,
}

/// One fit per `(m, M)` class among the successful records.
pub fn fit_classes(records: &[SweepRecord]) -> Vec<ClassFit> {
    let ok: Vec<SweepRecord> = records.iter().filter(|r| r.is_ok()).cloned().collect();
    group_by_class(&ok)
        .into_iter()
        .map(|(class, recs)| {
            let mut families: Vec<String> = recs.iter().map(|r| r.family.clone()).collect();
            families.dedup();
            let owned: Vec<SweepRecord> = recs.into_iter().cloned().collect();
            match fit_constants(&owned) {
                Ok(f) => ClassFit { class, families, fit: Some(f), error: None },
                Err(e) => ClassFit { class, families, fit: None, error: Some(e.to_string()) },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::record::tests::synthetic;

    #[test]
    fn flat_data_gives_zero_slope() {
        let recs: Vec<_> = [0.1, 0.5, 2.0].iter().map(|&s| synthetic(s, 3.0)).collect();
        let f = fit_constants(&recs).unwrap();
        assert_eq!(f.c2_hat_r, 0.0);
        assert!((f.c1_hat - 3.0).abs() < 1e-12);
        assert!(f.slack.iter().all(|&s| s >= 0.0));
        assert!(f.c2_within_reference);
    }

    #[test]
    fn envelope_is_tight_and_slope_positive() {
        let recs: Vec<_> =
            [(0.0, 1.0), (1.0, 3.0), (2.0, 6.0), (3.0, 30.0)].iter().map(|&(s, d)| synthetic(s, d)).collect();
        let f = fit_constants(&recs).unwrap();
        assert!(f.c2_hat_r > 0.0);
        assert_eq!(f.c2_hat_big_r, 2.0 * f.c2_hat_r);
        assert_eq!(f.min_slack, 0.0);
        assert!(f.slack.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn decreasing_data_clamps_slope() {
        let recs: Vec<_> = [(0.0, 5.0), (1.0, 3.0), (2.0, 1.0)].iter().map(|&(s, d)| synthetic(s, d)).collect();
        let f = fit_constants(&recs).unwrap();
        assert!(f.c2_least_squares < 0.0);
        assert_eq!(f.c2_hat_r, 0.0);
        assert!((f.c1_hat - 5.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_or_mixed() {
        let one = vec![synthetic(1.0, 1.0)];
        assert!(matches!(fit_constants(&one), Err(Error::InsufficientData { found: 1, needed: 3 })));
        let mut recs: Vec<_> = [0.1, 0.2, 0.3].iter().map(|&s| synthetic(s, 1.0)).collect();
        recs[2].big_m = 9.0;
        assert!(matches!(fit_constants(&recs), Err(Error::MixedClass)));
        recs[2].error_class = Some("NotConvex".into());
        recs.push(synthetic(0.4, 1.0));
        assert!(fit_constants(&recs).is_ok());
    }
}
