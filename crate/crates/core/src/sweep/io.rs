use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::fit::{fit_classes, ClassFit};
use super::record::SweepRecord;
use crate::aux_certificate::CaseLabel;
use crate::error::{Error, Result};

/// Error classes that reflect rejected inputs rather than solver trouble.
const INPUT_ERRORS: [&str; 2] = ["NotConvex", "InvalidProblem"];

/// Relative slack for the monotone stress check; the solver only pins
/// `|D²u(0)|` to its residual tolerance.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Largest relative change of `|D²u(0)|` allowed between the two finest grids.
pub const RESOLUTION_STABILITY: f64 = 0.05;

/// Write through a sibling `<name>.tmp`, then rename over `path`.
pub fn write_atomic(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut name = path.file_name().map(OsString::from).unwrap_or_default();
    name.push(".tmp");
    let tmp = path.with_file_name(name);
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        body(&mut w)?;
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepInvariants {
    /// Every certified record passed its η/Σ invariant suite.
    pub certificate_suites: bool,
    /// Stored case labels agree with `η λ₁ ≤ threshold`.
    pub case_consistency: bool,
    /// Case-A records have a non-negative direct-bound margin.
    pub case_a_margin: bool,
    pub positivity: bool,
    /// No record failed for reasons other than rejected input.
    pub solves_converged: bool,
    /// Every fitted class has non-negative slack on all its records.
    pub envelope: bool,
    /// Along `kappa` at fixed `(family, R, h)`, `|D²u(0)|` and `s_R` are
    /// non-decreasing up to [`MONOTONE_SLACK`]. `None` when no such series exists.
    pub stress_monotone: Option<bool>,
    /// `|D²u(0)|` moves by at most 5% between the two finest grids.
    pub resolution_stability: Option<bool>,
    pub all_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub records: usize,
    pub failed: usize,
    pub error_classes: BTreeMap<String, usize>,
    pub classes: Vec<ClassFit>,
    pub invariants: SweepInvariants,
}

pub fn summarize(records: &[SweepRecord]) -> SweepSummary {
    let classes = fit_classes(records);
    let mut error_classes = BTreeMap::new();
    for r in records {
        if let Some(e) = &r.error_class {
            *error_classes.entry(e.clone()).or_insert(0) += 1;
        }
    }
    let ok: Vec<&SweepRecord> = records.iter().filter(|r| r.is_ok()).collect();
    let certificate_suites = ok.iter().all(|r| r.invariants_pass == Some(true));
    let case_consistency = ok.iter().all(|r| r.case.is_some() && r.case == r.recomputed_case());
    let case_a_margin = ok
        .iter()
        .filter(|r| r.case == Some(CaseLabel::A))
        .all(|r| r.case_a_log_margin.is_some_and(|m| m >= 0.0));
    let positivity = ok.iter().all(|r| r.s_big_r.is_some_and(|s| s >= 0.0) && r.d2u0.is_some_and(|d| d > 0.0));
    let solves_converged =
        records.iter().filter_map(|r| r.error_class.as_deref()).all(|e| INPUT_ERRORS.contains(&e));
    let envelope = classes.iter().filter_map(|c| c.fit.as_ref()).all(|f| f.min_slack >= 0.0);
    let stress_monotone = stress_monotone(&ok);
    let resolution_stability = resolution_stability(&ok);
    let all_pass = certificate_suites
        && case_consistency
        && case_a_margin
        && positivity
        && solves_converged
        && envelope
        && stress_monotone != Some(false)
        && resolution_stability != Some(false);
    SweepSummary {
        records: records.len(),
        failed: records.len() - ok.len(),
        error_classes,
        classes,
        invariants: SweepInvariants {
            certificate_suites,
            case_consistency,
            case_a_margin,
            positivity,
            solves_converged,
            envelope,
            stress_monotone,
            resolution_stability,
            all_pass,
        },
    }
}

fn kappa_of(params: &str) -> Option<f64> {
    params.strip_prefix("kappa=")?.parse().ok()
}

fn stress_monotone(ok: &[&SweepRecord]) -> Option<bool> {
    let mut series: BTreeMap<(String, u64, u64), Vec<(f64, f64, f64)>> = BTreeMap::new();
    for r in ok {
        if let (Some(k), Some(d), Some(s)) = (kappa_of(&r.params), r.d2u0, r.s_big_r) {
            series.entry((r.family.clone(), r.radius.to_bits(), r.h.to_bits())).or_default().push((k, d, s));
        }
    }
    let mut verdict = None;
    for pts in series.values_mut().filter(|p| p.len() >= 2) {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let up = |a: f64, b: f64| b >= a - MONOTONE_SLACK * a.abs();
        let good = pts.windows(2).all(|w| up(w[0].1, w[1].1) && up(w[0].2, w[1].2));
        verdict = Some(verdict.unwrap_or(true) && good);
    }
    verdict
}

fn resolution_stability(ok: &[&SweepRecord]) -> Option<bool> {
    let mut runs: BTreeMap<(String, String, u64), Vec<(f64, f64)>> = BTreeMap::new();
    for r in ok {
        if let Some(d) = r.d2u0 {
            runs.entry((r.family.clone(), r.params.clone(), r.radius.to_bits())).or_default().push((r.h, d));
        }
    }
    let mut verdict = None;
    for pts in runs.values_mut().filter(|p| p.len() >= 2) {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (fine, next) = (pts[0].1, pts[1].1);
        let good = (next - fine).abs() <= RESOLUTION_STABILITY * fine.abs();
        verdict = Some(verdict.unwrap_or(true) && good);
    }
    verdict
}

/// Write `records.csv` and `summary.json` into `dir`, each atomically.
/// Returns the two paths.
pub fn emit_report(records: &[SweepRecord], summary: &SweepSummary, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no records to report".into()));
    }
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    let csv_path = dir.join("records.csv");
    write_atomic(&csv_path, |f| f.write_all(&bytes))?;

    let mut json = serde_json::to_vec_pretty(summary)?;
    json.push(b'\n');
    let json_path = dir.join("summary.json");
    write_atomic(&json_path, |f| f.write_all(&json))?;
    Ok((csv_path, json_path))
}

pub fn read_records(path: &Path) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}
