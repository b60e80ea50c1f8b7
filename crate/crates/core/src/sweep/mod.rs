//! Experiment sweeps over manufactured families, radii and resolutions,
//! empirical fits of the `C²` bound, and report files.

mod eigcheck;
mod fit;
mod io;
mod record;
mod run;

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use eigcheck::{run_eigcheck, EigcheckConfig, EigcheckFailure, EigcheckSummary};
pub use fit::{fit_classes, fit_constants, ClassFit, ConstantFit};
pub use io::{emit_report, read_records, summarize, write_atomic, SweepSummary, SweepInvariants};
pub use record::SweepRecord;
pub use run::RunSpec;

use crate::error::{Error, Result};
use crate::ma_solver::{ClassBounds, DiscGrid, ExactSolutionSpec, SolverConfig};

/// One family block of a sweep: explicit members and/or one parameter varied
/// over a list of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySweep {
    pub id: String,
    #[serde(default)]
    pub members: Vec<ExactSolutionSpec>,
    #[serde(default)]
    pub vary: Option<ParamRange>,
    /// Structural constants for the whole block. When absent, the hull of the
    /// members' `[m, M]` at each radius is used.
    #[serde(default)]
    pub class_bounds: Option<ClassBounds>,
}

/// `base` with `params[param]` replaced by each of `values`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub base: ExactSolutionSpec,
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub families: Vec<FamilySweep>,
    pub radii: Vec<f64>,
    /// Grid spacings as fractions of `R`.
    pub resolutions: Vec<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker threads; `None` uses rayon's default.
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub solver: SolverConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("sweep-out")
}

/// A single `(family member, R, h)` run, in config order.
#[derive(Debug, Clone, PartialEq)]
pub struct Triple {
    pub family_id: String,
    pub member: ExactSolutionSpec,
    pub radius: f64,
    pub h: f64,
    /// The error class when the member cannot join its class, e.g. `NotConvex`.
    pub class: std::result::Result<ClassBounds, String>,
}

impl FamilySweep {
    pub fn expand_members(&self) -> Result<Vec<ExactSolutionSpec>> {
        let mut out = self.members.clone();
        if let Some(v) = &self.vary {
            let base = serde_json::to_value(&v.base)?;
            if base["params"].get(&v.param).is_none() {
                return Err(Error::InvalidInput(format!(
                    "family '{}' has no parameter '{}'",
                    v.base.name(),
                    v.param
                )));
            }
            for &x in &v.values {
                let mut m = base.clone();
                m["params"][&v.param] = serde_json::json!(x);
                out.push(serde_json::from_value(m)?);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidInput(format!("family block '{}' has no members", self.id)));
        }
        Ok(out)
    }
}

impl SweepConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let cfg: Self = serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Structural checks. Every `(R, h)` pair must give a valid grid; member
    /// convexity is checked per triple and surfaces as a record error.
    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() || self.radii.is_empty() || self.resolutions.is_empty() {
            return Err(Error::InvalidInput("families, radii and resolutions must be non-empty".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::InvalidInput("jobs must be at least 1".into()));
        }
        for &radius in &self.radii {
            for &res in &self.resolutions {
                if !(res > 0.0 && res < 1.0) {
                    return Err(Error::InvalidInput(format!("resolution {res} is not in (0, 1)")));
                }
                DiscGrid::new(radius, res * radius)?;
            }
        }
        let mut ids = std::collections::BTreeSet::new();
        for fam in &self.families {
            if !ids.insert(fam.id.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate family id '{}'", fam.id)));
            }
            fam.expand_members()?;
        }
        Ok(())
    }

    /// All triples, family-major, then member, radius, resolution.
    pub fn triples(&self) -> Result<Vec<Triple>> {
        self.validate()?;
        let mut out = Vec::new();
        for fam in &self.families {
            let members = fam.expand_members()?;
            for &radius in &self.radii {
                let class = class_for(fam, &members, radius);
                for member in &members {
                    let own = member
                        .check_convex(radius)
                        .map_err(|e| e.class().to_string())
                        .and_then(|_| class.clone());
                    for &res in &self.resolutions {
                        out.push(Triple {
                            family_id: fam.id.clone(),
                            member: member.clone(),
                            radius,
                            h: res * radius,
                            class: own.clone(),
                        });
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Hull of the convex members' `[m, M]`, or the declared bounds if they
/// enclose every convex member.
fn class_for(
    fam: &FamilySweep,
    members: &[ExactSolutionSpec],
    radius: f64,
) -> std::result::Result<ClassBounds, String> {
    let own: Vec<ClassBounds> = members
        .iter()
        .filter(|m| m.check_convex(radius).is_ok())
        .filter_map(|m| {
            let (lo, hi) = m.rhs_bounds(radius);
            ClassBounds::new(lo, hi).ok()
        })
        .collect();
    let Some(first) = own.first().copied() else {
        return Err("NotConvex".into());
    };
    let hull = own.iter().fold(first, |acc, b| acc.hull(b));
    match fam.class_bounds {
        Some(declared) if declared.contains(&hull) => Ok(declared),
        Some(_) => Err("InvalidProblem".into()),
        None => Ok(hull),
    }
}

/// Solve and certify every triple. Records come back in triple order
/// whatever the completion order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    let triples = cfg.triples()?;
    let work = || -> Vec<SweepRecord> {
        triples.par_iter().map(|t| record::run_triple(t, &cfg.solver)).collect()
    };
    match cfg.jobs {
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| Error::InvalidInput(e.to_string()))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

/// Records grouped by their `(m, M)` class, in first-appearance order.
pub fn group_by_class(records: &[SweepRecord]) -> Vec<(ClassBounds, Vec<&SweepRecord>)> {
    let mut order: Vec<(u64, u64)> = Vec::new();
    let mut groups: BTreeMap<(u64, u64), Vec<&SweepRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.m.to_bits(), r.big_m.to_bits());
        if !groups.contains_key(&key) {
            order.push(key);
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|k| {
            let recs = groups.remove(&k).expect("key recorded");
            (ClassBounds { m: recs[0].m, big_m: recs[0].big_m }, recs)
        })
        .collect()
}
