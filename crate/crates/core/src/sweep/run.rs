use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ma_solver::{ClassBounds, DiscGrid, ExactSolutionSpec, ProblemSpec, SolverConfig};

/// A single solve request, as read from `problem.json`:
/// `{"family": ..., "params": {...}, "radius": R, "h": h}` plus optional
/// `class_bounds` and `solver`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    #[serde(flatten)]
    pub exact: ExactSolutionSpec,
    pub radius: f64,
    pub h: f64,
    #[serde(default)]
    pub class_bounds: Option<ClassBounds>,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl RunSpec {
    pub fn from_path(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?)
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        let spec = ProblemSpec::manufacture(&self.exact, DiscGrid::new(self.radius, self.h)?)?;
        match self.class_bounds {
            Some(b) => spec.with_bounds(b),
            None => Ok(spec),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flattened_schema() {
        let s: RunSpec = serde_json::from_str(
            r#"{"family": "exponential_radial", "params": {"kappa": 2.0}, "radius": 1.0, "h": 0.25}"#,
        )
        .unwrap();
        assert_eq!(s.exact, ExactSolutionSpec::ExponentialRadial { kappa: 2.0 });
        assert_eq!(s.solver, SolverConfig::default());
        let back: RunSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        assert_eq!(s.problem().unwrap().m(), 1.0);
    }
}
