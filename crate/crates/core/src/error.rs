use crate::ma_solver::IterationRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix dimension {0} is not supported (need n >= 2)")]
    InvalidDimension(usize),

    #[error("matrix is not symmetric: entry ({i}, {j}) differs from ({j}, {i})")]
    NotSymmetric { i: usize, j: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigenvalue {k} is degenerate: gap {gap:e} <= tolerance {tol:e}")]
    DegenerateEigenvalue { k: usize, gap: f64, tol: f64 },

    #[error("finite-difference step {h:e} too large for eigenvalue gap {gap:e} (need gap > 10 h)")]
    StepTooLarge { h: f64, gap: f64 },

    #[error("symmetric eigensolver did not converge for matrix {matrix:?}")]
    EigenNonConvergence { matrix: Vec<Vec<f64>> },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("manufactured solution is not convex on the disc: {0}")]
    NotConvex(String),

    #[error("problem invariant violated: {0}")]
    InvalidProblem(String),

    #[error("Jacobian is singular at column {column}")]
    SingularJacobian { column: usize },

    #[error("Newton iteration did not converge after {} iterations", history.len())]
    NonConvergence { history: Vec<IterationRecord> },

    #[error("every damped Newton step left the convex cone (last margin {margin:e})")]
    ConvexityLost { margin: f64, history: Vec<IterationRecord> },

    #[error("insufficient sample: {found} usable nodes, need at least {needed}")]
    InsufficientSample { found: usize, needed: usize },

    #[error("not checkable: {0}")]
    NotCheckable(String),

    #[error("every node of the region is degenerate; the eigen-field is undefined")]
    DegenerateField,

    #[error("region Σ contains no grid nodes")]
    EmptySigma,

    #[error("records span more than one (m, M) class")]
    MixedClass,

    #[error("insufficient data: {found} records, need at least {needed}")]
    InsufficientData { found: usize, needed: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short stable name used in report columns.
    pub fn class(&self) -> &'static str {
        match self {
            Error::InvalidDimension(_) => "InvalidDimension",
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::InvalidInput(_) => "InvalidInput",
            Error::DegenerateEigenvalue { .. } => "DegenerateEigenvalue",
            Error::StepTooLarge { .. } => "StepTooLarge",
            Error::EigenNonConvergence { .. } => "EigenNonConvergence",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::NotConvex(_) => "NotConvex",
            Error::InvalidProblem(_) => "InvalidProblem",
            Error::SingularJacobian { .. } => "SingularJacobian",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::ConvexityLost { .. } => "ConvexityLost",
            Error::InsufficientSample { .. } => "InsufficientSample",
            Error::NotCheckable(_) => "NotCheckable",
            Error::DegenerateField => "DegenerateField",
            Error::EmptySigma => "EmptySigma",
            Error::MixedClass => "MixedClass",
            Error::InsufficientData { .. } => "InsufficientData",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }
}
