use std::path::PathBuf;

use thiserror::Error;

/// Hypothesis or admissibility window a parameter set can violate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    H1,
    H1Prime,
    H2,
    H3,
    H4,
    ThetaWindow,
    ExponentRange,
    Perturbation,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Hypothesis::H1 => "(H1)",
            Hypothesis::H1Prime => "(H1)'",
            Hypothesis::H2 => "(H2)",
            Hypothesis::H3 => "(H3)",
            Hypothesis::H4 => "(H4)",
            Hypothesis::ThetaWindow => "theta-window",
            Hypothesis::ExponentRange => "2 < p < 2*2^*",
            Hypothesis::Perturbation => "perturbation weight",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("{field}: violates {hypothesis}: {message}")]
    InvalidParams {
        field: &'static str,
        hypothesis: Hypothesis,
        message: String,
    },

    #[error("field has zero mass")]
    ZeroMass,

    #[error("no Pohozaev root on the fiber within |s| <= {limit}: {reason}")]
    NoFiberRoot { limit: f64, reason: String },

    #[error("critical-branch iterate left the open set O (A_quad >= N/(4(N+1)) A_p)")]
    LeftCriticalSet,

    #[error("shooting bracket not found: {0}")]
    ShootingBracket(String),

    #[error("mass {target} not matchable for lambda in (0, {lambda_max}]: {reason}")]
    MassNotMatched {
        target: f64,
        lambda_max: f64,
        reason: String,
    },

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv parse error at line {line}: {message}")]
    Csv { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
