use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator is not Hermitian (residual {residual:.3e}, allowed {allowed:.3e})")]
    NonHermitian { residual: f64, allowed: f64 },

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error(
        "eigenvalue {eigenvalue} lies within {distance:.3e} of the Fermi level {fermi_level}"
    )]
    EigenvalueAtFermiLevel {
        eigenvalue: f64,
        fermi_level: f64,
        distance: f64,
    },

    #[error("window L = {l} exceeds the admissible range (limit {limit}) on a lattice with N = {n}")]
    WindowTooLarge { l: usize, limit: usize, n: usize },

    #[error("cluster of {size} projected-position eigenvalues exceeds the limit {limit}; cluster_tol = {tol} is too large")]
    DegenerateCluster { size: usize, limit: usize, tol: f64 },

    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("basis has no lattice labels; relabel it first")]
    NotRelabeled,

    #[error("fit needs at least 3 usable points, got {usable}")]
    DegenerateFit { usable: usize },

    #[error("k-space Hamiltonian is gapless at u = {u}")]
    Gapless { u: f64 },

    #[error("field-strength sum {value} is not an integer")]
    NonIntegerChern { value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("corrupt basis container: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            LabError::DimensionMismatch(_)
                | LabError::InvalidParameter(_)
                | LabError::WindowTooLarge { .. }
                | LabError::Config(_)
                | LabError::Json(_)
                | LabError::Gapless { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
