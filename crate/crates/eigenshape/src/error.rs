use thiserror::Error;

/// Errors produced by the geometry, discretization, and solver layers.
#[derive(Debug, Error)]
pub enum Error {
    /// The radial function dips below the positivity guard somewhere.
    #[error("invalid boundary: r({theta:.6}) = {radius:.3e} below guard {r_min:.3e}")]
    InvalidBoundary { theta: f64, radius: f64, r_min: f64 },

    /// Hull input with no area (all points collinear).
    #[error("degenerate input: all points collinear")]
    DegenerateInput,

    /// An element lost its orientation or collapsed during assembly.
    #[error("degenerate triangle {index}: area {area:.3e} below {threshold:.3e}")]
    DegenerateTriangle { index: usize, area: f64, threshold: f64 },

    /// The eigensolver ran out of iterations.
    #[error("eigensolver did not converge: achieved relative residual {residual:.3e} after {steps} steps")]
    NoConvergence { residual: f64, steps: usize },

    /// Cholesky factorization hit a non-positive pivot.
    #[error("factorization failure at pivot {pivot_index}: value {pivot:.3e}")]
    FactorizationFailure { pivot_index: usize, pivot: f64 },

    /// A simple-eigenvalue operation was asked about a (near-)double eigenvalue.
    #[error("degenerate eigenvalue: relative gap {gap:.3e} below threshold {gap_tol:.3e}")]
    DegenerateEigenvalue { gap: f64, gap_tol: f64 },

    /// Configuration field failed validation.
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error in {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config { field: field.to_string(), message: message.into() }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io { path: path.display().to_string(), source }
    }

    pub fn json(path: &std::path::Path, source: serde_json::Error) -> Self {
        Error::Json { path: path.display().to_string(), source }
    }
}
