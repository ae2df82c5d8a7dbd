use std::path::PathBuf;

/// Errors produced anywhere in the workbench.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("triangle {index} is degenerate (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("negative discriminant {value:e} for band n = {n}")]
    NegativeDiscriminant { n: u32, value: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("root of {what} left its domain at {at}")]
    OutOfDomain { what: &'static str, at: f64 },

    #[error("boundary vertex {vertex} lies at radius {radius}; rescale the mesh so its boundary is on the unit sphere")]
    OffSphere { vertex: usize, radius: f64 },

    #[error("vertex {vertex} lies outside the closed unit ball (radius {radius})")]
    OutsideBall { vertex: usize, radius: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
