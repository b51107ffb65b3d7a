use std::path::PathBuf;

use hodgetrack_core::{
    AnalysisError, ComplexError, GeometryError, PersistenceError, SpectralError,
};
use thiserror::Error;

/// Exit status for malformed input files and invalid parameters.
pub const EXIT_INPUT: i32 = 1;
/// Exit status for geometrically degenerate input (collinear points, …).
pub const EXIT_DEGENERATE: i32 = 2;
/// Exit status for solver failures and other internal errors.
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("cannot draw SVG: {0}")]
    Projection(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Persistence(#[from] PersistenceError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// The process exit status this error maps to.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. }
            | CliError::Parse { .. }
            | CliError::Format { .. }
            | CliError::Usage(_)
            | CliError::Projection(_)
            | CliError::Complex(_) => EXIT_INPUT,
            CliError::Geometry(e) => geometry_code(e),
            CliError::Spectral(e) => spectral_code(e),
            CliError::Persistence(e) => match e {
                PersistenceError::Step { source, .. } => spectral_code(source),
                PersistenceError::InvalidGrid | PersistenceError::Complex(_) => EXIT_INPUT,
                _ => EXIT_INTERNAL,
            },
            CliError::Analysis(e) => match e {
                AnalysisError::Spectral(s) => spectral_code(s),
                _ => EXIT_INPUT,
            },
            CliError::Serialize(_) => EXIT_INTERNAL,
        }
    }
}

fn geometry_code(e: &GeometryError) -> i32 {
    match e {
        GeometryError::Collinear | GeometryError::Degenerate(_) => EXIT_DEGENERATE,
        _ => EXIT_INPUT,
    }
}

fn spectral_code(e: &SpectralError) -> i32 {
    match e {
        SpectralError::Complex(_) => EXIT_INPUT,
        _ => EXIT_INTERNAL,
    }
}
