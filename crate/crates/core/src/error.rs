use std::path::PathBuf;

/// Errors produced by mesh construction, discretization, solvers and study drivers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid subdivision count {0}: must be at least 1")]
    InvalidSubdivision(usize),

    #[error("unsupported quadrature degree {0}: at most 6 is available")]
    UnsupportedQuadratureDegree(usize),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("newton iteration {iteration}: {source}")]
    Newton {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("level {level}: {source}")]
    Level {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("newton iteration did not converge at level {level} (residual {residual:e} after {iterations} iterations)")]
    NotConverged {
        level: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
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
