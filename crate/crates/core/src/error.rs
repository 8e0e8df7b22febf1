use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown field `{0}`")]
    UnknownField(String),

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("unknown cloud descriptor `{0}`")]
    UnknownDescriptor(String),

    #[error("domain box is empty or degenerate")]
    EmptyBox,

    #[error("output grid must be strictly increasing from the initial time (offending index {index})")]
    NonIncreasingGrid { index: usize },

    #[error("reference step {step:e} underflows the 1e-12 floor for eps = {eps:e}")]
    ReferenceUnderflow { eps: f64, step: f64 },

    #[error(
        "fixed-point iteration did not reach tol {tol:e} in {iterations} iterations \
         (last increment {last_increment:e}, observed contraction ratio {ratio:.3})"
    )]
    NonContractive { iterations: usize, last_increment: f64, ratio: f64, tol: f64 },

    #[error("trajectory grids differ (at index {index})")]
    GridMismatch { index: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
