use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by laxlab-core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("CSV {path}: {reason}")]
    CsvShape { path: PathBuf, reason: String },

    #[error("CSV {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("node ({j}, {n}) outside a {nx}x{nt} grid")]
    IndexOutOfRange { j: usize, n: usize, nx: usize, nt: usize },

    #[error("seed frame is not a rotation (orthonormality defect {defect:e}, det {det})")]
    NotOrthogonal { defect: f64, det: f64 },

    #[error("CFL violated: dt/dx = {ratio} exceeds bound {bound}")]
    Cfl { ratio: f64, bound: f64 },

    #[error("non-finite value in solution at time step {step}, node {node}")]
    NonFinite { step: usize, node: usize },

    #[error("every node of the mesh is degenerate")]
    AllDegenerate,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
