use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;
use crate::expr::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain is not star-shaped with respect to the origin: {0}")]
    NotStarShaped(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("potential evaluation failed at node {node} (x = {point:?}): {message}")]
    PotentialEvaluation {
        node: usize,
        point: Vec<f64>,
        message: String,
    },

    #[error("numerical failure at r = {r}, mode {mode}: {message}")]
    NumericalFailure { r: f64, mode: usize, message: String },

    #[error("Morse index indeterminate at r = {r}: eigenvalue {mu:e} lies within {tol:e} of zero")]
    IndeterminateIndex { r: f64, mu: f64, tol: f64 },

    #[error("no eigenvalue within {tol:e} of zero at r = {r}; crossing refinement failed")]
    EmptyKernel { r: f64, tol: f64 },

    #[error(
        "the full domain (r = 1) carries a nontrivial kernel: eigenvalue {mu:e} within {tol:e} of zero. \
         The problem must be non-degenerate at r = 1; rerun with the sweep endpoint moved to 1 - eps \
         (e.g. r_max = {suggested_r_max}) or perturb the potential"
    )]
    AssumptionViolated {
        mu: f64,
        tol: f64,
        suggested_r_max: f64,
    },

    #[error("Newton iteration did not converge after {} steps (final residual {:e})", history.len(), history.last().copied().unwrap_or(f64::NAN))]
    NoConvergence { history: Vec<f64> },

    #[error("no nontrivial branch found near r* = {r_star}")]
    BranchNotFound { r_star: f64 },

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Expression(#[from] ParseError),

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

impl Error {
    /// Process exit code for the command-line front end.
    ///
    /// 1 = configuration error, 2 = a hypothesis of the theory is violated
    /// (not star-shaped, or degenerate at r = 1), 3 = numerical or I/O failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Expression(_) | Error::InvalidParameter(_) => 1,
            Error::NotStarShaped(_) | Error::AssumptionViolated { .. } => 2,
            _ => 3,
        }
    }
}
