//! Driver for the entropic Fourier Boltzmann solver: configured runs, convergence tables,
//! the oracle verification suite and kernel cache population.
//!
//! Every command is a plain function so tests can call it without spawning the binary.

pub mod config;
pub mod convergence;
pub mod kernels;
pub mod output;
pub mod run;
pub mod verify;

pub use config::RunConfig;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Solver(efm_core::Error),
}

impl CliError {
    /// Process exit code: 2 configuration, 3 non-finite state, 4 failed verification, 1 other.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Verification(_) => 4,
            CliError::Io(_) | CliError::Solver(_) => 1,
        }
    }
}

impl From<efm_core::Error> for CliError {
    fn from(err: efm_core::Error) -> Self {
        use efm_core::Error as E;
        match err {
            E::NonFinite { .. } => CliError::Numerical(err.to_string()),
            E::InvalidGrid(_)
            | E::Aliasing { .. }
            | E::EvenModes(_)
            | E::FilterIndex { .. }
            | E::InvalidKernel(_)
            | E::Setup(_) => CliError::Config(err.to_string()),
            E::Io(io) => CliError::Io(io),
            other => CliError::Solver(other),
        }
    }
}
