//! Experiment drivers behind the `presym` command.
//!
//! Each command turns a [`RunConfig`] into a [`Report`]; [`output`] writes
//! reports to disk byte-for-byte reproducibly.

pub mod commands;
pub mod config;
pub mod output;

pub use config::RunConfig;
pub use output::{Cell, Report, Table};

/// Exit code of a run whose physics checks passed.
pub const EXIT_PASS: i32 = 0;
/// An audit check (rank, closedness, Maxwell) failed.
pub const EXIT_AUDIT: i32 = 1;
/// The integrator aborted, a threshold was missed, or the input was unusable.
pub const EXIT_RUN: i32 = 2;
/// A regression was ill-conditioned or missed its target.
pub const EXIT_FIT: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Physics(#[from] presym::error::Error),

    #[error("integration aborted: {0}")]
    Integration(presym::error::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Physics(presym::error::Error::IllConditionedFit(_)) => EXIT_FIT,
            _ => EXIT_RUN,
        }
    }

    /// Extra hint printed under the error message.
    pub fn advice(&self) -> Option<&'static str> {
        match self {
            CliError::Integration(_) => {
                Some("reduce integration.h (and raise integration.n_steps to cover the same horizon)")
            }
            CliError::Physics(presym::error::Error::IllConditionedFit(_)) => {
                Some("widen the state family (experiment.family_size) or use spin directions along the orbit normal")
            }
            _ => None,
        }
    }
}
