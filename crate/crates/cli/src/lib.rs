//! Command-line front end: configuration loading, the `jetstream`
//! subcommands and their CSV, key-value and report outputs.

// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use jetstream_core::Error;
use thiserror::Error as ThisError;

pub use commands::{run, Command, Request};
pub use config::{load_config, parse_config, resolve, Format, Problem, RunConfig};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Unclassified internal failure.
    pub const INTERNAL: i32 = 1;
    /// Unreadable, malformed or invalid configuration or arguments.
    pub const CONFIG: i32 = 2;
    /// Potential-plane or flux constraint violated.
    pub const CONSTRAINT: i32 = 3;
    /// Newton, shooting or root finding failed to converge.
    pub const NONCONVERGENCE: i32 = 4;
    /// No flow exists for the requested data.
    pub const NONEXISTENCE: i32 = 5;
    /// A verification or geometry check failed.
    pub const VERIFICATION: i32 = 6;
    /// Output could not be written.
    pub const IO: i32 = 7;
}

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] Error),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
    #[error("output error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::ChecksFailed(_) => exit::VERIFICATION,
            CliError::Io(_) => exit::IO,
            CliError::Solver(e) => match e {
                Error::InvalidConfig(_) | Error::Domain { .. } | Error::Range { .. } => exit::CONFIG,
                Error::Constraint(_) | Error::InfeasibleFlux { .. } | Error::InfeasiblePressure { .. } => {
                    exit::CONSTRAINT
                }
                Error::Nonconvergence { .. }
                | Error::MaxIterations { .. }
                | Error::NoSignChange { .. }
                | Error::Quadrature { .. }
                | Error::SingularPivot { .. } => exit::NONCONVERGENCE,
                Error::Nonexistence(_) | Error::LongNozzle { .. } | Error::ShortNozzle { .. } => {
                    exit::NONEXISTENCE
                }
                Error::Consistency { .. } | Error::FoldOver { .. } | Error::InsufficientResolution(_) => {
                    exit::VERIFICATION
                }
                Error::InsufficientSamples { .. } => exit::INTERNAL,
            },
        }
    }
}
