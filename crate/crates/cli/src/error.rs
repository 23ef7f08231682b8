//! Process-level error type. Every failure the binary can hit maps onto one
//! of three documented exit codes, so scripts can branch on the cause:
//!
//! | code | meaning                                                    |
//! |------|------------------------------------------------------------|
//! | 0    | success                                                    |
//! | 2    | model is semantically invalid (graph, factor, or state)    |
//! | 3    | simulation ran but did not reach consensus                 |
//! | 4    | input problem: unreadable file, malformed JSON, bad schema |

use thiserror::Error;

/// Exit code for semantically invalid models.
pub const EXIT_INVALID: i32 = 2;
/// Exit code for runs that finish without reaching consensus.
pub const EXIT_NOT_CONVERGED: i32 = 3;
/// Exit code for unreadable, malformed, or schema-violating input.
pub const EXIT_INPUT: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable file, malformed JSON, unsupported schema version, or a flag
    /// value that cannot be parsed at all.
    #[error("{0}")]
    Input(String),

    /// The input parsed cleanly but describes an invalid model: a graph that
    /// is not strongly connected, a factor outside its admissible range, a
    /// state of the wrong dimension, and so on.
    #[error("{0}")]
    Invalid(String),

    /// The simulation finished its horizon without meeting the consensus
    /// tolerance. Outputs are still written before this is raised.
    #[error("{0}")]
    NotConverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::NotConverged(_) => EXIT_NOT_CONVERGED,
        }
    }

    pub fn input(msg: impl std::fmt::Display) -> Self {
        CliError::Input(msg.to_string())
    }

    pub fn invalid(msg: impl std::fmt::Display) -> Self {
        CliError::Invalid(msg.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("i/o error: {e}"))
    }
}
