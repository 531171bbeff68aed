// SPDX-License-Identifier: Apache-2.0
use std::fmt;
use std::path::Path;

/// Process exit codes; clap itself exits with 2 on usage errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Failure {
    Config = 3,
    Trace = 4,
    Io = 5,
}

#[derive(Debug)]
pub struct CliError {
    pub failure: Failure,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            failure: Failure::Config,
            message: message.into(),
        }
    }

    pub fn trace(message: impl Into<String>) -> Self {
        Self {
            failure: Failure::Trace,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Self {
            failure: Failure::Io,
            message: format!("{}: {err}", path.display()),
        }
    }

    pub fn exit_code(&self) -> u8 {
        self.failure as u8
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self.failure {
            Failure::Config => "invalid configuration",
            Failure::Trace => "invalid trace",
            Failure::Io => "i/o error",
        };
        write!(f, "{label}: {}", self.message)
    }
}

pub type CliResult<T> = Result<T, CliError>;
