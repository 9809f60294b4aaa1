//! Client errors, split by who is at fault: `User` problems (bad flags,
//! unreadable files, unknown purposes) exit 1; `Node` problems (rejected
//! submissions, failed execution, timeouts) exit 2. Success exits 0.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    User(String),

    #[error("{0}")]
    Node(String),
}

impl CliError {
    pub fn user(message: impl Into<String>) -> Self {
        CliError::User(message.into())
    }

    pub fn node(message: impl Into<String>) -> Self {
        CliError::Node(message.into())
    }

    /// The process exit code this error maps to.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 1,
            CliError::Node(_) => 2,
        }
    }
}
