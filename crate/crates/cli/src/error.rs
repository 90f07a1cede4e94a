// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Model(#[from] ltm_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse {what}: {message}")]
    Parse { what: String, message: String },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// 0 success, 1 usage, 2 solver non-convergence, 3 physics domain.
    pub fn exit_code(&self) -> u8 {
        use ltm_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Parse { .. } => 1,
            CliError::Model(e) => match e {
                E::InvalidConfig(_) | E::UnknownPreset(_) | E::UnknownParameter(_) | E::Unit(_) => {
                    1
                }
                E::NoConvergence { .. } | E::StiffnessFailure { .. } => 2,
                _ => 3,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ltm_core::Error as E;

    #[test]
    fn exit_code_classes() {
        assert_eq!(CliError::usage("x").exit_code(), 1);
        assert_eq!(
            CliError::from(E::UnknownParameter("a".into())).exit_code(),
            1
        );
        assert_eq!(
            CliError::from(E::NoConvergence {
                lo: 0.0,
                hi: 1.0,
                iterations: 3
            })
            .exit_code(),
            2
        );
        assert_eq!(
            CliError::from(E::StiffnessFailure {
                t: 0.0,
                h: 1e-300,
                state: vec![]
            })
            .exit_code(),
            2
        );
        assert_eq!(
            CliError::from(E::NowhereAboveThreshold { lo: 0.0, hi: 1.0 }).exit_code(),
            3
        );
        assert_eq!(CliError::from(E::NoOutput { b: 0.0 }).exit_code(), 3);
    }
}
