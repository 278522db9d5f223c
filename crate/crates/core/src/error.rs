//! Crate-wide error type and resource caps.

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit code for the CLI: 1 user error, 2 resource cap,
    /// 3 internal invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Unsupported(_) | Error::Parse { .. } => 1,
            Error::Resource(_) => 2,
            Error::Internal(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Resource caps checked before any exponential allocation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Caps {
    /// Truth tables, zeta transforms, Fourier transforms: at most this many
    /// variables.
    pub max_tt_vars: u32,
    /// Hamming-ball enumeration cap (entries).
    pub max_ball_entries: u64,
    /// Sparse polynomial term cap during products and collapses.
    pub max_poly_terms: usize,
    /// Gate-count cap for constructed circuits.
    pub max_gates: usize,
    /// Enumeration cap for the brute-force minimum-degree oracle
    /// (number of candidate polynomials).
    pub max_oracle_polys: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_tt_vars: 26,
            max_ball_entries: 1 << 20,
            max_poly_terms: 1 << 22,
            max_gates: 1 << 22,
            max_oracle_polys: 1 << 26,
        }
    }
}

impl Caps {
    /// Default caps with the `GKLAB_MAX_VARS` environment override applied.
    pub fn from_env() -> Self {
        let mut caps = Caps::default();
        if let Ok(v) = std::env::var("GKLAB_MAX_VARS") {
            if let Ok(n) = v.trim().parse::<u32>() {
                caps.max_tt_vars = n;
            }
        }
        caps
    }

    pub fn check_tt_vars(&self, n: u32, what: &str) -> Result<()> {
        if n > self.max_tt_vars {
            return Err(Error::Resource(format!(
                "{what}: {n} variables exceeds cap of {}",
                self.max_tt_vars
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Error::Input("x".into()).exit_code(), 1);
        assert_eq!(Error::Resource("x".into()).exit_code(), 2);
        assert_eq!(Error::Internal("x".into()).exit_code(), 3);
        assert_eq!(
            Error::Parse {
                line: 1,
                col: 2,
                msg: "x".into()
            }
            .exit_code(),
            1
        );
    }
}
