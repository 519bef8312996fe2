//! Numerical tolerances shared by every module.
//!
//! All defaults live in [`Tolerances::default`]. A TOML file can override any
//! subset of fields; the CLI reads its path from [`TOLERANCE_FILE_ENV`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable naming a TOML file with tolerance overrides.
pub const TOLERANCE_FILE_ENV: &str = "NWISE_TOLERANCES";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Entrywise Hermiticity check.
    pub hermitian: f64,
    /// Jacobi stop criterion on the off-diagonal Frobenius norm (relative to max(1, ‖H‖_F)).
    pub eig_offdiag: f64,
    pub eig_max_sweeps: usize,
    /// PSD / identity checks on POVM effects and dichotomic squares.
    pub povm: f64,
    /// Joint-measurability and LHS feasibility residual (Frobenius).
    pub feasibility: f64,
    pub max_iter: usize,
    pub stagnation_window: usize,
    pub stagnation_improvement: f64,
    /// Bisection bracket width on the unsharpness parameter.
    pub eta: f64,
    /// Simplex pivot and feasibility tolerance.
    pub lp: f64,
    /// Assemblage no-signalling and trace checks.
    pub no_signalling: f64,
    /// Slack allowed before a witness value counts as a violation.
    pub violation: f64,
    /// Allowed disagreement between operator-form and difference-form SOS gaps.
    pub sos_crosscheck: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-12,
            eig_offdiag: 1e-13,
            eig_max_sweeps: 100,
            povm: 1e-10,
            feasibility: 1e-7,
            max_iter: 200_000,
            stagnation_window: 500,
            stagnation_improvement: 1e-12,
            eta: 1e-3,
            lp: 1e-9,
            no_signalling: 1e-9,
            violation: 1e-9,
            sos_crosscheck: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse {
            line: e.span().map(|sp| s[..sp.start].lines().count().max(1)).unwrap_or(0),
            msg: e.message().to_string(),
        })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Defaults, overridden by the file named in [`TOLERANCE_FILE_ENV`] when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(TOLERANCE_FILE_ENV) {
            Some(path) => Self::from_file(path),
            None => Ok(Self::default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_override_keeps_other_defaults() {
        let t = Tolerances::from_toml_str("feasibility = 1e-6\nmax_iter = 10").unwrap();
        assert_eq!(t.feasibility, 1e-6);
        assert_eq!(t.max_iter, 10);
        assert_eq!(t.eta, Tolerances::default().eta);
    }

    #[test]
    fn unknown_key_is_rejected() {
        assert!(Tolerances::from_toml_str("feasiblity = 1e-6").is_err());
    }
}
