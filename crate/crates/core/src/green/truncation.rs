use serde::{Deserialize, Serialize};

use crate::error::{Result, WgqedError};

/// Controls the evanescent tails of the inter-atomic mode sums.
///
/// A below-cutoff mode with decay constant `kappa` is kept when
/// `kappa |dz| <= ln(1 / tol) + 5`; more than `max_terms` such modes in one
/// sum is reported as an error rather than silently truncated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationPolicy {
    pub tol: f64,
    pub max_terms: usize,
    pub min_axial_separation: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_terms: 1_000_000,
            min_axial_separation: 1e-3,
        }
    }
}

impl TruncationPolicy {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(WgqedError::Truncation(format!(
                "tol must lie in (0, 1), got {}",
                self.tol
            )));
        }
        if self.max_terms == 0 {
            return Err(WgqedError::Truncation("max_terms must be >= 1".into()));
        }
        if !(self.min_axial_separation >= 0.0) || !self.min_axial_separation.is_finite() {
            return Err(WgqedError::Truncation(format!(
                "min_axial_separation must be finite and >= 0, got {}",
                self.min_axial_separation
            )));
        }
        Ok(())
    }

    /// Largest retained `kappa |dz|`.
    pub fn decay_budget(&self) -> f64 {
        (1.0 / self.tol).ln() + 5.0
    }
}
