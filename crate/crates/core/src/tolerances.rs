//! Numerical tolerances shared across the crate.
//!
//! Every threshold used by verdicts and invariant checks lives here so that a
//! run configuration can override them in one place.

use serde::{Deserialize, Serialize};

/// Structural identities that hold up to double rounding (CF at zero, roots).
pub const STRUCTURAL: f64 = 1e-12;
/// Quantities that are exact in real arithmetic but pass through a few
/// rounded products, e.g. `n · fl(1/√n)²`.
pub const ROUNDING: f64 = 1e-14;
/// Target accuracy for quadrature-backed evaluations of the Ψ functional.
pub const QUADRATURE: f64 = 1e-6;
/// Default trend tolerance for statistics computed in exact arithmetic.
pub const EXACT_STATISTIC: f64 = 1e-3;
/// Default trend tolerance for quadrature-backed or mass-gap statistics.
pub const QUADRATURE_STATISTIC: f64 = 1e-2;
/// Atom sites closer than this are merged into one atom.
pub const ATOM_MERGE: f64 = 1e-14;
/// Ψ accuracy used when a `PsiExponential` CF is evaluated.
pub const PSI_CF: f64 = 1e-10;
/// Centering check for the Gaussian verdict.
pub const CENTERED: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub structural: f64,
    pub quadrature: f64,
    pub exact_statistic: f64,
    pub quadrature_statistic: f64,
    pub centered: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: STRUCTURAL,
            quadrature: QUADRATURE,
            exact_statistic: EXACT_STATISTIC,
            quadrature_statistic: QUADRATURE_STATISTIC,
            centered: CENTERED,
        }
    }
}
