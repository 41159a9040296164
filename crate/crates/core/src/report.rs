//! Trend bookkeeping shared by hypothesis checks and verdicts.

use crate::tolerances::ROUNDING;
use serde::{Deserialize, Serialize};

/// A statistic tracked along `n_list`, judged "tending to zero" when the value
/// at the largest `n` is below `tol` and the last three values are nonincreasing
/// (up to [`ROUNDING`] absolute slack).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub name: String,
    pub n: Vec<u64>,
    pub values: Vec<f64>,
    pub tol: f64,
    pub final_below_tol: bool,
    pub tail_nonincreasing: bool,
    pub pass: bool,
}

impl Trend {
    pub fn new(name: impl Into<String>, n: Vec<u64>, values: Vec<f64>, tol: f64) -> Self {
        let last = values.last().copied().unwrap_or(f64::NAN);
        let final_below_tol = last < tol;
        let start = values.len().saturating_sub(3);
        let tail_nonincreasing = values[start..].windows(2).all(|w| w[1] <= w[0] + ROUNDING);
        Trend {
            name: name.into(),
            n,
            values,
            tol,
            final_below_tol,
            tail_nonincreasing,
            pass: final_below_tol && tail_nonincreasing,
        }
    }

    pub fn last(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }
}
