//! Numerical laboratory for limit theorems on triangular arrays of
//! independent, square-integrable summands.
//!
//! The crate builds accumulation measures `K_n` from array rows, evaluates the
//! limit functional `Ψ_K`, checks the UAN / BVH / VCH hypotheses and the
//! Lindeberg-type criteria, and confirms predicted limits by exact computation
//! and Monte Carlo simulation.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accum;
pub mod array;
pub mod cf;
pub mod cli;
pub mod criteria;
pub mod error;
pub mod montecarlo;
pub mod plot;
pub mod psi;
pub mod quadrature;
pub mod report;
pub mod special;
pub mod tolerances;

pub use accum::{build_accum, eval_accum, preweak_distance, AccumMeasure, LimitMeasureSpec};
pub use array::{hypothesis_check, row_statistics, ArrayGenerator, ComponentDist, RowSpec};
pub use cf::{conjugate_and_norm, eval_cf, product, pth_root, CharFnSpec, PoissonTypeTerm};
pub use error::{Error, Result};
pub use montecarlo::{
    ecf_distance, ks_distance, sample_sums, simulate, tv_binomial_poisson, SimLimit, SimulationPlan,
};
pub use psi::{g_kernel, limit_cf, poisson_type_approx, psi_curvature_check, psi_eval, Mesh};
