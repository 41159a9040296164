//! The limit functional `Ψ_K(u) = ∫ g(u, x) dK(x)` with kernel
//! `g(u, x) = (e^{iux} - 1 - iux) / x²`, `g(u, 0) = -u²/2`.
//!
//! Atoms contribute `mass · g(u, site)` exactly. Continuous pieces
//! `w · y² dF(y)` are integrated by adaptive Gauss–Kronrod on a window
//! `[-a, a]`, with the window grown until the tail bound
//! `|g(u, x)| <= min(u²/2, 2/x² + |u|/|x|)` times the tail mass fits the budget.

use crate::accum::{eval_accum, AccumMeasure, ContinuousPiece};
use crate::array::ComponentDist;
use crate::cf::{CharFnSpec, PoissonTypeTerm};
use crate::error::{Error, Result};
use crate::quadrature;
use crate::special::norm_pdf;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Below this `|ux|` the kernel is evaluated by its Taylor series.
pub const SERIES_SWITCH: f64 = 1e-3;
const MAX_WINDOW: f64 = 1_099_511_627_776.0; // 2^40
const MAX_PANELS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiEvaluation {
    pub u: f64,
    pub value: Complex64,
    pub quadrature_error_bound: f64,
    /// Half-width `a` of the widest integration window used.
    pub tail_truncation: f64,
}

/// `(e^{iz} - 1 - iz) / z²` for `|z| < SERIES_SWITCH`, degree 6 in `z`.
fn scaled_series(z: f64) -> Complex64 {
    let z2 = z * z;
    let re = -0.5 + z2 / 24.0 - z2 * z2 / 720.0 + z2 * z2 * z2 / 40320.0;
    let im = z * (-1.0 / 6.0 + z2 / 120.0 - z2 * z2 / 5040.0);
    Complex64::new(re, im)
}

/// `e^{iz} - 1 - iz`.
fn numerator(z: f64) -> Complex64 {
    if z.abs() < SERIES_SWITCH {
        scaled_series(z) * (z * z)
    } else {
        let s = (0.5 * z).sin();
        Complex64::new(-2.0 * s * s, z.sin() - z)
    }
}

pub fn g_kernel(u: f64, x: f64) -> Complex64 {
    if x == 0.0 {
        return Complex64::new(-0.5 * u * u, 0.0);
    }
    let z = u * x;
    if z.abs() < SERIES_SWITCH {
        scaled_series(z) * (u * u)
    } else {
        numerator(z) / (x * x)
    }
}

fn atoms_part(m: &AccumMeasure, u: f64) -> Complex64 {
    m.atoms.iter().map(|a| g_kernel(u, a.site) * a.mass).sum()
}

fn tail_kernel_bound(u: f64, a: f64) -> f64 {
    (0.5 * u * u).min(2.0 / (a * a) + u.abs() / a)
}

struct PieceResult {
    value: Complex64,
    error: f64,
    window: f64,
    converged: bool,
}

fn piece_part(piece: &ContinuousPiece, u: f64, tol: f64) -> PieceResult {
    let w = piece.weight;
    let max_width = if u.abs() > 1.0 {
        PI / u.abs()
    } else {
        f64::INFINITY
    };
    match &piece.dist {
        ComponentDist::Uniform { lo, hi } => {
            let dens = w / (hi - lo);
            let f = |y: f64| numerator(u * y) * dens;
            let r = quadrature::integrate(&f, *lo, *hi, tol, max_width, MAX_PANELS);
            PieceResult {
                value: r.value,
                error: r.error,
                window: lo.abs().max(hi.abs()),
                converged: r.converged,
            }
        }
        ComponentDist::Gaussian { m, var } => {
            let s = var.sqrt();
            let mut a = 1.0f64;
            let mut truncation;
            loop {
                let tail = piece.mass() - (piece.partial_mass(a) - piece.partial_mass(-a));
                truncation = tail.max(0.0) * tail_kernel_bound(u, a);
                if truncation < tol / 2.0 || a >= MAX_WINDOW {
                    break;
                }
                a *= 2.0;
            }
            let lo = -a;
            let hi = a;
            let f = |y: f64| numerator(u * y) * (w * norm_pdf((y - m) / s) / s);
            let r = quadrature::integrate(&f, lo, hi, tol / 2.0, max_width, MAX_PANELS);
            PieceResult {
                value: r.value,
                error: r.error + truncation,
                window: a,
                converged: r.converged && truncation < tol / 2.0,
            }
        }
        ComponentDist::FiniteDiscrete { .. } => unreachable!("pieces are continuous"),
    }
}

fn evaluate(m: &AccumMeasure, u: f64, tol: f64) -> (PsiEvaluation, bool) {
    if u == 0.0 {
        return (
            PsiEvaluation {
                u,
                value: Complex64::new(0.0, 0.0),
                quadrature_error_bound: 0.0,
                tail_truncation: 0.0,
            },
            true,
        );
    }
    let mut value = atoms_part(m, u);
    let mut error = 0.0;
    let mut window = 0.0f64;
    let mut converged = true;
    let share = tol / m.pieces.len().max(1) as f64;
    for piece in &m.pieces {
        let r = piece_part(piece, u, share);
        value += r.value;
        error += r.error;
        window = window.max(r.window);
        converged &= r.converged;
    }
    (
        PsiEvaluation {
            u,
            value,
            quadrature_error_bound: error,
            tail_truncation: window,
        },
        converged && error <= tol,
    )
}

/// `Ψ_K(u)` with a reported error bound `<= tol`.
pub fn psi_eval(m: &AccumMeasure, u: f64, tol: f64) -> Result<PsiEvaluation> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be > 0, got {tol}")));
    }
    let (ev, ok) = evaluate(m, u, tol);
    if ok {
        Ok(ev)
    } else {
        Err(Error::QuadratureFailure {
            achieved: ev.quadrature_error_bound,
            requested: tol,
        })
    }
}

/// Like [`psi_eval`] but returns the best value reached even when the
/// requested accuracy was not met.
pub fn psi_eval_best_effort(m: &AccumMeasure, u: f64, tol: f64) -> PsiEvaluation {
    evaluate(m, u, tol.max(f64::MIN_POSITIVE)).0
}

/// `Ψ` on a grid of `u`, evaluated in parallel.
pub fn psi_sweep(m: &AccumMeasure, u_grid: &[f64], tol: f64) -> Result<Vec<PsiEvaluation>> {
    u_grid.par_iter().map(|&u| psi_eval(m, u, tol)).collect()
}

/// `(Re[Ψ(h) + Ψ(-h) - 2Ψ(0)] / h², -total_mass)`.
pub fn psi_curvature_check(m: &AccumMeasure, h: f64) -> Result<(f64, f64)> {
    if !(h > 0.0 && h <= 1e-3) {
        return Err(Error::invalid(format!(
            "curvature step must be in (0, 1e-3], got {h}"
        )));
    }
    // relative accuracy: Ψ(±h) is O(h² · mass)
    let tol = (1e-10 * h * h * m.total_mass).max(f64::MIN_POSITIVE);
    let plus = psi_eval(m, h, tol)?.value;
    let minus = psi_eval(m, -h, tol)?.value;
    let second = (plus + minus).re / (h * h);
    Ok((second, -m.total_mass))
}

/// Partition `-a = x_0 < ... < x_ℓ = a` with optional tags `c_j ∈ ]x_j, x_{j+1}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mesh {
    pub points: Vec<f64>,
    #[serde(default)]
    pub tags: Option<Vec<f64>>,
}

impl Mesh {
    pub fn uniform(a: f64, cells: usize) -> Self {
        let h = 2.0 * a / cells as f64;
        let mut points: Vec<f64> = (0..=cells).map(|j| -a + j as f64 * h).collect();
        points[cells] = a;
        // keep 0 exactly on the mesh when it falls there
        if cells.is_multiple_of(2) {
            points[cells / 2] = 0.0;
        }
        Mesh { points, tags: None }
    }

    pub fn with_tags(mut self, tags: Vec<f64>) -> Self {
        self.tags = Some(tags);
        self
    }

    /// Each cell split in two.
    pub fn refined(&self) -> Self {
        let mut points = Vec::with_capacity(self.points.len() * 2);
        for w in self.points.windows(2) {
            points.push(w[0]);
            points.push(0.5 * (w[0] + w[1]));
        }
        points.push(*self.points.last().expect("mesh has points"));
        Mesh { points, tags: None }
    }

    fn validate(&self, a: f64) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::invalid("mesh needs at least two points"));
        }
        if self.points[0] != -a || *self.points.last().unwrap() != a {
            return Err(Error::invalid(format!("mesh must span [-{a}, {a}]")));
        }
        if self.points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("mesh points must be strictly increasing"));
        }
        if let Some(tags) = &self.tags {
            if tags.len() + 1 != self.points.len() {
                return Err(Error::invalid("mesh needs one tag per cell"));
            }
            for (j, &c) in tags.iter().enumerate() {
                let (lo, hi) = (self.points[j], self.points[j + 1]);
                if !(c > lo && c <= hi) || c == 0.0 {
                    return Err(Error::invalid(format!(
                        "tag {c} must be nonzero and lie in ]{lo}, {hi}]"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Poisson-type product `exp(S(u))` approximating `exp(Ψ_K(u))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonTypeApprox {
    pub window: f64,
    pub terms: Vec<PoissonTypeTerm>,
    /// `λ_K` mass outside `]-a, a]`, which the product ignores.
    pub dropped_mass: f64,
}

impl PoissonTypeApprox {
    pub fn spec(&self) -> CharFnSpec {
        CharFnSpec::PoissonTypeProduct {
            terms: self.terms.clone(),
        }
    }

    pub fn exponent(&self, u: f64) -> Complex64 {
        self.terms.iter().map(|t| t.exponent(u)).sum()
    }

    /// `max_u |exp(S(u)) − exp(Ψ_K(u))|`.
    pub fn sup_error(&self, m: &AccumMeasure, u_grid: &[f64], tol: f64) -> Result<f64> {
        let errs: Vec<f64> = u_grid
            .par_iter()
            .map(|&u| {
                let psi = psi_eval(m, u, tol)?.value;
                Ok((self.exponent(u).exp() - psi.exp()).norm())
            })
            .collect::<Result<_>>()?;
        Ok(errs.into_iter().fold(0.0, f64::max))
    }
}

/// Riemann–Stieltjes product over the cells of `mesh`: cell `j` with mass
/// `M_j` and tag `c_j` yields `λ_j = M_j / c_j²`, `μ_j = M_j / c_j`.
///
/// Without explicit tags, `c_j` is the `K`-barycenter of the cell (the cell
/// midpoint when the barycenter is 0).
pub fn poisson_type_approx(m: &AccumMeasure, a: f64, mesh: &Mesh) -> Result<PoissonTypeApprox> {
    if !(a > 0.0) {
        return Err(Error::invalid(format!("window must be > 0, got {a}")));
    }
    mesh.validate(a)?;
    let mut terms = Vec::new();
    for (j, w) in mesh.points.windows(2).enumerate() {
        let (lo, hi) = (w[0], w[1]);
        let mass = m.interval_mass(lo, hi);
        if mass <= 0.0 {
            continue;
        }
        let c = match &mesh.tags {
            Some(tags) => tags[j],
            None => {
                let bary = (m.interval_first_moment(lo, hi) / mass).clamp(lo, hi);
                let mid = 0.5 * (lo + hi);
                if bary != 0.0 && bary > lo {
                    bary
                } else if mid != 0.0 {
                    mid
                } else {
                    return Err(Error::RefineMeshNearOrigin { lo, hi, mass });
                }
            }
        };
        terms.push(PoissonTypeTerm {
            mu: mass / c,
            lambda: mass / (c * c),
            site: c,
            shift: 0.0,
        });
    }
    let dropped_mass = eval_accum(m, -a) + (m.total_mass - eval_accum(m, a)).max(0.0);
    Ok(PoissonTypeApprox {
        window: a,
        terms,
        dropped_mass,
    })
}

/// `exp(i a u + Ψ_K(u))` as a CF spec.
pub fn limit_cf(m: &AccumMeasure, shift: f64) -> CharFnSpec {
    CharFnSpec::PsiExponential {
        shift,
        measure: m.clone(),
    }
}
