//! Triangular-array rows and the hypothesis statistics computed on them.
//!
//! A row is the finite family `{X_{k,n} : 1 <= k <= k(n)}` of independent
//! components. Every component family supported here has closed-form partial
//! and tail second moments, so the statistics below carry no quadrature error.

use crate::error::{Error, Result};
use crate::report::Trend;
use crate::special::{norm_cdf, norm_pdf, norm_sf};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Distribution of one array entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ComponentDist {
    /// Atoms as `(site, probability)` pairs.
    FiniteDiscrete {
        atoms: Vec<(f64, f64)>,
    },
    Gaussian {
        m: f64,
        var: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
}

/// Which side of the boundary the tail integral includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    /// `|y - c| > eps`
    Open,
    /// `|y - c| >= eps`
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub var: f64,
}

pub fn component_moments(d: &ComponentDist) -> Moments {
    Moments {
        mean: d.mean(),
        var: d.var(),
    }
}

impl ComponentDist {
    pub fn finite_discrete(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let d = ComponentDist::FiniteDiscrete { atoms };
        d.validate()?;
        Ok(d)
    }

    pub fn gaussian(m: f64, var: f64) -> Result<Self> {
        let d = ComponentDist::Gaussian { m, var };
        d.validate()?;
        Ok(d)
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        let d = ComponentDist::Uniform { lo, hi };
        d.validate()?;
        Ok(d)
    }

    /// Symmetric ±1 with probability ½ each.
    pub fn rademacher() -> Self {
        ComponentDist::FiniteDiscrete {
            atoms: vec![(-1.0, 0.5), (1.0, 0.5)],
        }
    }

    /// Bernoulli(p) on {0, 1}.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::finite_discrete(vec![(0.0, 1.0 - p), (1.0, p)])
    }

    /// Point mass at `c`.
    pub fn point(c: f64) -> Self {
        ComponentDist::FiniteDiscrete {
            atoms: vec![(c, 1.0)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ComponentDist::FiniteDiscrete { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::Empty("finite_discrete atoms"));
                }
                let mut total = 0.0;
                for &(x, p) in atoms {
                    if !x.is_finite() || !p.is_finite() {
                        return Err(Error::invalid("finite_discrete atoms must be finite"));
                    }
                    if p < 0.0 {
                        return Err(Error::invalid(format!(
                            "finite_discrete probability {p} is negative"
                        )));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::invalid(format!(
                        "finite_discrete probabilities sum to {total}, not 1"
                    )));
                }
            }
            ComponentDist::Gaussian { m, var } => {
                if !m.is_finite() || !var.is_finite() || *var <= 0.0 {
                    return Err(Error::invalid(format!(
                        "gaussian component needs finite m and var > 0, got m = {m}, var = {var}"
                    )));
                }
            }
            ComponentDist::Uniform { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                    return Err(Error::invalid(format!(
                        "uniform component needs finite lo < hi, got [{lo}, {hi}]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, ComponentDist::FiniteDiscrete { .. })
    }

    pub fn mean(&self) -> f64 {
        match self {
            ComponentDist::FiniteDiscrete { atoms } => atoms.iter().map(|&(x, p)| x * p).sum(),
            ComponentDist::Gaussian { m, .. } => *m,
            ComponentDist::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    pub fn var(&self) -> f64 {
        match self {
            ComponentDist::FiniteDiscrete { atoms } => {
                let mean = self.mean();
                atoms
                    .iter()
                    .map(|&(x, p)| (x - mean) * (x - mean) * p)
                    .sum()
            }
            ComponentDist::Gaussian { var, .. } => *var,
            ComponentDist::Uniform { lo, hi } => (hi - lo) * (hi - lo) / 12.0,
        }
    }

    /// `E X²`.
    pub fn second_moment(&self) -> f64 {
        match self {
            ComponentDist::FiniteDiscrete { atoms } => atoms.iter().map(|&(x, p)| x * x * p).sum(),
            ComponentDist::Gaussian { m, var } => m * m + var,
            ComponentDist::Uniform { lo, hi } => (lo * lo + lo * hi + hi * hi) / 3.0,
        }
    }

    pub fn cf(&self, t: f64) -> Complex64 {
        match self {
            ComponentDist::FiniteDiscrete { atoms } => atoms
                .iter()
                .map(|&(x, p)| Complex64::from_polar(p, t * x))
                .sum(),
            ComponentDist::Gaussian { m, var } => Complex64::new(-0.5 * var * t * t, m * t).exp(),
            ComponentDist::Uniform { lo, hi } => {
                let h = 0.5 * (hi - lo);
                let c = 0.5 * (hi + lo);
                let x = t * h;
                let sinc = if x.abs() < 1e-4 {
                    1.0 - x * x / 6.0 + x.powi(4) / 120.0
                } else {
                    x.sin() / x
                };
                Complex64::from_polar(sinc, c * t)
            }
        }
    }

    /// `∫_{(-∞, x]} y² dF(y)`.
    pub fn partial_m2(&self, x: f64) -> f64 {
        if x == f64::INFINITY {
            return self.second_moment();
        }
        if x == f64::NEG_INFINITY {
            return 0.0;
        }
        match self {
            ComponentDist::FiniteDiscrete { atoms } => atoms
                .iter()
                .filter(|&&(y, _)| y <= x)
                .map(|&(y, p)| y * y * p)
                .sum(),
            ComponentDist::Gaussian { m, var } => {
                let s = var.sqrt();
                let z = (x - m) / s;
                let total = m * m + var;
                let lin = (2.0 * m * s + var * z) * norm_pdf(z);
                if z <= 0.0 {
                    (total * norm_cdf(z) - lin).max(0.0)
                } else {
                    // upper tail ∫_x^∞ y² dF = total·Q(z) + (2ms + s²z)φ(z)
                    (total - (total * norm_sf(z) + lin)).max(0.0)
                }
            }
            ComponentDist::Uniform { lo, hi } => {
                let c = x.clamp(*lo, *hi);
                (c.powi(3) - lo.powi(3)) / (3.0 * (hi - lo))
            }
        }
    }

    /// `∫_{(-∞, x)} y² dF(y)`; differs from [`partial_m2`](Self::partial_m2) only at atoms.
    pub fn partial_m2_left(&self, x: f64) -> f64 {
        match self {
            ComponentDist::FiniteDiscrete { atoms } => atoms
                .iter()
                .filter(|&&(y, _)| y < x)
                .map(|&(y, p)| y * y * p)
                .sum(),
            _ => self.partial_m2(x),
        }
    }

    /// `∫_{(-∞, x]} y³ dF(y)`, used to place mass-weighted tags.
    pub fn partial_m3(&self, x: f64) -> f64 {
        match self {
            ComponentDist::FiniteDiscrete { atoms } => atoms
                .iter()
                .filter(|&&(y, _)| y <= x)
                .map(|&(y, p)| y * y * y * p)
                .sum(),
            ComponentDist::Gaussian { m, var } => {
                let s = var.sqrt();
                if x == f64::INFINITY {
                    return m.powi(3) + 3.0 * m * var;
                }
                if x == f64::NEG_INFINITY {
                    return 0.0;
                }
                let z = (x - m) / s;
                let phi = norm_pdf(z);
                let cdf = norm_cdf(z);
                m.powi(3) * cdf - 3.0 * m * m * s * phi + 3.0 * m * var * (cdf - z * phi)
                    - s * var * (z * z + 2.0) * phi
            }
            ComponentDist::Uniform { lo, hi } => {
                let c = x.clamp(*lo, *hi);
                (c.powi(4) - lo.powi(4)) / (4.0 * (hi - lo))
            }
        }
    }

    /// `∫_{|y - center| > eps} y² dF(y)` (or `>=` with [`Tail::Closed`]).
    pub fn tail_m2(&self, center: f64, eps: f64, tail: Tail) -> f64 {
        match self {
            ComponentDist::FiniteDiscrete { atoms } => atoms
                .iter()
                .filter(|&&(y, _)| {
                    let d = (y - center).abs();
                    match tail {
                        Tail::Open => d > eps,
                        Tail::Closed => d >= eps,
                    }
                })
                .fold(0.0, |acc, &(y, p)| acc + y * y * p),
            ComponentDist::Uniform { lo, hi } => {
                let w = 3.0 * (hi - lo);
                let left = if center - eps > *lo {
                    ((center - eps).min(*hi).powi(3) - lo.powi(3)) / w
                } else {
                    0.0
                };
                let right = if center + eps < *hi {
                    (hi.powi(3) - (center + eps).max(*lo).powi(3)) / w
                } else {
                    0.0
                };
                left + right
            }
            ComponentDist::Gaussian { .. } => {
                let below = self.partial_m2(center - eps);
                let above = self.second_moment() - self.partial_m2(center + eps);
                (below + above).max(0.0)
            }
        }
    }

    /// `P(|X| >= eps)`.
    pub fn prob_abs_ge(&self, eps: f64) -> f64 {
        match self {
            ComponentDist::FiniteDiscrete { atoms } => atoms
                .iter()
                .filter(|&&(y, _)| y.abs() >= eps)
                .fold(0.0, |acc, &(_, p)| acc + p),
            ComponentDist::Gaussian { m, var } => {
                let s = var.sqrt();
                norm_cdf((-eps - m) / s) + norm_sf((eps - m) / s)
            }
            ComponentDist::Uniform { lo, hi } => {
                let left = ((-eps).min(*hi) - lo).max(0.0);
                let right = (hi - eps.max(*lo)).max(0.0);
                ((left + right) / (hi - lo)).min(1.0)
            }
        }
    }

    /// Law of `X - c`.
    pub fn shifted(&self, c: f64) -> Self {
        match self {
            ComponentDist::FiniteDiscrete { atoms } => ComponentDist::FiniteDiscrete {
                atoms: atoms.iter().map(|&(x, p)| (x - c, p)).collect(),
            },
            ComponentDist::Gaussian { m, var } => ComponentDist::Gaussian {
                m: m - c,
                var: *var,
            },
            ComponentDist::Uniform { lo, hi } => ComponentDist::Uniform {
                lo: lo - c,
                hi: hi - c,
            },
        }
    }

    /// Law of `X / s` for `s > 0`.
    pub fn scaled_down(&self, s: f64) -> Self {
        match self {
            ComponentDist::FiniteDiscrete { atoms } => ComponentDist::FiniteDiscrete {
                atoms: atoms.iter().map(|&(x, p)| (x / s, p)).collect(),
            },
            ComponentDist::Gaussian { m, var } => ComponentDist::Gaussian {
                m: m / s,
                var: var / (s * s),
            },
            ComponentDist::Uniform { lo, hi } => ComponentDist::Uniform {
                lo: lo / s,
                hi: hi / s,
            },
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ComponentDist::FiniteDiscrete { atoms } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for &(x, p) in atoms {
                    acc += p;
                    if u < acc {
                        return x;
                    }
                }
                atoms[atoms.len() - 1].0
            }
            ComponentDist::Gaussian { m, var } => {
                let z: f64 = rng.sample(StandardNormal);
                m + var.sqrt() * z
            }
            ComponentDist::Uniform { lo, hi } => {
                let u: f64 = rng.random();
                lo + (hi - lo) * u
            }
        }
    }
}

/// One row `{X_{k,n}}` of the array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowSpec {
    pub n: u64,
    pub components: Vec<ComponentDist>,
}

impl RowSpec {
    pub fn new(n: u64, components: Vec<ComponentDist>) -> Result<Self> {
        let row = RowSpec { n, components };
        row.validate()?;
        Ok(row)
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::Empty("row components"));
        }
        self.components.iter().try_for_each(ComponentDist::validate)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Runs of identical consecutive components as `(component, count)`.
    pub fn grouped(&self) -> Vec<(&ComponentDist, usize)> {
        let mut out: Vec<(&ComponentDist, usize)> = Vec::new();
        for c in &self.components {
            match out.last_mut() {
                Some((prev, count)) if *prev == c => *count += 1,
                _ => out.push((c, 1)),
            }
        }
        out
    }

    /// `MV(n) = Σ_k Var X_{k,n}`.
    pub fn mv(&self) -> f64 {
        self.grouped()
            .iter()
            .map(|(d, c)| *c as f64 * d.var())
            .sum()
    }

    /// `B_n = max_k Var X_{k,n}`.
    pub fn max_var(&self) -> f64 {
        self.grouped()
            .iter()
            .map(|(d, _)| d.var())
            .fold(0.0, f64::max)
    }

    /// `a_n = Σ_k E X_{k,n}`.
    pub fn mean_sum(&self) -> f64 {
        self.grouped()
            .iter()
            .map(|(d, c)| *c as f64 * d.mean())
            .sum()
    }

    /// Row concatenation; the result keeps this row's index.
    pub fn concat(&self, other: &RowSpec) -> RowSpec {
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        RowSpec {
            n: self.n,
            components,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowStatistics {
    /// `U(n, ε) = max_k P(|X_{k,n}| >= ε)`
    pub u: f64,
    pub mv: f64,
    pub b: f64,
    pub a_n: f64,
}

pub fn row_statistics(row: &RowSpec, eps: f64) -> RowStatistics {
    let groups = row.grouped();
    let u = groups
        .iter()
        .map(|(d, _)| d.prob_abs_ge(eps))
        .fold(0.0, f64::max);
    RowStatistics {
        u,
        mv: row.mv(),
        b: row.max_var(),
        a_n: row.mean_sum(),
    }
}

/// Rule `n ↦ row`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArrayGenerator {
    /// `k(n) = n` copies of `base / s_n` with `s_n² = n Var(base)`.
    StandardizedIid {
        base: ComponentDist,
    },
    /// `n` copies of Bernoulli(λ/n) on {0, 1}.
    BernoulliPoisson {
        lambda: f64,
    },
    Explicit {
        rows: Vec<RowSpec>,
    },
}

impl ArrayGenerator {
    pub fn validate(&self) -> Result<()> {
        match self {
            ArrayGenerator::StandardizedIid { base } => {
                base.validate()?;
                if base.var() <= 0.0 {
                    return Err(Error::invalid(
                        "standardized_iid base must have positive variance",
                    ));
                }
                Ok(())
            }
            ArrayGenerator::BernoulliPoisson { lambda } => {
                if !lambda.is_finite() || *lambda <= 0.0 {
                    return Err(Error::invalid(format!(
                        "bernoulli_poisson lambda must be > 0, got {lambda}"
                    )));
                }
                Ok(())
            }
            ArrayGenerator::Explicit { rows } => {
                if rows.is_empty() {
                    return Err(Error::Empty("explicit rows"));
                }
                rows.iter().try_for_each(RowSpec::validate)
            }
        }
    }

    pub fn row(&self, n: u64) -> Result<RowSpec> {
        match self {
            ArrayGenerator::StandardizedIid { base } => {
                if n == 0 {
                    return Err(Error::invalid("row index must be >= 1"));
                }
                let s_n = (n as f64 * base.var()).sqrt();
                let scaled = base.scaled_down(s_n);
                RowSpec::new(n, vec![scaled; n as usize])
            }
            ArrayGenerator::BernoulliPoisson { lambda } => {
                let p = lambda / n as f64;
                if n == 0 || p > 1.0 {
                    return Err(Error::invalid(format!(
                        "bernoulli_poisson needs n >= lambda, got n = {n}, lambda = {lambda}"
                    )));
                }
                RowSpec::new(n, vec![ComponentDist::bernoulli(p)?; n as usize])
            }
            ArrayGenerator::Explicit { rows } => rows
                .iter()
                .find(|r| r.n == n)
                .cloned()
                .ok_or(Error::MissingRow(n)),
        }
    }
}

/// Value of a statistic at one `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsValue {
    pub eps: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisRow {
    pub n: u64,
    pub mv: f64,
    pub b: f64,
    pub a_n: f64,
    /// `U(n, ε)` per `ε`.
    pub u: Vec<EpsValue>,
    /// Markov bound `ε⁻² max_k E X²_{k,n}` per `ε`; equals `ε⁻² B_n` on centered rows.
    pub markov_bound: Vec<EpsValue>,
}

/// BVH / VCH / UAN outcomes along `n_list`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisBlock {
    pub rows: Vec<HypothesisRow>,
    pub bvh_sup_mv: f64,
    pub bvh: bool,
    pub vch: Option<Trend>,
    pub uan: Vec<Trend>,
    pub markov_holds: bool,
}

impl HypothesisBlock {
    pub fn sup_mv(&self) -> f64 {
        self.bvh_sup_mv
    }
}

pub fn hypothesis_check(
    gen: &ArrayGenerator,
    n_list: &[u64],
    eps_list: &[f64],
    c_target: Option<f64>,
    tol: f64,
) -> Result<HypothesisBlock> {
    if n_list.is_empty() {
        return Err(Error::Empty("n_list"));
    }
    if eps_list.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::invalid("every eps must be > 0"));
    }
    let rows: Vec<HypothesisRow> = n_list
        .par_iter()
        .map(|&n| {
            let row = gen.row(n)?;
            let groups = row.grouped();
            let max_m2 = groups
                .iter()
                .map(|(d, _)| d.second_moment())
                .fold(0.0, f64::max);
            let mut u = Vec::with_capacity(eps_list.len());
            let mut markov_bound = Vec::with_capacity(eps_list.len());
            for &eps in eps_list {
                let st = row_statistics(&row, eps);
                u.push(EpsValue { eps, value: st.u });
                markov_bound.push(EpsValue {
                    eps,
                    value: max_m2 / (eps * eps),
                });
            }
            Ok(HypothesisRow {
                n,
                mv: row.mv(),
                b: row.max_var(),
                a_n: row.mean_sum(),
                u,
                markov_bound,
            })
        })
        .collect::<Result<_>>()?;

    let ns: Vec<u64> = rows.iter().map(|r| r.n).collect();
    let bvh_sup_mv = rows.iter().map(|r| r.mv).fold(0.0, f64::max);
    let vch = c_target.map(|c| {
        Trend::new(
            format!("|MV(n) - {c}|"),
            ns.clone(),
            rows.iter().map(|r| (r.mv - c).abs()).collect(),
            tol,
        )
    });
    let uan = eps_list
        .iter()
        .enumerate()
        .map(|(i, &eps)| {
            Trend::new(
                format!("U(n,{eps})"),
                ns.clone(),
                rows.iter().map(|r| r.u[i].value).collect(),
                tol,
            )
        })
        .collect();
    let markov_holds = rows.iter().all(|r| {
        r.u.iter()
            .zip(&r.markov_bound)
            .all(|(u, b)| u.value <= b.value * (1.0 + 1e-12))
    });
    Ok(HypothesisBlock {
        rows,
        bvh_sup_mv,
        bvh: bvh_sup_mv.is_finite(),
        vch,
        uan,
        markov_holds,
    })
}
