//! Lindeberg-type functions, the Comparison-Lemma residual, and the Gaussian,
//! Poisson and general limit verdicts built on them.
//!
//! A verdict turns limit statements into a finite check: each tracked
//! statistic must end below its tolerance at the largest `n` and be
//! nonincreasing over the last three `n` (see [`Trend`]).

use crate::accum::{build_accum, preweak_distance, LimitMeasureSpec, PreweakRow};
use crate::array::{hypothesis_check, ArrayGenerator, HypothesisBlock, RowSpec, Tail};
use crate::cf::CharFnSpec;
use crate::error::{Error, Result};
use crate::psi::limit_cf;
use crate::report::Trend;
use crate::tolerances::Tolerances;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Reason code reported when `Σ Var X_{k,n} = 1` fails.
pub const REASON_NORMALIZATION: &str = "GC0 normalization";

/// `g_n(ε) = Σ_k ∫_{|x| >= ε} x² dF_{k,n}(x)`.
pub fn lindeberg_gaussian(row: &RowSpec, eps: f64) -> f64 {
    row.grouped().iter().fold(0.0, |acc, (d, c)| {
        acc + *c as f64 * d.tail_m2(0.0, eps, Tail::Closed)
    })
}

/// `g_{n,pois}(ε) = Σ_k ∫_{|x-1| > ε} x² dF*_{k,n}(x)` with `F*` the law of `X - E X`.
pub fn lindeberg_poisson(row: &RowSpec, eps: f64) -> f64 {
    row.grouped().iter().fold(0.0, |acc, (d, c)| {
        acc + *c as f64 * d.shifted(d.mean()).tail_m2(1.0, eps, Tail::Open)
    })
}

/// `log(1 + v) - v`, accurate for small `v`.
fn log1p_minus_id(v: Complex64) -> Complex64 {
    if v.norm() < 1e-2 {
        // -v²/2 + v³/3 - ... ; 12 terms reach double precision at |v| < 1e-2
        let mut term = v * v;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 2..14 {
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            acc += term * (sign / k as f64);
            term *= v;
        }
        acc
    } else {
        (v + 1.0).ln() - v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub n: u64,
    pub u: f64,
    pub residual: f64,
    pub bound: f64,
    /// `bound - residual`
    pub margin: f64,
}

/// `residual = |Σ_k [Log f_k(u) - (f_k(u) - 1)]|` over the centered component
/// CFs, and `bound = c·u⁴·B_n/4`.
pub fn comparison_residual(row: &RowSpec, u: f64, c_bound: f64) -> Result<(f64, f64)> {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut k = 0usize;
    for (d, count) in row.grouped() {
        let f = d.shifted(d.mean()).cf(u);
        let v = f - 1.0;
        if v.norm() >= 1.0 {
            return Err(Error::OutsideComparisonRegime {
                k,
                deviation: v.norm(),
            });
        }
        sum += log1p_minus_id(v) * count as f64;
        k += count;
    }
    let bound = c_bound * u.powi(4) * row.max_var() / 4.0;
    Ok((sum.norm(), bound))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Gaussian,
    Poisson,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub kind: VerdictKind,
    pub hypotheses: HypothesisBlock,
    /// Every tracked statistic; the verdict passes only if each one does.
    pub trends: Vec<Trend>,
    pub comparison: Vec<ComparisonRow>,
    pub preweak: Vec<PreweakRow>,
    pub predicted_limit: Option<CharFnSpec>,
    pub pass: bool,
    /// Names of failed checks.
    pub reasons: Vec<String>,
}

impl VerdictReport {
    pub fn trend(&self, name: &str) -> Option<&Trend> {
        self.trends.iter().find(|t| t.name == name)
    }
}

/// Comparison-Lemma arguments `u` reported with every verdict.
pub const COMPARISON_U: [f64; 3] = [0.5, 1.0, 2.0];

fn comparison_table(rows: &[RowSpec], c_bound: f64) -> Vec<ComparisonRow> {
    rows.iter()
        .flat_map(|row| {
            COMPARISON_U.iter().filter_map(move |&u| {
                comparison_residual(row, u, c_bound)
                    .ok()
                    .map(|(residual, bound)| ComparisonRow {
                        n: row.n,
                        u,
                        residual,
                        bound,
                        margin: bound - residual,
                    })
            })
        })
        .collect()
}

fn build_rows(gen: &ArrayGenerator, n_list: &[u64]) -> Result<Vec<RowSpec>> {
    if n_list.is_empty() {
        return Err(Error::Empty("n_list"));
    }
    n_list.par_iter().map(|&n| gen.row(n)).collect()
}

fn eps_trends(
    rows: &[RowSpec],
    eps_list: &[f64],
    label: &str,
    tol: f64,
    stat: fn(&RowSpec, f64) -> f64,
) -> Vec<Trend> {
    let ns: Vec<u64> = rows.iter().map(|r| r.n).collect();
    eps_list
        .iter()
        .map(|&eps| {
            let values: Vec<f64> = rows.par_iter().map(|r| stat(r, eps)).collect();
            Trend::new(format!("{label}({eps})"), ns.clone(), values, tol)
        })
        .collect()
}

fn finish(
    kind: VerdictKind,
    hypotheses: HypothesisBlock,
    trends: Vec<Trend>,
    comparison: Vec<ComparisonRow>,
    preweak: Vec<PreweakRow>,
    mut reasons: Vec<String>,
    predicted: CharFnSpec,
) -> VerdictReport {
    reasons.extend(trends.iter().filter(|t| !t.pass).map(|t| t.name.clone()));
    let pass = reasons.is_empty();
    VerdictReport {
        kind,
        hypotheses,
        trends,
        comparison,
        preweak,
        predicted_limit: pass.then_some(predicted),
        pass,
        reasons,
    }
}

/// Checks the standard-Gaussian limit of a centered array: unit row variance,
/// `B_n → 0` and `g_n(ε) → 0` for each `ε`.
pub fn gaussian_verdict(
    gen: &ArrayGenerator,
    n_list: &[u64],
    eps_list: &[f64],
    tol: &Tolerances,
) -> Result<VerdictReport> {
    if eps_list.is_empty() {
        return Err(Error::Empty("eps_list"));
    }
    let rows = build_rows(gen, n_list)?;
    for row in &rows {
        for (k, d) in row.components.iter().enumerate() {
            let mean = d.mean();
            if mean.abs() > tol.centered {
                return Err(Error::NotCentered { n: row.n, k, mean });
            }
        }
    }
    let hypotheses = hypothesis_check(gen, n_list, eps_list, Some(1.0), tol.exact_statistic)?;
    let ns: Vec<u64> = rows.iter().map(|r| r.n).collect();

    let mut reasons = Vec::new();
    if rows
        .iter()
        .any(|r| (r.mv() - 1.0).abs() > tol.exact_statistic)
    {
        reasons.push(REASON_NORMALIZATION.to_string());
    }
    let mut trends = vec![Trend::new(
        "B_n",
        ns,
        rows.iter().map(RowSpec::max_var).collect(),
        tol.exact_statistic,
    )];
    trends.extend(eps_trends(
        &rows,
        eps_list,
        "g_n",
        tol.exact_statistic,
        lindeberg_gaussian,
    ));
    let comparison = comparison_table(&rows, hypotheses.sup_mv());
    Ok(finish(
        VerdictKind::Gaussian,
        hypotheses,
        trends,
        comparison,
        Vec::new(),
        reasons,
        CharFnSpec::Gaussian { m: 0.0, var: 1.0 },
    ))
}

/// Checks the limit `P(b, λ)` (law of `b + Poisson(λ)`): `B_n → 0`,
/// `MV(n) → λ`, `a_n → b + λ` and `g_{n,pois}(ε) → 0`.
pub fn poisson_verdict(
    gen: &ArrayGenerator,
    n_list: &[u64],
    eps_list: &[f64],
    (b, lambda): (f64, f64),
    tol: &Tolerances,
) -> Result<VerdictReport> {
    if eps_list.is_empty() {
        return Err(Error::Empty("eps_list"));
    }
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!(
            "poisson target lambda must be > 0, got {lambda}"
        )));
    }
    let rows = build_rows(gen, n_list)?;
    let hypotheses = hypothesis_check(gen, n_list, eps_list, Some(lambda), tol.exact_statistic)?;
    let ns: Vec<u64> = rows.iter().map(|r| r.n).collect();
    let a = b + lambda;
    let mut trends = vec![
        Trend::new(
            "B_n",
            ns.clone(),
            rows.iter().map(RowSpec::max_var).collect(),
            tol.exact_statistic,
        ),
        Trend::new(
            "|MV(n) - lambda|",
            ns.clone(),
            rows.iter().map(|r| (r.mv() - lambda).abs()).collect(),
            tol.exact_statistic,
        ),
        Trend::new(
            "|a_n - (b + lambda)|",
            ns,
            rows.iter().map(|r| (r.mean_sum() - a).abs()).collect(),
            tol.exact_statistic,
        ),
    ];
    trends.extend(eps_trends(
        &rows,
        eps_list,
        "g_n_pois",
        tol.exact_statistic,
        lindeberg_poisson,
    ));
    let comparison = comparison_table(&rows, hypotheses.sup_mv());
    let predicted = limit_cf(
        &LimitMeasureSpec::ScaledDiracAtOne { lambda }.to_measure(),
        a,
    );
    Ok(finish(
        VerdictKind::Poisson,
        hypotheses,
        trends,
        comparison,
        Vec::new(),
        Vec::new(),
        predicted,
    ))
}

/// Checks `S_n ⇝ exp(i a u + Ψ_{K*}(u))` through pre-weak and weak
/// convergence of the centered accumulation functions `K*_n → K*`, together
/// with `B_n → 0` and, when given, `a_n → shift_target`.
#[allow(clippy::too_many_arguments)]
pub fn general_verdict(
    gen: &ArrayGenerator,
    n_list: &[u64],
    limit: &LimitMeasureSpec,
    shift_target: Option<f64>,
    grid: &[f64],
    exclusion: f64,
    tol: &Tolerances,
) -> Result<VerdictReport> {
    limit.validate()?;
    let rows = build_rows(gen, n_list)?;
    let measures: Vec<(u64, _)> = rows
        .par_iter()
        .map(|r| (r.n, build_accum(r, true)))
        .collect();
    let preweak = preweak_distance(&measures, limit, grid, exclusion)?;
    let hypotheses = hypothesis_check(gen, n_list, &[], None, tol.exact_statistic)?;
    let ns: Vec<u64> = rows.iter().map(|r| r.n).collect();
    let mut trends = vec![
        Trend::new(
            "B_n",
            ns.clone(),
            rows.iter().map(RowSpec::max_var).collect(),
            tol.exact_statistic,
        ),
        Trend::new(
            "preweak distance",
            ns.clone(),
            preweak.iter().map(|p| p.sup_deviation).collect(),
            tol.exact_statistic,
        ),
        Trend::new(
            "mass gap",
            ns.clone(),
            preweak.iter().map(|p| p.mass_gap).collect(),
            tol.quadrature_statistic,
        ),
    ];
    let a_last = rows.last().map(RowSpec::mean_sum).unwrap_or(0.0);
    if let Some(a) = shift_target {
        trends.push(Trend::new(
            "|a_n - shift|",
            ns,
            rows.iter().map(|r| (r.mean_sum() - a).abs()).collect(),
            tol.exact_statistic,
        ));
    }
    let comparison = comparison_table(&rows, hypotheses.sup_mv());
    let predicted = limit_cf(&limit.to_measure(), shift_target.unwrap_or(a_last));
    Ok(finish(
        VerdictKind::General,
        hypotheses,
        trends,
        comparison,
        preweak,
        Vec::new(),
        predicted,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::ComponentDist;

    fn rademacher() -> ArrayGenerator {
        ArrayGenerator::StandardizedIid {
            base: ComponentDist::rademacher(),
        }
    }

    #[test]
    fn lindeberg_rademacher() {
        let row = rademacher().row(100).unwrap();
        assert_eq!(lindeberg_gaussian(&row, 0.11), 0.0);
        assert!((lindeberg_gaussian(&row, 0.1) - 1.0).abs() < 1e-14);
        assert!((lindeberg_gaussian(&row, 1e-300) - row.mv()).abs() < 1e-15);
    }

    #[test]
    fn lindeberg_poisson_examples() {
        let lambda = 2.0;
        for n in [10u64, 100, 1000] {
            let row = ArrayGenerator::BernoulliPoisson { lambda }.row(n).unwrap();
            let p = lambda / n as f64;
            let expected = n as f64 * (1.0 - p) * p * p;
            assert!((lindeberg_poisson(&row, 0.5) - expected).abs() < 1e-14);
        }
        let point = RowSpec::new(3, vec![ComponentDist::point(2.0); 3]).unwrap();
        assert_eq!(lindeberg_poisson(&point, 0.5), 0.0);
        let rad = rademacher().row(25).unwrap();
        assert!((lindeberg_poisson(&rad, 0.5) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn comparison_rademacher_100() {
        let row = rademacher().row(100).unwrap();
        let (res, bound) = comparison_residual(&row, 1.0, 1.0).unwrap();
        let c = 0.1f64.cos();
        let expected = (100.0 * (c.ln() - (c - 1.0))).abs();
        assert!((res - expected).abs() < 1e-12 * expected);
        assert!((bound - 0.0025).abs() < 1e-15);
        assert!(res <= bound);
        assert_eq!(comparison_residual(&row, 0.0, 1.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn comparison_single_component_small_u() {
        let v = 0.3;
        let row = RowSpec::new(1, vec![ComponentDist::gaussian(0.0, v).unwrap()]).unwrap();
        let u = 0.01;
        let (res, bound) = comparison_residual(&row, u, 1.0).unwrap();
        // log f = -v u²/2 exactly, so residual = |f - 1 - log f| ≈ (v u²/2)²/2
        let x = v * u * u / 2.0;
        let expected = (-x).exp_m1() + x;
        assert!((res - expected).abs() < 1e-9 * expected);
        assert!((bound - u.powi(4) * v / 4.0).abs() < 1e-22);
        assert!(res <= bound);
    }

    #[test]
    fn comparison_regime_violation() {
        let row = RowSpec::new(1, vec![ComponentDist::rademacher()]).unwrap();
        // cos(π) - 1 = -2
        assert!(matches!(
            comparison_residual(&row, std::f64::consts::PI, 1.0),
            Err(Error::OutsideComparisonRegime { k: 0, .. })
        ));
    }

    #[test]
    fn gaussian_verdict_rademacher() {
        let r = gaussian_verdict(
            &rademacher(),
            &[100, 1000, 10000],
            &[0.05, 0.1, 0.5],
            &Tolerances::default(),
        )
        .unwrap();
        assert!(r.pass, "{:?}", r.reasons);
        assert_eq!(
            r.predicted_limit,
            Some(CharFnSpec::Gaussian { m: 0.0, var: 1.0 })
        );
        for eps in [0.05, 0.1, 0.5] {
            assert_eq!(r.trend(&format!("g_n({eps})")).unwrap().last(), 0.0);
        }
        assert!(r.comparison.iter().all(|c| c.margin >= 0.0));
    }

    #[test]
    fn gaussian_verdict_uniform_support() {
        let gen = ArrayGenerator::StandardizedIid {
            base: ComponentDist::uniform(-1.0, 1.0).unwrap(),
        };
        let eps = 0.1;
        let r = gaussian_verdict(&gen, &[100, 301, 10000], &[eps], &Tolerances::default()).unwrap();
        assert!(r.pass, "{:?}", r.reasons);
        // support is |x| <= sqrt(3/n): zero once n > 3/ε² = 300
        let g = r.trend("g_n(0.1)").unwrap();
        assert!(g.values[0] > 0.0);
        assert_eq!(g.values[1], 0.0);
        assert_eq!(g.values[2], 0.0);
    }

    #[test]
    fn gaussian_verdict_rejects_mv_two() {
        let rows = [10u64, 100, 1000]
            .iter()
            .map(|&n| {
                let s = (n as f64 / 2.0).sqrt();
                RowSpec::new(
                    n,
                    vec![ComponentDist::rademacher().scaled_down(s); n as usize],
                )
                .unwrap()
            })
            .collect();
        let gen = ArrayGenerator::Explicit { rows };
        let r = gaussian_verdict(&gen, &[10, 100, 1000], &[0.5], &Tolerances::default()).unwrap();
        assert!(!r.pass);
        assert!(r.reasons.iter().any(|s| s == REASON_NORMALIZATION));
        assert!(r.predicted_limit.is_none());
    }

    #[test]
    fn gaussian_verdict_rejects_noncentered() {
        let gen = ArrayGenerator::BernoulliPoisson { lambda: 1.0 };
        assert!(matches!(
            gaussian_verdict(&gen, &[10], &[0.5], &Tolerances::default()),
            Err(Error::NotCentered { .. })
        ));
    }

    #[test]
    fn poisson_verdicts() {
        let tol = Tolerances::default();
        let ns = [100u64, 1000, 10000];
        let bp = ArrayGenerator::BernoulliPoisson { lambda: 1.0 };
        let r = poisson_verdict(&bp, &ns, &[0.5], (0.0, 1.0), &tol).unwrap();
        assert!(r.pass, "{:?}", r.reasons);
        let limit = r.predicted_limit.clone().unwrap();
        let tp = CharFnSpec::translated_poisson(0.0, 1.0).unwrap();
        for u in [-2.0, 0.3, 1.0, 5.0] {
            assert!((limit.eval(u) - tp.eval(u)).norm() < 1e-14);
        }
        for v in &r.trend("|a_n - (b + lambda)|").unwrap().values {
            assert!(*v < 1e-12);
        }

        let wrong_lambda = poisson_verdict(&bp, &ns, &[0.5], (0.0, 2.0), &tol).unwrap();
        assert!(!wrong_lambda.pass);
        assert!(wrong_lambda.reasons.iter().any(|s| s == "|MV(n) - lambda|"));

        let rad = poisson_verdict(&rademacher(), &ns, &[0.5], (-1.0, 1.0), &tol).unwrap();
        assert!(!rad.pass);
        let g = rad.trend("g_n_pois(0.5)").unwrap();
        assert!(g.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn general_verdicts() {
        let tol = Tolerances::default();
        let ns = [100u64, 1000, 10000];
        let bp = ArrayGenerator::BernoulliPoisson { lambda: 1.0 };
        let pois = LimitMeasureSpec::ScaledDiracAtOne { lambda: 1.0 };
        let r = general_verdict(&bp, &ns, &pois, Some(1.0), &[0.5, 1.5], 1e-3, &tol).unwrap();
        assert!(r.pass, "{:?}", r.reasons);

        let grid = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];
        let gauss = LimitMeasureSpec::DiracAtZero { mass: 1.0 };
        let r = general_verdict(&rademacher(), &ns, &gauss, Some(0.0), &grid, 1e-3, &tol).unwrap();
        assert!(r.pass, "{:?}", r.reasons);

        let r = general_verdict(&rademacher(), &ns, &pois, None, &[0.5, 1.5], 1e-3, &tol).unwrap();
        assert!(!r.pass);
        let row = r.preweak.last().unwrap();
        assert!(row.sup_deviation >= 1.0 - 1e-12);
        assert_eq!(row.argmax, 0.5);
    }
}
