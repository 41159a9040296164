//! Sampling of row sums `S_n` and distances between their empirical law and
//! the predicted limit.
//!
//! Random numbers come from ChaCha8 (`rand_chacha` pinned in Cargo.toml).
//! Samples are drawn in fixed blocks of [`BLOCK`] sums; block `j` of stream
//! `stream_id` starts at word position `j << 48` of the ChaCha stream keyed by
//! `seed`. Output therefore depends only on `(seed, stream_id, count)`, never
//! on the number of worker threads.

use crate::array::{ArrayGenerator, ComponentDist, RowSpec};
use crate::cf::CharFnSpec;
use crate::error::{Error, Result};
use crate::special::norm_cdf;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

pub const BLOCK: usize = 1024;
const BLOCK_WORD_SHIFT: u32 = 48;

fn block_rng(seed: u64, stream_id: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng.set_word_pos((block as u128) << BLOCK_WORD_SHIFT);
    rng
}

/// `count` independent realizations of `S_n = Σ_k X_{k,n}`.
pub fn sample_sums(row: &RowSpec, count: usize, seed: u64, stream_id: u64) -> Vec<f64> {
    let groups = row.grouped();
    let blocks = count.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .flat_map_iter(|j| {
            let mut rng = block_rng(seed, stream_id, j);
            let len = BLOCK.min(count - j * BLOCK);
            let groups = &groups;
            (0..len)
                .map(move |_| {
                    let mut s = 0.0;
                    for (d, c) in groups {
                        for _ in 0..*c {
                            s += d.sample(&mut rng);
                        }
                    }
                    s
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// A limit law with a distribution function, for KS distances.
pub trait LimitLaw {
    fn cdf(&self, x: f64) -> f64;
    /// `F(x-)`; equals `cdf` for continuous laws.
    fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StdNormal;

impl LimitLaw for StdNormal {
    fn cdf(&self, x: f64) -> f64 {
        norm_cdf(x)
    }
}

/// Law of `b + Poisson(λ)`, with pmf tabulated by `p_{k+1} = p_k λ/(k+1)`.
#[derive(Debug, Clone)]
pub struct ShiftedPoisson {
    pub b: f64,
    pub lambda: f64,
    cumulative: Vec<f64>,
}

impl ShiftedPoisson {
    pub fn new(b: f64, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() || !b.is_finite() {
            return Err(Error::invalid(format!(
                "shifted poisson needs finite b and lambda > 0, got ({b}, {lambda})"
            )));
        }
        let mut p = (-lambda).exp();
        let mut acc = 0.0;
        let mut cumulative = Vec::new();
        let mut k = 0u64;
        loop {
            acc += p;
            cumulative.push(acc.min(1.0));
            k += 1;
            p *= lambda / k as f64;
            if (k as f64 > lambda && p < 1e-18) || k > 10_000_000 {
                break;
            }
        }
        Ok(ShiftedPoisson {
            b,
            lambda,
            cumulative,
        })
    }

    fn cdf_count(&self, k: f64) -> f64 {
        if k < 0.0 {
            return 0.0;
        }
        let idx = k as usize;
        self.cumulative.get(idx).copied().unwrap_or(1.0)
    }

    pub fn pmf(&self, k: u64) -> f64 {
        let hi = self.cdf_count(k as f64);
        let lo = if k == 0 {
            0.0
        } else {
            self.cdf_count(k as f64 - 1.0)
        };
        hi - lo
    }
}

impl LimitLaw for ShiftedPoisson {
    fn cdf(&self, x: f64) -> f64 {
        self.cdf_count((x - self.b).floor())
    }

    fn cdf_left(&self, x: f64) -> f64 {
        self.cdf_count((x - self.b).ceil() - 1.0)
    }
}

/// Wraps a continuous CDF closure.
pub struct ContinuousLaw<F: Fn(f64) -> f64>(pub F);

impl<F: Fn(f64) -> f64> LimitLaw for ContinuousLaw<F> {
    fn cdf(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

/// `sup_x |ECDF(x) - F(x)|`, exact: both one-sided gaps are taken at every
/// distinct sample value, using `F(x-)` on the left.
pub fn ks_distance<L: LimitLaw + ?Sized>(samples: &[f64], law: &L) -> f64 {
    assert!(!samples.is_empty(), "ks_distance needs samples");
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let upto = j as f64 / n;
        d = d
            .max((upto - law.cdf(x)).abs())
            .max((below - law.cdf_left(x)).abs());
        i = j;
    }
    d
}

/// `max_u |N⁻¹ Σ e^{iuS} - ψ(u)|`.
pub fn ecf_distance(samples: &[f64], limit_cf: &CharFnSpec, u_grid: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("samples"));
    }
    if u_grid.is_empty() {
        return Err(Error::Empty("u_grid"));
    }
    let n = samples.len() as f64;
    let gaps: Vec<f64> = u_grid
        .par_iter()
        .map(|&u| {
            let ecf: Complex64 = samples
                .iter()
                .map(|&s| Complex64::from_polar(1.0, u * s))
                .sum::<Complex64>()
                / n;
            (ecf - limit_cf.eval(u)).norm()
        })
        .collect();
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

/// Exact total-variation distance between Binomial(n, p) and Poisson(λ),
/// by pmf summation.
pub fn tv_binomial_poisson(n: u64, p: f64, lambda: f64) -> f64 {
    let q = 1.0 - p;
    let mut b = (n as f64 * (-p).ln_1p()).exp();
    let mut pi = (-lambda).exp();
    let mut diff = 0.0;
    let mut pois_mass = 0.0;
    for k in 0..=n {
        diff += (b - pi).abs();
        pois_mass += pi;
        let kf = k as f64;
        b *= (n as f64 - kf) / (kf + 1.0) * p / q;
        pi *= lambda / (kf + 1.0);
    }
    0.5 * (diff + (1.0 - pois_mass).max(0.0))
}

/// Limit law a simulation is compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SimLimit {
    StdGaussian,
    TranslatedPoisson {
        b: f64,
        lambda: f64,
    },
    /// Only the ECF distance is available for a general CF.
    Cf {
        spec: CharFnSpec,
    },
}

impl SimLimit {
    pub fn cf_spec(&self) -> Result<CharFnSpec> {
        match self {
            SimLimit::StdGaussian => CharFnSpec::gaussian(0.0, 1.0),
            SimLimit::TranslatedPoisson { b, lambda } => {
                CharFnSpec::translated_poisson(*b, *lambda)
            }
            SimLimit::Cf { spec } => {
                spec.validate()?;
                Ok(spec.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    pub generator: ArrayGenerator,
    pub n_list: Vec<u64>,
    pub samples_per_n: usize,
    pub seed: u64,
    pub u_grid: Vec<f64>,
    pub limit: SimLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationRow {
    pub n: u64,
    pub ks_distance: Option<f64>,
    pub ecf_distance: f64,
    /// Exact TV distance, when the row is i.i.d. Bernoulli and the limit is Poisson.
    pub exact_tv: Option<f64>,
    pub samples_per_n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub rows: Vec<SimulationRow>,
}

fn iid_bernoulli(row: &RowSpec) -> Option<f64> {
    match row.grouped().as_slice() {
        [(ComponentDist::FiniteDiscrete { atoms }, _)] => match atoms.as_slice() {
            [(x0, q), (x1, p)] if *x0 == 0.0 && *x1 == 1.0 && (p + q - 1.0).abs() < 1e-15 => {
                Some(*p)
            }
            _ => None,
        },
        _ => None,
    }
}

/// Runs `plan`; row `i` of `n_list` draws from substream `i`. With
/// `keep_samples`, the raw sums are returned alongside the report.
pub fn simulate(
    plan: &SimulationPlan,
    keep_samples: bool,
) -> Result<(SimulationReport, Vec<Vec<f64>>)> {
    if plan.samples_per_n == 0 {
        return Err(Error::invalid("samples_per_n must be >= 1"));
    }
    if plan.n_list.is_empty() {
        return Err(Error::Empty("n_list"));
    }
    let cf = plan.limit.cf_spec()?;
    let law: Option<Box<dyn LimitLaw + Sync>> = match &plan.limit {
        SimLimit::StdGaussian => Some(Box::new(StdNormal)),
        SimLimit::TranslatedPoisson { b, lambda } => {
            Some(Box::new(ShiftedPoisson::new(*b, *lambda)?))
        }
        SimLimit::Cf { .. } => None,
    };
    let mut rows = Vec::with_capacity(plan.n_list.len());
    let mut raw = Vec::new();
    for (i, &n) in plan.n_list.iter().enumerate() {
        let row = plan.generator.row(n)?;
        let samples = sample_sums(&row, plan.samples_per_n, plan.seed, i as u64);
        let ks = law.as_ref().map(|l| ks_distance(&samples, l.as_ref()));
        let ecf = ecf_distance(&samples, &cf, &plan.u_grid)?;
        let exact_tv = match (&plan.limit, iid_bernoulli(&row)) {
            (SimLimit::TranslatedPoisson { b, lambda }, Some(p)) if *b == 0.0 => {
                Some(tv_binomial_poisson(row.len() as u64, p, *lambda))
            }
            _ => None,
        };
        rows.push(SimulationRow {
            n,
            ks_distance: ks,
            ecf_distance: ecf,
            exact_tv,
            samples_per_n: plan.samples_per_n,
            seed: plan.seed,
        });
        if keep_samples {
            raw.push(samples);
        }
    }
    Ok((SimulationReport { rows }, raw))
}

impl SimulationReport {
    /// Columns `n,ks_distance,ecf_distance,samples_per_n,seed`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,ks_distance,ecf_distance,samples_per_n,seed")?;
        for r in &self.rows {
            let ks = r.ks_distance.map(|v| format!("{v:?}")).unwrap_or_default();
            writeln!(
                w,
                "{},{},{:?},{},{}",
                r.n, ks, r.ecf_distance, r.samples_per_n, r.seed
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_masses_sum_exactly() {
        let row = RowSpec::new(
            3,
            vec![
                ComponentDist::point(0.25),
                ComponentDist::point(1.5),
                ComponentDist::point(-0.75),
            ],
        )
        .unwrap();
        assert!(sample_sums(&row, 100, 1, 0).iter().all(|&s| s == 1.0));
    }

    #[test]
    fn bernoulli_sums_are_integers() {
        let row = ArrayGenerator::BernoulliPoisson { lambda: 1.0 }
            .row(50)
            .unwrap();
        for s in sample_sums(&row, 2000, 9, 3) {
            assert!(s.fract() == 0.0 && (0.0..=50.0).contains(&s));
        }
    }

    #[test]
    fn reproducible_across_thread_counts() {
        let row = ArrayGenerator::StandardizedIid {
            base: ComponentDist::gaussian(0.0, 2.0).unwrap(),
        }
        .row(7)
        .unwrap();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = one.install(|| sample_sums(&row, 5000, 42, 1));
        let b = four.install(|| sample_sums(&row, 5000, 42, 1));
        assert_eq!(a, b);
        assert_ne!(a, sample_sums(&row, 5000, 42, 2));
        // prefix property: fewer samples is a prefix of more samples
        assert_eq!(&a[..1500], &sample_sums(&row, 1500, 42, 1)[..]);
    }

    #[test]
    fn statistical_checks_at_1e5() {
        let n = 100_000;
        let rad = ArrayGenerator::StandardizedIid {
            base: ComponentDist::rademacher(),
        }
        .row(100)
        .unwrap();
        let s = sample_sums(&rad, n, 11, 0);
        let mean = s.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() <= 0.013, "mean {mean}");

        let normal = RowSpec::new(1, vec![ComponentDist::gaussian(0.0, 1.0).unwrap()]).unwrap();
        let s = sample_sums(&normal, n, 12, 0);
        // DKW at δ = 1e-3
        let dkw = ((2.0f64 / 1e-3).ln() / (2.0 * n as f64)).sqrt();
        assert!(ks_distance(&s, &StdNormal) <= dkw);
        let grid: Vec<f64> = (-10..=10).map(|i| i as f64 * 0.5).collect();
        assert!(ecf_distance(&s, &CharFnSpec::gaussian(0.0, 1.0).unwrap(), &grid).unwrap() <= 0.02);
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_distance(&[0.0], &StdNormal), 0.5);
        let n = 1000;
        let quantiles: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
        let uniform = ContinuousLaw(|x: f64| x.clamp(0.0, 1.0));
        assert!((ks_distance(&quantiles, &uniform) - 0.5 / n as f64).abs() < 1e-15);
    }

    #[test]
    fn ks_against_step_cdf() {
        let law = ShiftedPoisson::new(0.0, 1.0).unwrap();
        // all samples at 0: ECDF jumps to 1 at 0 where F(0) = e^{-1}
        let d = ks_distance(&[0.0; 10], &law);
        assert!((d - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        // a law compared with its own exact proportions at integer support
        let mut samples = Vec::new();
        for k in 0..20u64 {
            let count = (law.pmf(k) * 1e6).round() as usize;
            samples.extend(std::iter::repeat_n(k as f64, count));
        }
        assert!(ks_distance(&samples, &law) < 1e-5);
        assert_eq!(law.cdf_left(0.0), 0.0);
        assert_eq!(law.cdf(0.5), law.cdf(0.0));
    }

    #[test]
    fn ecf_examples() {
        let zeros = vec![0.0; 10];
        assert_eq!(
            ecf_distance(&zeros, &CharFnSpec::Degenerate { a: 0.0 }, &[1.0, 3.0]).unwrap(),
            0.0
        );
        let d = ecf_distance(&zeros, &CharFnSpec::gaussian(0.0, 1.0).unwrap(), &[2.0]).unwrap();
        assert!((d - (1.0 - (-2.0f64).exp())).abs() < 1e-15);
        assert!(ecf_distance(&[], &CharFnSpec::Degenerate { a: 0.0 }, &[1.0]).is_err());
    }

    #[test]
    fn tv_le_cam_envelope() {
        for n in [100u64, 1000, 10000] {
            let lambda = 1.0;
            let tv = tv_binomial_poisson(n, lambda / n as f64, lambda);
            assert!(
                tv > 0.0 && tv <= lambda * lambda / n as f64,
                "n={n} tv={tv}"
            );
        }
        assert!(tv_binomial_poisson(10, 0.0, 1e-300) < 1e-299);
    }

    #[test]
    fn csv_shape() {
        let report = SimulationReport {
            rows: vec![SimulationRow {
                n: 10,
                ks_distance: Some(0.5),
                ecf_distance: 0.25,
                exact_tv: None,
                samples_per_n: 3,
                seed: 7,
            }],
        };
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "n,ks_distance,ecf_distance,samples_per_n,seed\n10,0.5,0.25,3,7\n"
        );
    }
}
