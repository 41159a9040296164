//! Closed-form characteristic functions and the infinite-divisibility algebra
//! on them: products, conjugates and `p`-th roots.
//!
//! Every supported CF has a non-vanishing closed form `exp(L(t))` with an
//! explicit, continuous exponent `L`. Roots and powers act on `L` directly,
//! so no complex-logarithm branch is ever chosen numerically.

use crate::accum::AccumMeasure;
use crate::error::{Error, Result};
use crate::psi;
use crate::tolerances::PSI_CF;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// One factor `exp(-i μ u + λ (e^{icu} - 1) + i a u)` of a Poisson-type product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonTypeTerm {
    /// Drift, the coefficient of `-i u`.
    pub mu: f64,
    pub lambda: f64,
    /// Jump site `c != 0`.
    pub site: f64,
    /// Linear shift, the coefficient of `i u`.
    pub shift: f64,
}

impl PoissonTypeTerm {
    pub fn new(mu: f64, lambda: f64, site: f64, shift: f64) -> Result<Self> {
        let t = PoissonTypeTerm {
            mu,
            lambda,
            site,
            shift,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::invalid(format!(
                "poisson-type intensity must be >= 0, got {}",
                self.lambda
            )));
        }
        if self.site == 0.0 || !self.site.is_finite() {
            return Err(Error::invalid(
                "poisson-type site must be finite and nonzero",
            ));
        }
        if !self.mu.is_finite() || !self.shift.is_finite() {
            return Err(Error::invalid(
                "poisson-type drift and shift must be finite",
            ));
        }
        Ok(())
    }

    pub fn exponent(&self, u: f64) -> Complex64 {
        let jump = Complex64::new((self.site * u).cos() - 1.0, (self.site * u).sin());
        Complex64::new(0.0, (self.shift - self.mu) * u) + jump * self.lambda
    }
}

/// A characteristic function in symbolic form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum CharFnSpec {
    /// `e^{iat}`
    Degenerate {
        a: f64,
    },
    /// `exp(imt - var t²/2)`
    Gaussian {
        m: f64,
        var: f64,
    },
    /// Law of `a + Poisson(λ)`: `exp(iat + λ(e^{it} - 1))`
    TranslatedPoisson {
        a: f64,
        lambda: f64,
    },
    /// `(1 - it/rate)^{-shape}`
    Gamma {
        shape: f64,
        rate: f64,
    },
    /// `exp(i loc t - scale |t|)`
    Cauchy {
        loc: f64,
        scale: f64,
    },
    PoissonTypeProduct {
        terms: Vec<PoissonTypeTerm>,
    },
    /// `exp(i shift u + Ψ_K(u))` for the accumulation measure `K`.
    PsiExponential {
        shift: f64,
        measure: AccumMeasure,
    },
    Product {
        factors: Vec<CharFnSpec>,
    },
    /// `base^{1/p}`
    Power {
        base: Box<CharFnSpec>,
        p: u32,
    },
    Conjugate {
        base: Box<CharFnSpec>,
    },
}

fn finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite, got {x}")))
    }
}

impl CharFnSpec {
    pub fn degenerate(a: f64) -> Result<Self> {
        finite("degenerate a", a)?;
        Ok(CharFnSpec::Degenerate { a })
    }

    /// `Gaussian(m, 0)` is returned as `Degenerate(m)`.
    pub fn gaussian(m: f64, var: f64) -> Result<Self> {
        let spec = CharFnSpec::Gaussian { m, var };
        spec.validate()?;
        Ok(if var == 0.0 {
            CharFnSpec::Degenerate { a: m }
        } else {
            spec
        })
    }

    pub fn translated_poisson(a: f64, lambda: f64) -> Result<Self> {
        let spec = CharFnSpec::TranslatedPoisson { a, lambda };
        spec.validate()?;
        Ok(spec)
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        let spec = CharFnSpec::Gamma { shape, rate };
        spec.validate()?;
        Ok(spec)
    }

    pub fn cauchy(loc: f64, scale: f64) -> Result<Self> {
        let spec = CharFnSpec::Cauchy { loc, scale };
        spec.validate()?;
        Ok(spec)
    }

    pub fn poisson_type_product(terms: Vec<PoissonTypeTerm>) -> Result<Self> {
        let spec = CharFnSpec::PoissonTypeProduct { terms };
        spec.validate()?;
        Ok(spec)
    }

    pub fn power(base: CharFnSpec, p: u32) -> Result<Self> {
        let spec = CharFnSpec::Power {
            base: Box::new(base),
            p,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: CharFnSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CharFnSpec::Degenerate { a } => finite("degenerate a", *a),
            CharFnSpec::Gaussian { m, var } => {
                finite("gaussian m", *m)?;
                if !(*var >= 0.0) || !var.is_finite() {
                    return Err(Error::invalid(format!(
                        "gaussian variance must be >= 0, got {var}"
                    )));
                }
                Ok(())
            }
            CharFnSpec::TranslatedPoisson { a, lambda } => {
                finite("translated_poisson a", *a)?;
                if !(*lambda > 0.0) || !lambda.is_finite() {
                    return Err(Error::invalid(format!(
                        "poisson lambda must be > 0, got {lambda}"
                    )));
                }
                Ok(())
            }
            CharFnSpec::Gamma { shape, rate } => {
                if !(*shape > 0.0 && *rate > 0.0) || !shape.is_finite() || !rate.is_finite() {
                    return Err(Error::invalid(format!(
                        "gamma needs shape > 0 and rate > 0, got ({shape}, {rate})"
                    )));
                }
                Ok(())
            }
            CharFnSpec::Cauchy { loc, scale } => {
                finite("cauchy loc", *loc)?;
                if !(*scale > 0.0) || !scale.is_finite() {
                    return Err(Error::invalid(format!(
                        "cauchy scale must be > 0, got {scale}"
                    )));
                }
                Ok(())
            }
            CharFnSpec::PoissonTypeProduct { terms } => {
                terms.iter().try_for_each(PoissonTypeTerm::validate)
            }
            CharFnSpec::PsiExponential { shift, measure } => {
                finite("psi_exponential shift", *shift)?;
                measure.validate()
            }
            CharFnSpec::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::Empty("product factors"));
                }
                factors.iter().try_for_each(CharFnSpec::validate)
            }
            CharFnSpec::Power { base, p } => {
                if *p == 0 {
                    return Err(Error::invalid("power exponent 1/p needs p >= 1"));
                }
                base.validate()
            }
            CharFnSpec::Conjugate { base } => base.validate(),
        }
    }

    /// The exponent `L(t)` with `ψ(t) = exp(L(t))`.
    pub fn exponent(&self, t: f64) -> Complex64 {
        match self {
            CharFnSpec::Degenerate { a } => Complex64::new(0.0, a * t),
            CharFnSpec::Gaussian { m, var } => Complex64::new(-0.5 * var * t * t, m * t),
            CharFnSpec::TranslatedPoisson { a, lambda } => {
                Complex64::new(lambda * (t.cos() - 1.0), a * t + lambda * t.sin())
            }
            CharFnSpec::Gamma { shape, rate } => -Complex64::new(1.0, -t / rate).ln() * *shape,
            CharFnSpec::Cauchy { loc, scale } => Complex64::new(-scale * t.abs(), loc * t),
            CharFnSpec::PoissonTypeProduct { terms } => {
                terms.iter().map(|term| term.exponent(t)).sum()
            }
            CharFnSpec::PsiExponential { shift, measure } => {
                Complex64::new(0.0, shift * t) + psi::psi_eval_best_effort(measure, t, PSI_CF).value
            }
            CharFnSpec::Product { factors } => factors.iter().map(|f| f.exponent(t)).sum(),
            CharFnSpec::Power { base, p } => base.exponent(t) / *p as f64,
            CharFnSpec::Conjugate { base } => base.exponent(t).conj(),
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.exponent(t).exp()
    }

    fn name(&self) -> &'static str {
        match self {
            CharFnSpec::Degenerate { .. } => "degenerate",
            CharFnSpec::Gaussian { .. } => "gaussian",
            CharFnSpec::TranslatedPoisson { .. } => "translated_poisson",
            CharFnSpec::Gamma { .. } => "gamma",
            CharFnSpec::Cauchy { .. } => "cauchy",
            CharFnSpec::PoissonTypeProduct { .. } => "poisson_type_product",
            CharFnSpec::PsiExponential { .. } => "psi_exponential",
            CharFnSpec::Product { .. } => "product",
            CharFnSpec::Power { .. } => "power",
            CharFnSpec::Conjugate { .. } => "conjugate",
        }
    }
}

pub fn eval_cf(spec: &CharFnSpec, t: f64) -> Complex64 {
    spec.eval(t)
}

/// The CF `ψ^{1/p}`, expressed in the same family as `spec`.
pub fn pth_root(spec: &CharFnSpec, p: u32) -> Result<CharFnSpec> {
    if p == 0 {
        return Err(Error::invalid("root order p must be >= 1"));
    }
    let q = p as f64;
    Ok(match spec {
        CharFnSpec::Degenerate { a } => CharFnSpec::Degenerate { a: a / q },
        CharFnSpec::Gaussian { m, var } => CharFnSpec::Gaussian {
            m: m / q,
            var: var / q,
        },
        CharFnSpec::TranslatedPoisson { a, lambda } => CharFnSpec::TranslatedPoisson {
            a: a / q,
            lambda: lambda / q,
        },
        CharFnSpec::Gamma { shape, rate } => CharFnSpec::Gamma {
            shape: shape / q,
            rate: *rate,
        },
        CharFnSpec::Cauchy { loc, scale } => CharFnSpec::Cauchy {
            loc: loc / q,
            scale: scale / q,
        },
        CharFnSpec::PoissonTypeProduct { terms } => CharFnSpec::PoissonTypeProduct {
            terms: terms
                .iter()
                .map(|t| PoissonTypeTerm {
                    mu: t.mu / q,
                    lambda: t.lambda / q,
                    site: t.site,
                    shift: t.shift / q,
                })
                .collect(),
        },
        CharFnSpec::PsiExponential { shift, measure } => CharFnSpec::PsiExponential {
            shift: shift / q,
            measure: measure.scaled(1.0 / q),
        },
        other => return Err(Error::NoClosedFormRoot(other.name())),
    })
}

pub fn product(factors: Vec<CharFnSpec>) -> Result<CharFnSpec> {
    if factors.is_empty() {
        return Err(Error::Empty("product factors"));
    }
    Ok(CharFnSpec::Product { factors })
}

/// `(conj ψ, ψ·conj ψ)`; the second evaluates to `|ψ|²`.
pub fn conjugate_and_norm(spec: &CharFnSpec) -> (CharFnSpec, CharFnSpec) {
    let conj = CharFnSpec::Conjugate {
        base: Box::new(spec.clone()),
    };
    let norm = CharFnSpec::Product {
        factors: vec![spec.clone(), conj.clone()],
    };
    (conj, norm)
}

/// `|ψ^{1/n}(t) - 1|` for `n = 1..=n_max` (outer index) and each `t` (inner index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootProfile {
    pub t_grid: Vec<f64>,
    pub deviations: Vec<Vec<f64>>,
}

impl RootProfile {
    pub fn at(&self, n: u32, t_index: usize) -> f64 {
        self.deviations[n as usize - 1][t_index]
    }
}

pub fn root_limit_profile(spec: &CharFnSpec, t_grid: &[f64], n_max: u32) -> Result<RootProfile> {
    let deviations = (1..=n_max)
        .map(|n| {
            let root = pth_root(spec, n)?;
            Ok(t_grid
                .iter()
                .map(|&t| (root.eval(t) - 1.0).norm())
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(RootProfile {
        t_grid: t_grid.to_vec(),
        deviations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn closed_form_values() {
        let g = CharFnSpec::gaussian(0.0, 1.0).unwrap();
        assert_eq!(g.eval(0.0), Complex64::new(1.0, 0.0));
        assert!(close(
            g.eval(2.0),
            Complex64::new((-2.0f64).exp(), 0.0),
            1e-16
        ));
        let p = CharFnSpec::translated_poisson(0.0, 1.0).unwrap();
        assert!(close(
            p.eval(PI),
            Complex64::new((-2.0f64).exp(), 0.0),
            1e-15
        ));
    }

    #[test]
    fn roots_follow_families() {
        let r = |s: CharFnSpec, p| pth_root(&s, p).unwrap();
        assert_eq!(
            r(CharFnSpec::gamma(3.0, 2.0).unwrap(), 3),
            CharFnSpec::Gamma {
                shape: 1.0,
                rate: 2.0
            }
        );
        assert_eq!(
            r(CharFnSpec::cauchy(1.0, 2.0).unwrap(), 2),
            CharFnSpec::Cauchy {
                loc: 0.5,
                scale: 1.0
            }
        );
        assert_eq!(
            r(CharFnSpec::Degenerate { a: 5.0 }, 5),
            CharFnSpec::Degenerate { a: 1.0 }
        );
        assert!(matches!(
            pth_root(
                &product(vec![CharFnSpec::Degenerate { a: 1.0 }]).unwrap(),
                2
            ),
            Err(Error::NoClosedFormRoot("product"))
        ));
    }

    #[test]
    fn product_rules() {
        let g = CharFnSpec::gaussian(0.0, 1.0).unwrap();
        let pr = product(vec![g.clone(), g.clone()]).unwrap();
        let g2 = CharFnSpec::gaussian(0.0, 2.0).unwrap();
        let single = product(vec![g.clone()]).unwrap();
        let dd = product(vec![
            CharFnSpec::Degenerate { a: 0.3 },
            CharFnSpec::Degenerate { a: 1.1 },
        ])
        .unwrap();
        for t in [-3.0, -0.5, 0.0, 1.0, 2.5] {
            assert!(close(
                pr.eval(t),
                Complex64::new((-t * t).exp(), 0.0),
                1e-15
            ));
            assert!(close(pr.eval(t), g2.eval(t), 1e-15));
            assert_eq!(single.eval(t), g.eval(t));
            assert!(close(
                dd.eval(t),
                Complex64::from_polar(1.0, 1.4 * t),
                1e-15
            ));
        }
        assert!(matches!(product(vec![]), Err(Error::Empty(_))));
    }

    #[test]
    fn conjugate_and_norm_values() {
        let (m, v) = (0.7, 1.3);
        let (conj, _) = conjugate_and_norm(&CharFnSpec::gaussian(m, v).unwrap());
        let t = 1.9;
        let expected = Complex64::new(-v * t * t / 2.0, -m * t).exp();
        assert!(close(conj.eval(t), expected, 1e-15));

        let (a, b) = (0.4, 1.5);
        let (_, norm) = conjugate_and_norm(&CharFnSpec::cauchy(a, b).unwrap());
        let z = norm.eval(-2.2);
        assert_eq!(z.im, 0.0);
        assert!((z.re - (-2.0 * b * 2.2f64).exp()).abs() < 1e-16);
        assert_eq!(norm.eval(0.0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn root_profile_values() {
        let a = 2.3;
        let prof = root_limit_profile(&CharFnSpec::Degenerate { a }, &[0.0, 1.5], 12).unwrap();
        for n in 1..=12u32 {
            assert_eq!(prof.at(n, 0), 0.0);
            let x = a / n as f64 * 1.5;
            assert!((prof.at(n, 1) - 2.0 * (x / 2.0).sin().abs()).abs() < 1e-15);
        }
        let g = root_limit_profile(&CharFnSpec::gaussian(0.0, 1.0).unwrap(), &[1.0], 8).unwrap();
        for n in 1..=8u32 {
            let expected = (1.0 - (-0.5 / n as f64).exp()).abs();
            assert!((g.at(n, 0) - expected).abs() < 1e-16);
        }
    }

    #[test]
    fn log_as_limit_of_scaled_roots() {
        // p(ψ^{1/p} - 1) → log ψ, checked against the closed-form exponent.
        let specs = [
            CharFnSpec::gaussian(0.3, 1.2).unwrap(),
            CharFnSpec::translated_poisson(-1.0, 2.0).unwrap(),
            CharFnSpec::gamma(2.0, 1.5).unwrap(),
            CharFnSpec::cauchy(0.5, 0.8).unwrap(),
            CharFnSpec::Degenerate { a: 1.7 },
        ];
        for s in &specs {
            let t = 1.3;
            let log = s.exponent(t);
            let mut prev = f64::INFINITY;
            for p in [10u32, 100, 1000, 10000] {
                let root = pth_root(s, p).unwrap();
                let approx = (root.eval(t) - 1.0) * p as f64;
                let err = (approx - log).norm();
                assert!(err < prev, "{s:?} p={p}");
                prev = err;
            }
            assert!(prev < 1e-3 * log.norm().max(1.0));
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(CharFnSpec::gaussian(0.0, -1.0).is_err());
        assert!(CharFnSpec::gamma(1.0, 0.0).is_err());
        assert!(CharFnSpec::cauchy(0.0, -2.0).is_err());
        assert!(CharFnSpec::translated_poisson(0.0, 0.0).is_err());
        assert!(PoissonTypeTerm::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(PoissonTypeTerm::new(0.0, -1.0, 1.0, 0.0).is_err());
        assert_eq!(
            CharFnSpec::gaussian(2.0, 0.0).unwrap(),
            CharFnSpec::Degenerate { a: 2.0 }
        );
        assert!(CharFnSpec::power(CharFnSpec::Degenerate { a: 1.0 }, 0).is_err());
    }

    #[test]
    fn json_shape() {
        let spec = CharFnSpec::power(
            CharFnSpec::Conjugate {
                base: Box::new(CharFnSpec::gamma(2.0, 3.0).unwrap()),
            },
            3,
        )
        .unwrap();
        let v = serde_json::to_value(&spec).unwrap();
        assert_eq!(v["family"], "power");
        assert_eq!(v["params"]["p"], 3);
        assert_eq!(v["params"]["base"]["family"], "conjugate");
        assert_eq!(
            v["params"]["base"]["params"]["base"]["params"]["shape"],
            2.0
        );
        let back = CharFnSpec::from_json(&v.to_string()).unwrap();
        assert_eq!(back, spec);
        assert!(
            CharFnSpec::from_json(r#"{"family":"gamma","params":{"shape":-1,"rate":1}}"#).is_err()
        );
    }
}
