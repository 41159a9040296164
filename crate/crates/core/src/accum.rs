//! Accumulation measures `dK_n(x) = x² Σ_k dF_{k,n}(x)` and their distance to a
//! candidate limit `K`.
//!
//! Discrete components become atoms `(x, x²·p)`; continuous components are
//! kept as exact pieces `w·y² dF(y)` whose partial masses come from the
//! closed-form partial second moments of the component law.

use crate::array::{ComponentDist, RowSpec};
use crate::error::{Error, Result};
use crate::tolerances::ATOM_MERGE;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub site: f64,
    pub mass: f64,
}

/// The measure `weight · y² dF(y)` for a continuous law `F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousPiece {
    pub weight: f64,
    pub dist: ComponentDist,
}

impl ContinuousPiece {
    pub fn mass(&self) -> f64 {
        self.weight * self.dist.second_moment()
    }

    pub fn partial_mass(&self, x: f64) -> f64 {
        self.weight * self.dist.partial_m2(x)
    }

    /// `∫_{(-∞, x]} y dK` restricted to this piece.
    pub fn partial_first(&self, x: f64) -> f64 {
        self.weight * self.dist.partial_m3(x)
    }
}

/// Lebesgue–Stieltjes measure `λ_K` of an accumulation function `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccumMeasure {
    /// Sorted by site, strictly positive masses.
    pub atoms: Vec<Atom>,
    pub pieces: Vec<ContinuousPiece>,
    pub total_mass: f64,
}

impl AccumMeasure {
    pub fn empty() -> Self {
        AccumMeasure {
            atoms: Vec::new(),
            pieces: Vec::new(),
            total_mass: 0.0,
        }
    }

    /// Builds a measure from raw atoms and pieces, merging close sites and
    /// dropping zero-mass atoms.
    pub fn from_parts(atoms: Vec<Atom>, pieces: Vec<ContinuousPiece>) -> Result<Self> {
        for a in &atoms {
            if !a.site.is_finite() || !a.mass.is_finite() || a.mass < 0.0 {
                return Err(Error::invalid(format!(
                    "atom ({}, {}) must have a finite site and nonnegative mass",
                    a.site, a.mass
                )));
            }
        }
        for p in &pieces {
            p.dist.validate()?;
            if !p.dist.is_continuous() {
                return Err(Error::invalid(
                    "continuous piece needs a gaussian or uniform law",
                ));
            }
            if !(p.weight >= 0.0) || !p.weight.is_finite() {
                return Err(Error::invalid("continuous piece weight must be >= 0"));
            }
        }
        let atoms = merge_atoms(atoms);
        let pieces: Vec<ContinuousPiece> = pieces.into_iter().filter(|p| p.weight > 0.0).collect();
        let total_mass = atoms.iter().map(|a| a.mass).sum::<f64>()
            + pieces.iter().map(|p| p.mass()).sum::<f64>();
        Ok(AccumMeasure {
            atoms,
            pieces,
            total_mass,
        })
    }

    /// Point mass `mass·δ_site`.
    pub fn dirac(site: f64, mass: f64) -> Result<Self> {
        Self::from_parts(vec![Atom { site, mass }], Vec::new())
    }

    pub fn validate(&self) -> Result<()> {
        let rebuilt = Self::from_parts(self.atoms.clone(), self.pieces.clone())?;
        if (rebuilt.total_mass - self.total_mass).abs() > 1e-10 * rebuilt.total_mass.max(1.0) {
            return Err(Error::invalid(format!(
                "total_mass {} disagrees with its parts ({})",
                self.total_mass, rebuilt.total_mass
            )));
        }
        Ok(())
    }

    pub fn is_atomic(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Mass of the atom at `x` (within the merge tolerance), zero otherwise.
    pub fn atom_mass_at(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| (a.site - x).abs() <= ATOM_MERGE)
            .map(|a| a.mass)
            .sum()
    }

    /// Mass of `]lo, hi]`.
    pub fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        (eval_accum(self, hi) - eval_accum(self, lo)).max(0.0)
    }

    /// `∫_{]lo, hi]} x dK(x)`.
    pub fn interval_first_moment(&self, lo: f64, hi: f64) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| a.site > lo && a.site <= hi)
            .map(|a| a.site * a.mass)
            .sum();
        let pieces: f64 = self
            .pieces
            .iter()
            .map(|p| p.partial_first(hi) - p.partial_first(lo))
            .sum();
        atoms + pieces
    }

    /// Mass outside `[-a, a]`.
    pub fn tail_mass(&self, a: f64) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|at| at.site.abs() > a)
            .map(|at| at.mass)
            .sum();
        let pieces: f64 = self
            .pieces
            .iter()
            .map(|p| p.mass() - (p.partial_mass(a) - p.weight * p.dist.partial_m2_left(-a)))
            .map(|m| m.max(0.0))
            .sum();
        atoms + pieces
    }

    /// The measure scaled by `factor >= 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        AccumMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    site: a.site,
                    mass: a.mass * factor,
                })
                .collect(),
            pieces: self
                .pieces
                .iter()
                .map(|p| ContinuousPiece {
                    weight: p.weight * factor,
                    dist: p.dist.clone(),
                })
                .collect(),
            total_mass: self.total_mass * factor,
        }
    }

    /// CSV export: a `# {json header}` line, then `site,mass` rows for the atoms.
    /// Continuous pieces are listed in the header.
    pub fn write_csv<W: Write>(
        &self,
        n: Option<u64>,
        centered: bool,
        mut w: W,
    ) -> std::io::Result<()> {
        let header = serde_json::json!({
            "total_mass": self.total_mass,
            "n": n,
            "centered": centered,
            "continuous_pieces": self.pieces,
        });
        writeln!(w, "# {header}")?;
        writeln!(w, "site,mass")?;
        for a in &self.atoms {
            writeln!(w, "{:?},{:?}", a.site, a.mass)?;
        }
        Ok(())
    }
}

fn merge_atoms(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.retain(|a| a.mass > 0.0);
    atoms.sort_by(|a, b| a.site.total_cmp(&b.site));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.last_mut() {
            Some(last) if (a.site - last.site).abs() <= ATOM_MERGE => last.mass += a.mass,
            _ => out.push(a),
        }
    }
    out
}

/// `K_n` (`center = false`) or `K*_n` (`center = true`, components shifted by their means).
pub fn build_accum(row: &RowSpec, center: bool) -> AccumMeasure {
    let mut atoms = Vec::new();
    let mut pieces: Vec<ContinuousPiece> = Vec::new();
    for (dist, count) in row.grouped() {
        let d = if center {
            dist.shifted(dist.mean())
        } else {
            dist.clone()
        };
        let weight = count as f64;
        match &d {
            ComponentDist::FiniteDiscrete { atoms: sites } => {
                for &(x, p) in sites {
                    let mass = weight * x * x * p;
                    if mass > 0.0 {
                        atoms.push(Atom { site: x, mass });
                    }
                }
            }
            _ => match pieces.iter_mut().find(|p| p.dist == d) {
                Some(p) => p.weight += weight,
                None => pieces.push(ContinuousPiece { weight, dist: d }),
            },
        }
    }
    AccumMeasure::from_parts(atoms, pieces).expect("row components are validated")
}

/// `K(x) = λ_K((-∞, x])`, right-continuous at atoms.
pub fn eval_accum(m: &AccumMeasure, x: f64) -> f64 {
    if x == f64::INFINITY {
        return m.total_mass;
    }
    let atoms: f64 = m
        .atoms
        .iter()
        .take_while(|a| a.site <= x)
        .map(|a| a.mass)
        .sum();
    let pieces: f64 = m.pieces.iter().map(|p| p.partial_mass(x)).sum();
    atoms + pieces
}

/// Candidate limit of the accumulation functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LimitMeasureSpec {
    /// `mass·δ_0`: the Gaussian limit.
    DiracAtZero {
        mass: f64,
    },
    /// `λ·δ_1`, i.e. `K*(x) = λ 1_{x >= 1}`: the Poisson limit.
    ScaledDiracAtOne {
        lambda: f64,
    },
    Explicit {
        measure: AccumMeasure,
    },
}

impl LimitMeasureSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            LimitMeasureSpec::DiracAtZero { mass } if !(*mass > 0.0) => Err(Error::invalid(
                format!("dirac_at_zero mass must be > 0, got {mass}"),
            )),
            LimitMeasureSpec::ScaledDiracAtOne { lambda } if !(*lambda > 0.0) => {
                Err(Error::invalid(format!(
                    "scaled_dirac_at_one lambda must be > 0, got {lambda}"
                )))
            }
            LimitMeasureSpec::Explicit { measure } => measure.validate(),
            _ => Ok(()),
        }
    }

    pub fn to_measure(&self) -> AccumMeasure {
        match self {
            LimitMeasureSpec::DiracAtZero { mass } => AccumMeasure {
                atoms: vec![Atom {
                    site: 0.0,
                    mass: *mass,
                }],
                pieces: Vec::new(),
                total_mass: *mass,
            },
            LimitMeasureSpec::ScaledDiracAtOne { lambda } => AccumMeasure {
                atoms: vec![Atom {
                    site: 1.0,
                    mass: *lambda,
                }],
                pieces: Vec::new(),
                total_mass: *lambda,
            },
            LimitMeasureSpec::Explicit { measure } => measure.clone(),
        }
    }

    fn discontinuities(&self) -> Vec<f64> {
        match self {
            LimitMeasureSpec::DiracAtZero { .. } => vec![0.0],
            LimitMeasureSpec::ScaledDiracAtOne { .. } => vec![1.0],
            LimitMeasureSpec::Explicit { measure } => {
                measure.atoms.iter().map(|a| a.site).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreweakRow {
    pub n: u64,
    /// `max_grid |K_n(x) − K(x)|`
    pub sup_deviation: f64,
    pub argmax: f64,
    /// `|K_n(+∞) − K(+∞)|`, the extra condition for weak convergence.
    pub mass_gap: f64,
}

/// Grid distance between each `K_n` and the limit `K`, plus the total-mass gap.
///
/// Grid points within `exclusion` of an atom of the limit are rejected.
pub fn preweak_distance(
    seq: &[(u64, AccumMeasure)],
    limit: &LimitMeasureSpec,
    grid: &[f64],
    exclusion: f64,
) -> Result<Vec<PreweakRow>> {
    if grid.is_empty() {
        return Err(Error::Empty("grid"));
    }
    let sites = limit.discontinuities();
    for &x in grid {
        if let Some(&site) = sites.iter().find(|&&s| (x - s).abs() <= exclusion) {
            return Err(Error::DiscontinuityPoint { x, site });
        }
    }
    let k = limit.to_measure();
    let k_vals: Vec<f64> = grid.iter().map(|&x| eval_accum(&k, x)).collect();
    Ok(seq
        .iter()
        .map(|(n, m)| {
            let (sup_deviation, argmax) =
                grid.iter()
                    .zip(&k_vals)
                    .fold((0.0f64, grid[0]), |(best, at), (&x, &kx)| {
                        let d = (eval_accum(m, x) - kx).abs();
                        if d > best {
                            (d, x)
                        } else {
                            (best, at)
                        }
                    });
            PreweakRow {
                n: *n,
                sup_deviation,
                argmax,
                mass_gap: (m.total_mass - k.total_mass).abs(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::ArrayGenerator;
    use approx::assert_relative_eq;

    fn rademacher(n: u64) -> AccumMeasure {
        let gen = ArrayGenerator::StandardizedIid {
            base: ComponentDist::rademacher(),
        };
        build_accum(&gen.row(n).unwrap(), false)
    }

    #[test]
    fn rademacher_atoms() {
        let m = rademacher(4);
        assert_eq!(
            m.atoms,
            vec![
                Atom {
                    site: -0.5,
                    mass: 0.5
                },
                Atom {
                    site: 0.5,
                    mass: 0.5
                }
            ]
        );
        assert_eq!(m.total_mass, 1.0);
        assert_eq!(eval_accum(&m, 0.0), 0.5);
        assert_eq!(eval_accum(&m, f64::INFINITY), 1.0);
        assert_eq!(eval_accum(&m, 0.5), 1.0);
        assert_eq!(eval_accum(&m, 0.4999), 0.5);
    }

    #[test]
    fn bernoulli_poisson_centered_atoms() {
        let lambda = 1.0;
        let n = 100u64;
        let gen = ArrayGenerator::BernoulliPoisson { lambda };
        let m = build_accum(&gen.row(n).unwrap(), true);
        let p = lambda / n as f64;
        let nf = n as f64;
        assert_eq!(m.atoms.len(), 2);
        assert_relative_eq!(m.atoms[0].site, -p, epsilon = 1e-15);
        assert_relative_eq!(m.atoms[0].mass, nf * (1.0 - p) * p * p, epsilon = 1e-15);
        assert_relative_eq!(m.atoms[1].site, 1.0 - p, epsilon = 1e-15);
        assert_relative_eq!(m.atoms[1].mass, nf * p * (1.0 - p).powi(2), epsilon = 1e-15);
        assert_relative_eq!(eval_accum(&m, 0.5), 0.0099, epsilon = 1e-15);
    }

    #[test]
    fn point_mass_at_zero_is_empty() {
        let row = RowSpec::new(1, vec![ComponentDist::point(0.0)]).unwrap();
        let m = build_accum(&row, false);
        assert!(m.atoms.is_empty() && m.pieces.is_empty());
        assert_eq!(m.total_mass, 0.0);
    }

    #[test]
    fn continuous_pieces_merge() {
        let gen = ArrayGenerator::StandardizedIid {
            base: ComponentDist::uniform(-1.0, 1.0).unwrap(),
        };
        let m = build_accum(&gen.row(200).unwrap(), false);
        assert_eq!(m.pieces.len(), 1);
        assert_eq!(m.pieces[0].weight, 200.0);
        assert_relative_eq!(m.total_mass, 1.0, epsilon = 1e-14);
        assert_relative_eq!(eval_accum(&m, 0.0), 0.5, epsilon = 1e-14);
        assert_relative_eq!(m.tail_mass(0.0), 1.0, epsilon = 1e-14);
        assert_eq!(m.tail_mass(1.0), 0.0);
    }

    #[test]
    fn preweak_rademacher_exact_zero() {
        let grid = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];
        let seq: Vec<_> = [5u64, 10, 100]
            .iter()
            .map(|&n| (n, rademacher(n)))
            .collect();
        let rows = preweak_distance(
            &seq,
            &LimitMeasureSpec::DiracAtZero { mass: 1.0 },
            &grid,
            1e-3,
        )
        .unwrap();
        for r in rows {
            assert!(r.sup_deviation <= crate::tolerances::ROUNDING);
            assert!(r.mass_gap <= crate::tolerances::ROUNDING);
        }
        let early = preweak_distance(
            &[(3, rademacher(3))],
            &LimitMeasureSpec::DiracAtZero { mass: 1.0 },
            &grid,
            1e-3,
        )
        .unwrap();
        assert!((early[0].sup_deviation - 0.5).abs() <= crate::tolerances::ROUNDING);
    }

    #[test]
    fn preweak_rejects_discontinuity() {
        let err = preweak_distance(
            &[],
            &LimitMeasureSpec::ScaledDiracAtOne { lambda: 1.0 },
            &[0.5, 1.0],
            0.01,
        );
        assert!(matches!(err, Err(Error::DiscontinuityPoint { .. })));
    }

    #[test]
    fn preweak_against_itself() {
        let m = rademacher(7);
        let rows = preweak_distance(
            &[(7, m.clone())],
            &LimitMeasureSpec::Explicit { measure: m },
            &[-1.0, 0.0, 1.0],
            1e-6,
        )
        .unwrap();
        assert_eq!(rows[0].sup_deviation, 0.0);
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        rademacher(4).write_csv(Some(4), false, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header: serde_json::Value =
            serde_json::from_str(lines.next().unwrap().trim_start_matches("# ")).unwrap();
        assert_eq!(header["total_mass"], 1.0);
        assert_eq!(header["n"], 4);
        assert_eq!(lines.next(), Some("site,mass"));
        assert_eq!(lines.next(), Some("-0.5,0.5"));
    }
}
