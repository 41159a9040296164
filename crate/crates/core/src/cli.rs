//! JSON-configured runs: parse and validate a [`RunConfig`], execute one task,
//! and write `report.json`, `tables/*.csv` and `plots/*.svg`.
//!
//! All artifacts are rendered in memory before anything touches the output
//! directory, so a failing run leaves nothing behind.

use crate::accum::{build_accum, AccumMeasure, LimitMeasureSpec};
use crate::array::{hypothesis_check, ArrayGenerator, HypothesisBlock};
use crate::criteria::{gaussian_verdict, general_verdict, poisson_verdict, VerdictReport};
use crate::error::{Error, Result};
use crate::montecarlo::{simulate, SimLimit, SimulationPlan, SimulationReport};
use crate::plot::{Plot, Series};
use crate::psi::{poisson_type_approx, psi_sweep, Mesh, PsiEvaluation};
use crate::report::Trend;
use crate::tolerances::{Tolerances, PSI_CF};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

/// A list of values, or an arithmetic range `start, start + step, ..., stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, step } => {
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..count).map(|i| start + i as f64 * step).collect()
            }
        }
    }

    fn check(&self, pointer: &str) -> Result<()> {
        if let Grid::Range { start, stop, step } = self {
            if !(step > &0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
                return Err(schema(
                    pointer,
                    "range needs finite start <= stop and step > 0",
                ));
            }
        }
        let v = self.values();
        if v.is_empty() {
            return Err(schema(pointer, "grid must not be empty"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(schema(pointer, "grid values must be finite"));
        }
        Ok(())
    }
}

/// Where a task's accumulation measure comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSource {
    /// `K_n` (or `K*_n` when `centered`) of row `n` of the configured array.
    Row {
        n: u64,
        #[serde(default)]
        centered: bool,
    },
    Limit {
        limit: LimitMeasureSpec,
    },
}

fn default_exclusion() -> f64 {
    1e-9
}

fn default_psi_tol() -> f64 {
    PSI_CF
}

fn default_approx_target() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Task {
    Hypotheses {
        n_list: Vec<u64>,
        eps_list: Vec<f64>,
        #[serde(default)]
        c_target: Option<f64>,
    },
    VerdictGaussian {
        n_list: Vec<u64>,
        eps_list: Vec<f64>,
    },
    VerdictPoisson {
        n_list: Vec<u64>,
        eps_list: Vec<f64>,
        b: f64,
        lambda: f64,
    },
    VerdictGeneral {
        n_list: Vec<u64>,
        limit: LimitMeasureSpec,
        grid: Grid,
        #[serde(default)]
        shift_target: Option<f64>,
        #[serde(default = "default_exclusion")]
        exclusion: f64,
    },
    PsiSweep {
        measure: MeasureSource,
        u_grid: Grid,
        #[serde(default = "default_psi_tol")]
        tol: f64,
    },
    PoissonApprox {
        measure: MeasureSource,
        window: f64,
        cells: usize,
        #[serde(default)]
        refinements: u32,
        u_grid: Grid,
        #[serde(default = "default_approx_target")]
        target: f64,
    },
    Simulate {
        n_list: Vec<u64>,
        samples_per_n: usize,
        u_grid: Grid,
        limit: SimLimit,
        #[serde(default)]
        ks_threshold: Option<f64>,
        #[serde(default)]
        ecf_threshold: Option<f64>,
        /// Also write every sampled sum to `tables/samples_n{n}.csv`.
        #[serde(default)]
        raw_samples: bool,
    },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Hypotheses { .. } => "hypotheses",
            Task::VerdictGaussian { .. } => "verdict-gaussian",
            Task::VerdictPoisson { .. } => "verdict-poisson",
            Task::VerdictGeneral { .. } => "verdict-general",
            Task::PsiSweep { .. } => "psi-sweep",
            Task::PoissonApprox { .. } => "poisson-approx",
            Task::Simulate { .. } => "simulate",
        }
    }

    fn needs_array(&self) -> bool {
        match self {
            Task::PsiSweep { measure, .. } | Task::PoissonApprox { measure, .. } => {
                matches!(measure, MeasureSource::Row { .. })
            }
            _ => true,
        }
    }
}

fn default_plots() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub array: Option<ArrayGenerator>,
    pub task: Task,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_plots")]
    pub plots: bool,
    /// Used when no output directory is given on the command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

fn schema(pointer: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        pointer: pointer.to_string(),
        message: message.into(),
    }
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut p = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => {
                let _ = write!(p, "/{index}");
            }
            Segment::Map { key } => {
                let _ = write!(p, "/{}", key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Enum { .. } | Segment::Unknown => {}
        }
    }
    if p.is_empty() {
        p.push('/');
    }
    p
}

fn check_n_list(n_list: &[u64]) -> Result<()> {
    if n_list.is_empty() {
        return Err(schema("/task/n_list", "must not be empty"));
    }
    if n_list.contains(&0) {
        return Err(schema("/task/n_list", "row indices must be >= 1"));
    }
    Ok(())
}

fn check_eps(eps_list: &[f64]) -> Result<()> {
    if eps_list.is_empty() {
        return Err(schema("/task/eps_list", "must not be empty"));
    }
    if eps_list.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(schema("/task/eps_list", "every eps must be finite and > 0"));
    }
    Ok(())
}

fn wrap(pointer: &str, r: Result<()>) -> Result<()> {
    r.map_err(|e| schema(pointer, e.to_string()))
}

impl RunConfig {
    /// Parses and validates a config; errors carry a JSON pointer.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = pointer_of(e.path());
            schema(&pointer, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Checks that the chosen task has everything it needs, before any work.
    pub fn validate(&self) -> Result<()> {
        if self.task.needs_array() {
            match &self.array {
                None => {
                    return Err(schema(
                        "/array",
                        format!("required for task {}", self.task.name()),
                    ))
                }
                Some(gen) => wrap("/array", gen.validate())?,
            }
        } else if let Some(gen) = &self.array {
            wrap("/array", gen.validate())?;
        }
        match &self.task {
            Task::Hypotheses {
                n_list, eps_list, ..
            }
            | Task::VerdictGaussian { n_list, eps_list } => {
                check_n_list(n_list)?;
                check_eps(eps_list)?;
            }
            Task::VerdictPoisson {
                n_list,
                eps_list,
                b,
                lambda,
            } => {
                check_n_list(n_list)?;
                check_eps(eps_list)?;
                if !(*lambda > 0.0) || !lambda.is_finite() {
                    return Err(schema("/task/lambda", "must be finite and > 0"));
                }
                if !b.is_finite() {
                    return Err(schema("/task/b", "must be finite"));
                }
            }
            Task::VerdictGeneral {
                n_list,
                limit,
                grid,
                exclusion,
                ..
            } => {
                check_n_list(n_list)?;
                wrap("/task/limit", limit.validate())?;
                grid.check("/task/grid")?;
                if !(*exclusion >= 0.0) {
                    return Err(schema("/task/exclusion", "must be >= 0"));
                }
            }
            Task::PsiSweep {
                measure,
                u_grid,
                tol,
            } => {
                self.check_measure(measure)?;
                u_grid.check("/task/u_grid")?;
                if !(*tol > 0.0) {
                    return Err(schema("/task/tol", "must be > 0"));
                }
            }
            Task::PoissonApprox {
                measure,
                window,
                cells,
                refinements,
                u_grid,
                target,
            } => {
                self.check_measure(measure)?;
                u_grid.check("/task/u_grid")?;
                if !(*window > 0.0) || !window.is_finite() {
                    return Err(schema("/task/window", "must be finite and > 0"));
                }
                if *cells < 2 || cells % 2 != 0 {
                    return Err(schema(
                        "/task/cells",
                        "must be an even number >= 2, so 0 is a mesh point",
                    ));
                }
                if *refinements > 12 {
                    return Err(schema("/task/refinements", "at most 12 refinements"));
                }
                if !(*target > 0.0) {
                    return Err(schema("/task/target", "must be > 0"));
                }
            }
            Task::Simulate {
                n_list,
                samples_per_n,
                u_grid,
                limit,
                ..
            } => {
                check_n_list(n_list)?;
                u_grid.check("/task/u_grid")?;
                if *samples_per_n == 0 {
                    return Err(schema("/task/samples_per_n", "must be >= 1"));
                }
                wrap("/task/limit", limit.cf_spec().map(|_| ()))?;
            }
        }
        Ok(())
    }

    fn check_measure(&self, m: &MeasureSource) -> Result<()> {
        match m {
            MeasureSource::Row { n, .. } => {
                if *n == 0 {
                    return Err(schema("/task/measure/n", "must be >= 1"));
                }
                Ok(())
            }
            MeasureSource::Limit { limit } => wrap("/task/measure/limit", limit.validate()),
        }
    }

    fn measure(&self, source: &MeasureSource) -> Result<AccumMeasure> {
        match source {
            MeasureSource::Row { n, centered } => {
                let row = self.generator()?.row(*n)?;
                Ok(build_accum(&row, *centered))
            }
            MeasureSource::Limit { limit } => Ok(limit.to_measure()),
        }
    }

    fn generator(&self) -> Result<&ArrayGenerator> {
        self.array
            .as_ref()
            .ok_or_else(|| schema("/array", "required for this task"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxLevel {
    pub level: u32,
    pub cells: usize,
    pub terms: usize,
    pub dropped_mass: f64,
    pub sup_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskResult {
    Hypotheses(HypothesisBlock),
    Verdict(VerdictReport),
    PsiSweep {
        evaluations: Vec<PsiEvaluation>,
    },
    PoissonApprox {
        levels: Vec<ApproxLevel>,
        trend: Trend,
    },
    Simulation {
        report: SimulationReport,
        /// Threshold checks applied at the largest `n`.
        checks: Vec<Trend>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub task: String,
    pub pass: bool,
    pub config: RunConfig,
    pub result: TaskResult,
}

/// Files produced by a run, relative to the output directory.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub files: Vec<(PathBuf, Vec<u8>)>,
}

impl Artifacts {
    fn add(&mut self, rel: impl Into<PathBuf>, bytes: Vec<u8>) {
        self.files.push((rel.into(), bytes));
    }

    fn csv(&mut self, name: &str, body: String) {
        self.add(Path::new("tables").join(name), body.into_bytes());
    }

    fn plot(&mut self, name: &str, plot: &Plot) -> Result<()> {
        self.add(Path::new("plots").join(name), plot.render()?.into_bytes());
        Ok(())
    }

    /// Writes every file; on failure the files already written are removed.
    pub fn write_all(&self, out_dir: &Path) -> Result<Vec<PathBuf>> {
        let mut written: Vec<PathBuf> = Vec::new();
        let result = (|| {
            for (rel, bytes) in &self.files {
                let path = out_dir.join(rel);
                if let Some(parent) = path.parent() {
                    std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
                }
                std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
                written.push(path);
            }
            Ok(())
        })();
        match result {
            Ok(()) => Ok(written),
            Err(e) => {
                for p in &written {
                    let _ = std::fs::remove_file(p);
                }
                Err(e)
            }
        }
    }
}

fn trends_csv(trends: &[Trend]) -> String {
    let mut s = String::from("statistic,n,value\n");
    for t in trends {
        for (n, v) in t.n.iter().zip(&t.values) {
            let _ = writeln!(s, "\"{}\",{n},{v:?}", t.name);
        }
    }
    s
}

fn trends_plot(title: &str, trends: &[&Trend]) -> Plot {
    trends
        .iter()
        .fold(Plot::new(title, "n", "value").log_x(), |p, t| {
            p.with_series(Series::new(
                t.name.clone(),
                t.n.iter()
                    .zip(&t.values)
                    .map(|(&n, &v)| (n as f64, v))
                    .collect(),
            ))
        })
}

fn hypotheses_artifacts(h: &HypothesisBlock, art: &mut Artifacts, plots: bool) -> Result<()> {
    let eps: Vec<f64> = h
        .rows
        .first()
        .map(|r| r.u.iter().map(|e| e.eps).collect())
        .unwrap_or_default();
    let mut s = String::from("n,mv,b,a_n");
    for e in &eps {
        let _ = write!(s, ",U({e})");
    }
    s.push('\n');
    for r in &h.rows {
        let _ = write!(s, "{},{:?},{:?},{:?}", r.n, r.mv, r.b, r.a_n);
        for e in &r.u {
            let _ = write!(s, ",{:?}", e.value);
        }
        s.push('\n');
    }
    art.csv("hypotheses.csv", s);
    let mut trends: Vec<Trend> = h.uan.clone();
    trends.extend(h.vch.clone());
    art.csv("hypothesis_trends.csv", trends_csv(&trends));
    if plots && !h.uan.is_empty() {
        art.plot(
            "uan.svg",
            &trends_plot("U(n, eps)", &h.uan.iter().collect::<Vec<_>>()),
        )?;
    }
    Ok(())
}

fn hypotheses_pass(h: &HypothesisBlock) -> bool {
    h.bvh && h.markov_holds && h.uan.iter().all(|t| t.pass) && h.vch.as_ref().is_none_or(|t| t.pass)
}

fn verdict_artifacts(v: &VerdictReport, art: &mut Artifacts, plots: bool) -> Result<()> {
    hypotheses_artifacts(&v.hypotheses, art, plots)?;
    art.csv("trends.csv", trends_csv(&v.trends));
    let mut s = String::from("n,u,residual,bound,margin\n");
    for c in &v.comparison {
        let _ = writeln!(
            s,
            "{},{:?},{:?},{:?},{:?}",
            c.n, c.u, c.residual, c.bound, c.margin
        );
    }
    art.csv("comparison.csv", s);
    if !v.preweak.is_empty() {
        let mut s = String::from("n,sup_deviation,argmax,mass_gap\n");
        for p in &v.preweak {
            let _ = writeln!(
                s,
                "{},{:?},{:?},{:?}",
                p.n, p.sup_deviation, p.argmax, p.mass_gap
            );
        }
        art.csv("preweak.csv", s);
    }
    if plots {
        let lindeberg: Vec<&Trend> = v
            .trends
            .iter()
            .filter(|t| t.name.starts_with("g_n"))
            .collect();
        if !lindeberg.is_empty() {
            art.plot(
                "lindeberg.svg",
                &trends_plot("Lindeberg functions", &lindeberg),
            )?;
        }
        let others: Vec<&Trend> = v
            .trends
            .iter()
            .filter(|t| !t.name.starts_with("g_n"))
            .collect();
        art.plot("trends.svg", &trends_plot("Statistics along n", &others))?;
    }
    Ok(())
}

fn accum_csv(m: &AccumMeasure, n: Option<u64>, centered: bool) -> Result<String> {
    let mut buf = Vec::new();
    m.write_csv(n, centered, &mut buf)
        .map_err(|e| Error::io("accumulation table", e))?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

/// Outcome of [`execute`]: the report plus the rendered files.
#[derive(Debug, Clone)]
pub struct Execution {
    pub report: RunReport,
    pub artifacts: Artifacts,
}

/// Runs the configured task in memory.
pub fn execute(config: &RunConfig) -> Result<Execution> {
    config.validate()?;
    let tol = &config.tolerances;
    let mut art = Artifacts::default();
    let (result, pass) = match &config.task {
        Task::Hypotheses {
            n_list,
            eps_list,
            c_target,
        } => {
            let h = hypothesis_check(
                config.generator()?,
                n_list,
                eps_list,
                *c_target,
                tol.exact_statistic,
            )?;
            hypotheses_artifacts(&h, &mut art, config.plots)?;
            let pass = hypotheses_pass(&h);
            (TaskResult::Hypotheses(h), pass)
        }
        Task::VerdictGaussian { n_list, eps_list } => {
            let v = gaussian_verdict(config.generator()?, n_list, eps_list, tol)?;
            verdict_artifacts(&v, &mut art, config.plots)?;
            let pass = v.pass;
            (TaskResult::Verdict(v), pass)
        }
        Task::VerdictPoisson {
            n_list,
            eps_list,
            b,
            lambda,
        } => {
            let v = poisson_verdict(config.generator()?, n_list, eps_list, (*b, *lambda), tol)?;
            verdict_artifacts(&v, &mut art, config.plots)?;
            let pass = v.pass;
            (TaskResult::Verdict(v), pass)
        }
        Task::VerdictGeneral {
            n_list,
            limit,
            grid,
            shift_target,
            exclusion,
        } => {
            let gen = config.generator()?;
            let v = general_verdict(
                gen,
                n_list,
                limit,
                *shift_target,
                &grid.values(),
                *exclusion,
                tol,
            )?;
            verdict_artifacts(&v, &mut art, config.plots)?;
            for &n in n_list {
                let m = build_accum(&gen.row(n)?, true);
                art.csv(
                    &format!("accum_centered_n{n}.csv"),
                    accum_csv(&m, Some(n), true)?,
                );
            }
            let pass = v.pass;
            (TaskResult::Verdict(v), pass)
        }
        Task::PsiSweep {
            measure,
            u_grid,
            tol,
        } => {
            let m = config.measure(measure)?;
            let evaluations = psi_sweep(&m, &u_grid.values(), *tol)?;
            let mut s = String::from("u,re,im,quadrature_error_bound,tail_truncation\n");
            for e in &evaluations {
                let _ = writeln!(
                    s,
                    "{:?},{:?},{:?},{:?},{:?}",
                    e.u, e.value.re, e.value.im, e.quadrature_error_bound, e.tail_truncation
                );
            }
            art.csv("psi.csv", s);
            art.csv("measure.csv", accum_csv(&m, None, false)?);
            if config.plots {
                let plot = Plot::new("Psi(u)", "u", "value")
                    .with_series(Series::new(
                        "Re Psi",
                        evaluations.iter().map(|e| (e.u, e.value.re)).collect(),
                    ))
                    .with_series(Series::new(
                        "Im Psi",
                        evaluations.iter().map(|e| (e.u, e.value.im)).collect(),
                    ));
                art.plot("psi.svg", &plot)?;
            }
            (TaskResult::PsiSweep { evaluations }, true)
        }
        Task::PoissonApprox {
            measure,
            window,
            cells,
            refinements,
            u_grid,
            target,
        } => {
            let m = config.measure(measure)?;
            let grid = u_grid.values();
            let mut mesh = Mesh::uniform(*window, *cells);
            let mut levels = Vec::new();
            for level in 0..=*refinements {
                let approx = poisson_type_approx(&m, *window, &mesh)?;
                levels.push(ApproxLevel {
                    level,
                    cells: mesh.points.len() - 1,
                    terms: approx.terms.len(),
                    dropped_mass: approx.dropped_mass,
                    sup_error: approx.sup_error(&m, &grid, PSI_CF)?,
                });
                mesh = mesh.refined();
            }
            let trend = Trend::new(
                "sup error",
                levels.iter().map(|l| l.cells as u64).collect(),
                levels.iter().map(|l| l.sup_error).collect(),
                *target,
            );
            let mut s = String::from("level,cells,terms,dropped_mass,sup_error\n");
            for l in &levels {
                let _ = writeln!(
                    s,
                    "{},{},{},{:?},{:?}",
                    l.level, l.cells, l.terms, l.dropped_mass, l.sup_error
                );
            }
            art.csv("poisson_approx.csv", s);
            if config.plots {
                art.plot(
                    "poisson_approx.svg",
                    &trends_plot("Poisson-type approximation error", &[&trend]),
                )?;
            }
            let pass = trend.pass;
            (TaskResult::PoissonApprox { levels, trend }, pass)
        }
        Task::Simulate {
            n_list,
            samples_per_n,
            u_grid,
            limit,
            ks_threshold,
            ecf_threshold,
            raw_samples,
        } => {
            let plan = SimulationPlan {
                generator: config.generator()?.clone(),
                n_list: n_list.clone(),
                samples_per_n: *samples_per_n,
                seed: config.seed,
                u_grid: u_grid.values(),
                limit: limit.clone(),
            };
            let (report, raw) = simulate(&plan, *raw_samples)?;
            let mut buf = Vec::new();
            report
                .write_csv(&mut buf)
                .map_err(|e| Error::io("simulation table", e))?;
            art.csv(
                "simulation.csv",
                String::from_utf8(buf).expect("csv is utf-8"),
            );
            for (n, samples) in n_list.iter().zip(&raw) {
                let mut s = String::from("s\n");
                for x in samples {
                    let _ = writeln!(s, "{x:?}");
                }
                art.csv(&format!("samples_n{n}.csv"), s);
            }
            let ns: Vec<u64> = report.rows.iter().map(|r| r.n).collect();
            let mut checks = Vec::new();
            let ks: Vec<f64> = report.rows.iter().filter_map(|r| r.ks_distance).collect();
            if let Some(t) = ks_threshold {
                if ks.len() != ns.len() {
                    return Err(schema(
                        "/task/ks_threshold",
                        "no KS distance is available for a cf limit",
                    ));
                }
                checks.push(threshold_check("ks_distance", &ns, &ks, *t));
            }
            if let Some(t) = ecf_threshold {
                let ecf: Vec<f64> = report.rows.iter().map(|r| r.ecf_distance).collect();
                checks.push(threshold_check("ecf_distance", &ns, &ecf, *t));
            }
            if config.plots {
                let mut plot = Plot::new("Distance to the limit law", "n", "distance").log_x();
                if ks.len() == ns.len() {
                    plot = plot.with_series(Series::new(
                        "ks_distance",
                        ns.iter().map(|&n| n as f64).zip(ks).collect(),
                    ));
                }
                plot = plot.with_series(Series::new(
                    "ecf_distance",
                    report
                        .rows
                        .iter()
                        .map(|r| (r.n as f64, r.ecf_distance))
                        .collect(),
                ));
                art.plot("simulation.svg", &plot)?;
            }
            let pass = checks.iter().all(|c| c.pass);
            (TaskResult::Simulation { report, checks }, pass)
        }
    };
    let report = RunReport {
        task: config.task.name().to_string(),
        pass,
        config: config.clone(),
        result,
    };
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    art.files.insert(0, (PathBuf::from("report.json"), json));
    Ok(Execution {
        report,
        artifacts: art,
    })
}

/// Only the final value matters for a threshold: sampling noise makes the
/// monotone-tail rule meaningless here.
fn threshold_check(name: &str, ns: &[u64], values: &[f64], threshold: f64) -> Trend {
    let mut t = Trend::new(name, ns.to_vec(), values.to_vec(), threshold);
    t.pass = t.final_below_tol;
    t
}

/// One-screen text summary of a report.
pub fn summary(report: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "task: {}", report.task);
    let trends: Vec<&Trend> = match &report.result {
        TaskResult::Hypotheses(h) => h.uan.iter().chain(h.vch.iter()).collect(),
        TaskResult::Verdict(v) => {
            for r in &v.reasons {
                let _ = writeln!(s, "reason: {r}");
            }
            v.trends.iter().collect()
        }
        TaskResult::PsiSweep { evaluations } => {
            let worst = evaluations
                .iter()
                .map(|e| e.quadrature_error_bound)
                .fold(0.0, f64::max);
            let _ = writeln!(
                s,
                "{} points, max quadrature error bound {worst:e}",
                evaluations.len()
            );
            Vec::new()
        }
        TaskResult::PoissonApprox { trend, .. } => vec![trend],
        TaskResult::Simulation { report, checks } => {
            for r in &report.rows {
                let ks = r
                    .ks_distance
                    .map(|v| format!("{v:.5}"))
                    .unwrap_or_else(|| "-".into());
                let _ = writeln!(s, "n = {:>8}  ks = {ks}  ecf = {:.5}", r.n, r.ecf_distance);
            }
            checks.iter().collect()
        }
    };
    for t in trends {
        let _ = writeln!(
            s,
            "{:<4} {:<28} final {:.3e} (tol {:.1e})",
            if t.pass { "ok" } else { "FAIL" },
            t.name,
            t.last(),
            t.tol
        );
    }
    let _ = writeln!(s, "result: {}", if report.pass { "PASS" } else { "FAIL" });
    s
}

/// Full command: load, optionally override the seed, execute, write.
/// Returns the process exit code.
pub fn run(
    config_path: &Path,
    out_dir: Option<&Path>,
    seed_override: Option<u64>,
    quiet: bool,
) -> i32 {
    let outcome = (|| {
        let mut config = RunConfig::from_file(config_path)?;
        if let Some(seed) = seed_override {
            config.seed = seed;
        }
        let dir = out_dir
            .map(Path::to_path_buf)
            .or_else(|| config.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("summand-lab-out"));
        let exec = execute(&config)?;
        exec.artifacts.write_all(&dir)?;
        Ok::<_, Error>((exec.report, dir))
    })();
    match outcome {
        Ok((report, dir)) => {
            if !quiet {
                print!("{}", summary(&report));
                println!("artifacts: {}", dir.display());
            }
            if report.pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_field_names_it() {
        let text = r#"{"array": {"generator": "bernoulli_poisson", "lambda": 1.0},
                       "task": {"kind": "verdict-gaussian", "n_list": [10]}}"#;
        let err = RunConfig::from_json(text).unwrap_err().to_string();
        assert!(err.contains("eps_list") && err.contains("/task"), "{err}");
    }

    #[test]
    fn nested_pointer_and_unknown_field() {
        let text = r#"{"array": {"generator": "standardized_iid", "base": {"family": "uniform", "lo": "x", "hi": 1}},
                       "task": {"kind": "hypotheses", "n_list": [10], "eps_list": [0.1]}}"#;
        let err = RunConfig::from_json(text).unwrap_err().to_string();
        assert!(err.contains("/array"), "{err}");
        let text = r#"{"task": {"kind": "psi-sweep", "measure": {"source": "limit", "limit": {"kind": "dirac_at_zero", "mass": 1}},
                       "u_grid": [1], "bogus": 1}}"#;
        assert!(RunConfig::from_json(text)
            .unwrap_err()
            .to_string()
            .contains("bogus"));
    }

    #[test]
    fn array_required_only_when_used() {
        let text = r#"{"task": {"kind": "verdict-gaussian", "n_list": [10], "eps_list": [0.1]}}"#;
        assert!(RunConfig::from_json(text)
            .unwrap_err()
            .to_string()
            .contains("/array"));
        let text = r#"{"task": {"kind": "psi-sweep", "measure": {"source": "limit", "limit": {"kind": "dirac_at_zero", "mass": 1}},
                       "u_grid": {"start": -5, "stop": 5, "step": 0.5}}}"#;
        let cfg = RunConfig::from_json(text).unwrap();
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn range_grid() {
        let g = Grid::Range {
            start: -5.0,
            stop: 5.0,
            step: 0.1,
        };
        let v = g.values();
        assert_eq!(v.len(), 101);
        assert!((v[100] - 5.0).abs() < 1e-12);
        assert!(Grid::List(vec![]).check("/g").is_err());
    }

    #[test]
    fn psi_sweep_dirac() {
        let text = r#"{"task": {"kind": "psi-sweep", "measure": {"source": "limit", "limit": {"kind": "dirac_at_zero", "mass": 1}},
                       "u_grid": {"start": -5, "stop": 5, "step": 0.25}}, "plots": false}"#;
        let exec = execute(&RunConfig::from_json(text).unwrap()).unwrap();
        assert!(exec.report.pass);
        let TaskResult::PsiSweep { evaluations } = &exec.report.result else {
            panic!()
        };
        for e in evaluations {
            assert!((e.value.re + e.u * e.u / 2.0).abs() <= 1e-12 && e.value.im.abs() <= 1e-12);
        }
        let names: Vec<_> = exec
            .artifacts
            .files
            .iter()
            .map(|(p, _)| p.clone())
            .collect();
        assert!(names.contains(&PathBuf::from("tables/psi.csv")));
        assert!(!names.iter().any(|p| p.starts_with("plots")));
    }

    #[test]
    fn partial_outputs_removed() {
        let dir = tempfile::tempdir().unwrap();
        // a directory squatting on a file name makes the second write fail
        std::fs::create_dir_all(dir.path().join("b.txt")).unwrap();
        let art = Artifacts {
            files: vec![
                (PathBuf::from("a.txt"), b"a".to_vec()),
                (PathBuf::from("b.txt"), b"b".to_vec()),
            ],
        };
        assert!(art.write_all(dir.path()).is_err());
        assert!(!dir.path().join("a.txt").exists());
    }
}
