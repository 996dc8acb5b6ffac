//! Convergence studies on the benchmark cases, driven by a flat config.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use crate::assembly::{GammaMode, ObstacleOperator};
use crate::benchmarks::{error_norms, BenchmarkCase, ErrorNorms, SMOOTH_R0};
use crate::error::{Error, Result};
use crate::estimator::{adapt_loop_with, indicators, AdaptOptions, IndicatorField};
use crate::fespace::{CoefficientVector, FeSpace};
use crate::solver::{newton_solve, SolveReport, SolverOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyMode {
    Uniform,
    Adaptive,
}

impl std::fmt::Display for StudyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StudyMode::Uniform => "uniform",
            StudyMode::Adaptive => "adaptive",
        })
    }
}

impl std::str::FromStr for StudyMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(StudyMode::Uniform),
            "adaptive" => Ok(StudyMode::Adaptive),
            _ => Err(Error::Config(format!("unknown mode '{s}' (expected uniform or adaptive)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub case: String,
    pub mode: StudyMode,
    /// Uniform: number of levels. Adaptive: maximum number of levels.
    pub levels: usize,
    /// Subdivisions of the coarsest mesh.
    pub n0: usize,
    pub max_dofs: usize,
    pub gamma0: f64,
    pub gamma_mode: GammaMode,
    pub theta: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
    pub out: PathBuf,
    pub seed: u64,
    pub serial: bool,
    /// Record wall-clock times; when off, `wall_ms` is written as 0.
    pub timing: bool,
    pub vtk: bool,
    /// Log every Newton iteration.
    pub verbose: bool,
}

const KEYS: [&str; 17] = [
    "case",
    "mode",
    "levels",
    "n0",
    "max_dofs",
    "gamma0",
    "gamma_mode",
    "theta",
    "abs_tol",
    "rel_tol",
    "max_iter",
    "out",
    "seed",
    "serial",
    "timing",
    "vtk",
    "verbose",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse value '{value}' for key '{key}'")))
}

impl StudyConfig {
    /// Defaults: uniform studies use one global γ = γ₀/NNO with γ₀ = 1/100;
    /// adaptive studies use γ_T = γ₀h_T² with γ₀ = 1/400.
    pub fn defaults(mode: StudyMode) -> StudyConfig {
        let solver = SolverOptions::default();
        let (levels, n0, gamma0, gamma_mode, out) = match mode {
            StudyMode::Uniform => (5, 4, 0.01, GammaMode::Global, "out/converge"),
            StudyMode::Adaptive => (100, 1, 0.0025, GammaMode::Local, "out/adapt"),
        };
        StudyConfig {
            case: "smooth".into(),
            mode,
            levels,
            n0,
            max_dofs: 100_000,
            gamma0,
            gamma_mode,
            theta: 0.5,
            abs_tol: solver.abs_tol,
            rel_tol: solver.rel_tol,
            max_iter: solver.max_iter,
            out: out.into(),
            seed: 0,
            serial: false,
            timing: true,
            vtk: false,
            verbose: false,
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "case" => self.case = value.to_string(),
            "mode" => self.mode = value.parse()?,
            "levels" => self.levels = parse(key, value)?,
            "n0" => self.n0 = parse(key, value)?,
            "max_dofs" => self.max_dofs = parse(key, value)?,
            "gamma0" => self.gamma0 = parse(key, value)?,
            "gamma_mode" => self.gamma_mode = value.parse().map_err(Error::Config)?,
            "theta" => self.theta = parse(key, value)?,
            "abs_tol" => self.abs_tol = parse(key, value)?,
            "rel_tol" => self.rel_tol = parse(key, value)?,
            "max_iter" => self.max_iter = parse(key, value)?,
            "out" => self.out = value.into(),
            "seed" => self.seed = parse(key, value)?,
            "serial" => self.serial = parse(key, value)?,
            "timing" => self.timing = parse(key, value)?,
            "vtk" => self.vtk = parse(key, value)?,
            "verbose" => self.verbose = parse(key, value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
        let mut pairs = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            pairs.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(pairs)
    }

    /// Defaults for `mode` overridden by the pairs of a config file.
    pub fn from_text(mode: StudyMode, text: &str) -> Result<StudyConfig> {
        let pairs = StudyConfig::parse_pairs(text)?;
        if let Some(m) = pairs.get("mode") {
            let m: StudyMode = m.parse()?;
            if m != mode {
                return Err(Error::Config(format!("config mode '{m}' does not match the requested '{mode}'")));
            }
        }
        let mut cfg = StudyConfig::defaults(mode);
        for (k, v) in &pairs {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            let value = match key {
                "case" => self.case.clone(),
                "mode" => self.mode.to_string(),
                "levels" => self.levels.to_string(),
                "n0" => self.n0.to_string(),
                "max_dofs" => self.max_dofs.to_string(),
                "gamma0" => format!("{:e}", self.gamma0),
                "gamma_mode" => self.gamma_mode.to_string(),
                "theta" => self.theta.to_string(),
                "abs_tol" => format!("{:e}", self.abs_tol),
                "rel_tol" => format!("{:e}", self.rel_tol),
                "max_iter" => self.max_iter.to_string(),
                "out" => self.out.display().to_string(),
                "seed" => self.seed.to_string(),
                "serial" => self.serial.to_string(),
                "timing" => self.timing.to_string(),
                "vtk" => self.vtk.to_string(),
                "verbose" => self.verbose.to_string(),
                _ => unreachable!(),
            };
            let _ = writeln!(s, "{key} = {value}");
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if BenchmarkCase::by_name(&self.case).is_none() {
            return Err(Error::Config(format!("unknown case '{}' (expected smooth or nonsmooth)", self.case)));
        }
        if !(self.gamma0 > 0.0) {
            return Err(Error::Config("gamma0 must be positive".into()));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::Config("theta must lie in (0, 1]".into()));
        }
        if self.levels == 0 || self.n0 == 0 {
            return Err(Error::Config("levels and n0 must be at least 1".into()));
        }
        Ok(())
    }

    pub fn benchmark(&self) -> Result<BenchmarkCase> {
        BenchmarkCase::by_name(&self.case).ok_or_else(|| Error::Config(format!("unknown case '{}'", self.case)))
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_iter: self.max_iter,
            serial: self.serial,
            verbose: self.verbose,
            ..SolverOptions::default()
        }
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub level: usize,
    pub ndof: usize,
    pub h: f64,
    pub err_l2: f64,
    pub err_h1: f64,
    pub estimator: f64,
    pub newton_iters: usize,
    pub wall_ms: f64,
}

/// Per-level quantities that are not part of the CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelDiagnostics {
    pub broken_laplacian: f64,
    pub max_diameter: f64,
    pub min_diameter: f64,
    /// Largest multiplier value over all quadrature points.
    pub max_multiplier: f64,
    /// max |λ_h - f| over quadrature points with r < r₀/2 (smooth case only).
    pub disc_multiplier_error: Option<f64>,
    pub residual_norms: Vec<f64>,
    pub functional_values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Slopes {
    pub l2: f64,
    pub h1: f64,
    pub estimator: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StudyRecord {
    pub rows: Vec<StudyRow>,
    pub diagnostics: Vec<LevelDiagnostics>,
}

impl StudyRecord {
    /// Least-squares slopes of log(err) against log(h) over the last three
    /// rows; `None` with fewer than two rows.
    pub fn slopes(&self) -> Option<Slopes> {
        let tail = &self.rows[self.rows.len().saturating_sub(3)..];
        if tail.len() < 2 {
            return None;
        }
        let h: Vec<f64> = tail.iter().map(|r| r.h).collect();
        let fit = |g: fn(&StudyRow) -> f64| fit_slope(&h, &tail.iter().map(g).collect::<Vec<_>>());
        Some(Slopes {
            l2: fit(|r| r.err_l2),
            h1: fit(|r| r.err_h1),
            estimator: fit(|r| r.estimator),
        })
    }

    /// E / ‖∇(u - u_h)‖ per row.
    pub fn efficiency(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.estimator / r.err_h1).collect()
    }
}

/// Least-squares slope of log(y) over log(x).
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Everything needed to export one level.
pub struct LevelSnapshot<'a> {
    pub level: usize,
    pub space: &'a FeSpace,
    pub solution: &'a CoefficientVector,
    pub indicators: &'a IndicatorField,
    /// Cell average of λ_h.
    pub multiplier: Vec<f64>,
}

fn cell_average_multiplier(op: &ObstacleOperator<'_>, u: &[f64]) -> Vec<f64> {
    op.multiplier_field(u)
        .iter()
        .enumerate()
        .map(|(t, lam)| {
            let w = op.quadrature_weights(t);
            let area: f64 = w.iter().sum();
            lam.iter().zip(&w).map(|(l, w)| l * w).sum::<f64>() / area
        })
        .collect()
}

fn diagnostics(case: &BenchmarkCase, op: &ObstacleOperator<'_>, report: &SolveReport, errors: &ErrorNorms) -> LevelDiagnostics {
    let mesh = op.space().mesh();
    let lambda = op.multiplier_field(&report.solution);
    let max_multiplier = lambda.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let disc_multiplier_error = (case.name == "smooth").then(|| {
        let mut m: f64 = 0.0;
        for (t, lam) in lambda.iter().enumerate() {
            for (q, p) in op.quadrature_points(t).iter().enumerate() {
                if p[0].hypot(p[1]) < 0.5 * SMOOTH_R0 {
                    m = m.max((lam[q] - op.load_at(t)[q]).abs());
                }
            }
        }
        m
    });
    LevelDiagnostics {
        broken_laplacian: errors.broken_laplacian,
        max_diameter: mesh.max_diameter(),
        min_diameter: mesh.min_diameter(),
        max_multiplier,
        disc_multiplier_error,
        residual_norms: report.residual_norms.clone(),
        functional_values: report.functional_values.clone(),
    }
}

/// Row sink invoked after every finished level.
pub trait LevelSink {
    fn level(&mut self, row: &StudyRow, snapshot: &LevelSnapshot<'_>) -> Result<()>;
}

impl LevelSink for () {
    fn level(&mut self, _: &StudyRow, _: &LevelSnapshot<'_>) -> Result<()> {
        Ok(())
    }
}

/// Uniform refinement with `n = n0·2^ℓ` subdivisions on level ℓ; each level
/// starts Newton from the previous solution.
/// On failure the rows finished so far have already been passed to `sink`.
pub fn run_uniform_study(cfg: &StudyConfig, sink: &mut dyn LevelSink) -> Result<StudyRecord> {
    cfg.validate()?;
    let case = cfg.benchmark()?;
    let data = case.problem_data(cfg.gamma0, cfg.gamma_mode);
    let opts = cfg.solver_options();
    let mut record = StudyRecord::default();
    let mut previous: Option<(FeSpace, CoefficientVector)> = None;
    for level in 0..cfg.levels {
        let start = Instant::now();
        let n = cfg.n0 << level;
        let space = FeSpace::new(case.build_mesh(n)?);
        let wrap = |e: Error| Error::Level {
            level,
            source: Box::new(e),
        };
        let init = previous.as_ref().map(|(s, u)| space.transfer_from(s, u));
        let report = newton_solve(&data, &space, init, &opts).map_err(wrap)?;
        if !report.converged {
            return Err(Error::NotConverged {
                level,
                iterations: report.iterations,
                residual: *report.residual_norms.last().unwrap(),
            });
        }
        let op = ObstacleOperator::new(&space, &data).serial(cfg.serial);
        let ind = indicators(&op, &report.solution);
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let errors = error_norms(&report.solution, &case.exact, &space);
        let row = StudyRow {
            level,
            ndof: space.n_dofs(),
            h: 1.0 / (space.mesh().n_vertices() as f64).sqrt(),
            err_l2: errors.l2,
            err_h1: errors.h1_semi,
            estimator: ind.global,
            newton_iters: report.iterations,
            wall_ms: if cfg.timing { wall_ms } else { 0.0 },
        };
        log::info!(
            "level {level}: ndof = {}, err_h1 = {:.3e}, E = {:.3e}, newton = {}",
            row.ndof,
            row.err_h1,
            row.estimator,
            row.newton_iters
        );
        let snapshot = LevelSnapshot {
            level,
            space: &space,
            solution: &report.solution,
            indicators: &ind,
            multiplier: cell_average_multiplier(&op, &report.solution),
        };
        sink.level(&row, &snapshot)?;
        record.diagnostics.push(diagnostics(&case, &op, &report, &errors));
        record.rows.push(row);
        drop(op);
        previous = Some((space, report.solution));
    }
    Ok(record)
}

/// Adaptive refinement from the `n0` mesh with Dörfler marking.
pub fn run_adaptive_study(cfg: &StudyConfig, sink: &mut dyn LevelSink) -> Result<StudyRecord> {
    cfg.validate()?;
    let case = cfg.benchmark()?;
    let data = case.problem_data(cfg.gamma0, cfg.gamma_mode);
    let opts = AdaptOptions {
        theta: cfg.theta,
        max_dofs: cfg.max_dofs,
        max_levels: cfg.levels,
        solver: cfg.solver_options(),
    };
    let mut record = StudyRecord::default();
    adapt_loop_with(case.build_mesh(cfg.n0)?, &data, &opts, Some(&case.exact), |lvl| {
        let errors = lvl.errors.expect("exact solution supplied");
        let space: &Arc<FeSpace> = &lvl.space;
        let row = StudyRow {
            level: lvl.level,
            ndof: space.n_dofs(),
            h: space.mesh().min_diameter(),
            err_l2: errors.l2,
            err_h1: errors.h1_semi,
            estimator: lvl.indicators.global,
            newton_iters: lvl.report.iterations,
            wall_ms: if cfg.timing { lvl.wall_ms } else { 0.0 },
        };
        log::info!(
            "level {}: ndof = {}, err_h1 = {:.3e}, E = {:.3e}, newton = {}",
            row.level,
            row.ndof,
            row.err_h1,
            row.estimator,
            row.newton_iters
        );
        let op = ObstacleOperator::new(space, &data).serial(cfg.serial);
        let snapshot = LevelSnapshot {
            level: lvl.level,
            space,
            solution: &lvl.report.solution,
            indicators: &lvl.indicators,
            multiplier: cell_average_multiplier(&op, &lvl.report.solution),
        };
        sink.level(&row, &snapshot)?;
        record.diagnostics.push(diagnostics(&case, &op, &lvl.report, &errors));
        record.rows.push(row);
        Ok(())
    })?;
    Ok(record)
}

pub fn run_study(cfg: &StudyConfig, sink: &mut dyn LevelSink) -> Result<StudyRecord> {
    match cfg.mode {
        StudyMode::Uniform => run_uniform_study(cfg, sink),
        StudyMode::Adaptive => run_adaptive_study(cfg, sink),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let mut cfg = StudyConfig::defaults(StudyMode::Adaptive);
        cfg.case = "nonsmooth".into();
        cfg.gamma0 = 1.0 / 3.0;
        let back = StudyConfig::from_text(StudyMode::Adaptive, &cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn config_rejects_mode_mismatch_and_unknown_keys() {
        assert!(StudyConfig::from_text(StudyMode::Uniform, "mode = adaptive").is_err());
        assert!(StudyConfig::from_text(StudyMode::Uniform, "colour = blue").is_err());
        let cfg = StudyConfig::from_text(StudyMode::Uniform, "# comment\nlevels = 3 # trailing\n").unwrap();
        assert_eq!(cfg.levels, 3);
    }

    #[test]
    fn slope_of_power_law() {
        let x = [0.1, 0.05, 0.025];
        let y: Vec<f64> = x.iter().map(|h: &f64| 3.0 * h.powi(3)).collect();
        assert!((fit_slope(&x, &y) - 3.0).abs() < 1e-12);
    }
}
