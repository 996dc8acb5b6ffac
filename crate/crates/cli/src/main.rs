use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gls_obstacle::assembly::check_stability;
use gls_obstacle::estimator::element_indicators;
use gls_obstacle::output::{write_config, StudyWriter};
use gls_obstacle::selfcheck::{
    discrete_monotonicity, functional_gradient, jacobian_consistency, oracle_equivalence, scalar_monotonicity,
};
use gls_obstacle::study::run_study;
use gls_obstacle::vtk::write_vtk;
use gls_obstacle::{error_norms, newton_solve, FeSpace, GammaMode, ObstacleOperator, StudyConfig, StudyMode};

#[derive(Parser)]
#[command(name = "gls-obstacle", version, about = "Adaptive P2 finite elements for the obstacle problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Uniform refinement study with convergence rates.
    Converge(StudyArgs),
    /// Adaptive refinement study driven by the residual estimator.
    Adapt(StudyArgs),
    /// Solve once on the coarsest mesh and export the fields.
    Solve(StudyArgs),
    /// Run the randomized property checks.
    Selftest(SelftestArgs),
}

#[derive(Args, Clone)]
struct StudyArgs {
    /// Flat key = value config file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Benchmark case: smooth or nonsmooth.
    #[arg(long)]
    case: Option<String>,
    /// Mode; must agree with the subcommand (uniform for converge/solve, adaptive for adapt).
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    levels: Option<usize>,
    /// Subdivisions of the coarsest mesh.
    #[arg(long)]
    n0: Option<usize>,
    #[arg(long)]
    max_dofs: Option<usize>,
    #[arg(long)]
    gamma0: Option<f64>,
    /// global or local.
    #[arg(long)]
    gamma_mode: Option<String>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Single-threaded execution.
    #[arg(long)]
    serial: bool,
    /// Write wall_ms as 0 so that repeated runs give identical CSV files.
    #[arg(long)]
    no_timing: bool,
    /// Export every level as legacy VTK.
    #[arg(long)]
    vtk: bool,
    /// Log every Newton iteration.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scalar pairs for the positive-part monotonicity check.
    #[arg(long, default_value_t = 1_000_000)]
    pairs: usize,
    #[arg(long)]
    serial: bool,
}

impl StudyArgs {
    fn config(&self, mode: StudyMode) -> Result<StudyConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                StudyConfig::from_text(mode, &text)?
            }
            None => StudyConfig::defaults(mode),
        };
        if let Some(m) = &self.mode {
            if m.parse::<StudyMode>()? != mode {
                bail!("--mode {m} does not match the subcommand (expected {mode})");
            }
        }
        let overrides: [(&str, Option<String>); 10] = [
            ("case", self.case.clone()),
            ("levels", self.levels.map(|v| v.to_string())),
            ("n0", self.n0.map(|v| v.to_string())),
            ("max_dofs", self.max_dofs.map(|v| v.to_string())),
            ("gamma0", self.gamma0.map(|v| v.to_string())),
            ("gamma_mode", self.gamma_mode.clone()),
            ("theta", self.theta.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("serial", self.serial.then(|| "true".to_string())),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if self.no_timing {
            cfg.timing = false;
        }
        if self.vtk {
            cfg.vtk = true;
        }
        if self.verbose {
            cfg.verbose = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run_study_command(cfg: &StudyConfig) -> Result<()> {
    let mut writer = StudyWriter::create(cfg)?;
    let record = run_study(cfg, &mut writer).with_context(|| {
        format!("study aborted; finished levels are in {}", writer.dir().join("results.csv").display())
    })?;
    writer.finish(&record, &format!("{} / {}", cfg.case, cfg.mode))?;
    println!("level      ndof          h     err_l2     err_h1  estimator newton");
    for r in &record.rows {
        println!(
            "{:5} {:9} {:10.3e} {:10.3e} {:10.3e} {:10.3e} {:6}",
            r.level, r.ndof, r.h, r.err_l2, r.err_h1, r.estimator, r.newton_iters
        );
    }
    if let (StudyMode::Uniform, Some(s)) = (cfg.mode, record.slopes()) {
        println!("slopes over the last levels: L2 {:.3}, H1 {:.3}, estimator {:.3}", s.l2, s.h1, s.estimator);
    }
    println!("output written to {}", writer.dir().display());
    Ok(())
}

fn run_solve(cfg: &StudyConfig) -> Result<()> {
    let case = cfg.benchmark()?;
    let data = case.problem_data(cfg.gamma0, cfg.gamma_mode);
    let space = FeSpace::new(case.build_mesh(cfg.n0)?);
    let stability = check_stability(&data, &space);
    let report = newton_solve(&data, &space, None, &cfg.solver_options())?;
    if !report.converged {
        bail!(
            "Newton did not converge: residual {:e} after {} iterations",
            report.residual_norms.last().unwrap(),
            report.iterations
        );
    }
    let op = ObstacleOperator::new(&space, &data).serial(cfg.serial);
    let ind = element_indicators(&report.solution, &data, &space);
    let lambda: Vec<f64> = op
        .multiplier_field(&report.solution)
        .iter()
        .enumerate()
        .map(|(t, lam)| {
            let w = op.quadrature_weights(t);
            lam.iter().zip(&w).map(|(l, w)| l * w).sum::<f64>() / w.iter().sum::<f64>()
        })
        .collect();
    let err = error_norms(&report.solution, &case.exact, &space);
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    write_config(&cfg.out.join("config.txt"), cfg)?;
    let vtk = cfg.out.join("solution.vtk");
    write_vtk(&vtk, &space, &report.solution, &ind.eta, &lambda)?;
    println!(
        "case {} on n0 = {}: {} dofs, {} Newton iterations, {} active quadrature points",
        cfg.case,
        cfg.n0,
        space.n_dofs(),
        report.iterations,
        report.active_points
    );
    println!(
        "C_i = {:.6}, effective gamma0 = {:.4e}, bound = {:.4e} ({})",
        stability.inverse_constant,
        stability.effective_gamma0,
        stability.bound,
        if stability.admissible { "admissible" } else { "NOT admissible" }
    );
    println!(
        "err_l2 = {:.4e}, err_h1 = {:.4e}, estimator = {:.4e}",
        err.l2, err.h1_semi, ind.global
    );
    println!("wrote {}", vtk.display());
    Ok(())
}

fn run_selftest(args: &SelftestArgs) -> Result<bool> {
    let case = gls_obstacle::smooth_case();
    let data = case.problem_data(0.01, GammaMode::Global);
    let n4 = FeSpace::new(case.build_mesh(4)?);
    let n2 = FeSpace::new(case.build_mesh(2)?);
    let reports = [
        scalar_monotonicity(args.pairs, args.seed),
        discrete_monotonicity(&data, &n4, 100, args.seed),
        jacobian_consistency(&data, &n4, 20, args.seed),
        functional_gradient(&data, &n4, 20, args.seed),
        oracle_equivalence(&data, &n2, 10, args.seed),
    ];
    let mut ok = true;
    for r in &reports {
        println!("[{}] {r}", if r.passed() { "PASS" } else { "FAIL" });
        ok &= r.passed();
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verbose = matches!(&cli.command, Command::Converge(a) | Command::Adapt(a) | Command::Solve(a) if a.verbose);
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if verbose { "info" } else { "warn" }))
        .format_timestamp(None)
        .init();

    let serial = match &cli.command {
        Command::Converge(a) | Command::Adapt(a) | Command::Solve(a) => a.serial,
        Command::Selftest(a) => a.serial,
    };
    if serial {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(1).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }

    let result = match &cli.command {
        Command::Converge(a) => a.config(StudyMode::Uniform).and_then(|c| run_study_command(&c)),
        Command::Adapt(a) => a.config(StudyMode::Adaptive).and_then(|c| run_study_command(&c)),
        Command::Solve(a) => a.config(StudyMode::Uniform).and_then(|c| run_solve(&c)),
        Command::Selftest(a) => match run_selftest(a) {
            Ok(true) => Ok(()),
            Ok(false) => {
                eprintln!("selftest failed");
                return ExitCode::FAILURE;
            }
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
