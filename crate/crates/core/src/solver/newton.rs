//! Damped semismooth Newton for the discrete obstacle system.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet};
use std::hash::{Hash, Hasher};

use crate::assembly::{check_stability, ObstacleOperator, ProblemData};
use crate::error::{Error, Result};
use crate::fespace::{CoefficientVector, FeSpace};

use super::LinearSolver;

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Step reduction factor of the backtracking line search.
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
    /// Sufficient-decrease constant `c` in ‖R(u + sδ)‖ ≤ (1 - c s)‖R(u)‖.
    pub sufficient_decrease: f64,
    /// Run the local computations on one thread.
    pub serial: bool,
    /// Log one line per iteration at info level.
    pub verbose: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_iter: 50,
            backtrack_factor: 0.5,
            max_backtracks: 20,
            sufficient_decrease: 1e-4,
            serial: false,
            verbose: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub solution: CoefficientVector,
    pub iterations: usize,
    /// ‖R‖ of the initial guess followed by every accepted iterate.
    pub residual_norms: Vec<f64>,
    /// Discrete functional of the same iterates.
    pub functional_values: Vec<f64>,
    pub step_lengths: Vec<f64>,
    /// Number of quadrature points whose activity flipped in each step.
    pub active_set_changes: Vec<usize>,
    pub active_points: usize,
    pub converged: bool,
}

fn hash_mask(mask: &[bool]) -> u64 {
    let mut h = DefaultHasher::new();
    mask.hash(&mut h);
    h.finish()
}

fn axpy(u: &[f64], s: f64, d: &[f64]) -> Vec<f64> {
    u.iter().zip(d).map(|(u, d)| u + s * d).collect()
}

/// Runs Newton on a prepared operator. Linear-solver failures are returned
/// as errors; running out of iterations is reported through `converged`.
pub fn solve_operator(op: &ObstacleOperator<'_>, init: CoefficientVector, opts: &SolverOptions) -> Result<SolveReport> {
    let mut u = init.0;
    let mut r = op.residual(&u);
    let mut r_norm = r.norm();
    let target = opts.abs_tol.max(opts.rel_tol * r_norm);
    let mut report = SolveReport {
        solution: CoefficientVector::zeros(0),
        iterations: 0,
        residual_norms: vec![r_norm],
        functional_values: vec![op.functional(&u)],
        step_lengths: Vec::new(),
        active_set_changes: Vec::new(),
        active_points: 0,
        converged: false,
    };
    let mut active = op.active_set(&u);
    let mut seen: HashMap<u64, f64> = HashMap::from([(hash_mask(&active), r_norm)]);
    let mut undamped_used: HashSet<u64> = HashSet::new();
    let mut force_full = false;
    let mut linear = LinearSolver::new();

    loop {
        if r_norm <= target {
            report.converged = true;
            break;
        }
        if report.iterations == opts.max_iter || !r_norm.is_finite() {
            break;
        }
        let it = report.iterations;
        let jac = op.jacobian(&u);
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = linear.solve(&jac, &rhs).map_err(|e| Error::Newton {
            iteration: it,
            source: Box::new(e),
        })?;

        let mut s = 1.0;
        let mut trial = axpy(&u, s, &delta);
        let mut r_trial = op.residual(&trial);
        if !force_full {
            for _ in 0..opts.max_backtracks {
                if r_trial.norm() <= (1.0 - opts.sufficient_decrease * s) * r_norm {
                    break;
                }
                s *= opts.backtrack_factor;
                trial = axpy(&u, s, &delta);
                r_trial = op.residual(&trial);
            }
        }
        force_full = false;
        u = trial;
        r = r_trial;
        r_norm = r.norm();

        let new_active = op.active_set(&u);
        let changes = new_active.iter().zip(&active).filter(|(a, b)| a != b).count();
        active = new_active;
        let key = hash_mask(&active);
        if let Some(&prev) = seen.get(&key) {
            if changes > 0 && r_norm >= prev && undamped_used.insert(key) {
                force_full = true;
            }
        }
        seen.insert(key, r_norm);

        report.iterations += 1;
        report.residual_norms.push(r_norm);
        report.functional_values.push(op.functional(&u));
        report.step_lengths.push(s);
        report.active_set_changes.push(changes);
        if opts.verbose {
            log::info!(
                "newton {:3}: |R| = {:.3e}, step = {:.3e}, active = {}, changed = {}",
                report.iterations,
                r_norm,
                s,
                active.iter().filter(|&&a| a).count(),
                changes
            );
        }
    }
    report.active_points = active.iter().filter(|&&a| a).count();
    report.solution = CoefficientVector(u);
    Ok(report)
}

/// Initial guess from the stabilized problem without obstacle, with the
/// Dirichlet data imposed.
pub fn gls_poisson_guess(data: &ProblemData, space: &FeSpace, serial: bool) -> Result<CoefficientVector> {
    let free = data.without_obstacle();
    let op = ObstacleOperator::new(space, &free).serial(serial);
    let mut u = CoefficientVector::zeros(space.n_dofs());
    space.impose_dirichlet(&mut u, |p| (data.g)(p));
    let r = op.residual(&u);
    let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
    let delta = LinearSolver::new().solve(&op.jacobian(&u), &rhs)?;
    for (ui, di) in u.iter_mut().zip(delta) {
        *ui += di;
    }
    Ok(u)
}

/// Solves the discrete obstacle problem on `space`. Without an initial guess
/// the obstacle-free stabilized solution is used. The Dirichlet values of
/// `init` are overwritten with the trace of `data.g`.
pub fn newton_solve(
    data: &ProblemData,
    space: &FeSpace,
    init: Option<CoefficientVector>,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    check_stability(data, space);
    let mut u = match init {
        Some(u) => {
            assert_eq!(u.len(), space.n_dofs(), "initial guess has the wrong length");
            u
        }
        None => gls_poisson_guess(data, space, opts.serial)?,
    };
    space.impose_dirichlet(&mut u, |p| (data.g)(p));
    let op = ObstacleOperator::new(space, data).serial(opts.serial);
    solve_operator(&op, u, opts)
}
