//! Linear solvers and the semismooth Newton iteration.

mod cg;
mod cholesky;
mod newton;
mod ordering;

use std::sync::Arc;

pub use cg::pcg;
pub use cholesky::{CholeskyFactor, CholeskySymbolic};
pub use newton::{gls_poisson_guess, newton_solve, solve_operator, SolveReport, SolverOptions};
pub use ordering::nested_dissection;

use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, SparsityPattern};

const TARGET_REL_RESIDUAL: f64 = 1e-12;
const MAX_REFINEMENTS: usize = 3;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    let mut r = a.mul_vec(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    r
}

/// Direct solver that keeps the symbolic factorization of the last pattern.
#[derive(Debug, Default)]
pub struct LinearSolver {
    symbolic: Option<Arc<CholeskySymbolic>>,
}

impl LinearSolver {
    pub fn new() -> LinearSolver {
        LinearSolver::default()
    }

    fn symbolic_for(&mut self, pattern: &Arc<SparsityPattern>) -> Arc<CholeskySymbolic> {
        match &self.symbolic {
            Some(s) if Arc::ptr_eq(s.pattern(), pattern) => s.clone(),
            _ => {
                let s = Arc::new(CholeskySymbolic::analyze(pattern.clone()));
                log::debug!("symbolic factorization: n = {}, nnz(L) = {}", s.n(), s.nnz_l());
                self.symbolic = Some(s.clone());
                s
            }
        }
    }

    /// Solves `A x = b` for symmetric positive definite `A` with
    /// ‖Ax - b‖ ≤ 1e-12 ‖b‖ where attainable. Falls back to preconditioned CG
    /// if the factorization breaks down.
    pub fn solve(&mut self, a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(a.n(), b.len());
        let b_norm = norm(b);
        if b_norm == 0.0 {
            return Ok(vec![0.0; b.len()]);
        }
        let sym = self.symbolic_for(a.pattern());
        match CholeskyFactor::factorize(sym, a) {
            Ok(factor) => {
                let mut x = factor.solve(b);
                let mut r = residual(a, &x, b);
                for _ in 0..MAX_REFINEMENTS {
                    if norm(&r) <= TARGET_REL_RESIDUAL * b_norm {
                        break;
                    }
                    let dx = factor.solve(&r);
                    let trial: Vec<f64> = x.iter().zip(&dx).map(|(x, d)| x + d).collect();
                    let rt = residual(a, &trial, b);
                    if norm(&rt) >= norm(&r) {
                        break;
                    }
                    x = trial;
                    r = rt;
                }
                if !x.iter().all(|v| v.is_finite()) {
                    return Err(Error::LinearSolve(format!(
                        "direct solve produced non-finite values (n = {}, nnz = {})",
                        a.n(),
                        a.pattern().nnz()
                    )));
                }
                Ok(x)
            }
            Err(e) => {
                log::warn!("{e}; falling back to preconditioned CG");
                let (x, it) = pcg(a, b, TARGET_REL_RESIDUAL, 20 * a.n().max(100)).map_err(|cg| {
                    Error::LinearSolve(format!(
                        "direct and iterative solves failed (n = {}, nnz = {}, max |A_ij| = {:e}): {e}; {cg}",
                        a.n(),
                        a.pattern().nnz(),
                        a.max_abs()
                    ))
                })?;
                log::debug!("CG converged in {it} iterations");
                Ok(x)
            }
        }
    }
}

/// One-shot solve of `A x = b`; see [`LinearSolver::solve`].
pub fn linear_solve(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    LinearSolver::new().solve(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_and_cg_agree() {
        let n = 60;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0 + i as f64 * 0.01));
            for j in [i + 1, i + 7] {
                if j < n {
                    t.push((i, j, -1.0));
                    t.push((j, i, -1.0));
                }
            }
        }
        let a = SparseMatrix::from_triplets(n, &t);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let x = linear_solve(&a, &b).unwrap();
        let (y, _) = pcg(&a, &b, 1e-14, 1000).unwrap();
        let r = residual(&a, &x, &b);
        assert!(norm(&r) <= 1e-12 * norm(&b));
        assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-10));
    }
}
