//! Up-looking sparse Cholesky factorization `P A Pᵀ = L Lᵀ`.
//!
//! The symbolic phase (ordering, elimination tree, column counts) depends only
//! on the sparsity pattern and is reused across Newton iterations.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, SparsityPattern};

use super::ordering::nested_dissection;

const NONE: usize = usize::MAX;

/// Pattern-only part of the factorization.
#[derive(Debug)]
pub struct CholeskySymbolic {
    pattern: Arc<SparsityPattern>,
    perm: Vec<usize>,
    // upper triangle of the permuted matrix stored by column
    c_ptr: Vec<usize>,
    c_row: Vec<usize>,
    // source position in the CSR values of A for each entry of C
    c_src: Vec<usize>,
    parent: Vec<usize>,
    l_ptr: Vec<usize>,
}

/// Numeric factor; columns of `L` store the diagonal first.
#[derive(Debug)]
pub struct CholeskyFactor {
    symbolic: Arc<CholeskySymbolic>,
    l_row: Vec<usize>,
    l_val: Vec<f64>,
}

/// Nonzero pattern of row `k` of L, in topological order, written to `out`.
fn ereach(sym: &CholeskySymbolic, k: usize, flag: &mut [usize], stack: &mut [usize]) -> usize {
    let n = flag.len();
    let mut top = n;
    flag[k] = k;
    for p in sym.c_ptr[k]..sym.c_ptr[k + 1] {
        let mut i = sym.c_row[p];
        if i > k {
            continue;
        }
        let mut len = 0;
        while flag[i] != k {
            stack[len] = i;
            len += 1;
            flag[i] = k;
            i = sym.parent[i];
        }
        while len > 0 {
            top -= 1;
            len -= 1;
            stack[top] = stack[len];
        }
    }
    top
}

impl CholeskySymbolic {
    pub fn analyze(pattern: Arc<SparsityPattern>) -> CholeskySymbolic {
        let n = pattern.n();
        let perm = nested_dissection(&pattern);
        let mut pinv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            pinv[old] = new;
        }

        let (rp, ci) = (pattern.row_ptr(), pattern.col_idx());
        let mut counts = vec![0usize; n + 1];
        for i in 0..n {
            for &j in &ci[rp[i]..rp[i + 1]] {
                let (a, b) = (pinv[i], pinv[j]);
                if a <= b {
                    counts[b + 1] += 1;
                }
            }
        }
        for k in 0..n {
            counts[k + 1] += counts[k];
        }
        let c_ptr = counts.clone();
        let mut next = counts;
        let mut c_row = vec![0; c_ptr[n]];
        let mut c_src = vec![0; c_ptr[n]];
        for i in 0..n {
            for k in rp[i]..rp[i + 1] {
                let (a, b) = (pinv[i], pinv[ci[k]]);
                if a <= b {
                    let p = next[b];
                    next[b] += 1;
                    c_row[p] = a;
                    c_src[p] = k;
                }
            }
        }

        // elimination tree with path compression
        let mut parent = vec![NONE; n];
        let mut ancestor = vec![NONE; n];
        for k in 0..n {
            for &row in &c_row[c_ptr[k]..c_ptr[k + 1]] {
                let mut i = row;
                while i != NONE && i < k {
                    let next = ancestor[i];
                    ancestor[i] = k;
                    if next == NONE {
                        parent[i] = k;
                    }
                    i = next;
                }
            }
        }

        let mut sym = CholeskySymbolic {
            pattern,
            perm,
            c_ptr,
            c_row,
            c_src,
            parent,
            l_ptr: Vec::new(),
        };

        // column counts from the row patterns
        let mut col_count = vec![1usize; n];
        let mut flag = vec![NONE; n];
        let mut stack = vec![0; n];
        for k in 0..n {
            let top = ereach(&sym, k, &mut flag, &mut stack);
            for &i in &stack[top..n] {
                col_count[i] += 1;
            }
        }
        let mut l_ptr = Vec::with_capacity(n + 1);
        l_ptr.push(0);
        for c in col_count {
            l_ptr.push(l_ptr.last().unwrap() + c);
        }
        sym.l_ptr = l_ptr;
        sym
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn nnz_l(&self) -> usize {
        *self.l_ptr.last().unwrap_or(&0)
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }
}

impl CholeskyFactor {
    pub fn factorize(symbolic: Arc<CholeskySymbolic>, a: &SparseMatrix) -> Result<CholeskyFactor> {
        assert!(
            Arc::ptr_eq(a.pattern(), &symbolic.pattern) || **a.pattern() == *symbolic.pattern,
            "matrix pattern differs from the analyzed pattern"
        );
        let sym = &*symbolic;
        let n = sym.n();
        let av = a.values();
        let nnz = sym.nnz_l();
        let mut l_row = vec![0usize; nnz];
        let mut l_val = vec![0.0; nnz];
        let mut next: Vec<usize> = sym.l_ptr[..n].to_vec();
        let mut x = vec![0.0; n];
        let mut flag = vec![NONE; n];
        let mut stack = vec![0usize; n];

        for k in 0..n {
            let top = ereach(sym, k, &mut flag, &mut stack);
            for p in sym.c_ptr[k]..sym.c_ptr[k + 1] {
                x[sym.c_row[p]] += av[sym.c_src[p]];
            }
            let mut d = x[k];
            x[k] = 0.0;
            for &i in &stack[top..n] {
                let lki = x[i] / l_val[sym.l_ptr[i]];
                x[i] = 0.0;
                for p in sym.l_ptr[i] + 1..next[i] {
                    x[l_row[p]] -= l_val[p] * lki;
                }
                d -= lki * lki;
                let p = next[i];
                next[i] += 1;
                l_row[p] = k;
                l_val[p] = lki;
            }
            if !(d > 0.0) {
                return Err(Error::LinearSolve(format!(
                    "matrix is not positive definite (pivot {k} of {n}: {d:e})"
                )));
            }
            let p = next[k];
            next[k] += 1;
            l_row[p] = k;
            l_val[p] = d.sqrt();
        }
        Ok(CholeskyFactor {
            symbolic,
            l_row,
            l_val,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let sym = &*self.symbolic;
        let n = sym.n();
        let lp = &sym.l_ptr;
        let mut y: Vec<f64> = sym.perm.iter().map(|&old| b[old]).collect();
        for j in 0..n {
            y[j] /= self.l_val[lp[j]];
            let yj = y[j];
            for p in lp[j] + 1..lp[j + 1] {
                y[self.l_row[p]] -= self.l_val[p] * yj;
            }
        }
        for j in (0..n).rev() {
            let mut s = y[j];
            for p in lp[j] + 1..lp[j + 1] {
                s -= self.l_val[p] * y[self.l_row[p]];
            }
            y[j] = s / self.l_val[lp[j]];
        }
        let mut x = vec![0.0; n];
        for (new, &old) in sym.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, &t)
    }

    #[test]
    fn solves_tridiagonal() {
        let a = laplace_1d(500);
        let sym = Arc::new(CholeskySymbolic::analyze(a.pattern().clone()));
        let f = CholeskyFactor::factorize(sym, &a).unwrap();
        let b: Vec<f64> = (0..500).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = f.solve(&b);
        let r = a.mul_vec(&x);
        let err = r.iter().zip(&b).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn rejects_indefinite() {
        let a = SparseMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        let sym = Arc::new(CholeskySymbolic::analyze(a.pattern().clone()));
        assert!(CholeskyFactor::factorize(sym, &a).is_err());
    }
}
