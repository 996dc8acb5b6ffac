//! Compressed sparse row storage for the symmetric system matrices.

use std::sync::Arc;

/// Row-compressed nonzero structure with sorted column indices. Always
/// structurally symmetric and contains every diagonal entry.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsityPattern {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl SparsityPattern {
    /// Pattern coupling every pair of DOFs that share an element.
    pub fn from_elements<const K: usize>(n: usize, elements: &[[usize; K]]) -> SparsityPattern {
        let mut rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for dofs in elements {
            for &i in dofs {
                rows[i].extend_from_slice(dofs);
            }
        }
        SparsityPattern::from_rows(rows)
    }

    /// Symmetric pattern from (row, col) pairs; the transpose and the diagonal are added.
    pub fn from_entries(n: usize, entries: impl IntoIterator<Item = (usize, usize)>) -> SparsityPattern {
        let mut rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for (i, j) in entries {
            rows[i].push(j);
            rows[j].push(i);
        }
        SparsityPattern::from_rows(rows)
    }

    fn from_rows(mut rows: Vec<Vec<usize>>) -> SparsityPattern {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for r in &mut rows {
            r.sort_unstable();
            r.dedup();
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        SparsityPattern { n, row_ptr, col_idx }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    /// Position of entry (i, j) in the value array.
    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        self.row(i).binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }
}

/// Square sparse matrix sharing a (possibly cached) pattern.
#[derive(Clone, Debug)]
pub struct SparseMatrix {
    pattern: Arc<SparsityPattern>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(pattern: Arc<SparsityPattern>) -> SparseMatrix {
        let values = vec![0.0; pattern.nnz()];
        SparseMatrix { pattern, values }
    }

    pub fn identity(n: usize) -> SparseMatrix {
        let pattern = Arc::new(SparsityPattern::from_entries(n, []));
        SparseMatrix {
            pattern,
            values: vec![1.0; n],
        }
    }

    /// Builds a matrix from symmetric triplets; duplicates are summed and each
    /// off-diagonal triplet must be listed in both orientations.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> SparseMatrix {
        let pattern = Arc::new(SparsityPattern::from_entries(n, triplets.iter().map(|&(i, j, _)| (i, j))));
        let mut m = SparseMatrix::zeros(pattern);
        for &(i, j, v) in triplets {
            m.add(i, j, v);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.pattern.n()
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pattern.find(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` to entry (i, j), which must be in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .pattern
            .find(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) is outside the sparsity pattern"));
        self.values[k] += v;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n()];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        let (rp, ci) = (self.pattern.row_ptr(), self.pattern.col_idx());
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in rp[i]..rp[i + 1] {
                s += self.values[k] * x[ci[k]];
            }
            *yi = s;
        }
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// max |A_ij - A_ji|.
    pub fn symmetry_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.n() {
            for (k, &j) in self.pattern.row(i).iter().enumerate() {
                let a = self.values[self.pattern.row_ptr()[i] + k];
                d = d.max((a - self.get(j, i)).abs());
            }
        }
        d
    }

    /// Zeroes the rows and columns of constrained DOFs and puts 1 on their diagonal.
    pub fn eliminate(&mut self, constrained: &[bool]) {
        let (rp, ci) = (self.pattern.row_ptr().to_vec(), self.pattern.col_idx().to_vec());
        for i in 0..self.n() {
            for k in rp[i]..rp[i + 1] {
                let j = ci[k];
                if constrained[i] || constrained[j] {
                    self.values[k] = if i == j { 1.0 } else { 0.0 };
                }
            }
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n()]; self.n()];
        for (i, row) in d.iter_mut().enumerate() {
            for (k, &j) in self.pattern.row(i).iter().enumerate() {
                row[j] = self.values[self.pattern.row_ptr()[i] + k];
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_from_elements() {
        let p = SparsityPattern::from_elements(4, &[[0, 1, 2], [1, 2, 3]]);
        assert_eq!(p.row(0), &[0, 1, 2]);
        assert_eq!(p.row(1), &[0, 1, 2, 3]);
        assert_eq!(p.find(0, 3), None);
        assert_eq!(p.nnz(), 3 + 4 + 4 + 3);
    }

    #[test]
    fn triplets_and_elimination() {
        let mut m = SparseMatrix::from_triplets(
            3,
            &[(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0), (1, 2, -1.0), (2, 1, -1.0), (2, 2, 2.0)],
        );
        assert_eq!(m.mul_vec(&[1.0, 1.0, 1.0]), vec![1.0, 0.0, 1.0]);
        assert_eq!(m.symmetry_defect(), 0.0);
        m.eliminate(&[true, false, false]);
        assert_eq!(m.to_dense(), vec![vec![1.0, 0.0, 0.0], vec![0.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]]);
    }
}
