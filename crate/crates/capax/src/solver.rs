//! Sparse LU with one step of iterative refinement.
//!
//! Thin wrapper around faer's sparse LU (fill-reducing ordering plus partial
//! pivoting), keeping a CSC copy of the matrix for residual computation.

use faer::mat::Mat;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};

pub(crate) struct SparseLu {
    n: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lu: Lu<usize, f64>,
}

impl SparseLu {
    /// Factor an `n x n` matrix given as (row, col, value) triplets.
    /// Duplicate entries are summed; explicit zeros are kept.
    pub fn factor(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(r, c, v) in triplets {
            debug_assert!(r < n && c < n);
            cols[c].push((r, v));
        }
        for col in cols.iter_mut() {
            col.sort_unstable_by_key(|&(r, _)| r);
            let mut w = 0;
            for i in 0..col.len() {
                if w > 0 && col[w - 1].0 == col[i].0 {
                    col[w - 1].1 += col[i].1;
                } else {
                    col[w] = col[i];
                    w += 1;
                }
            }
            col.truncate(w);
        }
        let flat: Vec<Triplet<usize, usize, f64>> = cols
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |&(r, v)| Triplet::new(r, c, v)))
            .collect();
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &flat)
            .map_err(|e| Error::SingularSystem(format!("matrix assembly failed: {e:?}")))?;
        let symbolic = SymbolicLu::try_new(a.symbolic())
            .map_err(|e| Error::SingularSystem(format!("symbolic factorization failed: {e:?}")))?;
        let lu = Lu::try_new_with_symbolic(symbolic, a.as_ref())
            .map_err(|e| Error::SingularSystem(format!("numeric factorization failed: {e:?}")))?;
        Ok(SparseLu { n, cols, lu })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn matvec(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (c, col) in self.cols.iter().enumerate() {
            let xc = x[c];
            if xc != 0.0 {
                for &(r, v) in col {
                    out[r] += v * xc;
                }
            }
        }
    }

    fn raw_solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut b = Mat::<f64>::zeros(self.n, 1);
        for (i, &v) in rhs.iter().enumerate() {
            b[(i, 0)] = v;
        }
        let x = self.lu.solve(&b);
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    /// Solve `A x = b` with one refinement pass; rejects non-finite results.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(rhs.len(), self.n);
        let mut x = self.raw_solve(rhs);
        let mut residual = vec![0.0; self.n];
        self.matvec(&x, &mut residual);
        for i in 0..self.n {
            residual[i] = rhs[i] - residual[i];
        }
        let dx = self.raw_solve(&residual);
        for i in 0..self.n {
            x[i] += dx[i];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem(
                "solution contains non-finite entries".into(),
            ));
        }
        Ok(x)
    }

    /// Solve against many right-hand sides (columns), refining each once.
    pub fn solve_columns(&self, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let k = rhs.len();
        let mut b = Mat::<f64>::zeros(self.n, k);
        for (j, col) in rhs.iter().enumerate() {
            assert_eq!(col.len(), self.n);
            for i in 0..self.n {
                b[(i, j)] = col[i];
            }
        }
        let x0 = self.lu.solve(&b);
        let mut out = Vec::with_capacity(k);
        let mut ax = vec![0.0; self.n];
        for j in 0..k {
            let mut x: Vec<f64> = (0..self.n).map(|i| x0[(i, j)]).collect();
            self.matvec(&x, &mut ax);
            let residual: Vec<f64> = (0..self.n).map(|i| rhs[j][i] - ax[i]).collect();
            let dx = self.raw_solve(&residual);
            for i in 0..self.n {
                x[i] += dx[i];
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::SingularSystem(
                    "solution contains non-finite entries".into(),
                ));
            }
            out.push(x);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_nonsymmetric_system() {
        // [2 -1 0; -0.5 2 -1; 0 -1 2] x = [1 2 3] has x = [2 3 3]
        let lu = SparseLu::factor(
            3,
            &[
                (0, 0, 2.0),
                (0, 1, -1.0),
                (1, 0, -0.5),
                (1, 1, 2.0),
                (1, 2, -1.0),
                (2, 1, -1.0),
                (2, 2, 2.0),
            ],
        )
        .unwrap();
        let x = lu.solve(&[1.0, 2.0, 3.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-14);
        assert!((x[1] - 3.0).abs() < 1e-14);
        assert!((x[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn duplicate_triplets_are_summed() {
        let lu = SparseLu::factor(2, &[(0, 0, 1.0), (0, 0, 1.0), (1, 1, 2.0)]).unwrap();
        let x = lu.solve(&[4.0, 4.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-15);
        assert!((x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let r = SparseLu::factor(2, &[(0, 0, 1.0), (1, 0, 1.0)]);
        match r {
            Ok(lu) => assert!(lu.solve(&[1.0, 0.0]).is_err()),
            Err(Error::SingularSystem(_)) => {}
            Err(e) => panic!("unexpected error {e:?}"),
        }
    }
}
