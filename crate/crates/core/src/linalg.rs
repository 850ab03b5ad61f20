//! Thin wrappers over faer's sparse LU and dense least squares.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};

/// Coordinate-format accumulator; duplicate entries are summed.
#[derive(Debug, Clone, Default)]
pub struct SparseBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<Triplet<usize, usize, f64>>,
}

impl SparseBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        SparseBuilder {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        SparseBuilder {
            nrows,
            ncols,
            entries: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, val: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        if val != 0.0 {
            self.entries.push(Triplet::new(row, col, val));
        }
    }

    pub fn extend(&mut self, other: SparseBuilder) {
        self.entries.extend(other.entries);
    }

    pub fn build(&self) -> Result<SparseMatrix> {
        let inner = SparseColMat::<usize, f64>::try_new_from_triplets(
            self.nrows,
            self.ncols,
            &self.entries,
        )
        .map_err(|e| Error::LinearSolver(format!("matrix assembly failed: {e:?}")))?;
        Ok(SparseMatrix { inner })
    }
}

#[derive(Debug, Clone)]
pub struct SparseMatrix {
    inner: SparseColMat<usize, f64>,
}

impl SparseMatrix {
    pub fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let xc = Col::from_fn(x.len(), |i| x[i]);
        let y = &self.inner * &xc;
        (0..y.nrows()).map(|i| y[i]).collect()
    }

    pub fn lu(&self) -> Result<SparseLu> {
        let lu = self
            .inner
            .sp_lu()
            .map_err(|e| Error::LinearSolver(format!("sparse LU failed: {e:?}")))?;
        Ok(SparseLu { lu })
    }

    /// Factor and solve in one call.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.lu()?.solve(rhs)
    }

    /// Entries as `(row, col, value)` triples in column order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        let sym = self.inner.symbolic();
        let vals = self.inner.val();
        let col_ptr = sym.col_ptr();
        let row_idx = sym.row_idx();
        for c in 0..self.ncols() {
            for k in col_ptr[c]..col_ptr[c + 1] {
                out.push((row_idx[k], c, vals[k]));
            }
        }
        out
    }
}

pub struct SparseLu {
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl SparseLu {
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let b = Col::from_fn(rhs.len(), |i| rhs[i]);
        let x = self.lu.solve(&b);
        let out: Vec<f64> = (0..x.nrows()).map(|i| x[i]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolver("non-finite solution (singular matrix?)".into()));
        }
        Ok(out)
    }
}

/// Least-squares solution of the dense `rows x cols` system given in
/// column-major order, by column-pivoted QR.
pub fn dense_lstsq(rows: usize, cols: usize, a_col_major: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    if a_col_major.len() != rows * cols || rhs.len() != rows || rows < cols {
        return Err(Error::Dimension(format!(
            "least squares with {rows}x{cols} matrix and {} right-hand sides",
            rhs.len()
        )));
    }
    let a = Mat::from_fn(rows, cols, |i, j| a_col_major[j * rows + i]);
    let qr = a.col_piv_qr();
    let mut b = Mat::from_fn(rows, 1, |i, _| rhs[i]);
    qr.solve_lstsq_in_place(b.as_mut());
    let out: Vec<f64> = (0..cols).map(|i| b[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::LinearSolver("non-finite least-squares solution".into()));
    }
    Ok(out)
}
