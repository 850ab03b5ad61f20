use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Tensor grid: periodic horizontal samples of `[-pi, pi)` and `np + 1`
/// vertical samples of `[lo, hi]` including both ends.
///
/// Nodes are stored row by row: vertical level `j` occupies
/// `j * nq .. (j + 1) * nq`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub nq: usize,
    /// Number of vertical intervals.
    pub np: usize,
    pub q_values: Vec<f64>,
    pub p_values: Vec<f64>,
}

/// Height-formulation grid over `[-pi, pi) x [p0, 0]`.
pub fn make_grid(nq: usize, np: usize, p0: f64) -> Result<Grid2D> {
    if !(p0 < 0.0) || !p0.is_finite() {
        return Err(Error::InvalidGrid(format!("p0 must be negative, got {p0}")));
    }
    Grid2D::new(nq, np, p0, 0.0)
}

impl Grid2D {
    pub fn new(nq: usize, np: usize, lo: f64, hi: f64) -> Result<Self> {
        if nq < 8 || nq % 2 != 0 {
            return Err(Error::InvalidGrid(format!("nq must be even and >= 8, got {nq}")));
        }
        if np < 4 {
            return Err(Error::InvalidGrid(format!("np must be >= 4, got {np}")));
        }
        if !(hi > lo) {
            return Err(Error::InvalidGrid(format!("empty vertical range [{lo}, {hi}]")));
        }
        let dq = 2.0 * PI / nq as f64;
        let dp = (hi - lo) / np as f64;
        let q_values = (0..nq).map(|i| -PI + i as f64 * dq).collect();
        let mut p_values: Vec<f64> = (0..=np).map(|j| lo + j as f64 * dp).collect();
        p_values[np] = hi;
        Ok(Grid2D {
            nq,
            np,
            q_values,
            p_values,
        })
    }

    /// Sigma-coordinate grid `t in [0, 1]` used by the stream solver.
    pub fn sigma(nx: usize, nt: usize) -> Result<Self> {
        Grid2D::new(nx, nt, 0.0, 1.0)
    }

    pub fn dq(&self) -> f64 {
        2.0 * PI / self.nq as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_values[self.np] - self.p_values[0]) / self.np as f64
    }

    pub fn p0(&self) -> f64 {
        self.p_values[0]
    }

    /// Vertical level count, `np + 1`.
    pub fn levels(&self) -> usize {
        self.np + 1
    }

    pub fn len(&self) -> usize {
        self.nq * self.levels()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nq + i
    }

    /// Periodic neighbour index `i + offset` modulo `nq`.
    #[inline]
    pub fn wrap(&self, i: usize, offset: isize) -> usize {
        (i as isize + offset).rem_euclid(self.nq as isize) as usize
    }

    /// Index of `-q_i` on the periodic grid.
    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        (self.nq - i) % self.nq
    }
}
