//! Gauss-Newton iteration for the free surface on truncated Fourier
//! coefficients, with finite-difference Jacobian columns evaluated in
//! parallel.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::linalg::dense_lstsq;
use crate::params::FluidParameters;

use super::solution::{bernoulli_residual, solve_dirichlet, StreamSolution};
use super::surface::SurfaceShape;

#[derive(Debug, Clone, PartialEq)]
pub struct FreeBoundaryOptions {
    /// Converged when `max |R| < tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Retained Fourier modes; `None` means `nx / 3`.
    pub modes: Option<usize>,
    /// Relative forward-difference step.
    pub fd_step: f64,
}

impl Default for FreeBoundaryOptions {
    fn default() -> Self {
        FreeBoundaryOptions {
            tol: 1e-9,
            max_iter: 40,
            modes: None,
            fd_step: 1e-7,
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Unknown layout shared by both free-boundary variants.
#[derive(Debug, Clone, Copy)]
enum Layout {
    /// `[a_0, a_1..a_M, b_2..b_M]`; `b_1` held fixed.
    Free,
    /// `[a_0, a_2..a_M, b_2..b_M, Q]`; `a_1` and `b_1` held fixed.
    Amplitude,
}

struct Problem<'a> {
    params: FluidParameters,
    grid: &'a Grid2D,
    modes: usize,
    layout: Layout,
    a1: f64,
    b1: f64,
}

impl Problem<'_> {
    fn unpack(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let m = self.modes;
        let mut cos = vec![0.0; m + 1];
        let mut sin = vec![0.0; m + 1];
        match self.layout {
            Layout::Free => {
                cos.copy_from_slice(&x[..=m]);
                sin[1] = self.b1;
                sin[2..].copy_from_slice(&x[m + 1..]);
                (cos, sin, self.params.q)
            }
            Layout::Amplitude => {
                cos[0] = x[0];
                cos[1] = self.a1;
                cos[2..].copy_from_slice(&x[1..m]);
                sin[1] = self.b1;
                sin[2..].copy_from_slice(&x[m..2 * m - 1]);
                (cos, sin, x[2 * m - 1])
            }
        }
    }

    fn pack(&self, cos: &[f64], sin: &[f64], q: f64) -> Vec<f64> {
        let m = self.modes;
        match self.layout {
            Layout::Free => {
                let mut x = cos[..=m].to_vec();
                x.extend_from_slice(&sin[2..=m]);
                x
            }
            Layout::Amplitude => {
                let mut x = vec![cos[0]];
                x.extend_from_slice(&cos[2..=m]);
                x.extend_from_slice(&sin[2..=m]);
                x.push(q);
                x
            }
        }
    }

    fn evaluate(&self, x: &[f64]) -> Result<(StreamSolution, Vec<f64>)> {
        let (cos, sin, q) = self.unpack(x);
        let shape = SurfaceShape::from_modes(self.grid.nq, cos, sin)?;
        let params = FluidParameters { q, ..self.params };
        let sol = solve_dirichlet(&shape, &params, self.grid)?;
        let r = bernoulli_residual(&sol);
        Ok((sol, r))
    }

    fn solve(&self, mut x: Vec<f64>, options: &FreeBoundaryOptions) -> Result<StreamSolution> {
        let (mut sol, mut r) = self.evaluate(&x)?;
        let mut norm = inf_norm(&r);
        let rows = r.len();
        for iteration in 0..=options.max_iter {
            if norm < options.tol {
                return Ok(sol);
            }
            if iteration == options.max_iter {
                break;
            }
            let scale = x[0].abs().max(1.0);
            let cols: Vec<Result<Vec<f64>>> = (0..x.len())
                .into_par_iter()
                .map(|k| {
                    let step = options.fd_step * scale.max(x[k].abs());
                    let mut xp = x.clone();
                    xp[k] += step;
                    let (_, rp) = self.evaluate(&xp)?;
                    Ok(rp.iter().zip(&r).map(|(a, b)| (a - b) / step).collect())
                })
                .collect();
            let mut jac = Vec::with_capacity(rows * x.len());
            for c in cols {
                jac.extend(c?);
            }
            let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            let delta = dense_lstsq(rows, x.len(), &jac, &rhs)?;
            let mut step = 1.0;
            let mut improved = false;
            while step >= 1.0 / 256.0 {
                let xt: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + step * d).collect();
                match self.evaluate(&xt) {
                    Ok((st, rt)) => {
                        let nt = inf_norm(&rt);
                        if nt < norm {
                            x = xt;
                            sol = st;
                            r = rt;
                            norm = nt;
                            improved = true;
                            break;
                        }
                    }
                    Err(Error::SingularMapping { .. }) => {}
                    Err(e) => return Err(e),
                }
                step *= 0.5;
            }
            if !improved {
                return Err(Error::StreamNoConvergence {
                    best: Box::new(sol),
                    residual: norm,
                    iterations: iteration + 1,
                });
            }
        }
        Err(Error::StreamNoConvergence {
            best: Box::new(sol),
            residual: norm,
            iterations: options.max_iter,
        })
    }
}

fn modes_for(grid: &Grid2D, options: &FreeBoundaryOptions) -> Result<usize> {
    let m = options.modes.unwrap_or(grid.nq / 3);
    if m < 2 || 2 * m + 1 > grid.nq {
        return Err(Error::Dimension(format!(
            "{m} Fourier modes for {} surface samples",
            grid.nq
        )));
    }
    Ok(m)
}

/// Free surface with fixed head `params.Q`, started from `initial`. The
/// truncated coefficients of `initial` are the starting unknowns; the
/// coefficient of `sin x` stays fixed to remove the translation freedom.
pub fn solve_free_boundary(
    initial: &SurfaceShape,
    params: &FluidParameters,
    grid: &Grid2D,
    options: &FreeBoundaryOptions,
) -> Result<StreamSolution> {
    params.validate()?;
    let modes = modes_for(grid, options)?;
    let (cos, sin) = truncated(initial, modes);
    let problem = Problem {
        params: *params,
        grid,
        modes,
        layout: Layout::Free,
        a1: 0.0,
        b1: sin[1],
    };
    let x = problem.pack(&cos, &sin, params.q);
    problem.solve(x, options)
}

/// Wave with prescribed `cos x` coefficient `first_mode` and no `sin x`
/// component. The head `Q` is an unknown, started from `params.Q`, along
/// with the mean height (started from `params.depth`) and the higher modes.
pub fn solve_wave(
    params: &FluidParameters,
    grid: &Grid2D,
    first_mode: f64,
    options: &FreeBoundaryOptions,
) -> Result<StreamSolution> {
    params.validate()?;
    let modes = modes_for(grid, options)?;
    let mut cos = vec![0.0; modes + 1];
    let sin = vec![0.0; modes + 1];
    cos[0] = params.depth;
    cos[1] = first_mode;
    let problem = Problem {
        params: *params,
        grid,
        modes,
        layout: Layout::Amplitude,
        a1: first_mode,
        b1: 0.0,
    };
    let x = problem.pack(&cos, &sin, params.q);
    problem.solve(x, options)
}

fn truncated(shape: &SurfaceShape, modes: usize) -> (Vec<f64>, Vec<f64>) {
    let mut cos = vec![0.0; modes + 1];
    let mut sin = vec![0.0; modes + 1];
    for k in 0..=modes.min(shape.cos_coefficients().len() - 1) {
        cos[k] = shape.cos_coefficients()[k];
        sin[k] = shape.sin_coefficients()[k];
    }
    (cos, sin)
}
