use crate::error::{Error, Result};
use crate::field::HeightField;
use crate::grid::Grid2D;
use crate::laminar::LaminarFlow;
use crate::params::FluidParameters;
use crate::profile::StratificationProfile;

use super::operator::{inf_norm, linearize_unchecked, pde_residual, residual_unchecked};

/// Outcome of a Newton solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Infinity norm of all residual rows at the returned iterate.
    pub residual: f64,
    pub converged: bool,
    pub min_hp: f64,
}

/// Checks that a linear profile matches the constants in `params`.
pub(crate) fn check_linear_profile(
    params: &FluidParameters,
    profile: &StratificationProfile,
) -> Result<()> {
    match *profile {
        StratificationProfile::Linear { a, b, gamma } => {
            if a != params.a || b != params.b || gamma != params.gamma {
                return Err(Error::param(
                    "profile",
                    format!(
                        "linear profile (A={a}, B={b}, gamma={gamma}) differs from parameters \
                         (A={}, B={}, gamma={})",
                        params.a, params.b, params.gamma
                    ),
                ));
            }
            Ok(())
        }
        StratificationProfile::Tabulated { .. } => Err(Error::param(
            "profile",
            "laminar closed form requires the linear profile",
        )),
    }
}

/// The laminar state of `params` in height coordinates: for every level
/// `p`, `h(p)` solves `psi(h) = -p` by bracketed Newton iteration.
pub fn laminar_height_field(
    params: &FluidParameters,
    profile: &StratificationProfile,
    grid: &Grid2D,
) -> Result<HeightField> {
    check_linear_profile(params, profile)?;
    let flow = LaminarFlow::new(*params)?;
    let p0 = params.p0;
    if (grid.p0() - p0).abs() > 1e-14 * p0.abs() {
        return Err(Error::InvalidGrid(format!(
            "grid bed level {} differs from p0 = {p0}",
            grid.p0()
        )));
    }
    let depth = params.depth;
    let mut candidates = vec![0.0, depth];
    if params.a != 0.0 {
        let vertex = params.gamma / (params.a * params.g);
        if vertex > 0.0 && vertex < depth {
            candidates.push(vertex);
        }
    }
    let max_psi_y = candidates
        .iter()
        .map(|&y| flow.psi_y_unchecked(y))
        .fold(f64::NEG_INFINITY, f64::max);
    if max_psi_y >= 0.0 {
        return Err(Error::NonMonotoneStream(format!(
            "max psi_y = {max_psi_y} on [0, {depth}]"
        )));
    }
    let column: Vec<f64> = grid
        .p_values
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            if j == 0 {
                0.0
            } else if j == grid.np {
                depth
            } else {
                invert_decreasing(&flow, -p, depth)
            }
        })
        .collect();
    let mut values = Vec::with_capacity(grid.len());
    for &h in &column {
        values.extend(std::iter::repeat(h).take(grid.nq));
    }
    HeightField::new(grid.clone(), values)
}

/// Solves `psi(y) = target` on `[0, depth]` for a strictly decreasing `psi`.
fn invert_decreasing(flow: &LaminarFlow, target: f64, depth: f64) -> f64 {
    let f = |y: f64| flow.psi_unchecked(y) - target;
    let (mut lo, mut hi) = (0.0, depth);
    let mut y = depth * 0.5;
    for _ in 0..200 {
        let fy = f(y);
        if fy == 0.0 {
            return y;
        }
        if fy > 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let newton = y - fy / flow.psi_y_unchecked(y);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - y).abs() <= 2.0 * f64::EPSILON * depth {
            return next;
        }
        y = next;
    }
    y
}

/// Damped Newton iteration for the discrete height equation.
///
/// Each step solves the sparse Jacobian system, then halves the step until
/// the residual norm decreases and `h_p` stays positive (at most ten
/// halvings). Bed values are reset to zero after every update.
pub fn newton_solve(
    initial: &HeightField,
    params: &FluidParameters,
    profile: &StratificationProfile,
    tol: f64,
    max_iter: usize,
) -> Result<(HeightField, SolveReport)> {
    let mut h = initial.clone();
    let mut res = pde_residual(&h, params, profile)?.values;
    let mut norm = inf_norm(&res);
    let mut iterations = 0;
    loop {
        if norm < tol {
            let min_hp = h.min_h_p();
            return Ok((
                h,
                SolveReport {
                    iterations,
                    residual: norm,
                    converged: true,
                    min_hp,
                },
            ));
        }
        if iterations == max_iter {
            return Err(no_convergence(h, norm, iterations));
        }
        iterations += 1;
        let op = linearize_unchecked(&h, params, profile);
        let rhs: Vec<f64> = res.iter().map(|r| -r).collect();
        let delta = op.matrix.solve(&rhs)?;
        let mut step = 1.0;
        let mut accepted = None;
        let mut any_admissible = false;
        while step >= 1.0 / 1024.0 {
            let mut trial = h.clone();
            for (v, d) in trial.values.iter_mut().zip(&delta) {
                *v += step * d;
            }
            for v in &mut trial.values[..trial.grid.nq] {
                *v = 0.0;
            }
            if trial.min_h_p() > 0.0 {
                any_admissible = true;
                let r = residual_unchecked(&trial, params, profile).values;
                let n = inf_norm(&r);
                if n < norm {
                    accepted = Some((trial, r, n));
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some((trial, r, n)) => {
                h = trial;
                res = r;
                norm = n;
            }
            None if !any_admissible => {
                return Err(Error::StagnationEncountered {
                    min_hp: h.min_h_p(),
                })
            }
            None => return Err(no_convergence(h, norm, iterations)),
        }
    }
}

fn no_convergence(h: HeightField, residual: f64, iterations: usize) -> Error {
    let min_hp = h.min_h_p();
    Error::NoConvergence {
        best: Box::new(h),
        report: SolveReport {
            iterations,
            residual,
            converged: false,
            min_hp,
        },
    }
}
