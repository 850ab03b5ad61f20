use crate::error::{Error, Result};

use super::solution::StreamSolution;

/// Surface slope computed from the samples of `eta` and from the flow.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeReport {
    /// Eighth-order periodic finite difference of the surface samples.
    pub slope_fd: Vec<f64>,
    /// `-psi_x / psi_y` on the surface nodes.
    pub slope_flow: Vec<f64>,
    pub max_discrepancy: f64,
    /// `max |slope(x) + slope(-x)|` of the flow slope.
    pub oddness_defect: f64,
}

const FD8: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];

/// Compares the two surface slopes. Fails with `SurfaceStagnation` if
/// `|psi_y|` on the surface drops below `1e-8` of its maximum.
pub fn surface_slope_check(solution: &StreamSolution) -> Result<SlopeReport> {
    let g = &solution.grid;
    let nx = g.nq;
    let dx = g.dq();
    let eta = &solution.eta.eta;
    let (px, py) = solution.gradient();
    let top = g.np * nx;
    let scale = py[top..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..nx {
        if !(py[top + i].abs() >= 1e-8 * scale) || scale == 0.0 {
            return Err(Error::SurfaceStagnation {
                x: g.q_values[i],
                psi_y: py[top + i],
            });
        }
    }
    let slope_fd: Vec<f64> = (0..nx)
        .map(|i| {
            FD8.iter()
                .enumerate()
                .map(|(k, c)| {
                    let o = k as isize + 1;
                    c * (eta[g.wrap(i, o)] - eta[g.wrap(i, -o)])
                })
                .sum::<f64>()
                / dx
        })
        .collect();
    let slope_flow: Vec<f64> = (0..nx).map(|i| -px[top + i] / py[top + i]).collect();
    let max_discrepancy = slope_fd
        .iter()
        .zip(&slope_flow)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let oddness_defect = (0..nx)
        .map(|i| (slope_flow[i] + slope_flow[g.mirror(i)]).abs())
        .fold(0.0f64, f64::max);
    Ok(SlopeReport {
        slope_fd,
        slope_flow,
        max_discrepancy,
        oddness_defect,
    })
}
