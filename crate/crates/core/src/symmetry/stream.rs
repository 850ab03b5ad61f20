use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::stream::{StreamSolution, SurfaceShape};

/// Rotates a stream solution by whole columns so that the surface minimum
/// sits at `x = -pi` (smallest rotation on ties).
pub fn phase_align_stream(sol: &StreamSolution) -> Result<(StreamSolution, usize)> {
    let g = &sol.grid;
    let eta = &sol.eta.eta;
    let mut best = 0;
    for (i, &v) in eta.iter().enumerate() {
        if v < eta[best] {
            best = i;
        }
    }
    if best == 0 {
        return Ok((sol.clone(), 0));
    }
    let nx = g.nq;
    let shape = SurfaceShape::from_samples((0..nx).map(|i| eta[(i + best) % nx]).collect())?;
    let mut psi = vec![0.0; g.len()];
    for j in 0..=g.np {
        for i in 0..nx {
            psi[g.idx(i, j)] = sol.at((i + best) % nx, j);
        }
    }
    Ok((
        StreamSolution {
            eta: shape,
            psi,
            ..sol.clone()
        },
        best,
    ))
}

/// Largest of `max |eta(x) - eta(-x)|` and `max |psi(x, t) - psi(-x, t)|`
/// on the sigma grid.
pub fn stream_asymmetry_norm(sol: &StreamSolution) -> f64 {
    let g = &sol.grid;
    let eta = &sol.eta.eta;
    let mut worst = 0.0f64;
    for i in 0..g.nq {
        worst = worst.max((eta[i] - eta[g.mirror(i)]).abs());
        for j in 0..=g.np {
            worst = worst.max((sol.at(i, j) - sol.at(g.mirror(i), j)).abs());
        }
    }
    worst
}

/// One sample of a reflection function in physical coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionSample {
    /// Unwrapped abscissa inside the reflection domain.
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamReflection {
    pub lambda0: f64,
    /// `+1` when the surface `psi_y` is positive, `-1` otherwise; it
    /// multiplies the reflection difference.
    pub sign: f64,
    pub samples: Vec<ReflectionSample>,
}

fn surface_sign(sol: &StreamSolution) -> f64 {
    if sol.surface_psi_y().iter().sum::<f64>() >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Reflection function of the pseudo-stream function about `x = lambda0`.
///
/// For `lambda0 = 0` it is `psi(x, y) - psi(-x, y)` on `-pi < x < 0`; for
/// `lambda0 != 0` it is `psi(2 lambda0 - x, y) - psi(x, y)` on
/// `lambda0 <= x <= lambda0 + pi`, where periodicity joins the two pieces of
/// the domain. Both are multiplied by `sign`. Samples sit at the grid nodes
/// of each column below the reflected surface; values at the reflected
/// column come from cubic interpolation in `t`.
pub fn reflect_stream(sol: &StreamSolution, lambda0: f64) -> Result<StreamReflection> {
    let g = &sol.grid;
    let nx = g.nq as isize;
    let dx = g.dq();
    let s = 2.0 * lambda0 / dx;
    let m = s.round();
    if !((s - m).abs() <= 1e-9 * s.abs().max(1.0)) {
        return Err(Error::OffGridReflection {
            lambda: lambda0,
            spacing: dx,
        });
    }
    let m = m as isize;
    let sign = surface_sign(sol);
    // node i sits at x = -pi + i dx; lambda0 = m dx / 2 sits at i = (m + nx) / 2
    let (range, case_one) = if m == 0 {
        (1..nx / 2, true)
    } else {
        ((m + nx + 1).div_euclid(2)..(m + 2 * nx).div_euclid(2) + 1, false)
    };
    let mut samples = Vec::new();
    for iu in range {
        let i = iu.rem_euclid(nx) as usize;
        let r = (m - iu).rem_euclid(nx) as usize;
        let er = sol.eta.eta[r];
        let x = -PI + iu as f64 * dx;
        for j in 0..=g.np {
            let y = sol.y_at(i, j);
            if y > er * (1.0 + 1e-14) {
                break;
            }
            let own = sol.at(i, j);
            let other = if r == i { own } else { sol.column_value(r, y) };
            let diff = if case_one { own - other } else { other - own };
            samples.push(ReflectionSample {
                x,
                y,
                value: sign * diff,
            });
        }
    }
    Ok(StreamReflection {
        lambda0,
        sign,
        samples,
    })
}

/// A derivative estimate with its error bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeEntry {
    pub value: f64,
    /// Difference between the estimates on spacing `h` and `2h`, plus a
    /// rounding floor.
    pub error: f64,
}

impl EdgeEntry {
    /// `|value| <= factor * error`.
    pub fn vanishes(&self, factor: f64) -> bool {
        self.value.abs() <= factor * self.error
    }
}

/// Derivatives of the reflection function `m` up to second order at the
/// trough point, and the chain of first-order checks leading to them.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgePointTable {
    /// Trough point.
    pub x: f64,
    pub y: f64,
    pub m: EdgeEntry,
    pub m_x: EdgeEntry,
    pub m_y: EdgeEntry,
    pub m_xx: EdgeEntry,
    pub m_xy: EdgeEntry,
    pub m_yy: EdgeEntry,
    pub eta_x: EdgeEntry,
    pub psi_x: EdgeEntry,
    pub psi_xy: EdgeEntry,
    /// `psi_y` at the trough point.
    pub psi_y: f64,
}

impl EdgePointTable {
    pub fn entries(&self) -> [(&'static str, EdgeEntry); 6] {
        [
            ("m", self.m),
            ("m_x", self.m_x),
            ("m_y", self.m_y),
            ("m_xx", self.m_xx),
            ("m_xy", self.m_xy),
            ("m_yy", self.m_yy),
        ]
    }

    pub fn chain(&self) -> [(&'static str, EdgeEntry); 3] {
        [
            ("eta_x", self.eta_x),
            ("psi_x", self.psi_x),
            ("psi_xy", self.psi_xy),
        ]
    }

    /// Names of the table entries that exceed `factor` times their error.
    pub fn violations(&self, factor: f64) -> Vec<&'static str> {
        self.entries()
            .iter()
            .chain(self.chain().iter())
            .filter(|(_, e)| !e.vanishes(factor))
            .map(|(n, _)| *n)
            .collect()
    }
}

/// One-sided first difference at node 0 from samples `f(k h)`.
fn d1(f: &[f64], h: f64, stride: usize) -> f64 {
    (-3.0 * f[0] + 4.0 * f[stride] - f[2 * stride]) / (2.0 * h * stride as f64)
}

/// One-sided second difference at node 0, second order.
fn d2(f: &[f64], h: f64, stride: usize) -> f64 {
    let hs = h * stride as f64;
    (2.0 * f[0] - 5.0 * f[stride] + 4.0 * f[2 * stride] - f[3 * stride]) / (hs * hs)
}

/// Serrin edge-point table at the trough `(x_T, eta(x_T))`, where `x_T` is
/// the column of the surface minimum (`-pi` after phase alignment).
///
/// `m(x, y) = sign (psi(x, y) - psi(2 x_T - x, y))` is sampled on the box
/// `x_T + a dx`, `eta(x_T) - b dy` (`a, b = 0..6`, `dy` the level spacing of
/// the trough column), with `psi` interpolated in `t` inside each column.
/// Derivatives use one-sided second-order stencils; each error bar is the
/// change from doubling the spacing plus `64 eps max|psi| / spacing^order`.
/// The chain checks use the spectral `eta_x` and centered `x` differences.
///
/// Fails with `SurfaceStagnation` when `|psi_y|` at the trough is below
/// `1e-8` of the largest surface `|psi_y|`.
pub fn serrin_edge_check(sol: &StreamSolution) -> Result<EdgePointTable> {
    let g = &sol.grid;
    let nx = g.nq;
    if nx < 14 || g.np < 6 {
        return Err(Error::InvalidGrid(format!(
            "edge-point stencils need at least 14 x 6 cells, got {nx} x {}",
            g.np
        )));
    }
    let eta = &sol.eta.eta;
    let mut trough = 0;
    for (i, &v) in eta.iter().enumerate() {
        if v < eta[trough] {
            trough = i;
        }
    }
    let psi_y_surface = sol.surface_psi_y();
    let scale = psi_y_surface.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let psi_y = psi_y_surface[trough];
    if !(psi_y.abs() >= 1e-8 * scale) || scale == 0.0 {
        return Err(Error::SurfaceStagnation {
            x: sol.eta.x[trough],
            psi_y,
        });
    }
    let sign = if psi_y >= 0.0 { 1.0 } else { -1.0 };
    let dx = g.dq();
    let y0 = eta[trough];
    let dy = y0 * g.dp();
    let col = |a: isize| g.wrap(trough, a);
    let psi_at = |a: isize, b: usize| {
        let c = col(a);
        let y = y0 - b as f64 * dy;
        if c == trough {
            sol.at(c, g.np - b)
        } else {
            sol.column_value(c, y)
        }
    };
    let n = 7;
    // m on the box, indexed [a][b]
    let mut mbox = vec![[0.0; 7]; n];
    for (a, row) in mbox.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            *v = sign * (psi_at(a as isize, b) - psi_at(-(a as isize), b));
        }
    }
    let psi_max = sol.psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let eps = f64::EPSILON;
    let floor = |order: i32, h: f64| 64.0 * eps * psi_max.max(f64::MIN_POSITIVE) / h.powi(order);

    let along_x = |b: usize| -> Vec<f64> { (0..n).map(|a| mbox[a][b]).collect() };
    let along_y = |a: usize| -> Vec<f64> { mbox[a].to_vec() };
    let entry = |fine: f64, coarse: f64, fl: f64| EdgeEntry {
        value: fine,
        error: (fine - coarse).abs() + fl,
    };

    let m0 = EdgeEntry {
        value: mbox[0][0],
        error: floor(0, 1.0),
    };
    let mx_row = along_x(0);
    let m_x = entry(d1(&mx_row, dx, 1), d1(&mx_row, dx, 2), floor(1, dx));
    let m_xx = entry(d2(&mx_row, dx, 1), d2(&mx_row, dx, 2), floor(2, dx));
    // y runs downward from the surface, so first derivatives change sign
    let my_col = along_y(0);
    let m_y = entry(-d1(&my_col, dy, 1), -d1(&my_col, dy, 2), floor(1, dy));
    let m_yy = entry(d2(&my_col, dy, 1), d2(&my_col, dy, 2), floor(2, dy));
    let mixed = |stride: usize| {
        let dyx: Vec<f64> = (0..n)
            .map(|a| -d1(&along_y(a), dy, stride))
            .collect();
        d1(&dyx, dx, stride)
    };
    let m_xy = entry(mixed(1), mixed(2), floor(2, dx.min(dy)));

    let xt = sol.eta.x[trough];
    let eta_x = EdgeEntry {
        value: sol.eta.derivative(xt),
        error: 64.0 * eps * y0 * (sol.eta.cos_coefficients().len() as f64).powi(2),
    };
    let centered = |b: usize, stride: isize| {
        (psi_at(stride, b) - psi_at(-stride, b)) / (2.0 * stride as f64 * dx)
    };
    let psi_x = entry(centered(0, 1), centered(0, 2), floor(1, dx));
    let psi_xy_at = |stride: usize| {
        let s = stride as isize;
        let px: Vec<f64> = (0..n).map(|b| centered(b, s)).collect();
        -d1(&px, dy, stride)
    };
    let psi_xy = entry(psi_xy_at(1), psi_xy_at(2), floor(2, dx.min(dy)));

    Ok(EdgePointTable {
        x: xt,
        y: y0,
        m: m0,
        m_x,
        m_y,
        m_xx,
        m_xy,
        m_yy,
        eta_x,
        psi_x,
        psi_xy,
        psi_y,
    })
}
