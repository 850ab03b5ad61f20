//! Interior critical points of the pseudo-stream function.

use crate::error::{Error, Result};

use super::solution::StreamSolution;

#[derive(Debug, Clone, PartialEq)]
pub struct StagnationPoint {
    pub x: f64,
    pub y: f64,
    /// `|grad psi|` after polishing.
    pub residual: f64,
    /// Column of the grid cell the search started from.
    pub column: usize,
}

/// Weights of the cubic Lagrange polynomial through nodes `0, 1, 2, 3` at
/// offset `s` (in units of the spacing), and of its derivative.
pub(crate) fn lagrange4(s: f64) -> ([f64; 4], [f64; 4]) {
    let n = [0.0, 1.0, 2.0, 3.0];
    let mut w = [0.0; 4];
    let mut dw = [0.0; 4];
    for k in 0..4 {
        let mut denom = 1.0;
        for m in 0..4 {
            if m != k {
                denom *= n[k] - n[m];
            }
        }
        let mut prod = 1.0;
        let mut dsum = 0.0;
        for m in 0..4 {
            if m == k {
                continue;
            }
            prod *= s - n[m];
            let mut d = 1.0;
            for l in 0..4 {
                if l != k && l != m {
                    d *= s - n[l];
                }
            }
            dsum += d;
        }
        w[k] = prod / denom;
        dw[k] = dsum / denom;
    }
    (w, dw)
}

/// Interpolant of the stored samples: trigonometric in `x` along every
/// level, cubic Lagrange in `t`. Smooth in `x`, so the polished gradient
/// can vanish on the symmetry axes.
pub(crate) struct Interpolant<'a> {
    sol: &'a StreamSolution,
    /// Per level, `(a_k, b_k)` for `k = 0..=nx/2`.
    modes: Vec<Vec<(f64, f64)>>,
}

impl<'a> Interpolant<'a> {
    pub(crate) fn new(sol: &'a StreamSolution) -> Self {
        let g = &sol.grid;
        let nx = g.nq;
        let half = nx / 2;
        let modes = (0..=g.np)
            .map(|j| {
                (0..=half)
                    .map(|k| {
                        let kf = k as f64;
                        let (mut c, mut s) = (0.0, 0.0);
                        for i in 0..nx {
                            let (sn, cs) = (kf * g.q_values[i]).sin_cos();
                            let f = sol.at(i, j);
                            c += f * cs;
                            s += f * sn;
                        }
                        let w = if k == 0 || k == half { 1.0 } else { 2.0 } / nx as f64;
                        (w * c, if k == 0 || k == half { 0.0 } else { w * s })
                    })
                    .collect()
            })
            .collect();
        Interpolant { sol, modes }
    }

    /// Value and `x` derivative of level `j` at `x`. The Nyquist mode does
    /// not contribute to the derivative.
    fn level(&self, j: usize, x: f64) -> (f64, f64) {
        let m = &self.modes[j];
        let half = m.len() - 1;
        let mut v = 0.0;
        let mut d = 0.0;
        for (k, &(a, b)) in m.iter().enumerate() {
            let kf = k as f64;
            let (sn, cs) = (kf * x).sin_cos();
            v += a * cs + b * sn;
            if k != half {
                d += kf * (b * cs - a * sn);
            }
        }
        (v, d)
    }

    /// `(Psi, Psi_X, Psi_t)` at sigma coordinates.
    fn sigma_values(&self, x: f64, t: f64) -> (f64, f64, f64) {
        let g = &self.sol.grid;
        let dt = g.dp();
        let st = t / dt;
        let it = (st.floor() as isize - 1).clamp(0, g.np as isize - 3);
        let (wt, dwt) = lagrange4(st - it as f64);
        let mut v = 0.0;
        let mut vx = 0.0;
        let mut vt = 0.0;
        for b in 0..4 {
            let (f, fx) = self.level((it + b as isize) as usize, x);
            v += wt[b] * f;
            vx += wt[b] * fx;
            vt += dwt[b] * f;
        }
        (v, vx, vt / dt)
    }

    /// Physical gradient at `(x, y)`.
    pub(crate) fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let e = self.sol.eta.eval(x);
        let de = self.sol.eta.derivative(x);
        let t = y / e;
        let (_, vx, vt) = self.sigma_values(x, t);
        (vx - t * de / e * vt, vt / e)
    }
}

fn wrap_x(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    (x + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI
}

/// Newton iteration on `grad psi = 0` with a pseudo-inverse of the
/// symmetric Hessian (finite differences of the interpolated gradient).
fn polish(ip: &Interpolant, mut x: f64, mut y: f64, scale_len: f64) -> (f64, f64, f64) {
    let h = 1e-6 * scale_len;
    for _ in 0..60 {
        let (gx, gy) = ip.gradient(x, y);
        let (ax, ay) = ip.gradient(x + h, y);
        let (bx, by) = ip.gradient(x - h, y);
        let (cx, cy) = ip.gradient(x, y + h);
        let (dx_, dy_) = ip.gradient(x, y - h);
        let hxx = (ax - bx) / (2.0 * h);
        let hyy = (cy - dy_) / (2.0 * h);
        let hxy = 0.5 * ((ay - by) + (cx - dx_)) / (2.0 * h);
        let theta = 0.5 * (2.0 * hxy).atan2(hxx - hyy);
        let (sn, cs) = theta.sin_cos();
        let (v1x, v1y) = (cs, sn);
        let (v2x, v2y) = (-sn, cs);
        let l1 = hxx * cs * cs + 2.0 * hxy * cs * sn + hyy * sn * sn;
        let l2 = hxx * sn * sn - 2.0 * hxy * cs * sn + hyy * cs * cs;
        let lmax = l1.abs().max(l2.abs());
        let mut sx = 0.0;
        let mut sy = 0.0;
        for (l, vx, vy) in [(l1, v1x, v1y), (l2, v2x, v2y)] {
            if l.abs() > 1e-8 * lmax && lmax > 0.0 {
                let c = (vx * gx + vy * gy) / l;
                sx -= c * vx;
                sy -= c * vy;
            }
        }
        x = wrap_x(x + sx);
        y += sy;
        if (sx * sx + sy * sy).sqrt() < 1e-15 * scale_len {
            break;
        }
    }
    let (gx, gy) = ip.gradient(x, y);
    (x, y, (gx * gx + gy * gy).sqrt())
}

/// Locates stagnation points: columns where `psi_y` changes sign between
/// neighbours while `|psi_x|` is small seed a Newton polish on
/// `grad psi = 0`. Points with `|grad psi| < 1e-9 max |grad psi|` are
/// returned, ordered by `x`.
///
/// Fails with `StagnationOnSurface` when a point lies above the trough
/// level or within the top 5% of its column.
pub fn locate_stagnation_points(solution: &StreamSolution) -> Result<Vec<StagnationPoint>> {
    let g = &solution.grid;
    let (px, py) = solution.gradient();
    let gmax = px
        .iter()
        .zip(&py)
        .map(|(a, b)| (a * a + b * b).sqrt())
        .fold(0.0f64, f64::max);
    if gmax == 0.0 {
        return Ok(Vec::new());
    }
    let ip = Interpolant::new(solution);
    let trough = solution.eta.min();
    let mut found: Vec<StagnationPoint> = Vec::new();
    for i in 0..g.nq {
        for j in 0..g.np {
            let (k0, k1) = (g.idx(i, j), g.idx(i, j + 1));
            if py[k0].signum() == py[k1].signum() && py[k0] != 0.0 {
                continue;
            }
            if px[k0].abs().min(px[k1].abs()) > 0.1 * gmax {
                continue;
            }
            let (y0, y1) = (solution.y_at(i, j), solution.y_at(i, j + 1));
            let frac = if py[k1] != py[k0] {
                py[k0] / (py[k0] - py[k1])
            } else {
                0.0
            };
            let ys = y0 + frac * (y1 - y0);
            let (x, y, res) = polish(&ip, g.q_values[i], ys, solution.eta.mean);
            if !(res < 1e-9 * gmax) || !(y > 0.0) {
                continue;
            }
            let e = solution.eta.eval(x);
            if y >= trough || y > 0.95 * e {
                return Err(Error::StagnationOnSurface { x, y, eta: e });
            }
            let tol = 1e-6 * g.dq();
            let dup = found.iter().any(|p| {
                let d = wrap_x(p.x - x).abs();
                d < tol && (p.y - y).abs() < tol
            });
            if !dup {
                found.push(StagnationPoint {
                    x,
                    y,
                    residual: res,
                    column: i,
                });
            }
        }
    }
    found.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_weights_reproduce_cubics() {
        let f = |s: f64| 1.0 - 2.0 * s + 0.5 * s * s - 0.25 * s * s * s;
        let df = |s: f64| -2.0 + s - 0.75 * s * s;
        for s in [0.3, 1.4, 2.9] {
            let (w, dw) = lagrange4(s);
            let v: f64 = (0..4).map(|k| w[k] * f(k as f64)).sum();
            let d: f64 = (0..4).map(|k| dw[k] * f(k as f64)).sum();
            assert!((v - f(s)).abs() < 1e-14);
            assert!((d - df(s)).abs() < 1e-13);
        }
    }
}
