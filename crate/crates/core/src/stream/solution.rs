use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::parse_csv;
use crate::grid::Grid2D;
use crate::kv::fmt_f64;
use crate::linalg::SparseBuilder;
use crate::params::FluidParameters;

use super::surface::SurfaceShape;

/// Surface and pseudo-stream function on the surface-fitted grid
/// `y = eta(x) t`, `t in [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSolution {
    pub params: FluidParameters,
    /// Sigma grid: `q_values` are the `x` nodes, `p_values` the `t` nodes.
    pub grid: Grid2D,
    pub eta: SurfaceShape,
    pub psi: Vec<f64>,
    /// Infinity norm of the discrete Poisson residual after the solve.
    pub dirichlet_residual: f64,
}

/// One-sided derivative at the last node, exact for cubics.
#[inline]
pub(crate) fn d_end(f3: f64, f2: f64, f1: f64, f0: f64, h: f64) -> f64 {
    (11.0 * f0 - 18.0 * f1 + 9.0 * f2 - 2.0 * f3) / (6.0 * h)
}

impl StreamSolution {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.psi[self.grid.idx(i, j)]
    }

    /// Physical height of node `(i, j)`.
    #[inline]
    pub fn y_at(&self, i: usize, j: usize) -> f64 {
        self.eta.eta[i] * self.grid.p_values[j]
    }

    /// `d psi / d t` along column `i` at level `j`.
    pub(crate) fn psi_t(&self, i: usize, j: usize) -> f64 {
        let n = self.grid.np;
        let dt = self.grid.dp();
        if j == 0 {
            -d_end(self.at(i, 3), self.at(i, 2), self.at(i, 1), self.at(i, 0), dt)
        } else if j == n {
            d_end(self.at(i, n - 3), self.at(i, n - 2), self.at(i, n - 1), self.at(i, n), dt)
        } else {
            (self.at(i, j + 1) - self.at(i, j - 1)) / (2.0 * dt)
        }
    }

    /// `psi(x_i, y)` by cubic interpolation in `t` along column `i`.
    pub(crate) fn column_value(&self, i: usize, y: f64) -> f64 {
        let g = &self.grid;
        let st = y / self.eta.eta[i] / g.dp();
        let it = (st.floor() as isize - 1).clamp(0, g.np as isize - 3);
        let (w, _) = super::stagnation::lagrange4(st - it as f64);
        (0..4).map(|b| w[b] * self.at(i, it as usize + b)).sum()
    }

    /// Physical gradient `(psi_x, psi_y)` at every node.
    pub fn gradient(&self) -> (Vec<f64>, Vec<f64>) {
        let g = &self.grid;
        let dx = g.dq();
        let slopes = self.eta.slopes();
        let mut px = vec![0.0; g.len()];
        let mut py = vec![0.0; g.len()];
        for j in 0..=g.np {
            let t = g.p_values[j];
            for i in 0..g.nq {
                let e = self.eta.eta[i];
                let pt = self.psi_t(i, j);
                let px_sigma = (self.at(g.wrap(i, 1), j) - self.at(g.wrap(i, -1), j)) / (2.0 * dx);
                let k = g.idx(i, j);
                px[k] = px_sigma - t * slopes[i] / e * pt;
                py[k] = pt / e;
            }
        }
        (px, py)
    }

    /// `psi_y` on the surface nodes.
    pub fn surface_psi_y(&self) -> Vec<f64> {
        (0..self.grid.nq)
            .map(|i| self.psi_t(i, self.grid.np) / self.eta.eta[i])
            .collect()
    }

    pub fn eta_csv(&self) -> String {
        let mut s = String::from("x,eta\n");
        for (x, e) in self.eta.x.iter().zip(&self.eta.eta) {
            let _ = writeln!(s, "{},{}", fmt_f64(*x), fmt_f64(*e));
        }
        s
    }

    /// Field CSV with header `x,y,psi`, level by level.
    pub fn psi_csv(&self) -> String {
        let g = &self.grid;
        let mut s = String::with_capacity(g.len() * 72);
        s.push_str("x,y,psi\n");
        for j in 0..=g.np {
            for i in 0..g.nq {
                let _ = writeln!(
                    s,
                    "{},{},{}",
                    fmt_f64(g.q_values[i]),
                    fmt_f64(self.y_at(i, j)),
                    fmt_f64(self.at(i, j))
                );
            }
        }
        s
    }

    /// Writes `eta.csv`, `psi.csv` and `params.kv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("eta.csv"), self.eta_csv())?;
        std::fs::write(dir.join("psi.csv"), self.psi_csv())?;
        std::fs::write(dir.join("params.kv"), self.params.to_kv())?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let params = FluidParameters::from_kv(&std::fs::read_to_string(dir.join("params.kv"))?)?;
        let eta_rows = parse_csv(&std::fs::read_to_string(dir.join("eta.csv"))?, &["x", "eta"])?;
        let eta = SurfaceShape::from_samples(eta_rows.iter().map(|r| r[1]).collect())?;
        let rows = parse_csv(&std::fs::read_to_string(dir.join("psi.csv"))?, &["x", "y", "psi"])?;
        let nx = eta.len();
        if rows.len() % nx != 0 || rows.len() / nx < 5 {
            return Err(Error::Parse {
                line: 0,
                message: format!("{} field rows do not match {nx} columns", rows.len()),
            });
        }
        let grid = Grid2D::sigma(nx, rows.len() / nx - 1)?;
        let psi = rows.iter().map(|r| r[2]).collect();
        Ok(StreamSolution {
            params,
            grid,
            eta,
            psi,
            dirichlet_residual: 0.0,
        })
    }
}

/// Solves `Delta psi = source(x, y)` below `eta` with `psi = bottom` on
/// `y = 0` and `psi = top` on the surface, periodic in `x`.
///
/// In the coordinates `(X, t) = (x, y/eta(x))` the Laplacian reads
/// `psi_XX - 2 (t eta'/eta) psi_Xt + ((t eta')^2 + 1)/eta^2 psi_tt
///  + t (2 eta'^2/eta^2 - eta''/eta) psi_t`, discretized with centered
/// second-order differences.
pub fn solve_poisson(
    eta: &SurfaceShape,
    grid: &Grid2D,
    source: impl Fn(f64, f64) -> f64 + Sync,
    bottom: f64,
    top: f64,
) -> Result<(Vec<f64>, f64)> {
    if eta.len() != grid.nq {
        return Err(Error::Dimension(format!(
            "surface has {} samples, grid has {} columns",
            eta.len(),
            grid.nq
        )));
    }
    let n = grid.len();
    let nx = grid.nq;
    let dx = grid.dq();
    let dt = grid.dp();
    let d1 = eta.slopes();
    let d2 = eta.curvatures();

    let rows: Vec<(Vec<(usize, usize, f64)>, Vec<f64>)> = (0..=grid.np)
        .into_par_iter()
        .map(|j| {
            let t = grid.p_values[j];
            let mut trips = Vec::with_capacity(nx * 9);
            let mut rhs = vec![0.0; nx];
            for i in 0..nx {
                let k = grid.idx(i, j);
                if j == 0 || j == grid.np {
                    trips.push((k, k, 1.0));
                    rhs[i] = if j == 0 { bottom } else { top };
                    continue;
                }
                let e = eta.eta[i];
                let s1 = d1[i] / e;
                let c_xt = -2.0 * t * s1;
                let c_tt = (t * t * d1[i] * d1[i] + 1.0) / (e * e);
                let c_t = t * (2.0 * s1 * s1 - d2[i] / e);
                let ip = grid.wrap(i, 1);
                let im = grid.wrap(i, -1);
                let xx = 1.0 / (dx * dx);
                let tt = c_tt / (dt * dt);
                let xt = c_xt / (4.0 * dx * dt);
                let ht = c_t / (2.0 * dt);
                trips.push((k, k, -2.0 * xx - 2.0 * tt));
                trips.push((k, grid.idx(ip, j), xx));
                trips.push((k, grid.idx(im, j), xx));
                trips.push((k, grid.idx(i, j + 1), tt + ht));
                trips.push((k, grid.idx(i, j - 1), tt - ht));
                trips.push((k, grid.idx(ip, j + 1), xt));
                trips.push((k, grid.idx(ip, j - 1), -xt));
                trips.push((k, grid.idx(im, j + 1), -xt));
                trips.push((k, grid.idx(im, j - 1), xt));
                rhs[i] = source(eta.x[i], e * t);
            }
            (trips, rhs)
        })
        .collect();

    let mut b = SparseBuilder::with_capacity(n, n, n * 9);
    let mut rhs = Vec::with_capacity(n);
    for (trips, r) in rows {
        for (r, c, v) in trips {
            b.push(r, c, v);
        }
        rhs.extend(r);
    }
    let m = b.build()?;
    let psi = m.solve(&rhs)?;
    let ax = m.mul_vec(&psi);
    let residual = ax
        .iter()
        .zip(&rhs)
        .fold(0.0f64, |acc, (a, r)| acc.max((a - r).abs()));
    Ok((psi, residual))
}

/// Fixed-domain problem `Delta psi = gamma - A g y`, `psi = -p0` on the bed
/// and `psi = 0` on the surface.
pub fn solve_dirichlet(
    eta: &SurfaceShape,
    params: &FluidParameters,
    grid: &Grid2D,
) -> Result<StreamSolution> {
    params.validate()?;
    let (gamma, ag) = (params.gamma, params.a * params.g);
    let (psi, residual) = solve_poisson(eta, grid, |_, y| gamma - ag * y, -params.p0, 0.0)?;
    Ok(StreamSolution {
        params: *params,
        grid: grid.clone(),
        eta: eta.clone(),
        psi,
        dirichlet_residual: residual,
    })
}

/// `R(x) = |grad psi|^2 + 2 g B eta - Q` on the surface nodes. On `t = 1`
/// the tangential derivative vanishes and `|grad psi|^2 = psi_t^2
/// (1 + eta'^2)/eta^2`; `psi_t` uses a one-sided stencil that is exact for
/// cubic profiles.
pub fn bernoulli_residual(solution: &StreamSolution) -> Vec<f64> {
    let p = &solution.params;
    let g = &solution.grid;
    let slopes = solution.eta.slopes();
    (0..g.nq)
        .map(|i| {
            let e = solution.eta.eta[i];
            let pt = solution.psi_t(i, g.np);
            pt * pt * (1.0 + slopes[i] * slopes[i]) / (e * e) + 2.0 * p.g * p.b * e - p.q
        })
        .collect()
}
