//! Finite-difference residual of the height equation and its exact Jacobian.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::HeightField;
use crate::grid::Grid2D;
use crate::linalg::{SparseBuilder, SparseMatrix};
use crate::params::FluidParameters;
use crate::profile::StratificationProfile;

/// Residual of every grid row: bed rows hold `h(q, p0)`, interior rows the
/// quasilinear elliptic equation and surface rows the Bernoulli condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField {
    pub grid: Grid2D,
    pub values: Vec<f64>,
}

impl ResidualField {
    pub fn norm(&self) -> f64 {
        inf_norm(&self.values)
    }

    pub fn interior_norm(&self) -> f64 {
        let g = &self.grid;
        inf_norm(&self.values[g.nq..g.np * g.nq])
    }

    pub fn surface_norm(&self) -> f64 {
        let g = &self.grid;
        inf_norm(&self.values[g.np * g.nq..])
    }
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Local difference quotients at one node.
#[derive(Debug, Clone, Copy)]
struct Local {
    h: f64,
    hq: f64,
    hp: f64,
    hqq: f64,
    hpp: f64,
    hqp: f64,
}

fn interior_local(f: &HeightField, i: usize, j: usize) -> Local {
    let g = &f.grid;
    let dq = g.dq();
    let dp = g.dp();
    let ip = g.wrap(i, 1);
    let im = g.wrap(i, -1);
    let c = f.at(i, j);
    Local {
        h: c,
        hq: (f.at(ip, j) - f.at(im, j)) / (2.0 * dq),
        hp: (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * dp),
        hqq: (f.at(ip, j) - 2.0 * c + f.at(im, j)) / (dq * dq),
        hpp: (f.at(i, j + 1) - 2.0 * c + f.at(i, j - 1)) / (dp * dp),
        hqp: (f.at(ip, j + 1) - f.at(ip, j - 1) - f.at(im, j + 1) + f.at(im, j - 1))
            / (4.0 * dq * dp),
    }
}

fn surface_local(f: &HeightField, i: usize) -> Local {
    let g = &f.grid;
    let n = g.np;
    let dq = g.dq();
    let dp = g.dp();
    let ip = g.wrap(i, 1);
    let im = g.wrap(i, -1);
    let c = f.at(i, n);
    Local {
        h: c,
        hq: (f.at(ip, n) - f.at(im, n)) / (2.0 * dq),
        hp: (3.0 * c - 4.0 * f.at(i, n - 1) + f.at(i, n - 2)) / (2.0 * dp),
        hqq: (f.at(ip, n) - 2.0 * c + f.at(im, n)) / (dq * dq),
        hpp: 0.0,
        hqp: 0.0,
    }
}

/// `beta(-p) - g h rho'(p)`, the factor multiplying `h_p^3`.
#[inline]
fn source(profile: &StratificationProfile, g: f64, p: f64, h: f64) -> f64 {
    profile.bernoulli(p) - g * h * profile.density_slope(p)
}

#[inline]
fn interior_row(l: &Local, s: f64) -> f64 {
    (1.0 + l.hq * l.hq) * l.hpp - 2.0 * l.hq * l.hp * l.hqp
        + l.hp * l.hp * l.hqq
        + s * l.hp * l.hp * l.hp
}

#[inline]
fn surface_row(l: &Local, params: &FluidParameters, rho0: f64) -> f64 {
    let w = 1.0 + l.hq * l.hq;
    let curv = l.hqq / w.powf(1.5);
    w + (2.0 * params.g * rho0 * l.h - params.q - 2.0 * params.sigma * curv) * l.hp * l.hp
}

fn check_bed(h: &HeightField) -> Result<()> {
    let scale = h.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let dev = h.max_bed_deviation();
    if dev > 1e-12 * scale {
        return Err(Error::BedCondition { max_abs: dev });
    }
    Ok(())
}

fn check_monotone(h: &HeightField) -> Result<f64> {
    let min_hp = h.min_h_p();
    if !(min_hp > 0.0) {
        return Err(Error::StagnationEncountered { min_hp });
    }
    Ok(min_hp)
}

/// Discrete residual of the height formulation with second-order centered
/// differences (periodic in `q`) and a one-sided `h_p` on the surface.
pub fn pde_residual(
    h: &HeightField,
    params: &FluidParameters,
    profile: &StratificationProfile,
) -> Result<ResidualField> {
    check_bed(h)?;
    check_monotone(h)?;
    Ok(residual_unchecked(h, params, profile))
}

pub(crate) fn residual_unchecked(
    h: &HeightField,
    params: &FluidParameters,
    profile: &StratificationProfile,
) -> ResidualField {
    let g = &h.grid;
    let nq = g.nq;
    let rho0 = profile.density(0.0);
    let mut values = vec![0.0; g.len()];
    values
        .par_chunks_mut(nq)
        .enumerate()
        .for_each(|(j, row)| {
            if j == 0 {
                for (i, r) in row.iter_mut().enumerate() {
                    *r = h.at(i, 0);
                }
            } else if j == g.np {
                for (i, r) in row.iter_mut().enumerate() {
                    *r = surface_row(&surface_local(h, i), params, rho0);
                }
            } else {
                let p = g.p_values[j];
                for (i, r) in row.iter_mut().enumerate() {
                    let l = interior_local(h, i, j);
                    *r = interior_row(&l, source(profile, params.g, p, l.h));
                }
            }
        });
    ResidualField {
        grid: g.clone(),
        values,
    }
}

/// Linearization of [`pde_residual`] at a field: the sparse Jacobian over
/// all nodes plus the coefficient fields of the interior operator
/// `a_pp d_pp + a_qp d_qp + a_qq d_qq + b_q d_q + b_p d_p + c`.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub grid: Grid2D,
    pub matrix: SparseMatrix,
    /// Derivative of every row with respect to the head `Q`.
    pub q_column: Vec<f64>,
    pub a_pp: Vec<f64>,
    pub a_qp: Vec<f64>,
    pub a_qq: Vec<f64>,
    pub b_q: Vec<f64>,
    pub b_p: Vec<f64>,
    pub c: Vec<f64>,
}

impl DiscreteOperator {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(x)
    }

    /// Indices of the interior rows `1 <= j < np`.
    pub fn interior_rows(&self) -> std::ops::Range<usize> {
        self.grid.nq..self.grid.np * self.grid.nq
    }

    /// Ellipticity discriminant `(1 + h_q^2) h_p^2 - (h_p h_q)^2` on
    /// interior nodes; equals `h_p^2`.
    pub fn ellipticity(&self) -> Vec<f64> {
        self.interior_rows()
            .map(|k| self.a_pp[k] * self.a_qq[k] - 0.25 * self.a_qp[k] * self.a_qp[k])
            .collect()
    }
}

pub fn assemble_linearization(
    h: &HeightField,
    params: &FluidParameters,
    profile: &StratificationProfile,
) -> Result<DiscreteOperator> {
    check_monotone(h)?;
    Ok(linearize_unchecked(h, params, profile))
}

pub(crate) fn linearize_unchecked(
    h: &HeightField,
    params: &FluidParameters,
    profile: &StratificationProfile,
) -> DiscreteOperator {
    let g = &h.grid;
    let nq = g.nq;
    let n = g.len();
    let dq = g.dq();
    let dp = g.dp();
    let rho0 = profile.density(0.0);

    struct Row {
        trips: Vec<(usize, usize, f64)>,
        coeffs: Vec<[f64; 6]>,
        qcol: Vec<f64>,
    }

    let rows: Vec<Row> = (0..=g.np)
        .into_par_iter()
        .map(|j| {
            let mut trips = Vec::with_capacity(nq * 9);
            let mut coeffs = vec![[0.0; 6]; nq];
            let mut qcol = vec![0.0; nq];
            for i in 0..nq {
                let k = g.idx(i, j);
                let ip = g.wrap(i, 1);
                let im = g.wrap(i, -1);
                if j == 0 {
                    trips.push((k, k, 1.0));
                } else if j == g.np {
                    let l = surface_local(h, i);
                    let w = 1.0 + l.hq * l.hq;
                    let hp2 = l.hp * l.hp;
                    let curv = l.hqq / w.powf(1.5);
                    let bracket = 2.0 * params.g * rho0 * l.h - params.q - 2.0 * params.sigma * curv;
                    let d_hq = 2.0 * l.hq + 6.0 * params.sigma * l.hqq * l.hq / w.powf(2.5) * hp2;
                    let d_hqq = -2.0 * params.sigma / w.powf(1.5) * hp2;
                    let d_hp = 2.0 * bracket * l.hp;
                    let d_h = 2.0 * params.g * rho0 * hp2;
                    qcol[i] = -hp2;
                    let c0 = d_h - 2.0 * d_hqq / (dq * dq) + d_hp * 3.0 / (2.0 * dp);
                    trips.push((k, k, c0));
                    let side = d_hqq / (dq * dq);
                    trips.push((k, g.idx(ip, j), side + d_hq / (2.0 * dq)));
                    trips.push((k, g.idx(im, j), side - d_hq / (2.0 * dq)));
                    trips.push((k, g.idx(i, j - 1), -4.0 * d_hp / (2.0 * dp)));
                    trips.push((k, g.idx(i, j - 2), d_hp / (2.0 * dp)));
                } else {
                    let p = g.p_values[j];
                    let l = interior_local(h, i, j);
                    let s = source(profile, params.g, p, l.h);
                    let a_pp = 1.0 + l.hq * l.hq;
                    let a_qp = -2.0 * l.hq * l.hp;
                    let a_qq = l.hp * l.hp;
                    let b_q = 2.0 * l.hq * l.hpp - 2.0 * l.hp * l.hqp;
                    let b_p = -2.0 * l.hq * l.hqp + 2.0 * l.hp * l.hqq + 3.0 * s * l.hp * l.hp;
                    let c = -params.g * profile.density_slope(p) * l.hp * l.hp * l.hp;
                    coeffs[i] = [a_pp, a_qp, a_qq, b_q, b_p, c];
                    let ipp = a_pp / (dp * dp);
                    let iqq = a_qq / (dq * dq);
                    let x = a_qp / (4.0 * dq * dp);
                    trips.push((k, k, -2.0 * ipp - 2.0 * iqq + c));
                    trips.push((k, g.idx(i, j + 1), ipp + b_p / (2.0 * dp)));
                    trips.push((k, g.idx(i, j - 1), ipp - b_p / (2.0 * dp)));
                    trips.push((k, g.idx(ip, j), iqq + b_q / (2.0 * dq)));
                    trips.push((k, g.idx(im, j), iqq - b_q / (2.0 * dq)));
                    trips.push((k, g.idx(ip, j + 1), x));
                    trips.push((k, g.idx(ip, j - 1), -x));
                    trips.push((k, g.idx(im, j + 1), -x));
                    trips.push((k, g.idx(im, j - 1), x));
                }
            }
            Row {
                trips,
                coeffs,
                qcol,
            }
        })
        .collect();

    let mut b = SparseBuilder::with_capacity(n, n, n * 9);
    let mut fields = [
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    ];
    let mut q_column = vec![0.0; n];
    for (j, row) in rows.into_iter().enumerate() {
        for (r, c, v) in row.trips {
            b.push(r, c, v);
        }
        for i in 0..nq {
            let k = g.idx(i, j);
            for (f, v) in fields.iter_mut().zip(row.coeffs[i]) {
                f[k] = v;
            }
            q_column[k] = row.qcol[i];
        }
    }
    let [a_pp, a_qp, a_qq, b_q, b_p, c] = fields;
    DiscreteOperator {
        grid: g.clone(),
        matrix: b.build().expect("stencil indices are in range"),
        q_column,
        a_pp,
        a_qp,
        a_qq,
        b_q,
        b_p,
        c,
    }
}
