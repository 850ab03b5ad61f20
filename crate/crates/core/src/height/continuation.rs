//! Pseudo-arclength continuation of wave branches out of a laminar state.
//!
//! The unknowns are the heights, the head `Q`, and an unfolding scalar `mu`
//! multiplying `sin q` in every non-bed row. Together with the phase
//! condition `sum_i sin(q_i) h(q_i, 0) = 0` this removes the translation
//! null direction, so the bordered Jacobian stays regular along the branch
//! and `mu` vanishes at converged points.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::HeightField;
use crate::grid::make_grid;
use crate::kv::{self, fmt_f64};
use crate::laminar::{Branch, LaminarFlow};
use crate::linalg::SparseBuilder;
use crate::params::FluidParameters;
use crate::profile::StratificationProfile;

use super::operator::{inf_norm, linearize_unchecked, residual_unchecked};
use super::solve::{laminar_height_field, newton_solve};

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationOptions {
    pub nq: usize,
    pub np: usize,
    pub steps: usize,
    /// Initial and maximal pseudo-arclength step.
    pub ds: f64,
    /// Smallest step tried before the branch is abandoned.
    pub ds_min: f64,
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Branch stops once `min h_p < stagnation_factor * depth / |p0|`.
    pub stagnation_factor: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            nq: 64,
            np: 32,
            steps: 10,
            ds: 0.02,
            ds_min: 0.02 / 64.0,
            newton_tol: 1e-10,
            max_iter: 25,
            stagnation_factor: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    /// Head `Q`, the continuation parameter.
    pub q: f64,
    /// Accumulated pseudo-arclength.
    pub arclength: f64,
    pub field: HeightField,
    /// Crest-to-trough height of the surface.
    pub amplitude: f64,
    pub residual: f64,
    pub min_hp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionBranch {
    /// Parameters of the laminar seed (with its `p0`, `Q`, `d`).
    pub seed: FluidParameters,
    pub which: Branch,
    pub options: ContinuationOptions,
    pub points: Vec<BranchPoint>,
}

impl SolutionBranch {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> Option<&BranchPoint> {
        self.points.last()
    }

    /// Parameters at point `k` (the seed with `Q` replaced).
    pub fn params_at(&self, k: usize) -> FluidParameters {
        FluidParameters {
            q: self.points[k].q,
            ..self.seed
        }
    }

    pub fn meta(&self) -> String {
        let o = &self.options;
        let mut pairs: Vec<(String, String)> = self
            .seed
            .to_pairs()
            .into_iter()
            .map(|(k, v)| (k.to_string(), fmt_f64(v)))
            .collect();
        pairs.push(("which".into(), self.which.to_string()));
        pairs.push(("nq".into(), o.nq.to_string()));
        pairs.push(("np".into(), o.np.to_string()));
        pairs.push(("steps".into(), o.steps.to_string()));
        pairs.push(("ds".into(), fmt_f64(o.ds)));
        pairs.push(("ds_min".into(), fmt_f64(o.ds_min)));
        pairs.push(("newton_tol".into(), fmt_f64(o.newton_tol)));
        pairs.push(("max_iter".into(), o.max_iter.to_string()));
        pairs.push(("stagnation_factor".into(), fmt_f64(o.stagnation_factor)));
        pairs.push(("points".into(), self.len().to_string()));
        for (k, pt) in self.points.iter().enumerate() {
            pairs.push((format!("step_{k:03}_Q"), fmt_f64(pt.q)));
            pairs.push((format!("step_{k:03}_arclength"), fmt_f64(pt.arclength)));
            pairs.push((format!("step_{k:03}_amplitude"), fmt_f64(pt.amplitude)));
            pairs.push((format!("step_{k:03}_residual"), fmt_f64(pt.residual)));
        }
        kv::render(pairs)
    }

    /// Writes `branch.meta` and `step_NNN.csv` files into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("branch.meta"), self.meta())?;
        for (k, pt) in self.points.iter().enumerate() {
            pt.field.write_csv(&dir.join(format!("step_{k:03}.csv")))?;
        }
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join("branch.meta"))?;
        let entries = kv::parse(&text)?;
        let map: HashMap<&str, &kv::Entry> = entries.iter().map(|e| (e.key.as_str(), e)).collect();
        let get = |k: &str| -> Result<&kv::Entry> {
            map.get(k).copied().ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("branch.meta lacks `{k}`"),
            })
        };
        let param_text: String = crate::params::KEYS
            .iter()
            .map(|k| get(k).map(|e| format!("{k} = {}\n", e.value)))
            .collect::<Result<String>>()?;
        let seed = FluidParameters::from_kv(&param_text)?;
        let which_entry = get("which")?;
        let which = which_entry.value.parse().map_err(|m| Error::Parse {
            line: which_entry.line,
            message: m,
        })?;
        let options = ContinuationOptions {
            nq: kv::parse_usize(get("nq")?)?,
            np: kv::parse_usize(get("np")?)?,
            steps: kv::parse_usize(get("steps")?)?,
            ds: kv::parse_f64(get("ds")?)?,
            ds_min: kv::parse_f64(get("ds_min")?)?,
            newton_tol: kv::parse_f64(get("newton_tol")?)?,
            max_iter: kv::parse_usize(get("max_iter")?)?,
            stagnation_factor: kv::parse_f64(get("stagnation_factor")?)?,
        };
        let n = kv::parse_usize(get("points")?)?;
        let mut points = Vec::with_capacity(n);
        for k in 0..n {
            let field = HeightField::read_csv(&dir.join(format!("step_{k:03}.csv")))?;
            let min_hp = field.min_h_p();
            points.push(BranchPoint {
                q: kv::parse_f64(get(&format!("step_{k:03}_Q"))?)?,
                arclength: kv::parse_f64(get(&format!("step_{k:03}_arclength"))?)?,
                amplitude: kv::parse_f64(get(&format!("step_{k:03}_amplitude"))?)?,
                residual: kv::parse_f64(get(&format!("step_{k:03}_residual"))?)?,
                min_hp,
                field,
            });
        }
        Ok(SolutionBranch {
            seed,
            which,
            options,
            points,
        })
    }
}

/// Weighted inner product on `(h, Q)`: mean square over nodes plus `Q^2`.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() - 1;
    let hpart: f64 = a[..n].iter().zip(&b[..n]).map(|(x, y)| x * y).sum();
    hpart / n as f64 + a[n] * b[n]
}

fn normalize(v: &mut [f64]) {
    let s = dot(v, v).sqrt();
    for x in v.iter_mut() {
        *x /= s;
    }
}

/// Continues the wave branch bifurcating from the laminar flow of height
/// `seed.depth` at the chosen dispersion root.
///
/// `seed.p0`, `seed.Q` and `seed.d` are replaced by the values of the
/// bifurcating laminar flow. The first point is the discrete laminar state;
/// the first step follows the even near-null vector of the Jacobian there
/// and later steps use a secant predictor.
pub fn continue_branch(
    seed_params: &FluidParameters,
    profile: &StratificationProfile,
    which: Branch,
    options: &ContinuationOptions,
) -> Result<SolutionBranch> {
    let flow = LaminarFlow::at_bifurcation(*seed_params, which)?;
    let seed = flow.params;
    let grid = make_grid(options.nq, options.np, seed.p0)?;
    let guess = laminar_height_field(&seed, profile, &grid)?;
    let (h0, report) = newton_solve(&guess, &seed, profile, options.newton_tol, options.max_iter)?;
    let floor = options.stagnation_factor * seed.depth / seed.p0.abs();
    let mut branch = SolutionBranch {
        seed,
        which,
        options: options.clone(),
        points: vec![BranchPoint {
            q: seed.q,
            arclength: 0.0,
            amplitude: h0.amplitude(),
            residual: report.residual,
            min_hp: report.min_hp,
            field: h0,
        }],
    };
    if options.steps == 0 {
        return Ok(branch);
    }

    let sin_q: Vec<f64> = grid.q_values.iter().map(|q| q.sin()).collect();
    let mut tangent = initial_tangent(&branch.points[0].field, &seed, profile)?;
    let mut ds = options.ds;
    let mut arclength = 0.0;

    while branch.len() <= options.steps {
        let last = branch.last().expect("branch has a seed").clone();
        let mut x0 = last.field.values.clone();
        x0.push(last.q);
        let pred: Vec<f64> = x0.iter().zip(&tangent).map(|(x, t)| x + ds * t).collect();
        match corrector(&pred, &tangent, &last.field, &seed, profile, &sin_q, options) {
            Ok((field, q, residual)) => {
                let min_hp = field.min_h_p();
                if min_hp < floor {
                    return Err(Error::BranchTerminated {
                        branch: Box::new(branch),
                        reason: format!("min h_p = {min_hp:e} fell below the floor {floor:e}"),
                    });
                }
                let mut x1 = field.values.clone();
                x1.push(q);
                let mut secant: Vec<f64> = x1.iter().zip(&x0).map(|(a, b)| a - b).collect();
                normalize(&mut secant);
                tangent = secant;
                arclength += ds;
                branch.points.push(BranchPoint {
                    q,
                    arclength,
                    amplitude: field.amplitude(),
                    residual,
                    min_hp,
                    field,
                });
                ds = (2.0 * ds).min(options.ds);
            }
            Err(e) => {
                ds *= 0.5;
                if ds < options.ds_min {
                    return Err(Error::BranchTerminated {
                        branch: Box::new(branch),
                        reason: format!("corrector failed at the minimum step: {e}"),
                    });
                }
            }
        }
    }
    Ok(branch)
}

/// Even near-null vector of the Jacobian at a laminar field, by inverse
/// iteration started from `cos(q) (p - p0)`. Oriented so that the surface
/// rises at `q = 0`; the `Q` component is zero.
fn initial_tangent(
    h: &HeightField,
    params: &FluidParameters,
    profile: &StratificationProfile,
) -> Result<Vec<f64>> {
    let g = &h.grid;
    let op = linearize_unchecked(h, params, profile);
    let lu = op.matrix.lu()?;
    let mut v: Vec<f64> = (0..g.len())
        .map(|k| {
            let (i, j) = (k % g.nq, k / g.nq);
            g.q_values[i].cos() * (g.p_values[j] - g.p0())
        })
        .collect();
    for _ in 0..8 {
        let mut w = lu.solve(&v)?;
        for i in 0..g.nq {
            let m = g.mirror(i);
            if m <= i {
                continue;
            }
            for j in 0..=g.np {
                let (a, b) = (g.idx(i, j), g.idx(m, j));
                let avg = 0.5 * (w[a] + w[b]);
                w[a] = avg;
                w[b] = avg;
            }
        }
        let s = (w.iter().map(|x| x * x).sum::<f64>() / w.len() as f64).sqrt();
        v = w.into_iter().map(|x| x / s).collect();
    }
    if v[g.idx(g.nq / 2, g.np)] < 0.0 {
        for x in &mut v {
            *x = -*x;
        }
    }
    v.push(0.0);
    normalize(&mut v);
    Ok(v)
}

/// Newton iteration on the bordered system from the predicted point.
/// Returns the corrected field, its head and the plain residual norm.
fn corrector(
    pred: &[f64],
    tangent: &[f64],
    template: &HeightField,
    seed: &FluidParameters,
    profile: &StratificationProfile,
    sin_q: &[f64],
    options: &ContinuationOptions,
) -> Result<(HeightField, f64, f64)> {
    let grid = &template.grid;
    let n = grid.len();
    let nq = grid.nq;
    let surf = grid.np * nq;
    let mut field = template.clone();
    field.values.copy_from_slice(&pred[..n]);
    let mut q = pred[n];
    let mut mu = 0.0;

    let evaluate = |field: &HeightField, q: f64, mu: f64| -> (Vec<f64>, f64) {
        let p = FluidParameters { q, ..*seed };
        let r = residual_unchecked(field, &p, profile).values;
        let plain = inf_norm(&r);
        let mut g = r;
        for (k, gk) in g.iter_mut().enumerate().skip(nq) {
            *gk += mu * sin_q[k % nq];
        }
        let phase: f64 = (0..nq).map(|i| sin_q[i] * field.values[surf + i]).sum();
        let mut x = field.values.clone();
        x.push(q);
        let diff: Vec<f64> = x.iter().zip(pred).map(|(a, b)| a - b).collect();
        g.push(phase);
        g.push(dot(tangent, &diff));
        (g, plain)
    };

    let (mut g, mut plain) = evaluate(&field, q, mu);
    let mut norm = inf_norm(&g).max(plain);
    for _ in 0..options.max_iter {
        if norm < options.newton_tol {
            return Ok((field, q, plain));
        }
        if !(field.min_h_p() > 0.0) {
            return Err(Error::StagnationEncountered {
                min_hp: field.min_h_p(),
            });
        }
        let p = FluidParameters { q, ..*seed };
        let op = linearize_unchecked(&field, &p, profile);
        let mut b = SparseBuilder::with_capacity(n + 2, n + 2, n * 12);
        for (r, c, v) in op.matrix.triplets() {
            b.push(r, c, v);
        }
        for (k, &v) in op.q_column.iter().enumerate() {
            b.push(k, n, v);
        }
        for k in nq..n {
            b.push(k, n + 1, sin_q[k % nq]);
        }
        for i in 0..nq {
            b.push(n, surf + i, sin_q[i]);
        }
        for (k, &t) in tangent[..n].iter().enumerate() {
            b.push(n + 1, k, t / n as f64);
        }
        b.push(n + 1, n, tangent[n]);
        let m = b.build()?;
        let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
        let d = m.solve(&rhs)?;
        let mut step = 1.0;
        let mut done = false;
        while step >= 1.0 / 16.0 {
            let mut trial = field.clone();
            for (v, dv) in trial.values.iter_mut().zip(&d[..n]) {
                *v += step * dv;
            }
            for v in &mut trial.values[..nq] {
                *v = 0.0;
            }
            let tq = q + step * d[n];
            let tmu = mu + step * d[n + 1];
            if trial.min_h_p() > 0.0 {
                let (tg, tp) = evaluate(&trial, tq, tmu);
                let tn = inf_norm(&tg).max(tp);
                if tn < norm {
                    field = trial;
                    q = tq;
                    mu = tmu;
                    g = tg;
                    plain = tp;
                    norm = tn;
                    done = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !done {
            break;
        }
    }
    if norm < options.newton_tol {
        return Ok((field, q, plain));
    }
    let min_hp = field.min_h_p();
    Err(Error::NoConvergence {
        best: Box::new(field),
        report: super::solve::SolveReport {
            iterations: options.max_iter,
            residual: norm,
            converged: false,
            min_hp,
        },
    })
}
