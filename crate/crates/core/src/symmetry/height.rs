use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::HeightField;

/// Outcome of the two moving-plane sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// Both sweeps reached the crest line `q = 0`.
    ReachedZero,
    /// A sweep stopped at an interior position.
    InteriorTouching,
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CaseTag::ReachedZero => "ReachedZero",
            CaseTag::InteriorTouching => "InteriorTouching",
        })
    }
}

/// Sign of `w_qq` at a touching point; `Indeterminate` when it is within the
/// touching tolerance of zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureSign {
    Positive,
    Negative,
    Indeterminate,
}

impl std::fmt::Display for CurvatureSign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CurvatureSign::Positive => "Positive",
            CurvatureSign::Negative => "Negative",
            CurvatureSign::Indeterminate => "Indeterminate",
        })
    }
}

/// Surface node where the reflection function vanishes to first order.
#[derive(Debug, Clone, PartialEq)]
pub struct TouchingPoint {
    pub q: f64,
    /// Surface height `h(q, 0)`.
    pub surface: f64,
    pub w: f64,
    pub w_q: f64,
    pub w_qq: f64,
    pub curvature: CurvatureSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionReport {
    /// Extremal position: `lambda0_plus` if the first sweep stopped, else
    /// `lambda0_minus`.
    pub lambda0: f64,
    /// Largest half-grid position in `(-pi, 0]` reached by the first sweep.
    pub lambda0_plus: f64,
    /// Smallest half-grid position in `[0, pi)` reached by the second sweep.
    pub lambda0_minus: f64,
    /// Half the grid spacing.
    pub sweep_step: f64,
    pub case_tag: CaseTag,
    /// Minimum of `w` at the blocking position, or at `lambda = 0` when both
    /// sweeps reach it.
    pub min_w: f64,
    /// First position where `w < -tol`, if any.
    pub blocking_lambda: Option<f64>,
    pub touching_point: Option<TouchingPoint>,
    pub asymmetry_norm: f64,
}

/// Reflection function `w(q, p; lambda) = h(q, p) - h(2 lambda - q, p)`.
///
/// `values` covers the whole period in grid layout. `domain` lists the
/// columns of the sweep domain in order of increasing `q` (`[lambda, 2 lambda
/// + pi]` for `lambda <= 0`, `[2 lambda - pi, lambda]` for `lambda > 0`) and
/// `extension` the columns past the fold up to `lambda + pi` (resp. from
/// `lambda - pi`), where periodicity supplies the reflected values.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionField {
    pub lambda: f64,
    pub values: Vec<f64>,
    pub domain: Vec<usize>,
    pub extension: Vec<usize>,
}

/// Index `m` with `lambda = m dq / 2`.
fn half_grid_index(lambda: f64, dq: f64) -> Result<isize> {
    let s = 2.0 * lambda / dq;
    let m = s.round();
    if !((s - m).abs() <= 1e-9 * s.abs().max(1.0)) {
        return Err(Error::OffGridReflection {
            lambda,
            spacing: dq,
        });
    }
    Ok(m as isize)
}

#[inline]
fn reflected(m: isize, i: isize, nq: usize) -> usize {
    (m - i).rem_euclid(nq as isize) as usize
}

/// Sweep-domain column range (unwrapped) for half-grid index `m`.
fn domain_range(m: isize, nq: usize) -> std::ops::RangeInclusive<isize> {
    let n = nq as isize;
    if m <= 0 {
        (m + n + 1).div_euclid(2)..=m + n
    } else {
        m..=(m + n).div_euclid(2)
    }
}

pub fn reflect_height(h: &HeightField, lambda: f64) -> Result<ReflectionField> {
    let g = &h.grid;
    let nq = g.nq;
    let m = half_grid_index(lambda, g.dq())?;
    let mut values = vec![0.0; g.len()];
    for j in 0..=g.np {
        for i in 0..nq {
            values[g.idx(i, j)] = h.at(i, j) - h.at(reflected(m, i as isize, nq), j);
        }
    }
    let n = nq as isize;
    let wrap = |i: isize| i.rem_euclid(n) as usize;
    let range = domain_range(m, nq);
    let (start, end) = (*range.start(), *range.end());
    let domain: Vec<usize> = range.map(wrap).collect();
    let extension: Vec<usize> = if m <= 0 {
        // up to lambda + pi, i.e. 2i <= m + 2n
        (end + 1..=(m + 2 * n).div_euclid(2)).map(wrap).collect()
    } else {
        // down to lambda - pi, i.e. 2i >= m
        ((m + 1).div_euclid(2)..start).map(wrap).collect()
    };
    Ok(ReflectionField {
        lambda,
        values,
        domain,
        extension,
    })
}

/// `max |h(q, p) - h(-q, p)|` over the grid.
pub fn asymmetry_norm(h: &HeightField) -> f64 {
    let g = &h.grid;
    let mut worst = 0.0f64;
    for j in 0..=g.np {
        for i in 0..g.nq {
            worst = worst.max((h.at(i, j) - h.at(g.mirror(i), j)).abs());
        }
    }
    worst
}

/// Rotates by whole cells so the global surface minimum sits at `q = -pi`
/// (smallest rotation on ties). Returns the field and the node that was
/// moved to index 0.
pub fn phase_align(h: &HeightField) -> (HeightField, usize) {
    let s = h.surface();
    let mut best = 0;
    for (i, &v) in s.iter().enumerate() {
        if v < s[best] {
            best = i;
        }
    }
    (h.rotated(best), best)
}

/// Minimum of `w(.; m dq / 2)` over the sweep domain.
fn sweep_min(h: &HeightField, m: isize) -> f64 {
    let g = &h.grid;
    let nq = g.nq;
    let mut min = f64::INFINITY;
    for i in domain_range(m, nq) {
        let col = i.rem_euclid(nq as isize) as usize;
        let r = reflected(m, i, nq);
        for j in 0..=g.np {
            min = min.min(h.at(col, j) - h.at(r, j));
        }
    }
    min
}

struct Sweep {
    /// Last admissible index, `None` if even the first candidate fails.
    reached: Option<isize>,
    /// First failing index and its minimum.
    blocked: Option<(isize, f64)>,
    /// Minimum at the last admissible index.
    reached_min: f64,
}

fn run_sweep(h: &HeightField, candidates: &[isize], tol: f64) -> Sweep {
    let mins: Vec<f64> = candidates.par_iter().map(|&m| sweep_min(h, m)).collect();
    let mut reached = None;
    let mut reached_min = f64::NAN;
    for (&m, &v) in candidates.iter().zip(&mins) {
        if v < -tol {
            return Sweep {
                reached,
                blocked: Some((m, v)),
                reached_min,
            };
        }
        reached = Some(m);
        reached_min = v;
    }
    Sweep {
        reached,
        blocked: None,
        reached_min,
    }
}

/// Looks for a surface node of the sweep domain at index `m` where `w` and
/// `w_q` vanish within `tol`.
fn touching_point(h: &HeightField, m: isize, tol: f64) -> Option<TouchingPoint> {
    let g = &h.grid;
    let nq = g.nq;
    let dq = g.dq();
    let top = g.np;
    let w = |i: isize| {
        let col = i.rem_euclid(nq as isize) as usize;
        h.at(col, top) - h.at(reflected(m, i, nq), top)
    };
    let mut best: Option<(isize, f64)> = None;
    for i in domain_range(m, nq) {
        if 2 * i == m + nq as isize || i.rem_euclid(nq as isize) as usize == reflected(m, i, nq) {
            continue;
        }
        let v = w(i).abs();
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    let (i, _) = best?;
    let (wm, w0, wp) = (w(i - 1), w(i), w(i + 1));
    let w_q = (wp - wm) / (2.0 * dq);
    let w_qq = (wp - 2.0 * w0 + wm) / (dq * dq);
    if w0.abs() > tol || w_q.abs() * dq > tol {
        return None;
    }
    let curvature = if w_qq.abs() * dq * dq <= tol {
        CurvatureSign::Indeterminate
    } else if w_qq > 0.0 {
        CurvatureSign::Positive
    } else {
        CurvatureSign::Negative
    };
    let col = i.rem_euclid(nq as isize) as usize;
    Some(TouchingPoint {
        q: g.q_values[col],
        surface: h.at(col, top),
        w: w0,
        w_q,
        w_qq,
        curvature,
    })
}

/// Moving-plane sweeps on the half-grid after phase alignment. The first
/// sweep moves `lambda` from `-pi` towards 0 with `w >= -tol` on
/// `[lambda, 2 lambda + pi]`; the second moves from `pi` towards 0 with
/// `w >= -tol` on `[2 lambda - pi, lambda]`.
///
/// Fails with `TroughNotAligned` when the surface minimum is attained at a
/// node not adjacent to `q = -pi` and the surface is not flat within `tol`.
pub fn moving_plane_sweep_height(h: &HeightField, tol: f64) -> Result<ReflectionReport> {
    let (h, _) = phase_align(h);
    let g = &h.grid;
    let nq = g.nq;
    let dq = g.dq();
    let step = 0.5 * dq;
    let s = h.surface();
    if h.amplitude() > tol {
        if let Some(index) = (2..nq - 1).find(|&i| s[i] <= s[0] + tol.min(0.5 * h.amplitude())) {
            return Err(Error::TroughNotAligned { index });
        }
    }
    let n = nq as isize;
    let first: Vec<isize> = (-(n - 1)..=0).collect();
    let second: Vec<isize> = (0..n).rev().collect();
    let up = run_sweep(&h, &first, tol);
    let down = run_sweep(&h, &second, tol);
    let at = |m: Option<isize>, fallback: f64| m.map_or(fallback, |m| m as f64 * step);
    let lambda0_plus = at(up.reached, -std::f64::consts::PI);
    let lambda0_minus = at(down.reached, std::f64::consts::PI);
    let reached_zero = up.blocked.is_none() && down.blocked.is_none();
    let asym = asymmetry_norm(&h);
    if reached_zero {
        return Ok(ReflectionReport {
            lambda0: 0.0,
            lambda0_plus,
            lambda0_minus,
            sweep_step: step,
            case_tag: CaseTag::ReachedZero,
            min_w: up.reached_min.min(down.reached_min),
            blocking_lambda: None,
            touching_point: None,
            asymmetry_norm: asym,
        });
    }
    let (sweep, lambda0) = if up.blocked.is_some() {
        (&up, lambda0_plus)
    } else {
        (&down, lambda0_minus)
    };
    let (bm, bmin) = sweep.blocked.expect("sweep stopped");
    let touching = sweep.reached.and_then(|m| {
        let jump = (bmin - sweep.reached_min).abs();
        touching_point(&h, m, tol.max(jump))
    });
    Ok(ReflectionReport {
        lambda0,
        lambda0_plus,
        lambda0_minus,
        sweep_step: step,
        case_tag: CaseTag::InteriorTouching,
        min_w: bmin,
        blocking_lambda: Some(bm as f64 * step),
        touching_point: touching,
        asymmetry_norm: asym,
    })
}

/// Monotonicity of the streamlines of a phase-aligned field.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    /// Every row rises from the trough to its crest and falls after it.
    pub monotone: bool,
    /// Every row increases strictly over the two cells on each side of the
    /// trough.
    pub strict_near_trough: bool,
    /// First `(row, column)` breaking monotonicity.
    pub first_violation: Option<(usize, usize)>,
    /// First `(row, column)` where the strict increase fails.
    pub first_flat: Option<(usize, usize)>,
}

impl MonotonicityReport {
    pub fn hypothesis_met(&self) -> bool {
        self.monotone && self.strict_near_trough
    }
}

/// Checks every row above the bed. Ties within `1e-14` of the row scale count
/// as nondecreasing.
pub fn check_monotone_streamlines(h: &HeightField) -> MonotonicityReport {
    let g = &h.grid;
    let nq = g.nq;
    let mut first_violation = None;
    let mut first_flat = None;
    for j in 1..=g.np {
        let row: Vec<f64> = (0..nq).map(|i| h.at(i, j)).collect();
        let scale = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let slack = 1e-14 * scale;
        let mut crest = 0;
        for (i, &v) in row.iter().enumerate() {
            if v > row[crest] {
                crest = i;
            }
        }
        if first_violation.is_none() {
            for i in 1..nq {
                let ok = if i <= crest {
                    row[i] >= row[i - 1] - slack
                } else {
                    row[i] <= row[i - 1] + slack
                };
                if !ok {
                    first_violation = Some((j, i));
                    break;
                }
            }
            if first_violation.is_none() && row[0] > row[nq - 1] + slack {
                first_violation = Some((j, 0));
            }
        }
        if first_flat.is_none() {
            let pairs = [(1, 0), (2, 1), (nq - 1, 0), (nq - 2, nq - 1)];
            if let Some(&(i, _)) = pairs.iter().find(|&&(a, b)| !(row[a] > row[b])) {
                first_flat = Some((j, i));
            }
        }
    }
    MonotonicityReport {
        monotone: first_violation.is_none(),
        strict_near_trough: first_flat.is_none(),
        first_violation,
        first_flat,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn field(nq: usize, f: impl Fn(f64, f64) -> f64) -> HeightField {
        HeightField::from_fn(make_grid(nq, 8, -1.0).unwrap(), f)
    }

    #[test]
    fn domain_ranges_match_intervals() {
        let nq = 16;
        let dq = 2.0 * std::f64::consts::PI / nq as f64;
        let q = |i: isize| -std::f64::consts::PI + i as f64 * dq;
        for m in -(nq as isize - 1)..nq as isize {
            let lam = m as f64 * dq / 2.0;
            let (lo, hi) = if m <= 0 {
                (lam, 2.0 * lam + std::f64::consts::PI)
            } else {
                (2.0 * lam - std::f64::consts::PI, lam)
            };
            let expected: Vec<isize> = (-(nq as isize)..2 * nq as isize)
                .filter(|&i| q(i) >= lo - 1e-12 && q(i) <= hi + 1e-12)
                .collect();
            let got: Vec<isize> = domain_range(m, nq).collect();
            assert_eq!(got, expected, "m = {m}");
        }
    }

    #[test]
    fn off_grid_axis_rejected() {
        let h = field(16, |q, p| (p + 1.0) * (1.0 + 0.1 * q.cos()));
        assert!(matches!(reflect_height(&h, 0.1), Err(Error::OffGridReflection { .. })));
    }

    #[test]
    fn laminar_monotone_but_not_strict() {
        let h = field(16, |_, p| p + 1.0);
        let r = check_monotone_streamlines(&h);
        assert!(r.monotone);
        assert!(!r.strict_near_trough);
        assert!(!r.hypothesis_met());
    }

    #[test]
    fn two_crests_flagged() {
        let h = field(16, |q, p| (p + 1.0) * (1.0 - 0.1 * (2.0 * q).cos()));
        let r = check_monotone_streamlines(&h);
        assert!(!r.monotone);
        let (j, i) = r.first_violation.unwrap();
        assert_eq!(j, 1);
        assert!(i == 5 || i == 9, "column {i}");
    }
}
