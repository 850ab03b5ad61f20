//! Structural and randomized checks of the discrete minimum principle for
//! the interior operator of a linearization.
//!
//! With `c = c+ - c-`, the comparison operator `L - c+` has a nonpositive
//! zeroth-order part. For nonnegative `w` with `L w <= 0` it satisfies
//! `(L - c+) w <= 0`, so its minimum principle applies to `w` itself.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::SparseBuilder;

use super::operator::DiscreteOperator;

#[derive(Debug, Clone, PartialEq)]
pub struct MaxPrincipleOptions {
    pub trials: usize,
    pub seed: u64,
    /// Right-hand sides are drawn from `[-forcing * |diag|, 0]`.
    pub forcing: f64,
}

impl Default for MaxPrincipleOptions {
    fn default() -> Self {
        MaxPrincipleOptions {
            trials: 10_000,
            seed: 0x5eed_2024,
            forcing: 1e-3,
        }
    }
}

/// A trial whose interior minimum undercuts the boundary minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub trial: usize,
    /// Node index of the interior minimum.
    pub node: usize,
    pub interior_min: f64,
    pub boundary_min: f64,
    /// The full grid function, verbatim.
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxPrincipleReport {
    pub rows_checked: usize,
    /// Every interior diagonal entry of `L - c+` is negative.
    pub diagonal_ok: bool,
    /// Every off-diagonal entry of `L - c+` is nonnegative.
    pub off_diagonal_ok: bool,
    /// Every row sum of `L - c+` is nonpositive.
    pub row_sum_ok: bool,
    /// Most negative off-diagonal entry (0 if none).
    pub worst_off_diagonal: f64,
    /// Largest row sum.
    pub worst_row_sum: f64,
    pub trials: usize,
    /// Trials whose solution was nonnegative and therefore admissible.
    pub valid_trials: usize,
    pub counterexample: Option<Counterexample>,
}

impl MaxPrincipleReport {
    pub fn structure_ok(&self) -> bool {
        self.diagonal_ok && self.off_diagonal_ok && self.row_sum_ok
    }
}

/// Interior rows of the operator as `(row, [(col, value)])`.
fn interior_stencils(op: &DiscreteOperator) -> Vec<(usize, Vec<(usize, f64)>)> {
    let range = op.interior_rows();
    let mut rows: Vec<(usize, Vec<(usize, f64)>)> = range.clone().map(|r| (r, Vec::new())).collect();
    for (r, c, v) in op.matrix.triplets() {
        if range.contains(&r) {
            rows[r - range.start].1.push((c, v));
        }
    }
    for (_, row) in &mut rows {
        row.sort_by_key(|e| e.0);
    }
    rows
}

pub fn check_discrete_max_principle(
    op: &DiscreteOperator,
    options: &MaxPrincipleOptions,
) -> Result<MaxPrincipleReport> {
    let n = op.grid.len();
    let stencils = interior_stencils(op);

    let mut diagonal_ok = true;
    let mut off_diagonal_ok = true;
    let mut row_sum_ok = true;
    let mut worst_off: f64 = 0.0;
    let mut worst_sum = f64::NEG_INFINITY;
    for (r, row) in &stencils {
        let cplus = op.c[*r].max(0.0);
        let mut diag = 0.0;
        let mut sum = 0.0;
        let mut scale: f64 = 0.0;
        for &(c, v) in row {
            let v = if c == *r { v - cplus } else { v };
            scale = scale.max(v.abs());
            sum += v;
            if c == *r {
                diag = v;
            } else {
                worst_off = worst_off.min(v);
                if v < 0.0 {
                    off_diagonal_ok = false;
                }
            }
        }
        if !(diag < 0.0) {
            diagonal_ok = false;
        }
        worst_sum = worst_sum.max(sum);
        if sum > 1e-12 * scale {
            row_sum_ok = false;
        }
    }

    // Dirichlet problem: interior rows of L, identity on bed and surface.
    let interior = op.interior_rows();
    let mut b = SparseBuilder::with_capacity(n, n, n * 9);
    let mut diag_abs = vec![0.0; n];
    for (r, row) in &stencils {
        for &(c, v) in row {
            b.push(*r, c, v);
            if c == *r {
                diag_abs[*r] = v.abs();
            }
        }
    }
    for k in (0..n).filter(|k| !interior.contains(k)) {
        b.push(k, k, 1.0);
    }
    let lu = b.build()?.lu()?;

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut valid = 0;
    let mut counterexample = None;
    let mut rhs = vec![0.0; n];
    for trial in 0..options.trials {
        for k in 0..n {
            rhs[k] = if interior.contains(&k) {
                -rng.random::<f64>() * options.forcing * diag_abs[k]
            } else {
                rng.random_range(1.0..2.0)
            };
        }
        let w = lu.solve(&rhs)?;
        if w.iter().any(|&x| x < 0.0) {
            continue;
        }
        valid += 1;
        let norm = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let boundary_min = (0..n)
            .filter(|k| !interior.contains(k))
            .map(|k| w[k])
            .fold(f64::INFINITY, f64::min);
        let (node, interior_min) = interior
            .clone()
            .map(|k| (k, w[k]))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        if interior_min < boundary_min - 1e-12 * norm {
            counterexample = Some(Counterexample {
                trial,
                node,
                interior_min,
                boundary_min,
                w,
            });
            break;
        }
    }

    Ok(MaxPrincipleReport {
        rows_checked: stencils.len(),
        diagonal_ok,
        off_diagonal_ok,
        row_sum_ok,
        worst_off_diagonal: worst_off,
        worst_row_sum: worst_sum,
        trials: options.trials,
        valid_trials: valid,
        counterexample,
    })
}

impl DiscreteOperator {
    /// Copy of the operator with the largest positive off-diagonal entry of
    /// interior row `row` negated; used to exercise the falsification search.
    pub fn with_flipped_off_diagonal(&self, row: usize) -> Result<DiscreteOperator> {
        let trips = self.matrix.triplets();
        let target = trips
            .iter()
            .enumerate()
            .filter(|(_, t)| t.0 == row && t.1 != row && t.2 > 0.0)
            .max_by(|a, b| a.1 .2.partial_cmp(&b.1 .2).unwrap())
            .map(|(k, _)| k);
        let n = self.grid.len();
        let mut b = SparseBuilder::with_capacity(n, n, trips.len());
        for (k, &(r, c, v)) in trips.iter().enumerate() {
            b.push(r, c, if Some(k) == target { -v } else { v });
        }
        Ok(DiscreteOperator {
            matrix: b.build()?,
            ..self.clone()
        })
    }
}
