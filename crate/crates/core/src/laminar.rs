//! Laminar (x-independent) flows of the constant-Bernoulli system, their
//! bifurcation speeds and stagnation depths.
//!
//! With `rho(-psi) = A psi + B` and `-beta = gamma` the flat state of height
//! `h` is the cubic
//!
//! ```text
//! psi(y) = gamma y^2/2 - A g y^3/6 + (p0/h - gamma h/2 + A g h^2/6) y - p0
//! ```
//!
//! whose surface speed is `lambda = p0/h + gamma h/2 - A g h^2/3`.

use crate::error::{Error, Result};
use crate::params::FluidParameters;

/// Which root of the dispersion relation to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl std::str::FromStr for Branch {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "plus" => Ok(Branch::Plus),
            "minus" => Ok(Branch::Minus),
            other => Err(format!("expected `plus` or `minus`, got `{other}`")),
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaminarFlow {
    pub params: FluidParameters,
    /// Surface value of `psi_y`.
    pub lambda: f64,
}

impl LaminarFlow {
    pub fn new(params: FluidParameters) -> Result<Self> {
        params.validate()?;
        Ok(LaminarFlow {
            lambda: params.laminar_lambda(),
            params,
        })
    }

    /// The laminar flow of height `params.depth` whose surface speed equals
    /// the requested bifurcation root. `p0`, `Q` and `d` are overwritten; the
    /// root includes the capillary shift `sigma k^2` when `sigma != 0`.
    pub fn at_bifurcation(params: FluidParameters, which: Branch) -> Result<Self> {
        let (minus, plus) = bifurcation_lambdas(&params)?;
        let lambda = match which {
            Branch::Plus => plus,
            Branch::Minus => minus,
        };
        let h = params.depth;
        let g = params.g;
        let p0 = h * (lambda - params.gamma * h / 2.0 + params.a * g * h * h / 3.0);
        if !(p0 < 0.0) {
            return Err(Error::param(
                "p0",
                format!("bifurcation at lambda = {lambda} implies p0 = {p0} >= 0"),
            ));
        }
        let mut p = params;
        p.p0 = p0;
        p.d = h;
        p.q = lambda * lambda + 2.0 * g * p.b * h;
        p.validate()?;
        Ok(LaminarFlow { params: p, lambda })
    }

    fn check_depth(&self, y: f64) -> Result<()> {
        if (0.0..=self.params.depth).contains(&y) {
            Ok(())
        } else {
            Err(Error::param(
                "y",
                format!("{y} outside [0, {}]", self.params.depth),
            ))
        }
    }

    /// Coefficient of `y` in the cubic.
    fn linear_coeff(&self) -> f64 {
        let p = &self.params;
        let h = p.depth;
        p.p0 / h - p.gamma * h / 2.0 + p.a * p.g * h * h / 6.0
    }

    pub(crate) fn psi_unchecked(&self, y: f64) -> f64 {
        let p = &self.params;
        p.gamma * y * y / 2.0 - p.a * p.g * y * y * y / 6.0 + self.linear_coeff() * y - p.p0
    }

    pub(crate) fn psi_y_unchecked(&self, y: f64) -> f64 {
        let p = &self.params;
        p.gamma * y - p.a * p.g * y * y / 2.0 + self.linear_coeff()
    }

    /// `(h - y)((A g/2)(y + h) - gamma) + lambda`, the factored velocity.
    pub fn psi_y_factored(&self, y: f64) -> f64 {
        let p = &self.params;
        let h = p.depth;
        (h - y) * (p.a * p.g / 2.0 * (y + h) - p.gamma) + self.lambda
    }

    /// `psi_yy = gamma - A g y`.
    pub fn psi_yy(&self, y: f64) -> f64 {
        self.params.gamma - self.params.a * self.params.g * y
    }
}

pub fn laminar_psi(flow: &LaminarFlow, y: f64) -> Result<f64> {
    flow.check_depth(y)?;
    Ok(flow.psi_unchecked(y))
}

pub fn laminar_psi_y(flow: &LaminarFlow, y: f64) -> Result<f64> {
    flow.check_depth(y)?;
    Ok(flow.psi_y_unchecked(y))
}

/// Roots `(lambda_minus, lambda_plus)` of
/// `k coth(kh) lambda^2 - (gamma - A g h) lambda - g B = 0`.
pub fn dispersion_lambdas(params: &FluidParameters) -> (f64, f64) {
    let gb = params.g * params.b;
    quadratic_roots(params, gb)
}

/// Dispersion roots with the surface-tension term: `g B` is replaced by
/// `g B + sigma k^2`. Identical to [`dispersion_lambdas`] when `sigma = 0`.
pub fn bifurcation_lambdas(params: &FluidParameters) -> Result<(f64, f64)> {
    let restoring = params.g * params.b + params.sigma * params.k * params.k;
    if !(restoring > 0.0) {
        return Err(Error::param(
            "sigma",
            format!("g B + sigma k^2 = {restoring} must be positive"),
        ));
    }
    Ok(quadratic_roots(params, restoring))
}

fn quadratic_roots(params: &FluidParameters, restoring: f64) -> (f64, f64) {
    let kh = params.k * params.depth;
    let a = params.k / kh.tanh();
    let b = -(params.gamma - params.a * params.g * params.depth);
    let c = -restoring;
    let disc = b * b - 4.0 * a * c;
    let sign = if b >= 0.0 { 1.0 } else { -1.0 };
    let big = -(b + sign * disc.sqrt()) / 2.0;
    let r1 = big / a;
    let r2 = c / big;
    (r1.min(r2), r1.max(r2))
}

/// Where the laminar flow can stagnate, by the sign of `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StagnationCase {
    /// No interior root: `y = h` or the balance `gamma = (A g/2)(y + h)`.
    SurfaceOrBalance,
    /// `gamma > (A g/2)(y + h)` at the root; requires `lambda > 0`.
    LambdaPlus,
    /// `gamma < (A g/2)(y + h)` at the root; requires `lambda < 0`.
    LambdaMinus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StagnationClassification {
    pub case_tag: StagnationCase,
    /// Roots of `psi_y` in `[0, depth)`, ascending.
    pub depths: Vec<f64>,
    /// The quadratic has a double root (within `1e-12` relative discriminant).
    pub tangency: bool,
}

/// All `y` in `[0, depth)` where the laminar `psi_y` vanishes.
///
/// At any root `y < h` the factored velocity gives
/// `lambda = (h - y)(gamma - (A g/2)(y + h))`, so every root carries the
/// same comparison and the tag is determined by the sign of `lambda`.
pub fn find_stagnation_depths(flow: &LaminarFlow) -> StagnationClassification {
    let p = &flow.params;
    let h = p.depth;
    // (A g/2) y^2 - gamma y + (gamma h - (A g/2) h^2 - lambda) = 0
    let qa = p.a * p.g / 2.0;
    let qb = -p.gamma;
    let qc = p.gamma * h - qa * h * h - flow.lambda;
    let mut roots = Vec::new();
    let mut tangency = false;
    if qa == 0.0 {
        if qb != 0.0 {
            roots.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        let scale = qb * qb + (4.0 * qa * qc).abs();
        if disc.abs() <= 1e-12 * scale {
            tangency = true;
            roots.push(-qb / (2.0 * qa));
        } else if disc > 0.0 {
            let sign = if qb >= 0.0 { 1.0 } else { -1.0 };
            let big = -(qb + sign * disc.sqrt()) / 2.0;
            roots.push(big / qa);
            if big != 0.0 {
                roots.push(qc / big);
            }
        }
    }
    roots.retain(|&y| (0.0..h).contains(&y));
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup();
    let case_tag = match roots.last() {
        None => StagnationCase::SurfaceOrBalance,
        Some(&y) => {
            if p.gamma > qa * (y + h) {
                StagnationCase::LambdaPlus
            } else {
                StagnationCase::LambdaMinus
            }
        }
    };
    StagnationClassification {
        case_tag,
        depths: roots,
        tangency,
    }
}
