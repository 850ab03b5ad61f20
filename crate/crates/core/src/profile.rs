//! Streamline density and Bernoulli profiles as functions of the streamline
//! label `p = -psi`.

use crate::error::{Error, Result};

/// Density `rho(p)` and Bernoulli function `beta(-p)` along streamlines.
#[derive(Debug, Clone, PartialEq)]
pub enum StratificationProfile {
    /// `rho(p) = -A p + B` and `-beta = gamma`.
    Linear { a: f64, b: f64, gamma: f64 },
    /// Sampled profiles with monotone cubic interpolation.
    Tabulated { density: Pchip, bernoulli: Pchip },
}

/// Linear density in the stream function and constant Bernoulli function.
pub fn linear_stratification(a: f64, b: f64, gamma: f64) -> Result<StratificationProfile> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::param("B", format!("must be > 0, got {b}")));
    }
    if !a.is_finite() || !gamma.is_finite() {
        return Err(Error::param("A", "A and gamma must be finite"));
    }
    Ok(StratificationProfile::Linear { a, b, gamma })
}

impl StratificationProfile {
    pub fn tabulated(p: Vec<f64>, density: Vec<f64>, bernoulli: Vec<f64>) -> Result<Self> {
        if density.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::param("density", "samples must be > 0"));
        }
        Ok(StratificationProfile::Tabulated {
            density: Pchip::new(p.clone(), density)?,
            bernoulli: Pchip::new(p, bernoulli)?,
        })
    }

    pub fn density(&self, p: f64) -> f64 {
        match self {
            StratificationProfile::Linear { a, b, .. } => -a * p + b,
            StratificationProfile::Tabulated { density, .. } => density.eval(p),
        }
    }

    /// `d rho / d p`.
    pub fn density_slope(&self, p: f64) -> f64 {
        match self {
            StratificationProfile::Linear { a, .. } => -a,
            StratificationProfile::Tabulated { density, .. } => density.derivative(p),
        }
    }

    /// `beta(-p)`, the Bernoulli function on the streamline `p`.
    pub fn bernoulli(&self, p: f64) -> f64 {
        match self {
            StratificationProfile::Linear { gamma, .. } => -gamma,
            StratificationProfile::Tabulated { bernoulli, .. } => bernoulli.eval(p),
        }
    }

    /// `int_0^p beta(-s) ds`. The streamline energy is `E(p) = Q/2 + this`
    /// when the atmospheric pressure is taken as zero.
    pub fn bernoulli_integral(&self, p: f64) -> f64 {
        match self {
            StratificationProfile::Linear { gamma, .. } => -gamma * p,
            StratificationProfile::Tabulated { bernoulli, .. } => bernoulli.integral(0.0, p),
        }
    }

    /// Rejects profiles whose density is not strictly positive on `[p0, 0]`.
    pub fn validate_on(&self, p0: f64) -> Result<()> {
        let check = |p: f64| -> Result<()> {
            let r = self.density(p);
            if r > 0.0 {
                Ok(())
            } else {
                Err(Error::param(
                    "density",
                    format!("rho({p}) = {r} is not positive on [{p0}, 0]"),
                ))
            }
        };
        match self {
            StratificationProfile::Linear { .. } => {
                check(p0)?;
                check(0.0)
            }
            StratificationProfile::Tabulated { density, .. } => {
                if density.x[0] > p0 || *density.x.last().unwrap() < 0.0 {
                    return Err(Error::param("density", "table does not cover [p0, 0]"));
                }
                for &p in &density.x {
                    if p >= p0 && p <= 0.0 {
                        check(p)?;
                    }
                }
                check(p0)?;
                check(0.0)
            }
        }
    }

    /// Stable stratification: density nonincreasing in `p` on `[p0, 0]`,
    /// i.e. heavier fluid below.
    pub fn is_stable_on(&self, p0: f64, samples: usize) -> bool {
        let n = samples.max(2);
        (0..n).all(|i| {
            let p = p0 + (-p0) * i as f64 / (n - 1) as f64;
            self.density_slope(p) <= 1e-14
        })
    }
}

/// Piecewise cubic Hermite interpolant with Fritsch-Carlson slopes; shape
/// preserving on every interval. Values outside the table are extrapolated
/// with the end cubics.
#[derive(Debug, Clone, PartialEq)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::Dimension(format!(
                "interpolation table needs >= 2 matching samples, got {} and {}",
                n,
                y.len()
            )));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("table", "abscissae must be strictly increasing"));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut m = vec![0.0; n];
        if n == 2 {
            m[0] = delta[0];
            m[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                let (d0, d1) = (delta[k - 1], delta[k]);
                if d0 * d1 <= 0.0 {
                    m[k] = 0.0;
                } else {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    m[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
                }
            }
            m[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            m[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Pchip { x, y, m })
    }

    fn interval(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.interval(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
            s * (1.0 - s) * (1.0 - s),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        h00 * self.y[i] + h10 * h * self.m[i] + h01 * self.y[i + 1] + h11 * h * self.m[i + 1]
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let i = self.interval(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let d00 = 6.0 * s * (s - 1.0) / h;
        let d10 = (1.0 - s) * (1.0 - 3.0 * s);
        let d01 = -d00;
        let d11 = s * (3.0 * s - 2.0);
        d00 * self.y[i] + d10 * self.m[i] + d01 * self.y[i + 1] + d11 * self.m[i + 1]
    }

    /// Exact integral of the interpolant over `[lo, hi]`.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        if hi < lo {
            return -self.integral(hi, lo);
        }
        let mut total = 0.0;
        let mut a = lo;
        while a < hi {
            // x[i] <= a < x[i + 1] except on the extrapolated end pieces
            let i = self.interval(a);
            let b = if i + 2 == self.x.len() { hi } else { self.x[i + 1].min(hi) };
            total += self.segment_integral(i, a, b);
            a = b;
        }
        total
    }

    fn segment_integral(&self, i: usize, a: f64, b: f64) -> f64 {
        // Three-point Gauss-Legendre is exact for cubics.
        let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
        let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (z, w) in nodes.iter().zip(weights) {
            let t = mid + half * z;
            let h = self.x[i + 1] - self.x[i];
            let s = (t - self.x[i]) / h;
            let v = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s) * self.y[i]
                + s * (1.0 - s) * (1.0 - s) * h * self.m[i]
                + s * s * (3.0 - 2.0 * s) * self.y[i + 1]
                + s * s * (s - 1.0) * h * self.m[i + 1];
            acc += w * v;
        }
        acc * half
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homogeneous_profile() {
        let prof = linear_stratification(0.0, 1.0, 0.0).unwrap();
        for p in [-1.0, -0.3, 0.0] {
            assert_eq!(prof.density(p), 1.0);
            assert_eq!(prof.density_slope(p), 0.0);
            assert_eq!(prof.bernoulli(p), 0.0);
        }
    }

    #[test]
    fn linear_evaluation() {
        let prof = linear_stratification(1.0, 2.0, 0.5).unwrap();
        assert_eq!(prof.density(-1.0), 3.0);
        assert_eq!(prof.density_slope(-1.0), -1.0);
        // -beta(psi) = gamma
        assert_eq!(prof.bernoulli(-1.0), -0.5);
    }

    #[test]
    fn negative_density_flagged() {
        let prof = linear_stratification(-1.0, 1.0, 0.0).unwrap();
        assert_eq!(prof.density(-2.0), -1.0);
        assert!(prof.validate_on(-2.0).is_err());
        assert!(prof.validate_on(-0.5).is_ok());
    }

    #[test]
    fn rejects_nonpositive_intercept() {
        assert!(linear_stratification(0.0, 0.0, 0.0).is_err());
        assert!(linear_stratification(0.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn pchip_reproduces_linear_data() {
        let x: Vec<f64> = (0..6).map(|i| -1.0 + 0.2 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&t| 2.0 - 0.5 * t).collect();
        let ip = Pchip::new(x, y).unwrap();
        for t in [-0.95, -0.5, -0.01, 0.0] {
            assert!((ip.eval(t) - (2.0 - 0.5 * t)).abs() < 1e-14);
            assert!((ip.derivative(t) + 0.5).abs() < 1e-13);
        }
        let exact = |t: f64| 2.0 * t - 0.25 * t * t;
        assert!((ip.integral(-1.0, -0.13) - (exact(-0.13) - exact(-1.0))).abs() < 1e-13);
    }

    #[test]
    fn pchip_is_monotone_on_monotone_data() {
        let x = vec![0.0, 1.0, 1.5, 3.0, 4.0];
        let y = vec![0.0, 0.1, 2.0, 2.1, 5.0];
        let ip = Pchip::new(x, y).unwrap();
        let mut prev = ip.eval(0.0);
        for i in 1..=400 {
            let v = ip.eval(4.0 * i as f64 / 400.0);
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }

    #[test]
    fn tabulated_profile_matches_linear() {
        let p: Vec<f64> = (0..11).map(|i| -1.0 + 0.1 * i as f64).collect();
        let rho: Vec<f64> = p.iter().map(|&s| 1.0 - 0.2 * s).collect();
        let beta = vec![-0.3; p.len()];
        let tab = StratificationProfile::tabulated(p, rho, beta).unwrap();
        let lin = linear_stratification(0.2, 1.0, 0.3).unwrap();
        for s in [-1.0, -0.55, 0.0] {
            assert!((tab.density(s) - lin.density(s)).abs() < 1e-14);
            assert!((tab.density_slope(s) - lin.density_slope(s)).abs() < 1e-12);
            assert!((tab.bernoulli_integral(s) - lin.bernoulli_integral(s)).abs() < 1e-14);
        }
        assert!(tab.validate_on(-1.0).is_ok());
        assert!(tab.is_stable_on(-1.0, 20));
    }
}
