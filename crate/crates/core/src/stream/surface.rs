use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Periodic free surface `eta(x) > 0` sampled on `x_i = -pi + i dx`, with
/// its trigonometric interpolant
/// `eta(x) = a_0 + sum_k (a_k cos kx + b_k sin kx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceShape {
    pub x: Vec<f64>,
    pub eta: Vec<f64>,
    /// Mean surface height `a_0`.
    pub mean: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

fn nodes(nx: usize) -> Vec<f64> {
    let dx = 2.0 * PI / nx as f64;
    (0..nx).map(|i| -PI + i as f64 * dx).collect()
}

impl SurfaceShape {
    /// Surface from Fourier coefficients; `cos[0]` is the mean and
    /// `sin[0]` is ignored.
    pub fn from_modes(nx: usize, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        if cos.len() != sin.len() || cos.is_empty() || 2 * (cos.len() - 1) > nx {
            return Err(Error::Dimension(format!(
                "{} cosine and {} sine coefficients for {nx} samples",
                cos.len(),
                sin.len()
            )));
        }
        let x = nodes(nx);
        let mut shape = SurfaceShape {
            eta: Vec::new(),
            mean: cos[0],
            x,
            cos,
            sin,
        };
        shape.sin[0] = 0.0;
        shape.eta = shape.x.iter().map(|&x| shape.eval(x)).collect();
        shape.check_positive()?;
        Ok(shape)
    }

    /// Trigonometric interpolant of samples on the standard nodes.
    pub fn from_samples(eta: Vec<f64>) -> Result<Self> {
        let nx = eta.len();
        if nx < 4 || nx % 2 != 0 {
            return Err(Error::InvalidGrid(format!("need an even sample count >= 4, got {nx}")));
        }
        let x = nodes(nx);
        let half = nx / 2;
        let mut cos = vec![0.0; half + 1];
        let mut sin = vec![0.0; half + 1];
        for k in 0..=half {
            let kf = k as f64;
            let (mut c, mut s) = (0.0, 0.0);
            for (xi, ei) in x.iter().zip(&eta) {
                c += ei * (kf * xi).cos();
                s += ei * (kf * xi).sin();
            }
            let w = if k == 0 || k == half { 1.0 } else { 2.0 } / nx as f64;
            cos[k] = w * c;
            sin[k] = if k == 0 || k == half { 0.0 } else { w * s };
        }
        let shape = SurfaceShape {
            mean: cos[0],
            x,
            eta,
            cos,
            sin,
        };
        shape.check_positive()?;
        Ok(shape)
    }

    pub fn flat(nx: usize, height: f64) -> Result<Self> {
        SurfaceShape::from_modes(nx, vec![height], vec![0.0])
    }

    fn check_positive(&self) -> Result<()> {
        let (k, &min) = self
            .eta
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("nonempty");
        if !(min > 0.0) || self.eta.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMapping {
                min_eta: min,
                x: self.x[k],
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    pub fn dx(&self) -> f64 {
        2.0 * PI / self.len() as f64
    }

    pub fn cos_coefficients(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coefficients(&self) -> &[f64] {
        &self.sin
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut s = self.cos[0];
        for k in 1..self.cos.len() {
            let kx = k as f64 * x;
            s += self.cos[k] * kx.cos() + self.sin[k] * kx.sin();
        }
        s
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let mut s = 0.0;
        for k in 1..self.cos.len() {
            let kf = k as f64;
            let kx = kf * x;
            s += kf * (-self.cos[k] * kx.sin() + self.sin[k] * kx.cos());
        }
        s
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        let mut s = 0.0;
        for k in 1..self.cos.len() {
            let kf = k as f64;
            let kx = kf * x;
            s -= kf * kf * (self.cos[k] * kx.cos() + self.sin[k] * kx.sin());
        }
        s
    }

    /// `eta'` at the sample nodes.
    pub fn slopes(&self) -> Vec<f64> {
        self.x.iter().map(|&x| self.derivative(x)).collect()
    }

    pub fn curvatures(&self) -> Vec<f64> {
        self.x.iter().map(|&x| self.second_derivative(x)).collect()
    }

    pub fn min(&self) -> f64 {
        self.eta.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn amplitude(&self) -> f64 {
        self.eta.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - self.min()
    }
}
