use crate::error::{Error, Result};
use crate::kv::{self, Entry};

/// Physical and model constants of a steady stratified wave.
///
/// The density is `rho(-psi) = A psi + B` in the linear model and the
/// Bernoulli head `Q` closes the dynamic surface condition. Keys used in
/// text files are the field names, with `Q`, `A` and `B` in upper case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidParameters {
    /// Gravitational acceleration.
    pub g: f64,
    /// Surface-tension coefficient, `sigma <= 0`.
    pub sigma: f64,
    /// Relative pseudo mass flux, `p0 < 0`.
    pub p0: f64,
    /// Bernoulli head constant `Q`.
    pub q: f64,
    /// Mean surface height.
    pub d: f64,
    /// Wave number.
    pub k: f64,
    /// Laminar layer height.
    pub depth: f64,
    /// Density slope constant `A`.
    pub a: f64,
    /// Density intercept `B > 0`.
    pub b: f64,
    /// Constant Bernoulli value.
    pub gamma: f64,
}

pub const KEYS: [&str; 10] = ["g", "sigma", "p0", "Q", "d", "k", "depth", "A", "B", "gamma"];

impl FluidParameters {
    /// Parameters with `g = 9.8`, `k = 1`, `sigma = A = gamma = 0`, `d = depth`
    /// and `Q` set to the laminar head `lambda^2 + 2 g B depth`.
    pub fn new(p0: f64, depth: f64, b: f64) -> Self {
        let mut p = FluidParameters {
            g: 9.8,
            sigma: 0.0,
            p0,
            q: 0.0,
            d: depth,
            k: 1.0,
            depth,
            a: 0.0,
            b,
            gamma: 0.0,
        };
        p.q = p.laminar_head();
        p
    }

    pub fn with_stratification(mut self, a: f64, gamma: f64) -> Self {
        self.a = a;
        self.gamma = gamma;
        self.q = self.laminar_head();
        self
    }

    /// Surface relative speed `lambda = p0/h + gamma h/2 - A g h^2/3` of the
    /// laminar flow of height `depth`.
    pub fn laminar_lambda(&self) -> f64 {
        let h = self.depth;
        self.p0 / h + self.gamma * h / 2.0 - self.a * self.g * h * h / 3.0
    }

    /// Head `Q` at which the flat laminar surface satisfies the Bernoulli row.
    pub fn laminar_head(&self) -> f64 {
        let lam = self.laminar_lambda();
        lam * lam + 2.0 * self.g * self.b * self.depth
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("g", self.g),
            ("sigma", self.sigma),
            ("p0", self.p0),
            ("Q", self.q),
            ("d", self.d),
            ("k", self.k),
            ("depth", self.depth),
            ("A", self.a),
            ("B", self.b),
            ("gamma", self.gamma),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::param(name, format!("{v} is not finite")));
            }
        }
        if self.g <= 0.0 {
            return Err(Error::param("g", "must be > 0"));
        }
        if self.sigma > 0.0 {
            return Err(Error::param("sigma", "must be <= 0"));
        }
        if self.p0 >= 0.0 {
            return Err(Error::param("p0", "must be < 0"));
        }
        if self.b <= 0.0 {
            return Err(Error::param("B", "must be > 0"));
        }
        if self.depth <= 0.0 {
            return Err(Error::param("depth", "must be > 0"));
        }
        if self.k <= 0.0 {
            return Err(Error::param("k", "must be > 0"));
        }
        if self.d <= 0.0 {
            return Err(Error::param("d", "must be > 0"));
        }
        Ok(())
    }

    pub fn to_pairs(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("g", self.g),
            ("sigma", self.sigma),
            ("p0", self.p0),
            ("Q", self.q),
            ("d", self.d),
            ("k", self.k),
            ("depth", self.depth),
            ("A", self.a),
            ("B", self.b),
            ("gamma", self.gamma),
        ]
    }

    /// Serializes as `key = value` lines.
    pub fn to_kv(&self) -> String {
        kv::render(self.to_pairs().into_iter().map(|(k, v)| (k, kv::fmt_f64(v))))
    }

    /// Parses a file written by [`FluidParameters::to_kv`]. All ten keys are
    /// required; unknown keys are rejected.
    pub fn from_kv(text: &str) -> Result<Self> {
        let entries = kv::parse(text)?;
        let mut slots: [Option<f64>; 10] = [None; 10];
        for e in &entries {
            let Some(pos) = KEYS.iter().position(|k| *k == e.key) else {
                return Err(unknown_key(e));
            };
            if slots[pos].is_some() {
                return Err(Error::Parse {
                    line: e.line,
                    message: format!("duplicate key `{}`", e.key),
                });
            }
            slots[pos] = Some(kv::parse_f64(e)?);
        }
        let mut vals = [0.0; 10];
        for (i, s) in slots.iter().enumerate() {
            vals[i] = s.ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("missing key `{}`", KEYS[i]),
            })?;
        }
        let p = FluidParameters {
            g: vals[0],
            sigma: vals[1],
            p0: vals[2],
            q: vals[3],
            d: vals[4],
            k: vals[5],
            depth: vals[6],
            a: vals[7],
            b: vals[8],
            gamma: vals[9],
        };
        p.validate()?;
        Ok(p)
    }
}

fn unknown_key(e: &Entry) -> Error {
    Error::Parse {
        line: e.line,
        message: format!("unknown key `{}`", e.key),
    }
}
