//! Run configuration: flat `key = value` text with `#` comments.

use std::collections::HashMap;
use std::path::PathBuf;

use stratwave::kv::{self, fmt_f64, Entry};
use stratwave::{make_grid, Branch, FluidParameters, Grid2D};

use crate::CliError;

/// Keys accepted in a configuration file.
pub const CONFIG_KEYS: [&str; 22] = [
    "g", "sigma", "p0", "Q", "d", "k", "depth", "A", "B", "gamma", "nq", "np", "newton_tol",
    "max_iter", "sweep_tol", "steps", "ds", "which", "first_mode", "trials", "seed", "output",
];

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `Q` defaults to the laminar head of `depth` and `d` to `depth`.
    pub params: FluidParameters,
    pub nq: usize,
    pub np: usize,
    pub newton_tol: f64,
    pub max_iter: usize,
    pub sweep_tol: f64,
    pub steps: usize,
    pub ds: f64,
    pub which: Branch,
    /// `cos x` coefficient of the stream-function wave.
    pub first_mode: f64,
    /// Randomized trials of the maximum-principle search.
    pub trials: usize,
    pub seed: u64,
    pub output: PathBuf,
}

fn usage(line: usize, msg: impl std::fmt::Display) -> CliError {
    if line == 0 {
        CliError::Usage(msg.to_string())
    } else {
        CliError::Usage(format!("line {line}: {msg}"))
    }
}

fn num(e: &Entry) -> Result<f64, CliError> {
    let v = kv::parse_f64(e).map_err(|_| usage(e.line, format!("`{}` expects a number, got `{}`", e.key, e.value)))?;
    if !v.is_finite() {
        return Err(usage(e.line, format!("`{}` must be finite", e.key)));
    }
    Ok(v)
}

fn count(e: &Entry) -> Result<usize, CliError> {
    kv::parse_usize(e).map_err(|_| {
        usage(
            e.line,
            format!("`{}` expects a nonnegative integer, got `{}`", e.key, e.value),
        )
    })
}

/// Parses and validates a configuration. `p0`, `depth` and `B` are required.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let entries = kv::parse(text).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut seen: HashMap<&str, &Entry> = HashMap::new();
    for e in &entries {
        if !CONFIG_KEYS.contains(&e.key.as_str()) {
            return Err(usage(e.line, format!("unknown key `{}`", e.key)));
        }
        if let Some(first) = seen.insert(e.key.as_str(), e) {
            return Err(usage(
                e.line,
                format!("duplicate key `{}` (first set on line {})", e.key, first.line),
            ));
        }
    }
    let get = |k: &str| seen.get(k).copied();
    let required = |k: &str| get(k).ok_or_else(|| usage(0, format!("missing required key `{k}`")));
    let float_or = |k: &str, default: f64| get(k).map_or(Ok(default), num);
    let count_or = |k: &str, default: usize| get(k).map_or(Ok(default), count);

    let depth = num(required("depth")?)?;
    let mut params = FluidParameters::new(num(required("p0")?)?, depth, num(required("B")?)?);
    params.g = float_or("g", 9.8)?;
    params.k = float_or("k", 1.0)?;
    params.sigma = float_or("sigma", 0.0)?;
    params.a = float_or("A", 0.0)?;
    params.gamma = float_or("gamma", 0.0)?;
    params.d = float_or("d", depth)?;
    params.q = float_or("Q", params.laminar_head())?;
    if let Err(e) = params.validate() {
        let line = match &e {
            stratwave::Error::InvalidParameter { name, .. } => get(name).map_or(0, |e| e.line),
            _ => 0,
        };
        return Err(usage(line, e));
    }

    let which = match get("which") {
        Some(e) => e.value.parse::<Branch>().map_err(|m| usage(e.line, format!("`which`: {m}")))?,
        None => Branch::Minus,
    };
    let seed = match get("seed") {
        Some(e) => e
            .value
            .parse::<u64>()
            .map_err(|_| usage(e.line, format!("`seed` expects an unsigned integer, got `{}`", e.value)))?,
        None => DEFAULT_SEED,
    };
    let cfg = RunConfig {
        params,
        nq: count_or("nq", 64)?,
        np: count_or("np", 32)?,
        newton_tol: float_or("newton_tol", 1e-10)?,
        max_iter: count_or("max_iter", 25)?,
        sweep_tol: float_or("sweep_tol", 1e-9)?,
        steps: count_or("steps", 10)?,
        ds: float_or("ds", 0.02)?,
        which,
        first_mode: float_or("first_mode", 0.01)?,
        trials: count_or("trials", 10_000)?,
        seed,
        output: get("output").map_or_else(|| PathBuf::from("out"), |e| PathBuf::from(&e.value)),
    };

    let line_of = |k: &str| get(k).map_or(0, |e| e.line);
    let positive = [
        ("newton_tol", cfg.newton_tol),
        ("ds", cfg.ds),
    ];
    for (k, v) in positive {
        if !(v > 0.0) {
            return Err(usage(line_of(k), format!("`{k}` must be > 0")));
        }
    }
    if cfg.sweep_tol < 0.0 {
        return Err(usage(line_of("sweep_tol"), "`sweep_tol` must be >= 0"));
    }
    for (k, v) in [("max_iter", cfg.max_iter), ("trials", cfg.trials)] {
        if v == 0 {
            return Err(usage(line_of(k), format!("`{k}` must be >= 1")));
        }
    }
    make_grid(cfg.nq, cfg.np, cfg.params.p0)
        .and_then(|_| Grid2D::sigma(cfg.nq, cfg.np))
        .map_err(|e| usage(line_of("nq").max(line_of("np")), e))?;
    Ok(cfg)
}

impl RunConfig {
    /// Echo of the resolved configuration, readable by [`parse_config`].
    /// The output directory is left out: the echo lives inside it.
    pub fn meta(&self) -> String {
        let mut pairs: Vec<(&str, String)> = self
            .params
            .to_pairs()
            .into_iter()
            .map(|(k, v)| (k, fmt_f64(v)))
            .collect();
        pairs.extend([
            ("nq", self.nq.to_string()),
            ("np", self.np.to_string()),
            ("newton_tol", fmt_f64(self.newton_tol)),
            ("max_iter", self.max_iter.to_string()),
            ("sweep_tol", fmt_f64(self.sweep_tol)),
            ("steps", self.steps.to_string()),
            ("ds", fmt_f64(self.ds)),
            ("which", self.which.to_string()),
            ("first_mode", fmt_f64(self.first_mode)),
            ("trials", self.trials.to_string()),
            ("seed", self.seed.to_string()),
        ]);
        kv::render(pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config("p0 = -1\ndepth = 1\nB = 1\n").unwrap();
        assert_eq!(c.params.g, 9.8);
        assert_eq!(c.params.k, 1.0);
        assert_eq!(c.params.sigma, 0.0);
        assert_eq!(c.params.d, 1.0);
        assert_eq!(c.params.q, c.params.laminar_head());
        assert_eq!((c.nq, c.np), (64, 32));
        assert_eq!(c.which, Branch::Minus);
        assert_eq!(c.seed, DEFAULT_SEED);
    }

    #[test]
    fn positive_surface_tension_is_rejected() {
        let e = parse_config("p0 = -1\ndepth = 1\nB = 1\nsigma = 0.1\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 4") && msg.contains("sigma"), "{msg}");
    }

    #[test]
    fn duplicate_reports_both_lines() {
        let e = parse_config("p0 = -1\ndepth = 1\n# note\nB = 1\np0 = -2\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 5") && msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn unknown_and_malformed_keys() {
        let e = parse_config("p0 = -1\ndepth = 1\nB = 1\nbeta = 2\n").unwrap_err();
        assert!(e.to_string().contains("line 4"));
        assert!(parse_config("p0 = -1\ndepth = 1\n").is_err());
        assert!(parse_config("p0 = x\ndepth = 1\nB = 1\n").is_err());
        assert!(parse_config("p0 = -1\ndepth = 1\nB = 1\nwhich = up\n").is_err());
        assert!(parse_config("p0 = -1\ndepth = 1\nB = 1\nnq = 7\n").is_err());
        assert!(parse_config("p0 = -1\ndepth = 1\nB = 1\nnewton_tol = 0\n").is_err());
    }

    #[test]
    fn meta_round_trips() {
        let c = parse_config("p0 = -1.3\ndepth = 1.1\nB = 0.9\nA = 0.1\nwhich = plus # comment\nsteps = 3\n").unwrap();
        let back = parse_config(&c.meta()).unwrap();
        assert_eq!(back, c);
    }
}
