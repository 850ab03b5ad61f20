use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{make_grid, Grid2D};
use crate::kv::fmt_f64;

/// Streamline heights `h(q, p)` above the flat bed.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightField {
    pub grid: Grid2D,
    pub values: Vec<f64>,
}

impl HeightField {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(HeightField { grid, values })
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for &p in &grid.p_values {
            for &q in &grid.q_values {
                values.push(f(q, p));
            }
        }
        HeightField { grid, values }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    /// Surface profile `eta(q) = h(q, 0)`.
    pub fn surface(&self) -> &[f64] {
        let np = self.grid.np;
        &self.values[np * self.grid.nq..]
    }

    /// Crest-to-trough height of the surface.
    pub fn amplitude(&self) -> f64 {
        let s = self.surface();
        let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    }

    /// Mean surface height `(1 / 2 pi) int h(q, 0) dq`.
    pub fn mean_height(&self) -> f64 {
        let s = self.surface();
        s.iter().sum::<f64>() / s.len() as f64
    }

    pub fn max_bed_deviation(&self) -> f64 {
        self.values[..self.grid.nq]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Second-order `h_p` at every node: centered inside, one-sided at the
    /// bed and the surface.
    pub fn h_p(&self) -> Vec<f64> {
        let g = &self.grid;
        let dp = g.dp();
        let np = g.np;
        let mut out = vec![0.0; g.len()];
        for j in 0..=np {
            for i in 0..g.nq {
                let v = |jj: usize| self.at(i, jj);
                out[g.idx(i, j)] = if j == 0 {
                    (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * dp)
                } else if j == np {
                    (3.0 * v(np) - 4.0 * v(np - 1) + v(np - 2)) / (2.0 * dp)
                } else {
                    (v(j + 1) - v(j - 1)) / (2.0 * dp)
                };
            }
        }
        out
    }

    /// Centered periodic `h_q` at every node.
    pub fn h_q(&self) -> Vec<f64> {
        let g = &self.grid;
        let dq = g.dq();
        let mut out = vec![0.0; g.len()];
        for j in 0..=g.np {
            for i in 0..g.nq {
                out[g.idx(i, j)] =
                    (self.at(g.wrap(i, 1), j) - self.at(g.wrap(i, -1), j)) / (2.0 * dq);
            }
        }
        out
    }

    pub fn min_h_p(&self) -> f64 {
        self.h_p().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Rotates by whole grid cells so that node `shift` moves to index 0.
    pub fn rotated(&self, shift: usize) -> HeightField {
        let g = &self.grid;
        let mut values = vec![0.0; g.len()];
        for j in 0..=g.np {
            for i in 0..g.nq {
                values[g.idx(i, j)] = self.at((i + shift) % g.nq, j);
            }
        }
        HeightField {
            grid: g.clone(),
            values,
        }
    }

    /// CSV with header `q,p,h`, one node per line.
    pub fn to_csv(&self) -> String {
        let g = &self.grid;
        let mut s = String::with_capacity(g.len() * 72);
        s.push_str("q,p,h\n");
        for j in 0..=g.np {
            for i in 0..g.nq {
                let _ = writeln!(
                    s,
                    "{},{},{}",
                    fmt_f64(g.q_values[i]),
                    fmt_f64(g.p_values[j]),
                    fmt_f64(self.at(i, j))
                );
            }
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let rows = parse_csv(text, &["q", "p", "h"])?;
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 2,
                message: "no samples".into(),
            });
        }
        let first_p = rows[0][1];
        let nq = rows.iter().take_while(|r| r[1] == first_p).count();
        if nq == 0 || rows.len() % nq != 0 {
            return Err(Error::Parse {
                line: 0,
                message: format!("{} rows do not form a grid", rows.len()),
            });
        }
        let np = rows.len() / nq - 1;
        let grid = make_grid(nq, np, first_p)?;
        let values = rows.iter().map(|r| r[2]).collect();
        HeightField::new(grid, values)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        HeightField::from_csv(&std::fs::read_to_string(path)?)
    }
}

/// Parses a numeric CSV with the given header.
pub(crate) fn parse_csv(text: &str, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines().enumerate();
    let Some((_, head)) = lines.next() else {
        return Err(Error::Parse {
            line: 1,
            message: "missing header".into(),
        });
    };
    let cols: Vec<&str> = head.split(',').map(str::trim).collect();
    if cols != header {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`, found `{head}`", header.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let vals: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match vals {
            Ok(v) if v.len() == header.len() => rows.push(v),
            _ => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("malformed row `{line}`"),
                })
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn csv_round_trip_bit_exact(seed in proptest::collection::vec(-1e3f64..1e3, 8 * 5)) {
            let grid = make_grid(8, 4, -1.7).unwrap();
            let f = HeightField::new(grid, seed).unwrap();
            let back = HeightField::from_csv(&f.to_csv()).unwrap();
            prop_assert_eq!(f.grid, back.grid);
            for (a, b) in f.values.iter().zip(&back.values) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn derivatives_of_quadratic_are_exact() {
        let grid = make_grid(16, 8, -2.0).unwrap();
        let f = HeightField::from_fn(grid, |_, p| (p + 2.0) * (3.0 + 0.5 * p));
        let hp = f.h_p();
        for j in 0..=8 {
            let p = f.grid.p_values[j];
            assert!((hp[f.grid.idx(3, j)] - (3.0 + 0.5 * p + 0.5 * (p + 2.0))).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_and_amplitude() {
        let grid = make_grid(8, 4, -1.0).unwrap();
        let f = HeightField::from_fn(grid, |q, p| (p + 1.0) * (2.0 + q.cos()));
        assert!((f.amplitude() - 2.0).abs() < 1e-14);
        let r = f.rotated(3);
        assert_eq!(r.at(0, 4), f.at(3, 4));
        assert_eq!(r.at(5, 4), f.at(0, 4));
    }
}
