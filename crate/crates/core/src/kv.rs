//! Flat `key = value` text files with `#` comments.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// One parsed assignment together with its 1-based line number.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Splits text into entries. Blank lines and `#` comments are skipped; a `#`
/// after a value starts a trailing comment.
pub fn parse(text: &str) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Parse {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty key".into(),
            });
        }
        out.push(Entry {
            line,
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(out)
}

/// Formats a float with 17 significant digits so it round-trips exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_f64(entry: &Entry) -> Result<f64> {
    entry.value.parse::<f64>().map_err(|_| Error::Parse {
        line: entry.line,
        message: format!("`{}`: `{}` is not a number", entry.key, entry.value),
    })
}

pub fn parse_usize(entry: &Entry) -> Result<usize> {
    entry.value.parse::<usize>().map_err(|_| Error::Parse {
        line: entry.line,
        message: format!("`{}`: `{}` is not a nonnegative integer", entry.key, entry.value),
    })
}

/// Renders ordered pairs as `key = value` lines.
pub fn render<I, K, V>(pairs: I) -> String
where
    I: IntoIterator<Item = (K, V)>,
    K: std::fmt::Display,
    V: std::fmt::Display,
{
    let mut s = String::new();
    for (k, v) in pairs {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blank_lines() {
        let e = parse("# header\n\na = 1.5 # trailing\n b=2\n").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].key, "a");
        assert_eq!(e[0].value, "1.5");
        assert_eq!(e[0].line, 3);
        assert_eq!(e[1].line, 4);
    }

    #[test]
    fn missing_equals_is_error() {
        assert!(matches!(parse("a 1").unwrap_err(), Error::Parse { line: 1, .. }));
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -2.0 / 3.0, 1e-300, 6.02e23, 0.0, -0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
