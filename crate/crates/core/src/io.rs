//! Single-column series files.
//!
//! One numeric value per line, `.` as decimal point, optional header on the
//! first non-comment line, lines starting with `#` and blank lines ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub fn parse_series(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    let mut seen_first = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let first = !seen_first;
        seen_first = true;
        match line.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("non-finite value {v}"),
                })
            }
            Err(_) if first => {} // header
            Err(_) => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("not a number: '{line}'"),
                })
            }
        }
    }
    Ok(values)
}

pub fn read_series(path: &Path) -> Result<Vec<f64>> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_series(&text)
}

/// Header `x`, then one value per line in shortest round-trip form.
pub fn format_series(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 20 + 2);
    out.push_str("x\n");
    for v in values {
        writeln!(out, "{v}").unwrap();
    }
    out
}

pub fn write_series(path: &Path, values: &[f64]) -> Result<()> {
    fs::write(path, format_series(values))
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
