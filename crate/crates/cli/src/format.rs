//! Number formatting and file emission.

use std::fs;
use std::path::Path;

use crate::error::{CliError, CliResult};

/// Formats with 12 significant digits, plain notation for exponents in
/// `[-5, 12)` and scientific otherwise, trailing zeros removed.
///
/// Parsing the output and formatting again gives the same string.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let fixed = format!("{:.*}", (11 - exp) as usize, v);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn fmt_bool(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_io(path, e))?;
    w.write_record(header).map_err(|e| csv_io(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(CliError::io(path))
}

fn csv_io(path: &Path, e: csv::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    }
}

/// Writes `key: value` lines.
pub fn write_report(path: &Path, entries: &[(&str, String)]) -> CliResult<()> {
    let mut text = String::new();
    for (k, v) in entries {
        text.push_str(k);
        text.push_str(": ");
        text.push_str(v);
        text.push('\n');
    }
    fs::write(path, text).map_err(CliError::io(path))
}
