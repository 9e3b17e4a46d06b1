use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::{CliError, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Top-level JSON layout of every run.
#[derive(Serialize)]
pub struct Document<'a, R: Serialize, S: Serialize> {
    pub config: &'a RunConfig,
    pub results: R,
    pub summary: S,
    pub version: &'static str,
}

pub fn document<'a, R: Serialize, S: Serialize>(config: &'a RunConfig, results: R, summary: S) -> Document<'a, R, S> {
    Document {
        config,
        results,
        summary,
        version: VERSION,
    }
}

fn io_err(path: Option<&Path>, e: impl std::fmt::Display) -> CliError {
    match path {
        Some(p) => CliError::Io(format!("{}: {e}", p.display())),
        None => CliError::Io(e.to_string()),
    }
}

/// Opens `path`, or stdout when `None`.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => Ok(Box::new(File::create(p).map_err(|e| io_err(Some(p), e))?)),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

pub fn json_string<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| io_err(None, e))
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut w = sink(path)?;
    writeln!(w, "{}", json_string(value)?).map_err(|e| io_err(path, e))
}

pub fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    let mut w = sink(path)?;
    w.write_all(text.as_bytes()).map_err(|e| io_err(path, e))
}

pub fn write_csv<T: Serialize>(path: Option<&Path>, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink(path)?);
    for row in rows {
        w.serialize(row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Left-aligned columns separated by two spaces.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<String>| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i + 1 == cells.len() {
                s.push_str(cell);
            } else {
                s.push_str(&format!("{cell:<w$}  ", w = *w));
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(header.iter().map(|h| h.to_string()).collect());
    for row in rows {
        out.push_str(&line(row.clone()));
    }
    out
}

pub fn sci(v: f64) -> String {
    format!("{v:.3e}")
}

/// Ten significant digits, switching to exponent form outside [1e-4, 1e6).
pub fn num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-4..1e6).contains(&a) {
        let digits = (9 - a.log10().floor() as i32).max(0) as usize;
        let s = format!("{v:.digits$}");
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.') } else { &s };
        s.to_string()
    } else {
        format!("{v:.9e}")
    }
}
