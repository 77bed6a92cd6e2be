//! On-disk formats. Every file starts with a `<kind> <major>.<minor>`
//! version line; readers reject unknown majors. Reals are written in
//! scientific notation with 17 significant digits so that text round-trips
//! are bit-exact.

mod dataset;
mod manifest;
mod plan;
mod summary;
mod tables;
mod truth;

use std::path::Path;

use crate::error::{Error, Result};

pub use dataset::{load_dataset, parse_dataset, save_dataset};
pub use manifest::{sha256_file, FileDigest, RunManifest};
pub use plan::{load_plan, save_plan};
pub use summary::{load_summary, save_combined, save_summary, SummaryRecord};
pub use tables::{benchmark_table, dendrogram_text, metrics_table, screen_table_text};
pub use truth::{load_truth, save_truth};

pub const FORMAT_MAJOR: u32 = 1;
pub const FORMAT_MINOR: u32 = 0;

/// Formats a real with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn version_line(kind: &str) -> String {
    format!("{kind} {FORMAT_MAJOR}.{FORMAT_MINOR}")
}

pub(crate) fn check_version(line: Option<&str>, kind: &str, path: &Path) -> Result<()> {
    let line = line.ok_or_else(|| Error::EmptyInput(path.display().to_string()))?;
    let rest = line.strip_prefix(kind).and_then(|r| r.strip_prefix(' ')).ok_or_else(|| {
        Error::Format {
            path: path.to_path_buf(),
            message: format!("expected a {kind} version line, found {line:?}"),
        }
    })?;
    let major = rest.split('.').next().and_then(|m| m.trim().parse::<u32>().ok());
    match major {
        Some(FORMAT_MAJOR) => Ok(()),
        _ => Err(Error::VersionMismatch {
            found: rest.to_string(),
            expected: FORMAT_MAJOR,
        }),
    }
}

pub(crate) fn parse_real(s: &str, path: &Path, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Format {
        path: path.to_path_buf(),
        message: format!("{what}: {s:?} is not a number"),
    })
}

pub(crate) fn join_reals(values: &[f64]) -> String {
    values.iter().map(|v| fmt_real(*v)).collect::<Vec<_>>().join(",")
}

/// Line reader over a text file that reports truncation and malformed
/// `key: value` headers against the file path.
pub(crate) struct Lines<'a> {
    path: &'a Path,
    lines: std::str::Lines<'a>,
}

impl<'a> Lines<'a> {
    pub fn new(path: &'a Path, text: &'a str) -> Self {
        Lines { path, lines: text.lines() }
    }

    pub fn next_line(&mut self) -> Result<&'a str> {
        self.lines.next().ok_or_else(|| Error::Truncated(self.path.to_path_buf()))
    }

    pub fn first(&mut self) -> Option<&'a str> {
        self.lines.next()
    }

    pub fn field(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next_line()?;
        line.strip_prefix(key)
            .and_then(|r| r.strip_prefix(':'))
            .map(str::trim)
            .ok_or_else(|| self.error(format!("expected field {key:?}, found {line:?}")))
    }

    pub fn usize_field(&mut self, key: &str) -> Result<usize> {
        let v = self.field(key)?;
        v.parse().map_err(|_| self.error(format!("{key}: {v:?} is not an integer")))
    }

    pub fn reals_field(&mut self, key: &str) -> Result<Vec<f64>> {
        let v = self.field(key)?;
        self.reals(v, key)
    }

    pub fn reals(&self, line: &str, what: &str) -> Result<Vec<f64>> {
        if line.is_empty() {
            return Ok(Vec::new());
        }
        line.split(',').map(|s| parse_real(s, self.path, what)).collect()
    }

    pub fn names_field(&mut self, key: &str) -> Result<Vec<String>> {
        Ok(split_names(self.field(key)?))
    }

    pub fn expect(&mut self, literal: &str) -> Result<()> {
        let line = self.next_line()?;
        if line == literal {
            Ok(())
        } else {
            Err(self.error(format!("expected {literal:?}, found {line:?}")))
        }
    }

    pub fn error(&self, message: String) -> Error {
        Error::Format { path: self.path.to_path_buf(), message }
    }
}

pub(crate) fn split_names(s: &str) -> Vec<String> {
    if s.is_empty() {
        Vec::new()
    } else {
        s.split(',').map(str::to_string).collect()
    }
}

/// Rejects names that would break the comma-separated header lists.
pub(crate) fn check_names(names: &[String]) -> Result<()> {
    for n in names {
        if n.is_empty() || n.contains([',', '\n', '\r']) {
            return Err(Error::InvalidParameter(format!(
                "name {n:?} must be non-empty and free of commas and newlines"
            )));
        }
    }
    Ok(())
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::from(e).context(format!("reading {}", path.display())))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::from(e).context(format!("writing {}", path.display())))
}
