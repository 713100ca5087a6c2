//! CSV artifacts with `#` comment headers.
//!
//! The first line of every artifact is a timestamp comment; everything
//! after it depends only on the configuration and seeds.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const TIMESTAMP_PREFIX: &str = "# timestamp:";

pub struct Csv {
    path: PathBuf,
    comments: Vec<String>,
    header: String,
    rows: Vec<String>,
}

impl Csv {
    /// Starts an artifact with the timestamp, command and config echo.
    pub fn new(path: PathBuf, command: &str, config: &ExperimentConfig) -> Self {
        let mut comments = vec![timestamp_line(), format!("# command: {command}")];
        comments.extend(comment_lines(&config.echo()));
        Self { path, comments, header: String::new(), rows: Vec::new() }
    }

    /// A `# key: value` line; all of these precede the header.
    pub fn meta(&mut self, key: &str, value: impl Display) {
        self.comments.push(format!("# {key}: {value}"));
    }

    pub fn header(&mut self, columns: &[&str]) {
        self.header = columns.join(",");
    }

    pub fn row(&mut self, fields: &[String]) {
        self.rows.push(fields.join(","));
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn write(&self) -> Result<(), CliError> {
        let lines: Vec<String> = self.comments.iter().chain([&self.header]).chain(&self.rows).cloned().collect();
        write_lines(&self.path, &lines)
    }
}

pub fn timestamp_line() -> String {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    format!("{TIMESTAMP_PREFIX} {secs}")
}

pub fn comment_lines(lines: &[String]) -> Vec<String> {
    lines.iter().map(|l| format!("# config: {l}")).collect()
}

pub fn write_lines(path: &Path, lines: &[String]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut f = fs::File::create(path)?;
    for l in lines {
        writeln!(f, "{l}")?;
    }
    Ok(())
}

/// Shortest round-tripping decimal, in exponent form for very small or
/// very large magnitudes.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}
