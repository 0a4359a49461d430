//! CSV and JSON writers.  Every file carries the config hash and the tool
//! version: CSV rows as trailing columns, JSON documents as top-level fields.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Stamp {
    pub config_hash: String,
    pub tool_version: &'static str,
}

impl Stamp {
    pub fn new(config_hash: &str) -> Self {
        Self {
            config_hash: config_hash.to_string(),
            tool_version: TOOL_VERSION,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        context: path.display().to_string(),
        source,
    }
}

/// Writes `rows` under `header` plus the two stamp columns.  Each row is a
/// list of already formatted fields.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>], stamp: &Stamp) -> Result<PathBuf, CliError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(BufWriter::new(file));
    let mut head: Vec<&str> = header.to_vec();
    head.extend(["config_hash", "tool_version"]);
    w.write_record(&head)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let mut rec = row.clone();
        rec.push(stamp.config_hash.clone());
        rec.push(stamp.tool_version.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(path.to_path_buf())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("output serialises");
    text.push('\n');
    let mut f = BufWriter::new(File::create(path).map_err(io_err(path))?);
    f.write_all(text.as_bytes()).map_err(io_err(path))?;
    f.flush().map_err(io_err(path))?;
    Ok(path.to_path_buf())
}

pub fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(io_err(path))
}

/// Shortest round-trip representation.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else {
        v.to_string()
    }
}

/// [`num`], empty for `None`.
pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}
