//! File input, CSV output, and the run manifest.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Reads a one-number-per-line sample file. Blank lines and `#` comments
/// (whole-line or trailing) are ignored.
pub fn read_sample(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            CliError::usage(format!(
                "{}:{}: not a number: {line:?}",
                path.display(),
                lineno + 1
            ))
        })?;
        values.push(v);
    }
    Ok(values)
}

/// Reads a combined two-column CSV `value,group` with group 1 or 2,
/// returning the two samples. An optional literal `value,group` header and
/// `#` comments are skipped.
pub fn read_combined_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut y1 = Vec::new();
    let mut y2 = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || (lineno == 0 && line.eq_ignore_ascii_case("value,group")) {
            continue;
        }
        let bad = || {
            CliError::usage(format!(
                "{}:{}: expected `value,group` with group 1 or 2, got {line:?}",
                path.display(),
                lineno + 1
            ))
        };
        let (value, group) = line.split_once(',').ok_or_else(bad)?;
        let v: f64 = value.trim().parse().map_err(|_| bad())?;
        match group.trim() {
            "1" => y1.push(v),
            "2" => y2.push(v),
            _ => return Err(bad()),
        }
    }
    Ok((y1, y2))
}

/// Formats a float with six significant digits for console summaries.
pub fn sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    if !(-4..6).contains(&magnitude) {
        return format!("{v:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

/// A CSV table with full round-trip float formatting.
pub struct CsvTable {
    text: String,
}

impl CsvTable {
    pub fn new(header: &str) -> Self {
        Self {
            text: format!("{header}\n"),
        }
    }

    pub fn row(&mut self, cells: &[CsvCell]) {
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match cell {
                CsvCell::Int(v) => {
                    let _ = write!(self.text, "{v}");
                }
                CsvCell::Float(v) => {
                    let _ = write!(self.text, "{v}");
                }
            }
        }
        self.text.push('\n');
    }

    pub fn write_to(&self, path: &Path) -> Result<(), CliError> {
        write_output(path, &self.text)
    }
}

pub enum CsvCell {
    Int(u64),
    Float(f64),
}

pub fn write_output(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                CliError::usage(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    fs::write(path, content)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to re-derive a run's outputs: resolved configuration,
/// seed, input digests, tool version.
#[derive(Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub created_unix: u64,
    pub subcommand: String,
    pub master_seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
}

impl RunManifest {
    pub fn new(subcommand: &str, master_seed: u64, config: serde_json::Value) -> Self {
        let created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            tool: "polyatree",
            version: env!("CARGO_PKG_VERSION"),
            created_unix,
            subcommand: subcommand.to_string(),
            master_seed,
            config,
            inputs: Vec::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = fs::read(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        let digest = Sha256::digest(&bytes);
        let mut hex = String::with_capacity(64);
        for byte in digest {
            let _ = write!(hex, "{byte:02x}");
        }
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex,
        });
        Ok(())
    }

    pub fn write_to(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join("manifest.json");
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::usage(format!("manifest serialization failed: {e}")))?;
        write_output(&path, &format!("{body}\n"))?;
        Ok(path)
    }
}
