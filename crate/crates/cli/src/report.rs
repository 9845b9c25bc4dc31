//! Report envelope, per-point tables and atomic output.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A per-point table; the first columns are always `re, im` (one pair per
/// coordinate in several variables).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    /// Header `re, im` (or `re_1, im_1, ...` for `dim > 1`) followed by
    /// `values`.
    pub fn with_point_columns(dim: usize, values: &[&str]) -> Self {
        let mut header = Vec::new();
        if dim == 1 {
            header.extend(["re".to_string(), "im".to_string()]);
        } else {
            for k in 1..=dim {
                header.push(format!("re_{k}"));
                header.push(format!("im_{k}"));
            }
        }
        header.extend(values.iter().map(|v| v.to_string()));
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, point: &[f64], values: &[f64]) {
        let mut row = point.to_vec();
        row.extend_from_slice(values);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:?}")))?;
        }
        Ok(w.into_inner().context("flushing CSV")?)
    }
}

#[derive(Debug, Serialize)]
pub struct Report<'a> {
    pub schema: u32,
    pub command: &'a str,
    pub options: Value,
    pub config_hash: String,
    pub tool_version: &'static str,
    pub result: Value,
    pub wall_clock_ms: u128,
}

impl Report<'_> {
    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(self)?;
        out.push(b'\n');
        Ok(out)
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write into {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
