//! Artifact writing: JSON documents and CSV tables, each carrying the
//! configuration that produced it, written via temp file + rename.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use lpharmonic_core::output::{csv_float, to_json_string};
use serde_json::{json, Value};
use tempfile::NamedTempFile;

use crate::config::{Format, RunConfig};

/// One CSV table; cells are already formatted.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

pub fn num(x: f64) -> String {
    csv_float(x)
}

/// Everything a subcommand produced.
pub struct Artifacts {
    pub command: &'static str,
    pub result: Value,
    pub table: Table,
    /// Exit status 2 when false.
    pub pass: bool,
    /// Printed instead of JSON on stdout when no output path or format is set.
    pub summary: Option<String>,
}

pub fn json_document(command: &str, config: &RunConfig, result: &Value) -> Result<String> {
    Ok(to_json_string(&json!({ "command": command, "config": config, "result": result }))?)
}

pub fn csv_document(command: &str, config: &RunConfig, table: &Table) -> Result<String> {
    let mut out = format!("# {command} config: {}\n", serde_json::to_string(config)?);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    out.push_str(std::str::from_utf8(&w.into_inner().context("flushing CSV")?)?);
    Ok(out)
}

pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Writes the main output (to `--out` or stdout) and the optional CSV file.
pub fn emit(config: &RunConfig, a: &Artifacts) -> Result<()> {
    let format = config.format.unwrap_or(Format::Json);
    let main = match format {
        Format::Json => json_document(a.command, config, &a.result)?,
        Format::Csv => csv_document(a.command, config, &a.table)?,
    };
    match &config.out {
        Some(path) => write_atomic(path, &main)?,
        None => {
            let text = match (&a.summary, config.format) {
                (Some(s), None) => s.clone(),
                _ => main,
            };
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    if let Some(path) = &config.csv {
        write_atomic(path, &csv_document(a.command, config, &a.table)?)?;
    }
    Ok(())
}
