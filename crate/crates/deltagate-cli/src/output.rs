//! Table emission: CSV files with a JSON sidecar, or a single self-contained
//! JSON document.  Numeric cells are printed with 17 significant digits so a
//! reloaded table reproduces the original f64 values exactly.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde_json::json;

use crate::config::ScenarioConfig;

/// Sidecar/table schema version; bump on any layout change.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// One CSV per table plus a `<command>.meta.json` sidecar.
    Csv,
    /// A single `<command>.json` holding tables and metadata together.
    Json,
}

/// A table cell: numbers keep full precision in both formats, labels stay
/// plain strings.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // 16 fractional digits in scientific notation = 17 significant
            // digits: enough to round-trip any f64 exactly.
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Column {
    pub name: &'static str,
    /// Which layer produced the numbers: "grid", "analytic", "expansion",
    /// "oracle", "interferometer" or "classifier".
    pub provenance: &'static str,
}

impl Column {
    pub fn new(name: &'static str, provenance: &'static str) -> Self {
        Self { name, provenance }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    /// File stem; `.csv` is appended in CSV mode.
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn push_nums(&mut self, row: Vec<f64>) {
        self.rows.push(row.into_iter().map(Cell::Num).collect());
    }
}

/// Everything one command run emits: tables plus the provenance metadata
/// that makes the run reproducible from its outputs alone.
#[derive(Debug)]
pub struct RunOutput {
    pub command: &'static str,
    pub config: ScenarioConfig,
    pub warnings: Vec<String>,
    /// Command-specific summary (verdicts, slopes, deviations).
    pub results: serde_json::Value,
    pub tables: Vec<Table>,
}

impl RunOutput {
    /// Write all artifacts into `out_dir`, returning the paths written.
    pub fn write(&self, out_dir: &Path, format: Format) -> anyhow::Result<Vec<PathBuf>> {
        fs::create_dir_all(out_dir)
            .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
        match format {
            Format::Csv => self.write_csv(out_dir),
            Format::Json => self.write_json(out_dir),
        }
    }

    fn table_meta(&self, with_rows: bool) -> Vec<serde_json::Value> {
        self.tables
            .iter()
            .map(|t| {
                let columns: Vec<_> = t
                    .columns
                    .iter()
                    .map(|c| json!({ "name": c.name, "provenance": c.provenance }))
                    .collect();
                let mut entry = json!({
                    "name": t.name,
                    "columns": columns,
                    "row_count": t.rows.len(),
                });
                if with_rows {
                    let rows: Vec<_> = t
                        .rows
                        .iter()
                        .map(|row| {
                            serde_json::Value::Array(row.iter().map(Cell::json).collect())
                        })
                        .collect();
                    entry["rows"] = serde_json::Value::Array(rows);
                } else {
                    entry["file"] = json!(format!("{}.csv", t.name));
                }
                entry
            })
            .collect()
    }

    fn document(&self, with_rows: bool) -> serde_json::Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": self.config,
            "warnings": self.warnings,
            "results": self.results,
            "tables": self.table_meta(with_rows),
        })
    }

    fn write_csv(&self, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for t in &self.tables {
            let path = out_dir.join(format!("{}.csv", t.name));
            let mut w = csv::Writer::from_writer(
                File::create(&path)
                    .with_context(|| format!("cannot create {}", path.display()))?,
            );
            w.write_record(t.columns.iter().map(|c| c.name))?;
            for row in &t.rows {
                w.write_record(row.iter().map(Cell::csv))?;
            }
            w.flush()?;
            written.push(path);
        }
        let meta = out_dir.join(format!("{}.meta.json", self.command));
        write_pretty_json(&meta, &self.document(false))?;
        written.push(meta);
        Ok(written)
    }

    fn write_json(&self, out_dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
        let path = out_dir.join(format!("{}.json", self.command));
        write_pretty_json(&path, &self.document(true))?;
        Ok(vec![path])
    }
}

fn write_pretty_json(path: &Path, doc: &serde_json::Value) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
