use std::io::Write;

use anyhow::Result;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cli::Format;

/// Header information written before every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub command: String,
}

/// A command result in both renderings.
pub struct Artifact {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub json: Value,
}

impl Artifact {
    pub fn new(columns: Vec<&'static str>, json: Value) -> Self {
        Artifact { columns, rows: Vec::new(), json }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Two-decimal view used for comparisons with published tables.
pub fn dp2(x: f64) -> String {
    format!("{:.2}", jps_core::efficiency::round2(x))
}

pub fn render(meta: &Meta, art: &Artifact, format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "# {} {} seed={} command={:?}", meta.tool, meta.version, meta.seed, meta.command)?;
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&art.columns)?;
            for r in &art.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let doc = json!({ "meta": meta, "data": art.json });
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)?;
        }
    }
    Ok(())
}
