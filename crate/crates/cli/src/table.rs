// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

//! Tabular output with unit-annotated columns and a provenance block.
//!
//! CSV layout: provenance as leading `# key: value` lines, one header row of
//! `name [unit]` cells, then data rows. Missing cells are empty. Numbers use
//! Rust's shortest round-trip exponent form, so reading a table back yields
//! bit-identical values.

use std::fmt::Write as _;

use ltm_core::params::ParamPath;
use ltm_core::{ModelConfig, OrientationMode};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    pub fn new(name: impl Into<String>, unit: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }

    fn header(&self) -> String {
        format!("{} [{}]", self.name, self.unit)
    }

    fn parse_header(cell: &str) -> Result<Self> {
        let cell = cell.trim();
        let open = cell
            .rfind(" [")
            .filter(|_| cell.ends_with(']'))
            .ok_or_else(|| parse_error(format!("column `{cell}` has no unit annotation")))?;
        Ok(Self::new(&cell[..open], &cell[open + 2..cell.len() - 1]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub table: String,
    pub config_hash: String,
    pub preset: String,
    pub version: String,
    /// Free-form `key: value` notes (curve parameters, summary numbers).
    pub notes: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(table: impl Into<String>, cfg: &ModelConfig, preset: &str) -> Self {
        Self {
            table: table.into(),
            config_hash: config_hash(cfg),
            preset: preset.to_string(),
            version: VERSION.to_string(),
            notes: Vec::new(),
        }
    }

    pub fn note(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.notes.push((key.into(), value.to_string()));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub provenance: Provenance,
}

fn parse_error(message: String) -> CliError {
    CliError::Parse {
        what: "table".into(),
        message,
    }
}

/// SHA-256 over every stored physical parameter (exact bit patterns) and the
/// orientation mode.
pub fn config_hash(cfg: &ModelConfig) -> String {
    let mut h = Sha256::new();
    for p in ParamPath::STORED {
        h.update(p.path().as_bytes());
        h.update(p.get(cfg).to_bits().to_le_bytes());
    }
    let mode: &[u8] = match cfg.orientation.mode {
        OrientationMode::SingleOrientation => b"single",
        OrientationMode::FourOrientation => b"four",
    };
    h.update(mode);
    h.finalize()
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

impl OutputTable {
    pub fn new(columns: Vec<Column>, provenance: Provenance) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            provenance,
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width differs from header"
        );
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        let p = &self.provenance;
        let _ = writeln!(out, "# table: {}", p.table);
        let _ = writeln!(out, "# config_hash: {}", p.config_hash);
        let _ = writeln!(out, "# preset: {}", p.preset);
        let _ = writeln!(out, "# version: {}", p.version);
        for (k, v) in &p.notes {
            let _ = writeln!(out, "# note {k}: {v}");
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<String> = self.columns.iter().map(Column::header).collect();
        w.write_record(&header)
            .map_err(|e| parse_error(e.to_string()))?;
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| c.map(|v| format!("{v:e}")).unwrap_or_default())
                .collect();
            w.write_record(&cells)
                .map_err(|e| parse_error(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| parse_error(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut table = String::new();
        let mut hash = String::new();
        let mut preset = String::new();
        let mut version = String::new();
        let mut notes = Vec::new();
        let mut body = String::new();
        for line in text.lines() {
            if let Some(meta) = line.strip_prefix("# ") {
                let (k, v) = meta
                    .split_once(": ")
                    .ok_or_else(|| parse_error(format!("bad provenance line `{line}`")))?;
                match k {
                    "table" => table = v.to_string(),
                    "config_hash" => hash = v.to_string(),
                    "preset" => preset = v.to_string(),
                    "version" => version = v.to_string(),
                    _ => match k.strip_prefix("note ") {
                        Some(key) => notes.push((key.to_string(), v.to_string())),
                        None => return Err(parse_error(format!("unknown provenance key `{k}`"))),
                    },
                }
            } else {
                body.push_str(line);
                body.push('\n');
            }
        }
        let mut r = csv::ReaderBuilder::new().from_reader(body.as_bytes());
        let columns = r
            .headers()
            .map_err(|e| parse_error(e.to_string()))?
            .iter()
            .map(Column::parse_header)
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| parse_error(e.to_string()))?;
            let row = rec
                .iter()
                .map(|c| {
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        c.parse::<f64>()
                            .map(Some)
                            .map_err(|_| parse_error(format!("bad number `{c}`")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != columns.len() {
                return Err(parse_error("ragged row".into()));
            }
            rows.push(row);
        }
        Ok(Self {
            columns,
            rows,
            provenance: Provenance {
                table,
                config_hash: hash,
                preset,
                version,
                notes,
            },
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| parse_error(e.to_string()))
    }
}
