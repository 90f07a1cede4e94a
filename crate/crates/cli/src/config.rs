// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

//! Configuration files and `--set` overrides.
//!
//! A file names an optional base preset and then overrides individual
//! parameters by section:
//!
//! ```toml
//! preset = "baseline"
//!
//! [drive]
//! omega = { value = 3.67, unit = "MHz" }
//! delta = "100 MHz"
//!
//! [orientation]
//! mode = "four_orientation"
//! ```
//!
//! Values are `{ value, unit }` tables, strings such as `"5.7 ppb"`, or bare
//! numbers in the canonical unit. The JSON form has the same structure.

use std::path::Path;

use ltm_core::params::{apply_assignment, parse_orientation_mode, ParamPath};
use ltm_core::units::Quantity;
use ltm_core::{ModelConfig, OrientationMode, Preset};
use serde_json::{json, Map, Value};

use crate::error::{CliError, Result};

/// A resolved configuration with the preset it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub config: ModelConfig,
    pub preset: Option<Preset>,
}

impl ResolvedConfig {
    pub fn from_preset(p: Preset) -> Self {
        Self {
            config: p.config(),
            preset: Some(p),
        }
    }

    pub fn preset_name(&self) -> &'static str {
        self.preset.map(Preset::name).unwrap_or("custom")
    }
}

fn parse_error(what: &str, message: impl Into<String>) -> CliError {
    CliError::Parse {
        what: what.to_string(),
        message: message.into(),
    }
}

/// Reads a TOML (`.toml`) or JSON (any other extension) configuration file.
pub fn load_config_file(path: &Path, base: Option<Preset>) -> Result<ResolvedConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let is_toml = path.extension().is_some_and(|e| e == "toml");
    let doc: Value = if is_toml {
        let t: toml::Value = toml::from_str(&text)
            .map_err(|e| parse_error(&path.display().to_string(), e.to_string()))?;
        serde_json::to_value(t).map_err(|e| parse_error("configuration", e.to_string()))?
    } else {
        serde_json::from_str(&text)
            .map_err(|e| parse_error(&path.display().to_string(), e.to_string()))?
    };
    config_from_document(&doc, base)
}

/// Builds a configuration from a parsed document.
pub fn config_from_document(doc: &Value, base: Option<Preset>) -> Result<ResolvedConfig> {
    let root = doc
        .as_object()
        .ok_or_else(|| parse_error("configuration", "top level must be a table"))?;
    let preset = match root.get("preset") {
        Some(Value::String(s)) => Some(s.parse::<Preset>()?),
        Some(_) => return Err(parse_error("preset", "must be a string")),
        None => base,
    };
    let mut cfg = preset.unwrap_or(Preset::Baseline).config();
    for (key, value) in root {
        match (key.as_str(), value) {
            ("preset", _) => {}
            ("g_override", v) => set_value(&mut cfg, "g_override", v)?,
            (section, Value::Object(entries)) => {
                for (name, v) in entries {
                    let path = format!("{section}.{name}");
                    if path == "orientation.mode" {
                        let mode = v
                            .as_str()
                            .ok_or_else(|| parse_error(&path, "must be a string"))?;
                        cfg.orientation.mode = parse_orientation_mode(mode)?;
                    } else {
                        set_value(&mut cfg, &path, v)?;
                    }
                }
            }
            (other, _) => {
                return Err(parse_error(other, "expected a section table"));
            }
        }
    }
    cfg.validate()?;
    Ok(ResolvedConfig {
        config: cfg,
        preset,
    })
}

fn set_value(cfg: &mut ModelConfig, path: &str, v: &Value) -> Result<()> {
    let p: ParamPath = path.parse()?;
    let q = match v {
        Value::Number(n) => Quantity::new(n.as_f64().unwrap_or(f64::NAN), ""),
        Value::String(s) if p == ParamPath::GOverride && s.eq_ignore_ascii_case("none") => {
            cfg.g_override = None;
            return Ok(());
        }
        Value::String(s) => Quantity::parse(s)?,
        Value::Object(_) => serde_json::from_value::<Quantity>(v.clone())
            .map_err(|e| parse_error(path, e.to_string()))?,
        Value::Null if p == ParamPath::GOverride => {
            cfg.g_override = None;
            return Ok(());
        }
        _ => {
            return Err(parse_error(
                path,
                "expected a number, a string or {value, unit}",
            ))
        }
    };
    p.set_quantity(cfg, &q)?;
    Ok(())
}

/// Applies one `--set key=value` override.
pub fn apply_override(cfg: &mut ModelConfig, assignment: &str) -> Result<()> {
    if let Some((k, v)) = assignment.split_once('=') {
        if k.trim() == "orientation.mode" {
            cfg.orientation.mode = parse_orientation_mode(v)?;
            return Ok(());
        }
    }
    apply_assignment(cfg, assignment)?;
    Ok(())
}

/// Every stored parameter as a `{ value, unit }` document in canonical units.
pub fn config_document(cfg: &ModelConfig, preset: Option<Preset>) -> Value {
    let mut root = Map::new();
    if let Some(p) = preset {
        root.insert("preset".into(), json!(p.name()));
    }
    for p in ParamPath::STORED {
        let v = p.get(cfg);
        let entry = if p == ParamPath::GOverride && v.is_nan() {
            json!("none")
        } else {
            json!({ "value": v, "unit": p.dimension().canonical_unit() })
        };
        match p.path().split_once('.') {
            Some((section, name)) => {
                let table = root
                    .entry(section.to_string())
                    .or_insert_with(|| Value::Object(Map::new()));
                table
                    .as_object_mut()
                    .expect("sections are tables")
                    .insert(name.into(), entry);
            }
            None => {
                root.insert(p.path().into(), entry);
            }
        }
    }
    let mode = match cfg.orientation.mode {
        OrientationMode::SingleOrientation => "single_orientation",
        OrientationMode::FourOrientation => "four_orientation",
    };
    root["orientation"]
        .as_object_mut()
        .expect("orientation section exists")
        .insert("mode".into(), json!(mode));
    Value::Object(root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ltm_core::model::preset;

    #[test]
    fn document_round_trip() {
        let mut cfg = preset(Preset::HighSensitivity);
        cfg.orientation.mode = OrientationMode::FourOrientation;
        cfg.g_override = Some(1e9);
        let doc = config_document(&cfg, Some(Preset::HighSensitivity));
        let back = config_from_document(&doc, None).unwrap();
        assert_eq!(back.config, cfg);
        assert_eq!(back.preset, Some(Preset::HighSensitivity));
    }

    #[test]
    fn toml_sections_with_units() {
        let text = r#"
            preset = "baseline"
            g_override = "308 MHz"
            [drive]
            omega = { value = 2.0, unit = "MHz" }
            delta = "100 MHz"
            lambda = 1.5e6
            [geometry]
            nv_concentration = { value = 16, unit = "ppm" }
        "#;
        let t: toml::Value = toml::from_str(text).unwrap();
        let doc = serde_json::to_value(t).unwrap();
        let r = config_from_document(&doc, None).unwrap();
        assert_eq!(r.config.drive.omega, 2e6);
        assert_eq!(r.config.drive.delta, 100e6);
        assert_eq!(r.config.drive.lambda45, 1.5e6);
        assert_eq!(r.config.g_override, Some(308e6));
        assert!((r.config.geometry.nv_concentration - 16e-6).abs() < 1e-18);
    }

    #[test]
    fn bad_documents_are_rejected() {
        let bad = [
            json!({"drive": {"omega": {"value": 1.0, "unit": "m^3"}}}),
            json!({"drive": {"warp": 1.0}}),
            json!({"preset": "nope"}),
            json!({"drive": 3}),
            json!({"rates": {"l23": -1.0}}),
        ];
        for doc in bad {
            assert!(config_from_document(&doc, None).is_err(), "{doc}");
        }
    }
}
