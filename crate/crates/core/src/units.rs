// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

//! Unit-tagged quantities for configuration files and command-line overrides.
//!
//! Rates follow the angular-rate convention of [`crate::model`]: a rate written
//! as `3 MHz` is stored as `3.0e6` rad/s, identical to `3e6 rad/s`. Fields that
//! are genuinely ordinary frequencies (the sideband width) use `Hz` at face
//! value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    /// Angular rate, canonical unit `rad/s`.
    Rate,
    /// Ordinary frequency, canonical unit `Hz`.
    Frequency,
    Volume,
    Length,
    MagneticField,
    /// Atomic fraction (ppm/ppb accepted).
    Fraction,
    Dimensionless,
    Time,
    /// Used for physical constants; only the canonical unit string is accepted.
    Fixed(&'static str),
}

impl Dimension {
    pub fn canonical_unit(self) -> &'static str {
        match self {
            Dimension::Rate => "rad/s",
            Dimension::Frequency => "Hz",
            Dimension::Volume => "m^3",
            Dimension::Length => "m",
            Dimension::MagneticField => "T",
            Dimension::Fraction => "fraction",
            Dimension::Dimensionless => "1",
            Dimension::Time => "s",
            Dimension::Fixed(u) => u,
        }
    }

    /// Multiplier converting a value in `unit` to the canonical unit.
    pub fn scale(self, unit: &str) -> Result<f64> {
        let u = unit.trim();
        let s = match self {
            Dimension::Rate => match u {
                "rad/s" | "s^-1" | "1/s" => 1.0,
                "krad/s" | "kHz" => 1e3,
                "Mrad/s" | "MHz" => 1e6,
                "Grad/s" | "GHz" => 1e9,
                "Trad/s" | "THz" => 1e12,
                _ => return Err(unknown(u, self)),
            },
            Dimension::Frequency => match u {
                "Hz" => 1.0,
                "kHz" => 1e3,
                "MHz" => 1e6,
                "GHz" => 1e9,
                "THz" => 1e12,
                _ => return Err(unknown(u, self)),
            },
            Dimension::Volume => match u {
                "m^3" | "m3" => 1.0,
                "cm^3" | "cm3" => 1e-6,
                "mm^3" | "mm3" => 1e-9,
                "um^3" | "um3" | "μm^3" => 1e-18,
                _ => return Err(unknown(u, self)),
            },
            Dimension::Length => match u {
                "m" => 1.0,
                "mm" => 1e-3,
                "um" | "μm" => 1e-6,
                "nm" => 1e-9,
                _ => return Err(unknown(u, self)),
            },
            Dimension::MagneticField => match u {
                "T" => 1.0,
                "mT" => 1e-3,
                "uT" | "μT" => 1e-6,
                "nT" => 1e-9,
                "pT" => 1e-12,
                "fT" => 1e-15,
                _ => return Err(unknown(u, self)),
            },
            Dimension::Fraction => match u {
                "fraction" | "1" | "" => 1.0,
                "%" => 1e-2,
                "ppm" => 1e-6,
                "ppb" => 1e-9,
                _ => return Err(unknown(u, self)),
            },
            Dimension::Dimensionless => match u {
                "1" | "" => 1.0,
                _ => return Err(unknown(u, self)),
            },
            Dimension::Time => match u {
                "s" => 1.0,
                "ms" => 1e-3,
                "us" | "μs" => 1e-6,
                "ns" => 1e-9,
                _ => return Err(unknown(u, self)),
            },
            Dimension::Fixed(canonical) => {
                if u == canonical {
                    1.0
                } else {
                    return Err(unknown(u, self));
                }
            }
        };
        Ok(s)
    }
}

fn unknown(unit: &str, dim: Dimension) -> Error {
    Error::Unit(format!(
        "unit `{unit}` is not valid here (canonical unit `{}`)",
        dim.canonical_unit()
    ))
}

/// A number with an explicit unit string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: String,
}

impl Quantity {
    pub fn new(value: f64, unit: impl Into<String>) -> Self {
        Self {
            value,
            unit: unit.into(),
        }
    }

    pub fn canonical(value: f64, dim: Dimension) -> Self {
        Self::new(value, dim.canonical_unit())
    }

    /// Value in the canonical unit of `dim`; an empty unit means canonical.
    pub fn to_canonical(&self, dim: Dimension) -> Result<f64> {
        if self.unit.trim().is_empty() {
            return Ok(self.value);
        }
        Ok(self.value * dim.scale(&self.unit)?)
    }

    /// Parses `"3.67 MHz"`, `"3.67e6 rad/s"` or a bare number (canonical unit).
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let split = t
            .char_indices()
            .find(|(i, c)| {
                !(c.is_ascii_digit()
                    || *c == '.'
                    || *c == '+'
                    || *c == '-'
                    || ((*c == 'e' || *c == 'E') && looks_like_exponent(t, *i)))
            })
            .map(|(i, _)| i)
            .unwrap_or(t.len());
        let (num, unit) = t.split_at(split);
        let value: f64 = num
            .trim()
            .parse()
            .map_err(|_| Error::Unit(format!("cannot parse a number from `{text}`")))?;
        Ok(Self::new(value, unit.trim()))
    }
}

fn looks_like_exponent(s: &str, i: usize) -> bool {
    let bytes = s.as_bytes();
    let prev_digit = i > 0 && (bytes[i - 1].is_ascii_digit() || bytes[i - 1] == b'.');
    let next = bytes.get(i + 1).copied();
    prev_digit && matches!(next, Some(b'0'..=b'9' | b'+' | b'-'))
}
