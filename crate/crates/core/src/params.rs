// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dot-path access to individual [`ModelConfig`] parameters.
//!
//! Used by configuration files, `--set` overrides, sweeps and the optimizer.
//! Values are always in canonical units (see [`Dimension::canonical_unit`]).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{b_field_to_detuning, detuning_to_b_field, ModelConfig, OrientationMode};
use crate::units::{Dimension, Quantity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamPath {
    Hbar,
    PlanckH,
    GFactor,
    BohrMagneton,
    SpeedOfLight,
    L21,
    L23,
    L31,
    L54,
    L56,
    L64,
    L57,
    L71,
    L74,
    L27,
    Gamma14,
    MediumVolume,
    CavityVolume,
    NvConcentration,
    NvFraction,
    VacuumWavelength,
    RefractiveIndex,
    SidebandWidth,
    Kappa,
    Omega,
    Delta,
    /// Field equivalent of the detuning; writes `drive.delta`.
    Field,
    /// Common pump rate; writes both Λ₁₂ and Λ₄₅.
    Lambda,
    Lambda12,
    Lambda45,
    AlignedFraction,
    OffAxisDetuning,
    GOverride,
}

impl ParamPath {
    /// Every path stored in a config file (derived paths such as `drive.field`
    /// and `drive.lambda` are excluded).
    pub const STORED: [ParamPath; 31] = [
        ParamPath::Hbar,
        ParamPath::PlanckH,
        ParamPath::GFactor,
        ParamPath::BohrMagneton,
        ParamPath::SpeedOfLight,
        ParamPath::L21,
        ParamPath::L23,
        ParamPath::L31,
        ParamPath::L54,
        ParamPath::L56,
        ParamPath::L64,
        ParamPath::L57,
        ParamPath::L71,
        ParamPath::L74,
        ParamPath::L27,
        ParamPath::Gamma14,
        ParamPath::MediumVolume,
        ParamPath::CavityVolume,
        ParamPath::NvConcentration,
        ParamPath::NvFraction,
        ParamPath::VacuumWavelength,
        ParamPath::RefractiveIndex,
        ParamPath::SidebandWidth,
        ParamPath::Kappa,
        ParamPath::Omega,
        ParamPath::Delta,
        ParamPath::Lambda12,
        ParamPath::Lambda45,
        ParamPath::AlignedFraction,
        ParamPath::OffAxisDetuning,
        ParamPath::GOverride,
    ];

    pub fn path(self) -> &'static str {
        use ParamPath::*;
        match self {
            Hbar => "constants.hbar",
            PlanckH => "constants.planck_h",
            GFactor => "constants.g_e",
            BohrMagneton => "constants.mu_b",
            SpeedOfLight => "constants.c",
            L21 => "rates.l21",
            L23 => "rates.l23",
            L31 => "rates.l31",
            L54 => "rates.l54",
            L56 => "rates.l56",
            L64 => "rates.l64",
            L57 => "rates.l57",
            L71 => "rates.l71",
            L74 => "rates.l74",
            L27 => "rates.l27",
            Gamma14 => "rates.gamma14",
            MediumVolume => "geometry.medium_volume",
            CavityVolume => "geometry.cavity_volume",
            NvConcentration => "geometry.nv_concentration",
            NvFraction => "geometry.nv_fraction",
            VacuumWavelength => "geometry.vacuum_wavelength",
            RefractiveIndex => "geometry.refractive_index",
            SidebandWidth => "geometry.sideband_width",
            Kappa => "geometry.kappa",
            Omega => "drive.omega",
            Delta => "drive.delta",
            Field => "drive.field",
            Lambda => "drive.lambda",
            Lambda12 => "drive.lambda12",
            Lambda45 => "drive.lambda45",
            AlignedFraction => "orientation.aligned_fraction",
            OffAxisDetuning => "orientation.off_axis_detuning",
            GOverride => "g_override",
        }
    }

    pub fn dimension(self) -> Dimension {
        use ParamPath::*;
        match self {
            Hbar | PlanckH => Dimension::Fixed("J s"),
            BohrMagneton => Dimension::Fixed("J/T"),
            SpeedOfLight => Dimension::Fixed("m/s"),
            GFactor | RefractiveIndex | NvFraction | AlignedFraction => Dimension::Dimensionless,
            L21 | L23 | L31 | L54 | L56 | L64 | L57 | L71 | L74 | L27 | Gamma14 | Kappa | Omega
            | Delta | Lambda | Lambda12 | Lambda45 | OffAxisDetuning | GOverride => Dimension::Rate,
            MediumVolume | CavityVolume => Dimension::Volume,
            NvConcentration => Dimension::Fraction,
            VacuumWavelength => Dimension::Length,
            SidebandWidth => Dimension::Frequency,
            Field => Dimension::MagneticField,
        }
    }

    /// Current value in canonical units. `g_override` reads as NaN when unset.
    pub fn get(self, cfg: &ModelConfig) -> f64 {
        use ParamPath::*;
        match self {
            Hbar => cfg.constants.hbar,
            PlanckH => cfg.constants.planck_h,
            GFactor => cfg.constants.g_e,
            BohrMagneton => cfg.constants.mu_b,
            SpeedOfLight => cfg.constants.c,
            L21 => cfg.rates.l21,
            L23 => cfg.rates.l23,
            L31 => cfg.rates.l31,
            L54 => cfg.rates.l54,
            L56 => cfg.rates.l56,
            L64 => cfg.rates.l64,
            L57 => cfg.rates.l57,
            L71 => cfg.rates.l71,
            L74 => cfg.rates.l74,
            L27 => cfg.rates.l27,
            Gamma14 => cfg.rates.gamma14,
            MediumVolume => cfg.geometry.medium_volume,
            CavityVolume => cfg.geometry.cavity_volume,
            NvConcentration => cfg.geometry.nv_concentration,
            NvFraction => cfg.geometry.nv_fraction,
            VacuumWavelength => cfg.geometry.vacuum_wavelength,
            RefractiveIndex => cfg.geometry.refractive_index,
            SidebandWidth => cfg.geometry.sideband_width,
            Kappa => cfg.geometry.kappa,
            Omega => cfg.drive.omega,
            Delta => cfg.drive.delta,
            Field => detuning_to_b_field(cfg.drive.delta, &cfg.constants),
            Lambda | Lambda12 => cfg.drive.lambda12,
            Lambda45 => cfg.drive.lambda45,
            AlignedFraction => cfg.orientation.aligned_fraction,
            OffAxisDetuning => cfg.orientation.off_axis_detuning,
            GOverride => cfg.g_override.unwrap_or(f64::NAN),
        }
    }

    /// Writes a canonical-unit value. Does not validate the resulting config.
    pub fn set(self, cfg: &mut ModelConfig, v: f64) {
        use ParamPath::*;
        match self {
            Hbar => cfg.constants.hbar = v,
            PlanckH => cfg.constants.planck_h = v,
            GFactor => cfg.constants.g_e = v,
            BohrMagneton => cfg.constants.mu_b = v,
            SpeedOfLight => cfg.constants.c = v,
            L21 => cfg.rates.l21 = v,
            L23 => cfg.rates.l23 = v,
            L31 => cfg.rates.l31 = v,
            L54 => cfg.rates.l54 = v,
            L56 => cfg.rates.l56 = v,
            L64 => cfg.rates.l64 = v,
            L57 => cfg.rates.l57 = v,
            L71 => cfg.rates.l71 = v,
            L74 => cfg.rates.l74 = v,
            L27 => cfg.rates.l27 = v,
            Gamma14 => cfg.rates.gamma14 = v,
            MediumVolume => cfg.geometry.medium_volume = v,
            CavityVolume => cfg.geometry.cavity_volume = v,
            NvConcentration => cfg.geometry.nv_concentration = v,
            NvFraction => cfg.geometry.nv_fraction = v,
            VacuumWavelength => cfg.geometry.vacuum_wavelength = v,
            RefractiveIndex => cfg.geometry.refractive_index = v,
            SidebandWidth => cfg.geometry.sideband_width = v,
            Kappa => cfg.geometry.kappa = v,
            Omega => cfg.drive.omega = v,
            Delta => cfg.drive.delta = v,
            Field => cfg.drive.delta = b_field_to_detuning(v, &cfg.constants),
            Lambda => cfg.drive = cfg.drive.with_pump(v),
            Lambda12 => cfg.drive.lambda12 = v,
            Lambda45 => cfg.drive.lambda45 = v,
            AlignedFraction => cfg.orientation.aligned_fraction = v,
            OffAxisDetuning => cfg.orientation.off_axis_detuning = v,
            GOverride => cfg.g_override = if v.is_nan() { None } else { Some(v) },
        }
    }

    /// Sets the value from a unit-tagged quantity. An empty unit means canonical.
    pub fn set_quantity(self, cfg: &mut ModelConfig, q: &Quantity) -> Result<()> {
        self.set(cfg, q.to_canonical(self.dimension())?);
        Ok(())
    }
}

impl fmt::Display for ParamPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.path())
    }
}

impl FromStr for ParamPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        let all = ParamPath::STORED
            .iter()
            .copied()
            .chain([ParamPath::Field, ParamPath::Lambda]);
        for p in all {
            if p.path() == key {
                return Ok(p);
            }
        }
        Err(Error::UnknownParameter(s.to_string()))
    }
}

/// Applies `path=value` with an optional unit, e.g. `drive.delta=100 MHz`.
pub fn apply_assignment(cfg: &mut ModelConfig, assignment: &str) -> Result<()> {
    let (path, value) = assignment
        .split_once('=')
        .ok_or_else(|| Error::InvalidConfig(format!("expected key=value, got `{assignment}`")))?;
    let path: ParamPath = path.parse()?;
    let value = value.trim();
    if path == ParamPath::GOverride && value.eq_ignore_ascii_case("none") {
        cfg.g_override = None;
        return Ok(());
    }
    path.set_quantity(cfg, &Quantity::parse(value)?)
}

/// Sets the orientation mode by name (`single_orientation` / `four_orientation`).
pub fn parse_orientation_mode(name: &str) -> Result<OrientationMode> {
    match name.trim().to_ascii_lowercase().replace('-', "_").as_str() {
        "single_orientation" | "single" => Ok(OrientationMode::SingleOrientation),
        "four_orientation" | "four" => Ok(OrientationMode::FourOrientation),
        other => Err(Error::InvalidConfig(format!(
            "unknown orientation mode `{other}`"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{preset, Preset};

    #[test]
    fn get_set_round_trip() {
        let base = preset(Preset::Baseline);
        for p in ParamPath::STORED {
            if p == ParamPath::GOverride {
                continue;
            }
            let mut cfg = base;
            let v = p.get(&cfg) * 1.5 + 1.0;
            p.set(&mut cfg, v);
            assert_eq!(p.get(&cfg), v, "{p}");
            assert_eq!(p.path().parse::<ParamPath>().unwrap(), p);
        }
    }

    #[test]
    fn assignments() {
        let mut cfg = preset(Preset::Baseline);
        apply_assignment(&mut cfg, "drive.delta=100 MHz").unwrap();
        assert_eq!(cfg.drive.delta, 100e6);
        apply_assignment(&mut cfg, "drive.lambda = 2e6").unwrap();
        assert_eq!(cfg.drive.lambda12, 2e6);
        assert_eq!(cfg.drive.lambda45, 2e6);
        apply_assignment(&mut cfg, "geometry.nv_concentration=16 ppm").unwrap();
        assert!((cfg.geometry.nv_concentration - 16e-6).abs() < 1e-20);
        apply_assignment(&mut cfg, "g_override=308 MHz").unwrap();
        assert_eq!(cfg.g_override, Some(308e6));
        apply_assignment(&mut cfg, "g_override=none").unwrap();
        assert_eq!(cfg.g_override, None);
        apply_assignment(&mut cfg, "drive.field=5.68 uT").unwrap();
        assert!((cfg.drive.delta - 1e6).abs() < 5e3);
        assert!(apply_assignment(&mut cfg, "drive.nope=1").is_err());
        assert!(apply_assignment(&mut cfg, "drive.delta").is_err());
        assert!(apply_assignment(&mut cfg, "drive.delta=1 mm^3").is_err());
    }
}
