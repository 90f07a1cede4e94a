// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

//! Device parameters, presets and derived constants.
//!
//! All rates are angular rates in rad/s. A value quoted as "18 MHz" is stored
//! as `18.0e6`; under this convention ħ/(g_e μ_B) = 5.68 μT per 10⁶ rad/s,
//! the cavity Q of the baseline device is 2πν₂₃/κ ≈ 8.9×10⁸ and the output
//! power lands on the mW scale.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number density of carbon atoms in diamond, m⁻³ (1.76×10²³ cm⁻³).
pub const CARBON_NUMBER_DENSITY: f64 = 1.76e29;

/// Fundamental constants used by the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Planck constant, J·s. Always `2π·hbar`.
    pub planck_h: f64,
    /// Electron Landé g-factor.
    pub g_e: f64,
    /// Bohr magneton, J/T.
    pub mu_b: f64,
    /// Speed of light, m/s.
    pub c: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        let hbar = 1.054_571_817e-34;
        Self {
            hbar,
            planck_h: TAU * hbar,
            g_e: 2.0023,
            mu_b: 9.274_010_078_3e-24,
            c: 299_792_458.0,
        }
    }
}

/// Incoherent transition rates of the seven-level model (rad/s).
///
/// The baseline presets set L₂₃=L₅₆, L₂₁=L₅₄ and L₃₁=L₆₄, but nothing here
/// requires it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelRates {
    pub l21: f64,
    pub l23: f64,
    pub l31: f64,
    pub l54: f64,
    pub l56: f64,
    pub l64: f64,
    pub l57: f64,
    pub l71: f64,
    pub l74: f64,
    /// Spin-0 excited state into the singlet; zero in the reference model.
    pub l27: f64,
    /// Ground-state dephasing Γ₁₄ = 1/T₂*.
    pub gamma14: f64,
}

impl LevelRates {
    pub(crate) fn entries(&self) -> [(&'static str, f64); 11] {
        [
            ("l21", self.l21),
            ("l23", self.l23),
            ("l31", self.l31),
            ("l54", self.l54),
            ("l56", self.l56),
            ("l64", self.l64),
            ("l57", self.l57),
            ("l71", self.l71),
            ("l74", self.l74),
            ("l27", self.l27),
            ("gamma14", self.gamma14),
        ]
    }
}

/// Gain medium and cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    /// Diamond volume, m³.
    pub medium_volume: f64,
    /// Mode volume V_c of the external cavity, m³.
    pub cavity_volume: f64,
    /// NV⁻ concentration as a fraction of carbon atoms (5.7 ppb = 5.7e-9).
    pub nv_concentration: f64,
    /// Steady-state NV⁻/(NV⁻+NV⁰) fraction, in (0, 1].
    pub nv_fraction: f64,
    /// Lasing wavelength in vacuum, m.
    pub vacuum_wavelength: f64,
    pub refractive_index: f64,
    /// Width Δν₂₃ of the three-phonon sideband, Hz (ordinary frequency).
    pub sideband_width: f64,
    /// Cavity photon loss rate κ, rad/s.
    pub kappa: f64,
}

/// RF drive and optical pump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSettings {
    /// Rabi rate Ω.
    pub omega: f64,
    /// RF detuning Δ; any sign.
    pub delta: f64,
    /// Pump rate Λ₁₂ (spin 0).
    pub lambda12: f64,
    /// Pump rate Λ₄₅ (spin 1).
    pub lambda45: f64,
}

impl DriveSettings {
    /// Sets Λ₁₂ = Λ₄₅ = `lambda`.
    pub fn with_pump(mut self, lambda: f64) -> Self {
        self.lambda12 = lambda;
        self.lambda45 = lambda;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrientationMode {
    /// The whole ensemble is aligned with the field.
    SingleOrientation,
    /// One aligned sub-ensemble with live detuning; the remaining centres sit
    /// at a fixed large detuning and only add background gain.
    FourOrientation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientationModel {
    pub mode: OrientationMode,
    /// Share of centres aligned with the field (four-orientation mode only).
    pub aligned_fraction: f64,
    /// Detuning of the non-aligned centres, rad/s.
    pub off_axis_detuning: f64,
}

impl Default for OrientationModel {
    fn default() -> Self {
        Self {
            mode: OrientationMode::SingleOrientation,
            aligned_fraction: 0.25,
            off_axis_detuning: 1e9,
        }
    }
}

impl OrientationModel {
    pub fn four_orientation() -> Self {
        Self {
            mode: OrientationMode::FourOrientation,
            ..Self::default()
        }
    }
}

/// Complete description of one simulated device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub constants: PhysicalConstants,
    pub rates: LevelRates,
    pub geometry: CavityGeometry,
    pub drive: DriveSettings,
    pub orientation: OrientationModel,
    /// Replaces the computed cavity coupling G (rad/s) when set.
    #[serde(default)]
    pub g_override: Option<f64>,
}

/// Quantities computed from a [`ModelConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    /// Number of NV⁻ centres N_at.
    pub n_atoms: f64,
    /// Cavity-induced transition rate G = G₂₃ = G₅₆, rad/s.
    pub g_rate: f64,
    /// Lasing transition frequency ν₂₃, Hz.
    pub nu23: f64,
    /// hν₂₃, J.
    pub photon_energy: f64,
    pub quality_factor: f64,
    /// ħ/(g_e μ_B), T per rad/s.
    pub field_per_detuning: f64,
}

/// One group of identically-oriented centres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubEnsemble {
    pub weight: f64,
    /// RF detuning seen by this group, rad/s.
    pub delta: f64,
    /// Whether the group follows the external field.
    pub aligned: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Baseline,
    HighSensitivity,
}

impl Preset {
    pub const ALL: [Preset; 2] = [Preset::Baseline, Preset::HighSensitivity];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Baseline => "baseline",
            Preset::HighSensitivity => "high_sensitivity",
        }
    }

    pub fn config(self) -> ModelConfig {
        preset(self)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "baseline" => Ok(Preset::Baseline),
            "high_sensitivity" => Ok(Preset::HighSensitivity),
            _ => Err(Error::UnknownPreset(s.to_string())),
        }
    }
}

const MEGA: f64 = 1e6;

/// Builds a named parameter set.
pub fn preset(which: Preset) -> ModelConfig {
    let l74 = 1.0 / 462e-9;
    let baseline = ModelConfig {
        constants: PhysicalConstants::default(),
        rates: LevelRates {
            l21: 68.2 * MEGA,
            l23: 18.0 * MEGA,
            l31: 1e12,
            l54: 68.2 * MEGA,
            l56: 18.0 * MEGA,
            l64: 1e12,
            l57: 1.0 / 24.9e-9,
            l71: l74 / 2.0,
            l74,
            l27: 0.0,
            gamma14: 1.0 / 1e-6,
        },
        geometry: CavityGeometry {
            medium_volume: 1e-9,
            cavity_volume: 2e-9,
            nv_concentration: 5.7e-9,
            nv_fraction: 1.0,
            vacuum_wavelength: 709e-9,
            refractive_index: 2.4,
            sideband_width: 24e12,
            kappa: 3.0 * MEGA,
        },
        drive: DriveSettings {
            omega: 3.67 * MEGA,
            delta: 0.0,
            lambda12: 1.06 * MEGA,
            lambda45: 1.06 * MEGA,
        },
        orientation: OrientationModel::default(),
        g_override: None,
    };
    match which {
        Preset::Baseline => baseline,
        Preset::HighSensitivity => {
            let mut cfg = baseline;
            cfg.geometry.nv_concentration = 16e-6;
            cfg.rates.gamma14 = 1.0 / 0.181e-6;
            cfg.geometry.kappa = 63.1e9;
            cfg.drive = cfg.drive.with_pump(10.4 * MEGA);
            cfg.drive.omega = 6.14 * MEGA;
            cfg
        }
    }
}

impl ModelConfig {
    pub fn preset(which: Preset) -> Self {
        preset(which)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidConfig(what));
        let c = &self.constants;
        for (name, v) in [
            ("hbar", c.hbar),
            ("planck_h", c.planck_h),
            ("g_e", c.g_e),
            ("mu_b", c.mu_b),
            ("c", c.c),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("constant {name} must be positive, got {v}"));
            }
        }
        for (name, v) in self.rates.entries() {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("rate {name} must be finite and >= 0, got {v}"));
            }
        }
        let g = &self.geometry;
        for (name, v) in [
            ("medium_volume", g.medium_volume),
            ("cavity_volume", g.cavity_volume),
            ("nv_concentration", g.nv_concentration),
            ("vacuum_wavelength", g.vacuum_wavelength),
            ("refractive_index", g.refractive_index),
            ("sideband_width", g.sideband_width),
            ("kappa", g.kappa),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("geometry {name} must be positive, got {v}"));
            }
        }
        if g.medium_volume > g.cavity_volume {
            return bad(format!(
                "medium volume {:e} m^3 exceeds cavity volume {:e} m^3",
                g.medium_volume, g.cavity_volume
            ));
        }
        if !(g.nv_fraction > 0.0 && g.nv_fraction <= 1.0) {
            return bad(format!(
                "nv_fraction must lie in (0, 1], got {}",
                g.nv_fraction
            ));
        }
        let d = &self.drive;
        if !(d.omega.is_finite() && d.omega >= 0.0) {
            return bad(format!("Rabi rate must be >= 0, got {}", d.omega));
        }
        if !d.delta.is_finite() {
            return bad("detuning must be finite".into());
        }
        for (name, v) in [("lambda12", d.lambda12), ("lambda45", d.lambda45)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("pump rate {name} must be >= 0, got {v}"));
            }
        }
        let o = &self.orientation;
        if !(o.aligned_fraction > 0.0 && o.aligned_fraction <= 1.0) {
            return bad(format!(
                "aligned_fraction must lie in (0, 1], got {}",
                o.aligned_fraction
            ));
        }
        if !o.off_axis_detuning.is_finite() {
            return bad("off_axis_detuning must be finite".into());
        }
        if let Some(gv) = self.g_override {
            if !(gv.is_finite() && gv > 0.0) {
                return bad(format!("G override must be positive, got {gv}"));
            }
        }
        Ok(())
    }

    /// Largest rate appearing in the equations of motion (excluding G·n).
    pub fn max_rate(&self) -> f64 {
        let r = &self.rates;
        let d = &self.drive;
        r.entries()
            .iter()
            .map(|(_, v)| *v)
            .chain([
                self.geometry.kappa,
                d.omega,
                d.delta.abs(),
                d.lambda12,
                d.lambda45,
            ])
            .fold(0.0, f64::max)
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.drive.delta = delta;
        self
    }

    pub fn with_pump(mut self, lambda: f64) -> Self {
        self.drive = self.drive.with_pump(lambda);
        self
    }

    pub fn with_field(self, b: f64) -> Self {
        let delta = b_field_to_detuning(b, &self.constants);
        self.with_delta(delta)
    }

    /// Sub-ensembles seen by the cavity at RF detuning `delta`.
    pub fn sub_ensembles(&self, delta: f64) -> Vec<SubEnsemble> {
        match self.orientation.mode {
            OrientationMode::SingleOrientation => vec![SubEnsemble {
                weight: 1.0,
                delta,
                aligned: true,
            }],
            OrientationMode::FourOrientation => {
                let w = self.orientation.aligned_fraction;
                let mut out = vec![SubEnsemble {
                    weight: w,
                    delta,
                    aligned: true,
                }];
                if w < 1.0 {
                    out.push(SubEnsemble {
                        weight: 1.0 - w,
                        delta: self.orientation.off_axis_detuning,
                        aligned: false,
                    });
                }
                out
            }
        }
    }

    pub fn derived(&self) -> Result<DerivedQuantities> {
        derive_constants(self)
    }

    /// Cavity coupling G used by the equations of motion.
    pub fn gain_coupling(&self) -> Result<f64> {
        Ok(derive_constants(self)?.g_rate)
    }
}

/// Computes N_at, G, ν₂₃, hν₂₃, Q and the field/detuning ratio.
pub fn derive_constants(config: &ModelConfig) -> Result<DerivedQuantities> {
    config.validate()?;
    let g = &config.geometry;
    let k = &config.constants;
    let n_atoms = g.nv_concentration * CARBON_NUMBER_DENSITY * g.medium_volume * g.nv_fraction;
    let wavelength = g.vacuum_wavelength / g.refractive_index;
    let nu23 = k.c / g.vacuum_wavelength;
    let g_rate = match config.g_override {
        Some(v) => v,
        None => {
            3.0 * nu23 * config.rates.l23 * wavelength.powi(3) * n_atoms
                / (4.0 * PI * PI * g.sideband_width * g.cavity_volume)
        }
    };
    Ok(DerivedQuantities {
        n_atoms,
        g_rate,
        nu23,
        photon_energy: k.planck_h * nu23,
        quality_factor: TAU * nu23 / g.kappa,
        field_per_detuning: k.hbar / (k.g_e * k.mu_b),
    })
}

/// Δ = B·g_e·μ_B/ħ.
pub fn b_field_to_detuning(b: f64, constants: &PhysicalConstants) -> f64 {
    b * constants.g_e * constants.mu_b / constants.hbar
}

/// B = Δ·ħ/(g_e·μ_B).
pub fn detuning_to_b_field(delta: f64, constants: &PhysicalConstants) -> f64 {
    delta * constants.hbar / (constants.g_e * constants.mu_b)
}

/// Laser output P_out = n·N_at·κ·hν₂₃ (watts).
pub fn output_power(n: f64, config: &ModelConfig) -> Result<f64> {
    if n < 0.0 || n.is_nan() {
        return Err(Error::NegativePhotonNumber(n));
    }
    let d = derive_constants(config)?;
    Ok(n * d.n_atoms * config.geometry.kappa * d.photon_energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn planck_is_two_pi_hbar() {
        let c = PhysicalConstants::default();
        assert_eq!(c.planck_h, TAU * c.hbar);
        assert_relative_eq!(c.planck_h, 6.626_070_15e-34, max_relative = 1e-9);
    }

    #[test]
    fn baseline_derived_constants() {
        let d = derive_constants(&preset(Preset::Baseline)).unwrap();
        // 5.7e-9 * 1.76e29 * 1e-9
        assert_relative_eq!(d.n_atoms, 1.0032e12, max_relative = 1e-12);
        assert_relative_eq!(d.n_atoms, 1e12, max_relative = 0.02);
        assert_relative_eq!(d.g_rate, 3.08e8, max_relative = 0.02);
        assert_relative_eq!(d.quality_factor, 8.9e8, max_relative = 0.01);
        assert_relative_eq!(d.nu23, 299_792_458.0 / 709e-9, max_relative = 1e-15);
        assert_eq!(d.quality_factor * 3e6, TAU * d.nu23);
    }

    #[test]
    fn g_formula_by_hand() {
        // 3 ν L23 λ³ N / (4π² Δν Vc), evaluated step by step.
        let nu = 299_792_458.0 / 709e-9;
        let lam = 709e-9 / 2.4;
        let n = 5.7e-9 * 1.76e29 * 1e-9;
        let expected = 3.0 * nu * 18e6 * lam * lam * lam * n / (4.0 * PI * PI * 24e12 * 2e-9);
        let d = derive_constants(&preset(Preset::Baseline)).unwrap();
        assert_relative_eq!(d.g_rate, expected, max_relative = 1e-12);
        assert_relative_eq!(d.g_rate, 3.1164e8, max_relative = 1e-3);
    }

    #[test]
    fn g_override_is_used() {
        let mut cfg = preset(Preset::Baseline);
        cfg.g_override = Some(308e6);
        assert_eq!(cfg.gain_coupling().unwrap(), 308e6);
    }

    #[test]
    fn doubling_concentration_doubles_atoms_and_gain() {
        let cfg = preset(Preset::Baseline);
        let mut doubled = cfg;
        doubled.geometry.nv_concentration *= 2.0;
        let a = derive_constants(&cfg).unwrap();
        let b = derive_constants(&doubled).unwrap();
        assert_eq!(b.n_atoms, 2.0 * a.n_atoms);
        assert_eq!(b.g_rate, 2.0 * a.g_rate);
    }

    #[test]
    fn field_detuning_conversion() {
        let c = PhysicalConstants::default();
        assert_relative_eq!(b_field_to_detuning(5.68e-6, &c), 1e6, max_relative = 0.005);
        assert_eq!(b_field_to_detuning(0.0, &c), 0.0);
        for b in [1e-15, 3.3e-9, 164e-6, -2.5e-3, 1.0] {
            let back = detuning_to_b_field(b_field_to_detuning(b, &c), &c);
            assert!(((back - b) / b).abs() < 1e-12);
        }
    }

    #[test]
    fn preset_values() {
        let b = preset(Preset::Baseline);
        assert_relative_eq!(b.rates.l57, 4.016e7, max_relative = 1e-3);
        assert_eq!(b.rates.l71, b.rates.l74 / 2.0);
        assert_eq!(b.rates.l23, b.rates.l56);
        assert_eq!(b.rates.l21, b.rates.l54);
        assert_eq!(b.rates.l31, b.rates.l64);
        let h = preset(Preset::HighSensitivity);
        assert_relative_eq!(h.rates.gamma14, 5.525e6, max_relative = 1e-3);
        assert_eq!(h.geometry.kappa, 6.31e10);
        assert_eq!(h.drive.lambda12, 10.4e6);
        assert_eq!(h.drive.lambda45, 10.4e6);
        assert_eq!(h.drive.omega, 6.14e6);
        assert_eq!(h.rates.l57, b.rates.l57);
        assert!(matches!(
            "nope".parse::<Preset>(),
            Err(Error::UnknownPreset(_))
        ));
        assert_eq!(
            "high-sensitivity".parse::<Preset>().unwrap(),
            Preset::HighSensitivity
        );
    }

    #[test]
    fn output_power_values() {
        let cfg = preset(Preset::Baseline);
        assert_eq!(output_power(0.0, &cfg).unwrap(), 0.0);
        // 1.0032e12 * 3e6 * 6.626e-34 * 4.2284e14 W
        let p1 = output_power(1.0, &cfg).unwrap();
        assert_relative_eq!(p1, 0.8432, max_relative = 2e-3);
        assert_eq!(output_power(2.0, &cfg).unwrap(), 2.0 * p1);
        assert!(matches!(
            output_power(-1e-3, &cfg),
            Err(Error::NegativePhotonNumber(_))
        ));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = preset(Preset::Baseline);
        cfg.geometry.medium_volume = 0.0;
        assert!(matches!(
            derive_constants(&cfg),
            Err(Error::InvalidConfig(_))
        ));
        let mut cfg = preset(Preset::Baseline);
        cfg.geometry.nv_concentration = -1.0;
        assert!(matches!(
            derive_constants(&cfg),
            Err(Error::InvalidConfig(_))
        ));
        let mut cfg = preset(Preset::Baseline);
        cfg.geometry.medium_volume = 3e-9;
        assert!(cfg.validate().is_err());
        let mut cfg = preset(Preset::Baseline);
        cfg.geometry.nv_fraction = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = preset(Preset::Baseline);
        cfg.rates.l57 = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn four_orientation_sub_ensembles() {
        let mut cfg = preset(Preset::Baseline);
        assert_eq!(cfg.sub_ensembles(5.0).len(), 1);
        cfg.orientation = OrientationModel::four_orientation();
        let subs = cfg.sub_ensembles(5.0);
        assert_eq!(subs.len(), 2);
        assert_eq!(subs[0].weight + subs[1].weight, 1.0);
        assert_eq!(subs[0].delta, 5.0);
        assert_eq!(subs[1].delta, 1e9);
    }
}
