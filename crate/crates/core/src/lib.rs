// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

//! Rate-equation model of a nitrogen-vacancy laser threshold magnetometer.
//!
//! The gain medium is an ensemble of NV⁻ centres reduced to seven levels
//! (spin-0 manifold |1⟩,|2⟩,|3⟩, spin-1 manifold |4⟩,|5⟩,|6⟩, singlet |7⟩)
//! plus the intracavity photon number per centre `n`. An RF drive mixes
//! |1⟩ and |4⟩; the external field shifts its detuning and thereby moves the
//! laser across threshold.
//!
//! Unit convention: every rate is an angular rate in rad/s. A rate quoted as
//! "3 MHz" is stored as `3.0e6`. Fields are in tesla, volumes in m³, times in
//! seconds.
//!
//! Modules:
//! - [`model`]: parameters, presets, derived constants, unit conversions.
//! - [`steady`]: stationary populations, net gain, thresholds.
//! - [`dynamics`]: stiff time integration, step and a.c. responses.
//! - [`sensitivity`]: shot-noise-limited d.c./a.c. sensitivities and tuning.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod model;
pub mod params;
pub mod sensitivity;
pub mod steady;
pub mod units;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{
    CavityGeometry, DerivedQuantities, DriveSettings, LevelRates, ModelConfig, OrientationMode,
    OrientationModel, PhysicalConstants, Preset,
};
pub use steady::{Branch, PopulationState, SteadyStateResult, SubEnsembleState};
