// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown preset `{0}` (expected `baseline` or `high_sensitivity`)")]
    UnknownPreset(String),

    #[error("photon number must be non-negative, got {0}")]
    NegativePhotonNumber(f64),

    #[error("degenerate configuration: {0}")]
    DegenerateConfig(String),

    #[error("root search did not converge within {iterations} iterations, last bracket [{lo:e}, {hi:e}]")]
    NoConvergence { lo: f64, hi: f64, iterations: usize },

    #[error("laser cannot reach threshold at detuning {delta:e} rad/s for pump rates up to {max_pump:e} rad/s")]
    NotLasable { delta: f64, max_pump: f64 },

    #[error("net gain is not monotone in the pump rate on [{lo:e}, {hi:e}] rad/s")]
    NonMonotoneGain { lo: f64, hi: f64 },

    #[error("step size underflow at t = {t:e} s (h = {h:e} s); state = {state:?}")]
    StiffnessFailure { t: f64, h: f64, state: Vec<f64> },

    #[error("component {index} left its physical range at t = {t:e} s (value {value:e})")]
    PositivityViolation { t: f64, index: usize, value: f64 },

    #[error("step response is degenerate: steady states before and after the step coincide")]
    DegenerateStep,

    #[error("laser is below threshold over the whole signal cycle")]
    NoSignal,

    #[error("laser is below threshold at B = {b:e} T; no output to measure")]
    NoOutput { b: f64 },

    #[error("laser is below threshold everywhere in [{lo:e}, {hi:e}] T")]
    NowhereAboveThreshold { lo: f64, hi: f64 },

    #[error("objective is not finite anywhere within the optimization bounds")]
    ObjectiveNotFinite,

    #[error("unknown parameter path `{0}`")]
    UnknownParameter(String),

    #[error("unit error: {0}")]
    Unit(String),
}

impl Error {
    /// True for errors that signal the numerics gave up rather than the physics
    /// ruling the request out.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::StiffnessFailure { .. }
        )
    }
}
