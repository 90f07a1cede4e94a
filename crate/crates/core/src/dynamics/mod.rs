// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

//! Time-domain integration of the full nonlinear rate equations.
//!
//! The state holds the nine density-matrix components of every orientation
//! group followed by the photon number `n`. The equations are written out
//! term by term in [`rhs`]; the Jacobian reuses the fixed-`n` generator of
//! [`crate::steady`].

pub mod demod;
pub mod stiff;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{b_field_to_detuning, ModelConfig, SubEnsemble};
use crate::steady::{population_matrix, solve_steady_state, PopulationState, SteadyStateResult};

pub use demod::{demodulate, HarmonicResult};
pub use stiff::{OdeSystem, StepStats, Stepper, Tolerances};

/// Photon number used to seed a dark cavity (stands in for spontaneous
/// emission into the lasing mode).
pub const DEFAULT_SEED_N: f64 = 1e-6;

/// Full dynamical state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    /// One entry per orientation group, aligned group first.
    pub ensembles: Vec<PopulationState>,
    /// Photons per centre.
    pub n: f64,
}

impl StateVector {
    pub fn from_steady(ss: &SteadyStateResult) -> Self {
        Self {
            ensembles: ss.populations.iter().map(|s| s.state).collect(),
            n: ss.n,
        }
    }

    pub fn dim(&self) -> usize {
        9 * self.ensembles.len() + 1
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        let mut v = Vec::with_capacity(self.dim());
        for e in &self.ensembles {
            v.extend_from_slice(&e.to_array());
        }
        v.push(self.n);
        DVector::from_vec(v)
    }

    pub fn from_slice(x: &[f64]) -> Self {
        let groups = (x.len() - 1) / 9;
        Self {
            ensembles: (0..groups)
                .map(|k| PopulationState::from_slice(&x[9 * k..9 * k + 9]))
                .collect(),
            n: x[x.len() - 1],
        }
    }

    /// Largest deviation of any group's trace from one.
    pub fn trace_error(&self) -> f64 {
        self.ensembles
            .iter()
            .map(|e| (e.trace() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        (self.to_dvector() - other.to_dvector()).amax()
    }
}

/// Time dependence of the RF detuning seen by the field-aligned centres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriveModulation {
    /// Fixed detuning, rad/s.
    Constant { delta: f64 },
    /// Detuning jumps from `delta_before` to `delta_after` at `at` seconds.
    Step {
        delta_before: f64,
        delta_after: f64,
        at: f64,
    },
    /// Field B(t) = bias + amplitude·cos(omega·t), in tesla and rad/s.
    Sinusoid {
        bias: f64,
        amplitude: f64,
        omega: f64,
    },
}

impl DriveModulation {
    pub fn from_config(cfg: &ModelConfig) -> Self {
        DriveModulation::Constant {
            delta: cfg.drive.delta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DriveModulation::Sinusoid {
                amplitude, omega, ..
            } if !(amplitude >= 0.0 && omega > 0.0) => Err(Error::InvalidConfig(format!(
                "sinusoidal modulation needs amplitude >= 0 and omega > 0 (got {amplitude:e}, {omega:e})"
            ))),
            _ => Ok(()),
        }
    }

    fn detuning(&self, cfg: &ModelConfig, t: f64) -> f64 {
        match *self {
            DriveModulation::Constant { delta } => delta,
            DriveModulation::Step {
                delta_before,
                delta_after,
                at,
            } => {
                if t < at {
                    delta_before
                } else {
                    delta_after
                }
            }
            DriveModulation::Sinusoid {
                bias,
                amplitude,
                omega,
            } => b_field_to_detuning(bias + amplitude * (omega * t).cos(), &cfg.constants),
        }
    }

    fn detuning_rate(&self, cfg: &ModelConfig, t: f64) -> f64 {
        match *self {
            DriveModulation::Sinusoid {
                amplitude, omega, ..
            } => b_field_to_detuning(-amplitude * omega * (omega * t).sin(), &cfg.constants),
            _ => 0.0,
        }
    }
}

/// Equations of motion bound to a configuration and a modulation.
pub struct RateEquations<'a> {
    pub cfg: &'a ModelConfig,
    pub modulation: DriveModulation,
    g: f64,
    groups: Vec<SubEnsemble>,
    abs_tol: f64,
}

impl<'a> RateEquations<'a> {
    pub fn new(cfg: &'a ModelConfig, modulation: DriveModulation) -> Result<Self> {
        modulation.validate()?;
        let g = cfg.gain_coupling()?;
        Ok(Self {
            cfg,
            modulation,
            g,
            groups: cfg.sub_ensembles(0.0),
            abs_tol: 0.0,
        })
    }

    fn group_delta(&self, k: usize, t: f64) -> f64 {
        if self.groups[k].aligned {
            self.modulation.detuning(self.cfg, t)
        } else {
            self.groups[k].delta
        }
    }

    pub fn groups(&self) -> usize {
        self.groups.len()
    }
}

impl OdeSystem for RateEquations<'_> {
    fn dim(&self) -> usize {
        9 * self.groups.len() + 1
    }

    fn rhs(&self, t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let r = &self.cfg.rates;
        let d = &self.cfg.drive;
        let (omega, l12, l45) = (d.omega, d.lambda12, d.lambda45);
        let g = self.g;
        let n = y[y.len() - 1];
        let mut stimulated = 0.0;
        for (k, group) in self.groups.iter().enumerate() {
            let o = 9 * k;
            let delta = self.group_delta(k, t);
            let (p11, p22, p33, p44, p55, p66, p77) = (
                y[o],
                y[o + 1],
                y[o + 2],
                y[o + 3],
                y[o + 4],
                y[o + 5],
                y[o + 6],
            );
            let (re, im) = (y[o + 7], y[o + 8]);
            let decay14 = r.gamma14 + l12 / 2.0 + l45 / 2.0;

            dy[o] = -2.0 * omega * im - l12 * p11 + r.l21 * p22 + r.l31 * p33 + r.l71 * p77;
            dy[o + 1] = l12 * p11 - (r.l21 + r.l23) * p22 - r.l27 * p22 - g * (p22 - p33) * n;
            dy[o + 2] = r.l23 * p22 - r.l31 * p33 - g * (p33 - p22) * n;
            dy[o + 3] = 2.0 * omega * im - l45 * p44 + r.l54 * p55 + r.l64 * p66 + r.l74 * p77;
            dy[o + 4] = l45 * p44 - (r.l54 + r.l56 + r.l57) * p55 - g * (p55 - p66) * n;
            dy[o + 5] = r.l56 * p55 - r.l64 * p66 - g * (p66 - p55) * n;
            dy[o + 6] = r.l57 * p55 + r.l27 * p22 - (r.l71 + r.l74) * p77;
            // (iΔ − Γ₁₄ − Λ₁₂/2 − Λ₄₅/2)ρ₁₄ − iΩ(ρ₄₄ − ρ₁₁), split into parts.
            dy[o + 7] = -decay14 * re - delta * im;
            dy[o + 8] = delta * re - decay14 * im - omega * (p44 - p11);

            stimulated += group.weight * (g * (p22 - p33) + g * (p55 - p66));
        }
        dy[y.len() - 1] = stimulated * n - self.cfg.geometry.kappa * n;
    }

    fn jacobian(&self, t: f64, y: &DVector<f64>, jac: &mut DMatrix<f64>) {
        jac.fill(0.0);
        let g = self.g;
        let last = y.len() - 1;
        let n = y[last];
        let mut dndn = -self.cfg.geometry.kappa;
        for (k, group) in self.groups.iter().enumerate() {
            let o = 9 * k;
            let m = population_matrix(
                &self.cfg.rates,
                &self.cfg.drive,
                self.group_delta(k, t),
                g,
                n,
            );
            jac.view_mut((o, o), (9, 9)).copy_from(&m);
            let upper = y[o + 1] - y[o + 2];
            let lower = y[o + 4] - y[o + 5];
            jac[(o + 1, last)] = -g * upper;
            jac[(o + 2, last)] = g * upper;
            jac[(o + 4, last)] = -g * lower;
            jac[(o + 5, last)] = g * lower;
            let wgn = group.weight * g * n;
            jac[(last, o + 1)] = wgn;
            jac[(last, o + 2)] = -wgn;
            jac[(last, o + 4)] = wgn;
            jac[(last, o + 5)] = -wgn;
            dndn += group.weight * g * (upper + lower);
        }
        jac[(last, last)] = dndn;
    }

    fn time_derivative(&self, t: f64, y: &DVector<f64>, out: &mut DVector<f64>) {
        out.fill(0.0);
        let rate = self.modulation.detuning_rate(self.cfg, t);
        if rate == 0.0 {
            return;
        }
        for (k, group) in self.groups.iter().enumerate() {
            if group.aligned {
                let o = 9 * k;
                out[o + 7] = -rate * y[o + 8];
                out[o + 8] = rate * y[o + 7];
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self.modulation {
            DriveModulation::Step { at, .. } => vec![at],
            _ => Vec::new(),
        }
    }

    fn project(&self, t: f64, y: &mut DVector<f64>) -> Result<usize> {
        let tol = self.abs_tol;
        let mut clamped = 0;
        let last = y.len() - 1;
        for k in 0..self.groups.len() {
            for i in 9 * k..9 * k + 7 {
                let v = y[i];
                if v < -tol || v > 1.0 + tol {
                    return Err(Error::PositivityViolation {
                        t,
                        index: i,
                        value: v,
                    });
                }
                if v < 0.0 {
                    y[i] = 0.0;
                    clamped += 1;
                } else if v > 1.0 {
                    y[i] = 1.0;
                    clamped += 1;
                }
            }
        }
        let n = y[last];
        if n < -tol {
            return Err(Error::PositivityViolation {
                t,
                index: last,
                value: n,
            });
        }
        if n < 0.0 {
            y[last] = 0.0;
            clamped += 1;
        }
        Ok(clamped)
    }
}

/// Evaluates the time derivative of `state`.
pub fn rhs(
    state: &StateVector,
    cfg: &ModelConfig,
    t: f64,
    modulation: DriveModulation,
) -> Result<StateVector> {
    let eqs = RateEquations::new(cfg, modulation)?;
    if state.ensembles.len() != eqs.groups() {
        return Err(Error::InvalidConfig(format!(
            "state has {} orientation groups, configuration has {}",
            state.ensembles.len(),
            eqs.groups()
        )));
    }
    let y = state.to_dvector();
    let mut dy = DVector::zeros(y.len());
    eqs.rhs(t, &y, &mut dy);
    Ok(StateVector::from_slice(dy.as_slice()))
}

/// Sampled trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub config: ModelConfig,
    /// Components clamped back into range after accepted steps.
    pub clamp_events: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl TimeSeries {
    pub fn photon_numbers(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.n).collect()
    }

    pub fn max_trace_error(&self) -> f64 {
        self.states
            .iter()
            .map(StateVector::trace_error)
            .fold(0.0, f64::max)
    }

    pub fn last(&self) -> &StateVector {
        self.states.last().expect("time series is never empty")
    }
}

fn check_initial(initial: &StateVector, eqs: &RateEquations<'_>) -> Result<()> {
    if initial.ensembles.len() != eqs.groups() {
        return Err(Error::InvalidConfig(format!(
            "initial state has {} orientation groups, configuration has {}",
            initial.ensembles.len(),
            eqs.groups()
        )));
    }
    if initial.n < 0.0 {
        return Err(Error::NegativePhotonNumber(initial.n));
    }
    Ok(())
}

/// Integrates from t = 0 to `t_end`, recording every accepted step.
pub fn integrate(
    cfg: &ModelConfig,
    initial: &StateVector,
    t_end: f64,
    modulation: DriveModulation,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<TimeSeries> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "t_end must be positive, got {t_end:e}"
        )));
    }
    let tol = Tolerances::new(rel_tol, abs_tol)?;
    let mut eqs = RateEquations::new(cfg, modulation)?;
    eqs.abs_tol = abs_tol;
    check_initial(initial, &eqs)?;
    let mut stepper = Stepper::new(&eqs, 0.0, initial.to_dvector(), tol);
    let mut times = vec![0.0];
    let mut states = vec![initial.clone()];
    while stepper.t() < t_end {
        stepper.step(t_end)?;
        times.push(stepper.t());
        states.push(StateVector::from_slice(stepper.y().as_slice()));
    }
    Ok(TimeSeries {
        times,
        states,
        config: *cfg,
        clamp_events: stepper.stats.clamped,
        accepted_steps: stepper.stats.accepted,
        rejected_steps: stepper.stats.rejected,
    })
}

/// Integrates from t = 0 and records the state exactly at each of `times`
/// (strictly increasing, all ≥ 0).
pub fn integrate_sampled(
    cfg: &ModelConfig,
    initial: &StateVector,
    times: &[f64],
    modulation: DriveModulation,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<TimeSeries> {
    if times.is_empty() || times[0] < 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig(
            "sample times must be non-negative and strictly increasing".into(),
        ));
    }
    let tol = Tolerances::new(rel_tol, abs_tol)?;
    let mut eqs = RateEquations::new(cfg, modulation)?;
    eqs.abs_tol = abs_tol;
    check_initial(initial, &eqs)?;
    let mut stepper = Stepper::new(&eqs, 0.0, initial.to_dvector(), tol);
    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        stepper.advance_to(t)?;
        states.push(StateVector::from_slice(stepper.y().as_slice()));
    }
    Ok(TimeSeries {
        times: times.to_vec(),
        states,
        config: *cfg,
        clamp_events: stepper.stats.clamped,
        accepted_steps: stepper.stats.accepted,
        rejected_steps: stepper.stats.rejected,
    })
}

/// Slowest relaxation time of the linearised dynamics around the steady
/// state of `cfg` at detuning `delta` (seconds).
pub fn relaxation_time(cfg: &ModelConfig, delta: f64) -> Result<f64> {
    let c = cfg.with_delta(delta);
    let ss = solve_steady_state(&c)?;
    let eqs = RateEquations::new(&c, DriveModulation::Constant { delta })?;
    let y = StateVector::from_steady(&ss).to_dvector();
    let dim = y.len();
    let mut jac = DMatrix::zeros(dim, dim);
    eqs.jacobian(0.0, &y, &mut jac);
    let floor = 1e-9 * c.max_rate();
    let slowest = jac
        .complex_eigenvalues()
        .iter()
        .map(|z| -z.re)
        .filter(|re| *re > floor)
        .fold(f64::INFINITY, f64::min);
    if !slowest.is_finite() {
        return Err(Error::DegenerateConfig("no decaying mode found".into()));
    }
    Ok(1.0 / slowest)
}

/// Turn-on/turn-off times after a sudden change of detuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseResult {
    /// Time to cover 1 − 1/e of the step in `n`, s.
    pub t_63: f64,
    /// Time to cover 90 % of the step in `n`, s.
    pub t_90: f64,
    pub initial: SteadyStateResult,
    pub r#final: SteadyStateResult,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Give up after this much simulated time, s.
    pub max_time: f64,
}

impl Default for ResponseOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-15,
            max_time: 0.05,
        }
    }
}

/// Response of `n` to a detuning step at t = 0.
pub fn step_response(
    cfg: &ModelConfig,
    delta_before: f64,
    delta_after: f64,
    seed_n: f64,
) -> Result<ResponseResult> {
    step_response_with(
        cfg,
        delta_before,
        delta_after,
        seed_n,
        ResponseOptions::default(),
    )
}

pub fn step_response_with(
    cfg: &ModelConfig,
    delta_before: f64,
    delta_after: f64,
    seed_n: f64,
    opts: ResponseOptions,
) -> Result<ResponseResult> {
    if !(seed_n >= 0.0) {
        return Err(Error::NegativePhotonNumber(seed_n));
    }
    let initial = solve_steady_state(&cfg.with_delta(delta_before))?;
    let target = solve_steady_state(&cfg.with_delta(delta_after))?;
    let (n0, n1) = (initial.n, target.n);
    if (n1 - n0).abs() <= 1e-12 * n0.max(n1) || (n0 == 0.0 && n1 == 0.0) {
        return Err(Error::DegenerateStep);
    }

    let mut start = StateVector::from_steady(&initial);
    start.n = start.n.max(seed_n);
    let tol = Tolerances::new(opts.rel_tol, opts.abs_tol)?;
    let modulation = DriveModulation::Constant { delta: delta_after };
    let mut eqs = RateEquations::new(cfg, modulation)?;
    eqs.abs_tol = opts.abs_tol;
    let last = eqs.dim() - 1;
    let mut stepper = Stepper::new(&eqs, 0.0, start.to_dvector(), tol);

    let levels = [1.0 - (-1.0f64).exp(), 0.9];
    let mut found = [None, None];
    let frac = |n: f64| (n - n0) / (n1 - n0);
    while found[1].is_none() {
        let (ta, ya, fa) = (stepper.t(), stepper.y()[last], stepper.dy()[last]);
        stepper.step(opts.max_time)?;
        let (tb, yb, fb) = (stepper.t(), stepper.y()[last], stepper.dy()[last]);
        for (slot, &level) in found.iter_mut().zip(levels.iter()) {
            if slot.is_none() && frac(yb) >= level {
                let mut lo = ta;
                let mut hi = tb;
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if frac(stiff::hermite(ta, ya, fa, tb, yb, fb, mid)) >= level {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                *slot = Some(0.5 * (lo + hi));
            }
        }
        if stepper.t() >= opts.max_time && found[1].is_none() {
            return Err(Error::NoConvergence {
                lo: 0.0,
                hi: opts.max_time,
                iterations: stepper.stats.accepted,
            });
        }
    }
    Ok(ResponseResult {
        t_63: found[0].expect("t_63 precedes t_90"),
        t_90: found[1].expect("loop exits once t_90 is known"),
        initial,
        r#final: target,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcOptions {
    /// Measured periods (≥ 10).
    pub periods: usize,
    /// Samples per period used for demodulation.
    pub samples_per_period: usize,
    /// Minimum number of discarded transient periods (≥ 5).
    pub transient_periods: usize,
    /// Transient must also cover this many relaxation times.
    pub transient_relaxation_times: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub seed_n: f64,
}

impl Default for AcOptions {
    fn default() -> Self {
        Self {
            periods: 10,
            samples_per_period: 64,
            transient_periods: 5,
            transient_relaxation_times: 10.0,
            rel_tol: 1e-10,
            abs_tol: 1e-18,
            seed_n: DEFAULT_SEED_N,
        }
    }
}

/// Response of `n` to B(t) = b_bias + b_signal·cos(omega_sig·t).
pub fn ac_response(
    cfg: &ModelConfig,
    b_bias: f64,
    b_signal: f64,
    omega_sig: f64,
) -> Result<HarmonicResult> {
    ac_response_with(cfg, b_bias, b_signal, omega_sig, AcOptions::default())
}

pub fn ac_response_with(
    cfg: &ModelConfig,
    b_bias: f64,
    b_signal: f64,
    omega_sig: f64,
    opts: AcOptions,
) -> Result<HarmonicResult> {
    if !(b_signal > 0.0 && omega_sig > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "a.c. response needs B_S > 0 and omega > 0 (got {b_signal:e}, {omega_sig:e})"
        )));
    }
    if opts.periods < 10 || opts.transient_periods < 5 || opts.samples_per_period < 8 {
        return Err(Error::InvalidConfig(
            "a.c. response needs >= 10 measured periods, >= 5 transient periods and >= 8 samples per period".into(),
        ));
    }
    // Any lasing point on the cycle?
    let mut lasing = None;
    for j in 0..16 {
        let phase = std::f64::consts::TAU * j as f64 / 16.0;
        let b = b_bias + b_signal * phase.cos();
        let ss = solve_steady_state(&cfg.with_field(b))?;
        if ss.is_lasing() {
            lasing = Some(b);
            break;
        }
    }
    let Some(b_lasing) = lasing else {
        return Err(Error::NoSignal);
    };

    let period = std::f64::consts::TAU / omega_sig;
    let t_relax = relaxation_time(cfg, b_field_to_detuning(b_lasing, &cfg.constants))?;
    let transient = (opts.transient_periods as f64)
        .max((opts.transient_relaxation_times * t_relax / period).ceil());
    let k = opts.samples_per_period;
    let times: Vec<f64> = (0..opts.periods * k)
        .map(|j| (transient + j as f64 / k as f64) * period)
        .collect();

    let start_ss = solve_steady_state(&cfg.with_field(b_bias + b_signal))?;
    let mut start = StateVector::from_steady(&start_ss);
    start.n = start.n.max(opts.seed_n);
    let modulation = DriveModulation::Sinusoid {
        bias: b_bias,
        amplitude: b_signal,
        omega: omega_sig,
    };
    let series = integrate_sampled(cfg, &start, &times, modulation, opts.rel_tol, opts.abs_tol)?;
    let ns = series.photon_numbers();
    let mut result = demodulate(&ns, &series.times, omega_sig);
    result.relaxation_time = t_relax;
    Ok(result)
}
