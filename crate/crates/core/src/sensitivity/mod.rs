// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

//! Shot-noise-limited field sensitivities.
//!
//! d.c.: η = |dB/dn|·√(n/(N_at·κ)).
//! a.c.: η = (dB_S/dn_S)·√(n_o·I/(N_at·κ)) with I = 2.43 by default.
//!
//! Every result keeps the slope and the shot-noise factor it was built from,
//! so `eta == shot_factor / |slope|` holds exactly.

mod optimize;

use serde::{Deserialize, Serialize};

use crate::dynamics::{ac_response_with, demodulate, AcOptions};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::ModelConfig;
use crate::steady::solve_steady_state;

pub use optimize::{
    min_dc_sensitivity, optimize_sensitivity, FreeParameter, OptimizationOutcome, OptimizeOptions,
    ParameterBound,
};

/// Relative change of the slope allowed between step h and h/2.
pub const SLOPE_REL_TOL: f64 = 1e-3;
/// Smallest starting step of the finite-difference stencil, tesla.
pub const MIN_START_STEP: f64 = 1e-9;
/// Slopes with |dn/dB|·h below this fraction of n count as zero.
pub const SLOPE_FLOOR: f64 = 1e-8;
const MAX_HALVINGS: usize = 60;
const QUASISTATIC_PHASES: usize = 64;

/// Default value of the a.c. signal factor I.
pub const DEFAULT_I_FACTOR: f64 = 2.43;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DcFiniteDifference,
    AcTimedomain,
    AcQuasistatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcSignalModel {
    pub i_factor: f64,
    /// Bias field B_o, tesla.
    pub bias: f64,
    /// Signal amplitude B_S, tesla.
    pub amplitude: f64,
    /// Signal angular frequency, rad/s.
    pub omega: f64,
}

impl AcSignalModel {
    pub fn new(bias: f64, amplitude: f64, omega: f64) -> Self {
        Self {
            i_factor: DEFAULT_I_FACTOR,
            bias,
            amplitude,
            omega,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.i_factor > 1.0 && self.i_factor.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "signal factor I must exceed 1, got {}",
                self.i_factor
            )));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "signal amplitude must be positive, got {:e}",
                self.amplitude
            )));
        }
        if !(self.omega >= 0.0 && self.omega.is_finite() && self.bias.is_finite()) {
            return Err(Error::InvalidConfig(
                "signal bias and frequency must be finite, frequency non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    /// T/√Hz; `None` when the slope vanishes and the sensitivity diverges.
    pub eta: Option<f64>,
    /// Field at which the sensitivity applies (bias field for a.c.), tesla.
    pub field: f64,
    /// Photons per centre (time average for a.c.).
    pub n: f64,
    /// dn/dB (d.c.) or n_S/B_S (a.c.), per tesla.
    pub slope: f64,
    /// √(n·I/(N_at·κ)), √s. I = 1 for d.c.
    pub shot_factor: f64,
    pub i_factor: f64,
    pub method: Method,
    /// Accepted finite-difference step, tesla (d.c. only).
    pub fd_step: Option<f64>,
    pub signal: Option<AcSignalModel>,
}

impl SensitivityResult {
    pub fn is_divergent(&self) -> bool {
        self.eta.is_none()
    }

    fn build(
        cfg: &ModelConfig,
        field: f64,
        n: f64,
        slope: f64,
        i_factor: f64,
        method: Method,
    ) -> Result<Self> {
        let d = cfg.derived()?;
        let shot_factor = (n * i_factor / (d.n_atoms * cfg.geometry.kappa)).sqrt();
        let eta = (slope != 0.0).then(|| shot_factor / slope.abs());
        Ok(Self {
            eta,
            field,
            n,
            slope,
            shot_factor,
            i_factor,
            method,
            fd_step: None,
            signal: None,
        })
    }
}

fn photon_number(cfg: &ModelConfig, b: f64) -> Result<(f64, bool)> {
    let ss = solve_steady_state(&cfg.with_field(b))?;
    Ok((ss.n, ss.is_lasing()))
}

/// d.c. sensitivity at field `b` from an adaptive central difference of the
/// steady-state photon number.
pub fn dc_sensitivity(cfg: &ModelConfig, b: f64) -> Result<SensitivityResult> {
    if !b.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "field must be finite, got {b}"
        )));
    }
    let (n, lasing) = photon_number(cfg, b)?;
    if !lasing {
        return Err(Error::NoOutput { b });
    }
    let mut h = (1e-3 * b.abs()).max(MIN_START_STEP);
    let mut coarse: Option<f64> = None;
    let diff = |h: f64| -> Result<Option<f64>> {
        let (np, lp) = photon_number(cfg, b + h)?;
        let (nm, lm) = photon_number(cfg, b - h)?;
        Ok((lp && lm).then(|| (np - nm) / (2.0 * h)))
    };
    for _ in 0..MAX_HALVINGS {
        let d_coarse = match coarse {
            Some(d) => d,
            None => match diff(h)? {
                Some(d) => d,
                None => {
                    h *= 0.5;
                    continue;
                }
            },
        };
        if d_coarse.abs() * h <= SLOPE_FLOOR * n {
            let mut r = SensitivityResult::build(cfg, b, n, 0.0, 1.0, Method::DcFiniteDifference)?;
            r.fd_step = Some(h);
            return Ok(r);
        }
        let fine = diff(0.5 * h)?.expect("inner stencil of a lasing stencil lases");
        if (fine - d_coarse).abs() < SLOPE_REL_TOL * fine.abs() {
            let mut r = SensitivityResult::build(cfg, b, n, fine, 1.0, Method::DcFiniteDifference)?;
            r.fd_step = Some(0.5 * h);
            return Ok(r);
        }
        coarse = Some(fine);
        h *= 0.5;
    }
    Err(Error::NoConvergence {
        lo: b - h,
        hi: b + h,
        iterations: MAX_HALVINGS,
    })
}

/// Pointwise d.c. sensitivity; below-threshold points are `None`.
pub fn dc_sensitivity_curve(
    cfg: &ModelConfig,
    fields: &[f64],
    exec: Execution,
) -> Result<Vec<Option<SensitivityResult>>> {
    if fields.is_empty() {
        return Err(Error::InvalidConfig("field grid is empty".into()));
    }
    exec.map(fields, |&b| match dc_sensitivity(cfg, b) {
        Ok(r) => Ok(Some(r)),
        Err(Error::NoOutput { .. }) => Ok(None),
        Err(e) => Err(e),
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcMethod {
    /// Full integration of the equations of motion and demodulation.
    TimeDomain,
    /// Steady states along the signal cycle, demodulated over phase.
    QuasiStatic,
}

/// a.c. sensitivity for the signal B(t) = B_o + B_S·cos(ωt).
pub fn ac_sensitivity(
    cfg: &ModelConfig,
    signal: AcSignalModel,
    method: AcMethod,
) -> Result<SensitivityResult> {
    ac_sensitivity_with(cfg, signal, method, AcOptions::default())
}

pub fn ac_sensitivity_with(
    cfg: &ModelConfig,
    signal: AcSignalModel,
    method: AcMethod,
    opts: AcOptions,
) -> Result<SensitivityResult> {
    signal.validate()?;
    let (n_o, n_s, tag) = match method {
        AcMethod::TimeDomain => {
            let h = ac_response_with(cfg, signal.bias, signal.amplitude, signal.omega, opts)?;
            (h.n_o, h.n_s, Method::AcTimedomain)
        }
        AcMethod::QuasiStatic => {
            let (o, s) = quasistatic_harmonic(cfg, signal.bias, signal.amplitude)?;
            (o, s, Method::AcQuasistatic)
        }
    };
    let mut r = SensitivityResult::build(
        cfg,
        signal.bias,
        n_o,
        n_s / signal.amplitude,
        signal.i_factor,
        tag,
    )?;
    r.signal = Some(signal);
    Ok(r)
}

/// Mean and first-harmonic amplitude of the steady-state photon number along
/// one cycle of B_o + B_S·cos φ.
pub fn quasistatic_harmonic(cfg: &ModelConfig, bias: f64, amplitude: f64) -> Result<(f64, f64)> {
    let phases: Vec<f64> = (0..QUASISTATIC_PHASES)
        .map(|j| std::f64::consts::TAU * j as f64 / QUASISTATIC_PHASES as f64)
        .collect();
    let mut ns = Vec::with_capacity(phases.len());
    let mut any = false;
    for &p in &phases {
        let (n, lasing) = photon_number(cfg, bias + amplitude * p.cos())?;
        any |= lasing;
        ns.push(n);
    }
    if !any {
        return Err(Error::NoSignal);
    }
    let h = demodulate(&ns, &phases, 1.0);
    Ok((h.n_o, h.n_s))
}

const BIAS_GRID: usize = 121;
const BIAS_REFINE_GRID: usize = 21;
const BIAS_REFINEMENTS: usize = 6;
const TIE_REL: f64 = 1e-6;

/// Field in `[lo, hi]` where |dn/dB| is largest. Symmetric ties go to the
/// larger (more positive) field.
pub fn find_bias_point(cfg: &ModelConfig, lo: f64, hi: f64, exec: Execution) -> Result<f64> {
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "bias search range must satisfy lo < hi, got [{lo:e}, {hi:e}]"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let mut best = None;
    for round in 0..=BIAS_REFINEMENTS {
        let points = if round == 0 {
            BIAS_GRID
        } else {
            BIAS_REFINE_GRID
        };
        let grid = linspace(a, b, points);
        let samples: Vec<(f64, bool)> = exec
            .map(&grid, |&x| photon_number(cfg, x))
            .into_iter()
            .collect::<Result<_>>()?;
        if round == 0 && samples.iter().all(|s| !s.1) {
            return Err(Error::NowhereAboveThreshold { lo, hi });
        }
        let mut pick: Option<(usize, f64)> = None;
        for i in 1..points - 1 {
            if !(samples[i - 1].1 && samples[i].1 && samples[i + 1].1) {
                continue;
            }
            let s = ((samples[i + 1].0 - samples[i - 1].0) / (grid[i + 1] - grid[i - 1])).abs();
            match pick {
                Some((_, m)) if s < m * (1.0 - TIE_REL) => {}
                Some((_, m)) if s <= m * (1.0 + TIE_REL) => {
                    // Near tie: later (larger B) index wins, keep the larger slope value.
                    pick = Some((i, m.max(s)));
                }
                _ => pick = Some((i, s)),
            }
        }
        let Some((i, _)) = pick else {
            if round == 0 {
                // Lasing region narrower than the grid spacing.
                let i = samples
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| s.1)
                    .max_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
                    .map(|(i, _)| i)
                    .expect("some point lases");
                return Ok(grid[i]);
            }
            break;
        };
        best = Some(grid[i]);
        a = grid[i - 1];
        b = grid[i + 1];
    }
    Ok(best.expect("first round always picks a point"))
}

/// `points` evenly spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![a];
    }
    (0..points)
        .map(|i| {
            let s = i as f64 / (points - 1) as f64;
            if i == points - 1 {
                b
            } else {
                a + s * (b - a)
            }
        })
        .collect()
}

/// One η_dc curve of the L₂₇ study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L27Curve {
    /// L₂₇/L₅₇.
    pub ratio: f64,
    /// η per grid point; `None` below threshold or where the slope vanishes.
    pub eta: Vec<Option<f64>>,
    /// Largest |η/η₀ − 1| over points finite in both curves.
    pub max_rel_deviation: f64,
    /// Points finite in exactly one of the two curves.
    pub mismatched: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L27Robustness {
    pub fields: Vec<f64>,
    /// Reference curve with L₂₇ = 0.
    pub reference: Vec<Option<f64>>,
    pub curves: Vec<L27Curve>,
}

fn eta_curve(cfg: &ModelConfig, fields: &[f64], exec: Execution) -> Result<Vec<Option<f64>>> {
    Ok(dc_sensitivity_curve(cfg, fields, exec)?
        .into_iter()
        .map(|r| r.and_then(|r| r.eta))
        .collect())
}

/// Recomputes the η_dc curve with L₂₇ = ratio·L₅₇ for every ratio.
pub fn l27_robustness(
    cfg: &ModelConfig,
    ratios: &[f64],
    fields: &[f64],
    exec: Execution,
) -> Result<L27Robustness> {
    if let Some(r) = ratios.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
        return Err(Error::InvalidConfig(format!(
            "L27 ratios must be non-negative, got {r}"
        )));
    }
    let mut base = *cfg;
    base.rates.l27 = 0.0;
    let reference = eta_curve(&base, fields, exec)?;
    let mut curves = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        let mut c = *cfg;
        c.rates.l27 = ratio * c.rates.l57;
        let eta = eta_curve(&c, fields, exec)?;
        let max_rel_deviation = reference
            .iter()
            .zip(&eta)
            .filter_map(|(a, b)| Some((b.as_ref()? / a.as_ref()? - 1.0).abs()))
            .fold(0.0, f64::max);
        let mismatched = reference
            .iter()
            .zip(&eta)
            .filter(|(a, b)| a.is_some() != b.is_some())
            .count();
        curves.push(L27Curve {
            ratio,
            eta,
            max_rel_deviation,
            mismatched,
        });
    }
    Ok(L27Robustness {
        fields: fields.to_vec(),
        reference,
        curves,
    })
}
