// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

//! Stationary solutions of the rate equations.
//!
//! At fixed photon number `n` the population equations are linear, so the
//! stationary populations follow from one 9×9 solve with the trace condition
//! replacing the redundant ρ̇₁₁ row. The photon equation ṅ = n·g(n) then has
//! either the dark solution n = 0 (net gain at n = 0 not positive) or a
//! unique lasing root, found by bisection on the saturating gain g(n).

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DriveSettings, LevelRates, ModelConfig};

pub(crate) type Mat9 = SMatrix<f64, 9, 9>;
pub(crate) type Vec9 = SVector<f64, 9>;

/// Relative bisection width on `n` at which the photon-number search stops.
pub const PHOTON_REL_TOL: f64 = 1e-12;
/// Accepted |net gain| at the lasing root, as a fraction of κ.
pub const GAIN_TOL_REL_KAPPA: f64 = 1e-8;
/// Upper end of the pump-rate search in [`threshold_pump`], rad/s.
pub const MAX_PUMP_RATE: f64 = 1e12;
const MIN_PUMP_RATE: f64 = 1e3;
const MAX_BISECTIONS: usize = 300;
const MAX_BRACKET_EXPANSIONS: usize = 400;

/// Density-matrix elements of one NV⁻ centre.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PopulationState {
    pub rho11: f64,
    pub rho22: f64,
    pub rho33: f64,
    pub rho44: f64,
    pub rho55: f64,
    pub rho66: f64,
    pub rho77: f64,
    pub rho14_re: f64,
    pub rho14_im: f64,
}

impl PopulationState {
    pub const LEN: usize = 9;

    pub fn to_array(&self) -> [f64; 9] {
        [
            self.rho11,
            self.rho22,
            self.rho33,
            self.rho44,
            self.rho55,
            self.rho66,
            self.rho77,
            self.rho14_re,
            self.rho14_im,
        ]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self {
            rho11: x[0],
            rho22: x[1],
            rho33: x[2],
            rho44: x[3],
            rho55: x[4],
            rho66: x[5],
            rho77: x[6],
            rho14_re: x[7],
            rho14_im: x[8],
        }
    }

    /// Everything in the spin-0 ground state.
    pub fn ground() -> Self {
        Self {
            rho11: 1.0,
            ..Self::default()
        }
    }

    pub fn trace(&self) -> f64 {
        self.rho11 + self.rho22 + self.rho33 + self.rho44 + self.rho55 + self.rho66 + self.rho77
    }

    pub fn occupations(&self) -> [f64; 7] {
        [
            self.rho11, self.rho22, self.rho33, self.rho44, self.rho55, self.rho66, self.rho77,
        ]
    }

    pub fn coherence_abs(&self) -> f64 {
        self.rho14_re.hypot(self.rho14_im)
    }

    /// (ρ₂₂ − ρ₃₃) + (ρ₅₅ − ρ₆₆), the inversion seen by the cavity.
    pub fn inversion(&self) -> f64 {
        (self.rho22 - self.rho33) + (self.rho55 - self.rho66)
    }
}

/// Populations of one orientation group together with its weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubEnsembleState {
    pub weight: f64,
    pub delta: f64,
    pub aligned: bool,
    pub state: PopulationState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    BelowThreshold,
    AboveThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateResult {
    /// One entry per orientation group; the first is the field-aligned group.
    pub populations: Vec<SubEnsembleState>,
    /// Photons per centre.
    pub n: f64,
    /// Net gain at `n`, rad/s.
    pub net_gain_at_n: f64,
    pub branch: Branch,
    /// Max-norm of every ρ̇ and ṅ at the solution.
    pub residual: f64,
}

impl SteadyStateResult {
    pub fn aligned(&self) -> &PopulationState {
        &self.populations[0].state
    }

    pub fn is_lasing(&self) -> bool {
        self.branch == Branch::AboveThreshold
    }
}

/// Generator of the population dynamics at fixed photon number:
/// ρ̇ = M·ρ with ρ = (ρ₁₁..ρ₇₇, Re ρ₁₄, Im ρ₁₄).
pub(crate) fn population_matrix(
    r: &LevelRates,
    d: &DriveSettings,
    delta: f64,
    g: f64,
    n: f64,
) -> Mat9 {
    let (omega, la, lb) = (d.omega, d.lambda12, d.lambda45);
    let gn = g * n;
    let dephasing = r.gamma14 + 0.5 * (la + lb);
    let mut m = Mat9::zeros();
    // rho11
    m[(0, 0)] = -la;
    m[(0, 1)] = r.l21;
    m[(0, 2)] = r.l31;
    m[(0, 6)] = r.l71;
    m[(0, 8)] = -2.0 * omega;
    // rho22
    m[(1, 0)] = la;
    m[(1, 1)] = -(r.l21 + r.l23 + r.l27) - gn;
    m[(1, 2)] = gn;
    // rho33
    m[(2, 1)] = r.l23 + gn;
    m[(2, 2)] = -r.l31 - gn;
    // rho44
    m[(3, 3)] = -lb;
    m[(3, 4)] = r.l54;
    m[(3, 5)] = r.l64;
    m[(3, 6)] = r.l74;
    m[(3, 8)] = 2.0 * omega;
    // rho55
    m[(4, 3)] = lb;
    m[(4, 4)] = -(r.l54 + r.l56 + r.l57) - gn;
    m[(4, 5)] = gn;
    // rho66
    m[(5, 4)] = r.l56 + gn;
    m[(5, 5)] = -r.l64 - gn;
    // rho77
    m[(6, 1)] = r.l27;
    m[(6, 4)] = r.l57;
    m[(6, 6)] = -(r.l71 + r.l74);
    // Re rho14
    m[(7, 7)] = -dephasing;
    m[(7, 8)] = -delta;
    // Im rho14
    m[(8, 0)] = omega;
    m[(8, 3)] = -omega;
    m[(8, 7)] = delta;
    m[(8, 8)] = -dephasing;
    m
}

fn is_degenerate(cfg: &ModelConfig) -> bool {
    let d = &cfg.drive;
    cfg.rates.entries().iter().all(|(_, v)| *v == 0.0)
        && d.omega == 0.0
        && d.lambda12 == 0.0
        && d.lambda45 == 0.0
}

fn solve_one(m: &Mat9, scale: f64) -> Result<Vec9> {
    let mut a = *m;
    for j in 0..9 {
        a[(0, j)] = if j < 7 { 1.0 } else { 0.0 };
    }
    let mut b = Vec9::zeros();
    b[0] = 1.0;
    // Row equilibration: entries span ~1e6..1e12 rad/s.
    for i in 1..9 {
        let s = a.row(i).amax();
        if s > 0.0 {
            a.row_mut(i).scale_mut(1.0 / s);
        }
    }
    let lu = a.lu();
    let mut x = match lu.solve(&b) {
        Some(x) if x.iter().all(|v| v.is_finite()) => {
            // One step of iterative refinement.
            let r = b - a * x;
            match lu.solve(&r) {
                Some(dx) if dx.iter().all(|v| v.is_finite()) => x + dx,
                _ => x,
            }
        }
        // Several stationary states (e.g. no pump and no drive): take the
        // minimum-norm one, which splits the ground population evenly.
        _ => a
            .svd(true, true)
            .solve(&b, 1e-12)
            .map_err(|e| Error::DegenerateConfig(e.to_string()))?,
    };
    for v in x.iter_mut().take(7) {
        if *v < 0.0 && *v > -1e-14 {
            *v = 0.0;
        }
    }
    let residual = (m * x).amax();
    if !(residual <= 1e-10 * scale) {
        return Err(Error::DegenerateConfig(format!(
            "population solve residual {residual:e} exceeds tolerance"
        )));
    }
    Ok(x)
}

/// Stationary populations of every orientation group at fixed `n`.
pub fn populations_at_fixed_n(cfg: &ModelConfig, n: f64) -> Result<Vec<SubEnsembleState>> {
    if n < 0.0 || n.is_nan() {
        return Err(Error::NegativePhotonNumber(n));
    }
    let g = cfg.gain_coupling()?;
    populations_with_coupling(cfg, g, n)
}

fn populations_with_coupling(cfg: &ModelConfig, g: f64, n: f64) -> Result<Vec<SubEnsembleState>> {
    if is_degenerate(cfg) {
        return Err(Error::DegenerateConfig(
            "all transition rates, pump rates and the drive are zero".into(),
        ));
    }
    let scale = cfg.max_rate().max(g * n);
    cfg.sub_ensembles(cfg.drive.delta)
        .into_iter()
        .map(|sub| {
            let m = population_matrix(&cfg.rates, &cfg.drive, sub.delta, g, n);
            let x = solve_one(&m, scale.max(sub.delta.abs()))?;
            Ok(SubEnsembleState {
                weight: sub.weight,
                delta: sub.delta,
                aligned: sub.aligned,
                state: PopulationState::from_slice(x.as_slice()),
            })
        })
        .collect()
}

fn gain_of(g: f64, kappa: f64, subs: &[SubEnsembleState]) -> f64 {
    let inversion: f64 = subs.iter().map(|s| s.weight * s.state.inversion()).sum();
    g * inversion - kappa
}

/// Net round-trip gain G·Σ w(ρ₂₂−ρ₃₃+ρ₅₅−ρ₆₆) − κ at photon number `n`.
pub fn net_gain(cfg: &ModelConfig, n: f64) -> Result<f64> {
    if n < 0.0 || n.is_nan() {
        return Err(Error::NegativePhotonNumber(n));
    }
    let g = cfg.gain_coupling()?;
    let subs = populations_with_coupling(cfg, g, n)?;
    Ok(gain_of(g, cfg.geometry.kappa, &subs))
}

fn residual_of(cfg: &ModelConfig, g: f64, n: f64, subs: &[SubEnsembleState]) -> f64 {
    let mut worst: f64 = 0.0;
    for s in subs {
        let m = population_matrix(&cfg.rates, &cfg.drive, s.delta, g, n);
        let x = Vec9::from_row_slice(&s.state.to_array());
        worst = worst.max((m * x).amax());
    }
    let ndot = n * gain_of(g, cfg.geometry.kappa, subs);
    worst.max(ndot.abs())
}

/// Stationary state including the photon number.
pub fn solve_steady_state(cfg: &ModelConfig) -> Result<SteadyStateResult> {
    let g = cfg.gain_coupling()?;
    let kappa = cfg.geometry.kappa;
    let gain_at = |n: f64| -> Result<(f64, Vec<SubEnsembleState>)> {
        let subs = populations_with_coupling(cfg, g, n)?;
        Ok((gain_of(g, kappa, &subs), subs))
    };

    let (g0, subs0) = gain_at(0.0)?;
    if g0 <= 0.0 {
        let residual = residual_of(cfg, g, 0.0, &subs0);
        return Ok(SteadyStateResult {
            populations: subs0,
            n: 0.0,
            net_gain_at_n: g0,
            branch: Branch::BelowThreshold,
            residual,
        });
    }

    // Bracket the root: the gain saturates (decreases) with n.
    let mut hi = 1.0;
    let mut expansions = 0;
    while gain_at(hi)?.0 > 0.0 {
        hi *= 4.0;
        expansions += 1;
        if expansions > MAX_BRACKET_EXPANSIONS || !hi.is_finite() {
            return Err(Error::NoConvergence {
                lo: hi / 4.0,
                hi,
                iterations: expansions,
            });
        }
    }
    let mut lo = 0.0;
    while hi > f64::MIN_POSITIVE * 4.0 {
        let candidate = hi / 4.0;
        if gain_at(candidate)?.0 > 0.0 {
            lo = candidate;
            break;
        }
        hi = candidate;
    }

    let mut iterations = 0;
    while hi - lo > PHOTON_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gain_at(mid)?.0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
        if iterations > MAX_BISECTIONS {
            return Err(Error::NoConvergence { lo, hi, iterations });
        }
    }
    let n = 0.5 * (lo + hi);
    let (gn, subs) = gain_at(n)?;
    if gn.abs() > GAIN_TOL_REL_KAPPA * kappa {
        return Err(Error::NoConvergence { lo, hi, iterations });
    }
    let residual = residual_of(cfg, g, n, &subs);
    Ok(SteadyStateResult {
        populations: subs,
        n,
        net_gain_at_n: gn,
        branch: Branch::AboveThreshold,
        residual,
    })
}

/// Smallest common pump rate Λ = Λ₁₂ = Λ₄₅ at which the gain at n = 0
/// reaches κ, for RF detuning `delta`.
pub fn threshold_pump(cfg: &ModelConfig, delta: f64) -> Result<f64> {
    let base = cfg.with_delta(delta);
    let gain0 = |lambda: f64| net_gain(&base.with_pump(lambda), 0.0);

    let mut lo = 0.0;
    let mut lambda = MIN_PUMP_RATE;
    let hi = loop {
        if gain0(lambda)? > 0.0 {
            break lambda;
        }
        lo = lambda;
        lambda *= 2.0;
        if lambda > MAX_PUMP_RATE {
            return Err(Error::NotLasable {
                delta,
                max_pump: MAX_PUMP_RATE,
            });
        }
    };
    let (g_lo, g_mid, g_hi) = (gain0(lo)?, gain0(0.5 * (lo + hi))?, gain0(hi)?);
    if !(g_lo <= g_mid && g_mid <= g_hi) {
        return Err(Error::NonMonotoneGain { lo, hi });
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut iterations = 0;
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gain0(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
        if iterations > MAX_BISECTIONS {
            return Err(Error::NoConvergence { lo, hi, iterations });
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Pump rate at which the laser sits exactly at threshold on RF resonance
/// (Δ = 0) for Rabi rate `omega`. Above it the device lases even on
/// resonance; just below it, any detuning switches the laser on.
pub fn find_operating_point(cfg: &ModelConfig, omega: f64) -> Result<f64> {
    let mut c = *cfg;
    c.drive.omega = omega;
    threshold_pump(&c, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{output_power, preset, OrientationModel, Preset};

    fn baseline() -> ModelConfig {
        preset(Preset::Baseline)
    }

    #[test]
    fn no_pump_no_drive_keeps_everything_in_ground_states() {
        let mut cfg = baseline();
        cfg.drive = cfg.drive.with_pump(0.0);
        cfg.drive.omega = 0.0;
        for n in [0.0, 0.3, 10.0] {
            let s = populations_at_fixed_n(&cfg, n).unwrap()[0].state;
            for v in [s.rho22, s.rho33, s.rho55, s.rho66, s.rho77] {
                assert!(v.abs() < 1e-14, "{s:?}");
            }
            assert!((s.rho11 + s.rho44 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spin_zero_dominates_off_resonance() {
        let cfg = baseline().with_delta(100e6);
        let s = populations_at_fixed_n(&cfg, 0.0).unwrap()[0].state;
        assert!(s.rho11 + s.rho22 + s.rho33 > 0.95, "{s:?}");
    }

    #[test]
    fn trace_is_one() {
        for delta in [0.0, 1e6, -3e7, 1e9] {
            for n in [0.0, 1e-6, 0.05, 3.0] {
                let cfg = baseline().with_delta(delta);
                for sub in populations_at_fixed_n(&cfg, n).unwrap() {
                    assert!((sub.state.trace() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_pump_gain_is_minus_kappa() {
        let cfg = baseline().with_pump(0.0);
        let g = net_gain(&cfg, 0.0).unwrap();
        assert_eq!(g, -cfg.geometry.kappa);
    }

    #[test]
    fn resonance_switches_the_laser() {
        let base = baseline();
        let lambda = find_operating_point(&base, base.drive.omega).unwrap();
        // Just below the resonant threshold.
        let cfg = base.with_pump(lambda * (1.0 - 1e-9));
        assert!(net_gain(&cfg.with_delta(0.0), 0.0).unwrap() <= 0.0);
        assert!(net_gain(&cfg.with_delta(100e6), 0.0).unwrap() > 0.0);
        assert_eq!(solve_steady_state(&cfg).unwrap().n, 0.0);
    }

    #[test]
    fn dark_without_pump() {
        let r = solve_steady_state(&baseline().with_pump(0.0)).unwrap();
        assert_eq!(r.branch, Branch::BelowThreshold);
        assert_eq!(r.n, 0.0);
    }

    #[test]
    fn lasing_root() {
        let cfg = baseline().with_delta(100e6);
        let r = solve_steady_state(&cfg).unwrap();
        assert_eq!(r.branch, Branch::AboveThreshold);
        assert!(r.n > 0.0);
        let g = net_gain(&cfg, r.n).unwrap();
        assert!(g.abs() <= GAIN_TOL_REL_KAPPA * cfg.geometry.kappa);
        assert!(r.residual <= 1e-8 * cfg.max_rate());
        let p = output_power(r.n, &cfg).unwrap();
        assert!(p > 1e-4, "{p}");
    }

    #[test]
    fn degenerate_config() {
        let mut cfg = baseline();
        cfg.rates = LevelRates {
            l21: 0.0,
            l23: 0.0,
            l31: 0.0,
            l54: 0.0,
            l56: 0.0,
            l64: 0.0,
            l57: 0.0,
            l71: 0.0,
            l74: 0.0,
            l27: 0.0,
            gamma14: 0.0,
        };
        cfg.drive = DriveSettings {
            omega: 0.0,
            delta: 0.0,
            lambda12: 0.0,
            lambda45: 0.0,
        };
        assert!(matches!(
            populations_at_fixed_n(&cfg, 0.0),
            Err(Error::DegenerateConfig(_))
        ));
        assert!(matches!(
            populations_at_fixed_n(&baseline(), -1.0),
            Err(Error::NegativePhotonNumber(_))
        ));
    }

    #[test]
    fn thresholds_depend_on_spin_manifold() {
        let cfg = baseline();
        let on_res = threshold_pump(&cfg, 0.0).unwrap();
        let off_res = threshold_pump(&cfg, 100e6).unwrap();
        assert!(on_res > off_res);
        assert!(off_res < 1.06e6);
        // Threshold means zero net gain at n = 0.
        let g = net_gain(&cfg.with_pump(on_res).with_delta(0.0), 0.0).unwrap();
        assert!(g.abs() < 1e-6 * cfg.geometry.kappa, "{g}");
    }

    #[test]
    fn huge_losses_are_not_lasable() {
        let mut cfg = baseline();
        cfg.geometry.kappa = 1e12;
        assert!(matches!(
            threshold_pump(&cfg, 100e6),
            Err(Error::NotLasable { .. })
        ));
    }

    #[test]
    fn operating_point_without_drive_is_off_resonant_threshold() {
        let cfg = baseline();
        let undriven = find_operating_point(&cfg, 0.0).unwrap();
        let far = threshold_pump(&cfg, 1e11).unwrap();
        assert!(((undriven - far) / far).abs() < 1e-4, "{undriven} vs {far}");
    }

    #[test]
    fn four_orientation_background_lowers_resonant_threshold() {
        let single = baseline();
        let mut four = baseline();
        four.orientation = OrientationModel::four_orientation();
        let a = find_operating_point(&single, single.drive.omega).unwrap();
        let b = find_operating_point(&four, four.drive.omega).unwrap();
        let off = threshold_pump(&single, 1e11).unwrap();
        assert!(b < a && b > off, "{off} < {b} < {a}");
    }
}
