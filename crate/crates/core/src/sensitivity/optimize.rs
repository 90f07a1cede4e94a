// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

//! Minimum of η_dc over the field and Nelder–Mead tuning of κ, Λ and Ω.

use serde::{Deserialize, Serialize};

use super::{dc_sensitivity, dc_sensitivity_curve, linspace};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::ModelConfig;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeParameter {
    Kappa,
    Lambda,
    Omega,
}

impl FreeParameter {
    pub fn name(self) -> &'static str {
        match self {
            FreeParameter::Kappa => "kappa",
            FreeParameter::Lambda => "lambda",
            FreeParameter::Omega => "omega",
        }
    }

    fn get(self, cfg: &ModelConfig) -> f64 {
        match self {
            FreeParameter::Kappa => cfg.geometry.kappa,
            FreeParameter::Lambda => cfg.drive.lambda12,
            FreeParameter::Omega => cfg.drive.omega,
        }
    }

    fn set(self, cfg: &mut ModelConfig, v: f64) {
        match self {
            FreeParameter::Kappa => cfg.geometry.kappa = v,
            FreeParameter::Lambda => *cfg = cfg.with_pump(v),
            FreeParameter::Omega => cfg.drive.omega = v,
        }
    }
}

impl std::str::FromStr for FreeParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kappa" => Ok(FreeParameter::Kappa),
            "lambda" => Ok(FreeParameter::Lambda),
            "omega" => Ok(FreeParameter::Omega),
            _ => Err(Error::UnknownParameter(s.to_string())),
        }
    }
}

/// Closed interval for one free parameter, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterBound {
    pub parameter: FreeParameter,
    pub lo: f64,
    pub hi: f64,
}

impl ParameterBound {
    /// `factor` either side of the current value (10 for ±1 decade).
    pub fn around(cfg: &ModelConfig, parameter: FreeParameter, factor: f64) -> Self {
        let v = parameter.get(cfg);
        Self {
            parameter,
            lo: v / factor,
            hi: v * factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    /// Field window of the inner minimum, tesla.
    pub field_range: (f64, f64),
    /// Points of the pre-scan preceding the golden-section refinement.
    pub grid_points: usize,
    pub golden_iterations: usize,
    pub max_evaluations: usize,
    /// Simplex size at which the search stops, in ln-units.
    pub x_tol: f64,
    /// Relative spread of simplex values at which the search stops.
    pub f_tol: f64,
    pub exec: Execution,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            field_range: (-300e-6, 300e-6),
            grid_points: 61,
            golden_iterations: 40,
            max_evaluations: 150,
            x_tol: 1e-3,
            f_tol: 1e-4,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationOutcome {
    pub kappa: f64,
    pub lambda: f64,
    pub omega: f64,
    /// Field at which the best η is reached, tesla.
    pub field: f64,
    /// T/√Hz.
    pub best_eta: f64,
    pub start_eta: Option<f64>,
    pub evaluations: usize,
    pub converged: bool,
}

/// Smallest η_dc over `range`: grid pre-scan, then golden-section search
/// between the neighbours of the best grid point. Returns `(B, η)`, or `None`
/// when no grid point has a finite sensitivity.
pub fn min_dc_sensitivity(
    cfg: &ModelConfig,
    range: (f64, f64),
    grid_points: usize,
    golden_iterations: usize,
    exec: Execution,
) -> Result<Option<(f64, f64)>> {
    let (lo, hi) = range;
    if !(lo < hi) || grid_points < 3 {
        return Err(Error::InvalidConfig(
            "field range must satisfy lo < hi with at least 3 grid points".into(),
        ));
    }
    let grid = linspace(lo, hi, grid_points);
    let curve = dc_sensitivity_curve(cfg, &grid, exec)?;
    let etas: Vec<f64> = curve
        .iter()
        .map(|r| r.and_then(|r| r.eta).unwrap_or(f64::INFINITY))
        .collect();
    let Some(i) = (0..etas.len())
        .filter(|i| etas[*i].is_finite())
        .min_by(|a, b| etas[*a].total_cmp(&etas[*b]))
    else {
        return Ok(None);
    };
    let f = |b: f64| -> Result<f64> {
        match dc_sensitivity(cfg, b) {
            Ok(r) => Ok(r.eta.unwrap_or(f64::INFINITY)),
            Err(Error::NoOutput { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };
    let mut best = (grid[i], etas[i]);
    let (mut a, mut b) = (grid[i.saturating_sub(1)], grid[(i + 1).min(grid.len() - 1)]);
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..golden_iterations {
        if f1 < best.1 {
            best = (x1, f1);
        }
        if f2 < best.1 {
            best = (x2, f2);
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2)?;
        }
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v < best.1 {
            best = (x, v);
        }
    }
    Ok(Some(best))
}

/// Nelder–Mead search over ln κ, ln Λ, ln Ω (those listed in `bounds`)
/// minimising the field-minimum of η_dc.
pub fn optimize_sensitivity(
    cfg: &ModelConfig,
    bounds: &[ParameterBound],
    opts: OptimizeOptions,
) -> Result<OptimizationOutcome> {
    for (k, bd) in bounds.iter().enumerate() {
        if !(bd.lo > 0.0 && bd.hi >= bd.lo && bd.hi.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "bounds for {} must be positive and finite with lo <= hi",
                bd.parameter.name()
            )));
        }
        if bounds[..k].iter().any(|o| o.parameter == bd.parameter) {
            return Err(Error::InvalidConfig(format!(
                "{} bounded twice",
                bd.parameter.name()
            )));
        }
    }
    let mut base = *cfg;
    for bd in bounds {
        let v = bd.parameter.get(&base).clamp(bd.lo, bd.hi);
        bd.parameter.set(&mut base, v);
    }
    let free: Vec<&ParameterBound> = bounds.iter().filter(|b| b.hi > b.lo).collect();
    let lo: Vec<f64> = free.iter().map(|b| b.lo.ln()).collect();
    let hi: Vec<f64> = free.iter().map(|b| b.hi.ln()).collect();
    let at = |x: &[f64]| -> ModelConfig {
        let mut c = base;
        for (k, bd) in free.iter().enumerate() {
            bd.parameter.set(&mut c, x[k].clamp(lo[k], hi[k]).exp());
        }
        c
    };
    let evaluations = std::cell::Cell::new(0usize);
    let objective = |x: &[f64]| -> Result<(f64, f64)> {
        evaluations.set(evaluations.get() + 1);
        let c = at(x);
        let r = min_dc_sensitivity(
            &c,
            opts.field_range,
            opts.grid_points,
            opts.golden_iterations,
            opts.exec,
        );
        match r {
            Ok(Some((b, eta))) => Ok((eta, b)),
            Ok(None) => Ok((f64::INFINITY, f64::NAN)),
            Err(e) if e.is_convergence_failure() => Ok((f64::INFINITY, f64::NAN)),
            Err(Error::NotLasable { .. }) => Ok((f64::INFINITY, f64::NAN)),
            Err(e) => Err(e),
        }
    };

    let dim = free.len();
    let x0: Vec<f64> = free.iter().map(|bd| bd.parameter.get(&base).ln()).collect();
    let mut simplex: Vec<(Vec<f64>, f64, f64)> = Vec::with_capacity(dim + 1);
    let (f0, b0) = objective(&x0)?;
    let start_eta = f0.is_finite().then_some(f0);
    simplex.push((x0.clone(), f0, b0));
    for k in 0..dim {
        let step = (0.25 * (hi[k] - lo[k])).min(0.5 * std::f64::consts::LN_10);
        let mut x = x0.clone();
        x[k] = if x0[k] + step <= hi[k] {
            x0[k] + step
        } else {
            x0[k] - step
        };
        let (f, b) = objective(&x)?;
        simplex.push((x, f, b));
    }
    let clamp = |x: Vec<f64>| -> Vec<f64> {
        x.into_iter()
            .enumerate()
            .map(|(k, v)| v.clamp(lo[k], hi[k]))
            .collect()
    };

    let mut converged = dim == 0;
    while !converged {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex.iter().all(|s| !s.1.is_finite()) {
            return Err(Error::ObjectiveNotFinite);
        }
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        let size = simplex[1..]
            .iter()
            .flat_map(|s| s.0.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if worst.is_finite() && (worst - best) <= opts.f_tol * best.abs() && size <= opts.x_tol {
            converged = true;
            break;
        }
        if evaluations.get() >= opts.max_evaluations {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|s| s.0[k]).sum::<f64>() / dim as f64)
            .collect();
        let toward = |t: f64| -> Vec<f64> {
            clamp(
                centroid
                    .iter()
                    .zip(&simplex[dim].0)
                    .map(|(c, w)| c + t * (w - c))
                    .collect(),
            )
        };
        let xr = toward(-1.0);
        let (fr, br) = objective(&xr)?;
        if fr < simplex[0].1 {
            let xe = toward(-2.0);
            let (fe, be) = objective(&xe)?;
            simplex[dim] = if fe < fr { (xe, fe, be) } else { (xr, fr, br) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr, br);
        } else {
            let t = if fr < simplex[dim].1 { -0.5 } else { 0.5 };
            let xc = toward(t);
            let (fc, bc) = objective(&xc)?;
            if fc < fr.min(simplex[dim].1) {
                simplex[dim] = (xc, fc, bc);
            } else {
                let x_best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> =
                        s.0.iter()
                            .zip(&x_best)
                            .map(|(v, b)| b + 0.5 * (v - b))
                            .collect();
                    let (f, b) = objective(&x)?;
                    *s = (x, f, b);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, best_eta, field) = simplex.swap_remove(0);
    if !best_eta.is_finite() {
        return Err(Error::ObjectiveNotFinite);
    }
    let c = at(&x);
    Ok(OptimizationOutcome {
        kappa: c.geometry.kappa,
        lambda: c.drive.lambda12,
        omega: c.drive.omega,
        field,
        best_eta,
        start_eta,
        evaluations: evaluations.get(),
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{preset, Preset};

    #[test]
    fn collapsed_bounds_return_the_point() {
        let cfg = preset(Preset::Baseline);
        let bounds: Vec<ParameterBound> = [FreeParameter::Kappa, FreeParameter::Omega]
            .iter()
            .map(|p| ParameterBound::around(&cfg, *p, 1.0))
            .collect();
        let opts = OptimizeOptions {
            field_range: (-900e-6, 900e-6),
            grid_points: 31,
            exec: Execution::Sequential,
            ..OptimizeOptions::default()
        };
        let out = optimize_sensitivity(&cfg, &bounds, opts).unwrap();
        assert_eq!(out.evaluations, 1);
        assert!(out.converged);
        assert_eq!(out.kappa, cfg.geometry.kappa);
        assert_eq!(Some(out.best_eta), out.start_eta);
    }

    #[test]
    fn bad_bounds_are_rejected() {
        let cfg = preset(Preset::Baseline);
        let b = ParameterBound {
            parameter: FreeParameter::Kappa,
            lo: -1.0,
            hi: 1.0,
        };
        assert!(optimize_sensitivity(&cfg, &[b], OptimizeOptions::default()).is_err());
    }
}
