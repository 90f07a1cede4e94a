// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

//! Adaptive linearly-implicit Rosenbrock integrator for stiff systems.
//!
//! Four stages, order 4 with an embedded order-3 error estimate, using
//! Shampine's coefficient set for the Kaps–Rentrop family (stability
//! function tends to 1/3 at infinity). Each step costs one Jacobian, one LU
//! of `I/(γh) − J` and four back-substitutions. Linear invariants of the
//! right-hand side (here: the trace of the density matrix) are conserved up
//! to round-off.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const GAM: f64 = 0.5;
const A21: f64 = 2.0;
const A31: f64 = 48.0 / 25.0;
const A32: f64 = 6.0 / 25.0;
const C21: f64 = -8.0;
const C31: f64 = 372.0 / 25.0;
const C32: f64 = 12.0 / 5.0;
const C41: f64 = -112.0 / 125.0;
const C42: f64 = -54.0 / 125.0;
const C43: f64 = -2.0 / 5.0;
const B1: f64 = 19.0 / 9.0;
const B2: f64 = 0.5;
const B3: f64 = 25.0 / 108.0;
const B4: f64 = 125.0 / 108.0;
const E1: f64 = 17.0 / 54.0;
const E2: f64 = 7.0 / 36.0;
const E3: f64 = 0.0;
const E4: f64 = 125.0 / 108.0;
const C1X: f64 = 0.5;
const C2X: f64 = -1.5;
const C3X: f64 = 121.0 / 50.0;
const C4X: f64 = 29.0 / 250.0;
const A2X: f64 = 1.0;
const A3X: f64 = 3.0 / 5.0;

const SAFETY: f64 = 0.9;
const MAX_GROWTH: f64 = 5.0;
const MIN_SHRINK: f64 = 0.2;

/// A first-order system y' = f(t, y) with analytic Jacobian.
pub trait OdeSystem {
    fn dim(&self) -> usize;

    fn rhs(&self, t: f64, y: &DVector<f64>, dy: &mut DVector<f64>);

    /// ∂f/∂y.
    fn jacobian(&self, t: f64, y: &DVector<f64>, jac: &mut DMatrix<f64>);

    /// ∂f/∂t; zero for autonomous systems.
    fn time_derivative(&self, _t: f64, _y: &DVector<f64>, out: &mut DVector<f64>) {
        out.fill(0.0);
    }

    /// Times at which f is discontinuous; steps never straddle them.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Projects an accepted state back onto the admissible set. Returns the
    /// number of components that were clamped.
    fn project(&self, _t: f64, _y: &mut DVector<f64>) -> Result<usize> {
        Ok(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerances {
    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        if !(rel > 0.0 && abs > 0.0 && rel.is_finite() && abs.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tolerances must be positive, got rel={rel:e}, abs={abs:e}"
            )));
        }
        Ok(Self { rel, abs })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub clamped: usize,
}

/// Integrator state between steps.
pub struct Stepper<'a, S: OdeSystem> {
    sys: &'a S,
    tol: Tolerances,
    t: f64,
    y: DVector<f64>,
    dy: DVector<f64>,
    h: f64,
    breakpoints: Vec<f64>,
    pub stats: StepStats,
    pub max_steps: usize,
    jac: DMatrix<f64>,
    dfdt: DVector<f64>,
}

impl<'a, S: OdeSystem> Stepper<'a, S> {
    pub fn new(sys: &'a S, t0: f64, y0: DVector<f64>, tol: Tolerances) -> Self {
        let n = sys.dim();
        assert_eq!(y0.len(), n, "initial state has the wrong dimension");
        let mut dy = DVector::zeros(n);
        sys.rhs(t0, &y0, &mut dy);
        let mut breakpoints: Vec<f64> = sys.breakpoints().into_iter().filter(|b| *b > t0).collect();
        breakpoints.sort_by(f64::total_cmp);
        let h = initial_step(&y0, &dy, tol);
        Self {
            sys,
            tol,
            t: t0,
            y: y0,
            dy,
            h,
            breakpoints,
            stats: StepStats::default(),
            max_steps: 20_000_000,
            jac: DMatrix::zeros(n, n),
            dfdt: DVector::zeros(n),
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn dy(&self) -> &DVector<f64> {
        &self.dy
    }

    fn err_norm(&self, y_new: &DVector<f64>, err: &DVector<f64>) -> f64 {
        let n = err.len() as f64;
        let s: f64 = err
            .iter()
            .zip(self.y.iter().zip(y_new.iter()))
            .map(|(e, (a, b))| {
                let sc = self.tol.abs + self.tol.rel * a.abs().max(b.abs());
                (e / sc).powi(2)
            })
            .sum();
        (s / n).sqrt()
    }

    /// Advances by one accepted step that does not pass `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<()> {
        if self.stats.accepted + self.stats.rejected >= self.max_steps {
            return Err(Error::StiffnessFailure {
                t: self.t,
                h: self.h,
                state: self.y.as_slice().to_vec(),
            });
        }
        let mut t_stop = t_limit;
        if let Some(b) = self.breakpoints.iter().find(|b| **b > self.t) {
            t_stop = t_stop.min(*b);
        }
        let span = t_stop - self.t;
        if span <= 0.0 {
            return Ok(());
        }
        let n = self.sys.dim();
        self.sys.jacobian(self.t, &self.y, &mut self.jac);
        self.sys.time_derivative(self.t, &self.y, &mut self.dfdt);

        let mut h = self.h.min(span);
        let mut rejected_here = false;
        loop {
            // Land exactly on t_stop when close to it.
            if h >= span * (1.0 - 1e-12) || span - h < 1e-3 * h {
                h = span;
            }
            let min_h = (4.0 * f64::EPSILON * self.t.abs()).max(1e-300);
            if h < min_h {
                return Err(Error::StiffnessFailure {
                    t: self.t,
                    h,
                    state: self.y.as_slice().to_vec(),
                });
            }

            let mut w = -self.jac.clone();
            for i in 0..n {
                w[(i, i)] += 1.0 / (GAM * h);
            }
            let lu = w.lu();
            let solve = |b: DVector<f64>| -> Option<DVector<f64>> { lu.solve(&b) };

            let t0 = self.t;
            let y0 = &self.y;
            let dfdt = &self.dfdt;
            let stage = || -> Option<(DVector<f64>, DVector<f64>)> {
                let g1 = solve(&self.dy + dfdt * (h * C1X))?;
                let mut f = DVector::zeros(n);
                self.sys.rhs(t0 + A2X * h, &(y0 + &g1 * A21), &mut f);
                let g2 = solve(&f + dfdt * (h * C2X) + &g1 * (C21 / h))?;
                let y3 = y0 + &g1 * A31 + &g2 * A32;
                self.sys.rhs(t0 + A3X * h, &y3, &mut f);
                let g3 = solve(&f + dfdt * (h * C3X) + (&g1 * C31 + &g2 * C32) / h)?;
                let g4 = solve(&f + dfdt * (h * C4X) + (&g1 * C41 + &g2 * C42 + &g3 * C43) / h)?;
                let y_new = y0 + &g1 * B1 + &g2 * B2 + &g3 * B3 + &g4 * B4;
                let err = &g1 * E1 + &g2 * E2 + &g3 * E3 + &g4 * E4;
                Some((y_new, err))
            };

            let (errn, y_new) = match stage() {
                Some((y_new, err)) if y_new.iter().all(|v| v.is_finite()) => {
                    (self.err_norm(&y_new, &err), y_new)
                }
                _ => (f64::INFINITY, self.y.clone()),
            };

            if errn <= 1.0 {
                let mut y_new = y_new;
                let t_new = if h == span { t_stop } else { self.t + h };
                self.stats.clamped += self.sys.project(t_new, &mut y_new)?;
                self.t = t_new;
                self.y = y_new;
                self.sys.rhs(self.t, &self.y, &mut self.dy);
                self.stats.accepted += 1;
                let mut factor = if errn == 0.0 {
                    MAX_GROWTH
                } else {
                    (SAFETY * errn.powf(-0.25)).clamp(MIN_SHRINK, MAX_GROWTH)
                };
                if rejected_here {
                    factor = factor.min(1.0);
                }
                // Keep the untruncated step size when we only shortened h to
                // land on t_stop.
                self.h = (h * factor).max(if h == span { self.h } else { 0.0 });
                return Ok(());
            }
            self.stats.rejected += 1;
            rejected_here = true;
            let factor = if errn.is_finite() {
                (SAFETY * errn.powf(-0.25)).clamp(MIN_SHRINK, 1.0)
            } else {
                0.1
            };
            h *= factor;
        }
    }

    /// Steps until `t_end` is reached exactly.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        while self.t < t_end {
            self.step(t_end)?;
        }
        Ok(())
    }
}

fn initial_step(y: &DVector<f64>, dy: &DVector<f64>, tol: Tolerances) -> f64 {
    let n = y.len() as f64;
    let (mut d0, mut d1) = (0.0, 0.0);
    for (a, b) in y.iter().zip(dy.iter()) {
        let sc = tol.abs + tol.rel * a.abs();
        d0 += (a / sc).powi(2);
        d1 += (b / sc).powi(2);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    if d0 < 1e-5 || d1 < 1e-5 {
        1e-9
    } else {
        (0.01 * d0 / d1).min(1e-3)
    }
}

/// Cubic Hermite interpolant between two accepted steps.
pub fn hermite(t0: f64, y0: f64, f0: f64, t1: f64, y1: f64, f1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1
}
