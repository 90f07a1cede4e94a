// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

//! Quadrature demodulation of a sampled periodic signal.

use serde::{Deserialize, Serialize};

/// First-harmonic content of a sampled photon-number trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicResult {
    /// Mean photon number over the measured window.
    pub n_o: f64,
    /// First-harmonic amplitude.
    pub n_s: f64,
    /// Phase of the first harmonic relative to cos(ωt), radians.
    pub phase: f64,
    /// Power outside the first harmonic relative to the first-harmonic power.
    pub distortion: f64,
    /// Relaxation time used to size the transient, seconds (0 if not set).
    pub relaxation_time: f64,
}

/// Demodulates `samples` taken at `times` against cos/sin(`omega`·t).
///
/// The window must span an integer number of periods with uniform spacing for
/// the projections to be exact.
pub fn demodulate(samples: &[f64], times: &[f64], omega: f64) -> HarmonicResult {
    assert_eq!(
        samples.len(),
        times.len(),
        "samples and times differ in length"
    );
    let len = samples.len().max(1) as f64;
    let mean = samples.iter().sum::<f64>() / len;
    let (mut i, mut q, mut var) = (0.0, 0.0, 0.0);
    for (&x, &t) in samples.iter().zip(times) {
        let d = x - mean;
        i += d * (omega * t).cos();
        q += d * (omega * t).sin();
        var += d * d;
    }
    i *= 2.0 / len;
    q *= 2.0 / len;
    var /= len;
    let n_s = i.hypot(q);
    let fundamental = 0.5 * n_s * n_s;
    let distortion = if fundamental > 0.0 {
        ((var - fundamental) / fundamental).max(0.0)
    } else {
        0.0
    };
    HarmonicResult {
        n_o: mean,
        n_s,
        phase: q.atan2(i),
        distortion,
        relaxation_time: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn grid(periods: usize, k: usize, omega: f64) -> Vec<f64> {
        let p = TAU / omega;
        (0..periods * k)
            .map(|j| 3.0 * p + j as f64 * p / k as f64)
            .collect()
    }

    #[test]
    fn recovers_pure_tone() {
        let omega = TAU * 1e3;
        let t = grid(10, 64, omega);
        let x: Vec<f64> = t
            .iter()
            .map(|&t| 5.0 + 0.3 * (omega * t - 0.4).cos())
            .collect();
        let r = demodulate(&x, &t, omega);
        assert!((r.n_o - 5.0).abs() < 1e-12);
        assert!((r.n_s - 0.3).abs() < 1e-12);
        assert!((r.phase - 0.4).abs() < 1e-10);
        assert!(r.distortion < 1e-12);
    }

    #[test]
    fn harmonic_shows_up_as_distortion() {
        let omega = TAU * 50.0;
        let t = grid(12, 32, omega);
        let x: Vec<f64> = t
            .iter()
            .map(|&t| 1.0 + (omega * t).cos() + 0.1 * (2.0 * omega * t).cos())
            .collect();
        let r = demodulate(&x, &t, omega);
        assert!((r.n_s - 1.0).abs() < 1e-12);
        assert!((r.distortion - 0.01).abs() < 1e-12);
    }
}
