// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

//! Independent checks of the solvers: closed forms where they exist and a
//! separate transcription of the equations of motion.

use approx::assert_relative_eq;
use ltm_core::model::{detuning_to_b_field, output_power, preset, CARBON_NUMBER_DENSITY};
use ltm_core::sensitivity::dc_sensitivity;
use ltm_core::steady::{solve_steady_state, threshold_pump};
use ltm_core::{ModelConfig, PopulationState, Preset};

fn baseline() -> ModelConfig {
    preset(Preset::Baseline)
}

/// Right-hand side written out term by term, independent of the library.
fn equations_of_motion(cfg: &ModelConfig, g: f64, p: &PopulationState, n: f64) -> [f64; 10] {
    let r = &cfg.rates;
    let d = &cfg.drive;
    let (l12, l45, om, de) = (d.lambda12, d.lambda45, d.omega, d.delta);
    let (re, im) = (p.rho14_re, p.rho14_im);
    let gam = r.gamma14 + l12 / 2.0 + l45 / 2.0;
    [
        -l12 * p.rho11 + r.l21 * p.rho22 + r.l31 * p.rho33 + r.l71 * p.rho77 - 2.0 * om * im,
        l12 * p.rho11 - (r.l21 + r.l23 + r.l27) * p.rho22 - g * n * (p.rho22 - p.rho33),
        r.l23 * p.rho22 - r.l31 * p.rho33 + g * n * (p.rho22 - p.rho33),
        -l45 * p.rho44 + r.l54 * p.rho55 + r.l64 * p.rho66 + r.l74 * p.rho77 + 2.0 * om * im,
        l45 * p.rho44 - (r.l54 + r.l56 + r.l57) * p.rho55 - g * n * (p.rho55 - p.rho66),
        r.l56 * p.rho55 - r.l64 * p.rho66 + g * n * (p.rho55 - p.rho66),
        r.l57 * p.rho55 + r.l27 * p.rho22 - (r.l71 + r.l74) * p.rho77,
        -gam * re - de * im,
        de * re - gam * im + om * (p.rho11 - p.rho44),
        n * (g * (p.rho22 - p.rho33 + p.rho55 - p.rho66) - cfg.geometry.kappa),
    ]
}

#[test]
fn steady_states_satisfy_transcribed_equations() {
    for (which, deltas) in [
        (Preset::Baseline, [0.0, 20e6, 100e6, -70e6]),
        (Preset::HighSensitivity, [0.0, 30e6, 60e6, 300e6]),
    ] {
        for delta in deltas {
            let cfg = preset(which).with_delta(delta);
            let g = cfg.gain_coupling().unwrap();
            let ss = solve_steady_state(&cfg).unwrap();
            let f = equations_of_motion(&cfg, g, ss.aligned(), ss.n);
            let scale = cfg.max_rate();
            for (k, v) in f.iter().enumerate().take(9) {
                assert!(
                    v.abs() <= 1e-8 * scale,
                    "{which:?} Δ={delta:e}: eq {k} = {v:e}"
                );
            }
            let ndot = f[9] / cfg.geometry.kappa;
            assert!(ndot.abs() <= 1e-8 * ss.n.max(1e-30), "ṅ/κ = {ndot:e}");
        }
    }
}

/// Without RF drive the spin-1 manifold drains through the singlet and the
/// problem reduces to a three-level laser with a linear stationary system in
/// (ρ₁₁, ρ₂₂, ρ₃₃, n) once the gain is clamped at κ.
fn undriven_lasing(cfg: &ModelConfig, g: f64) -> (f64, [f64; 3]) {
    let r = &cfg.rates;
    let lam = cfg.drive.lambda12;
    let kappa = cfg.geometry.kappa;
    let inv = kappa / g;
    // ρ₃₃(L₃₁ − L₂₃) = L₂₃·D + κn
    // Λρ₁₁ = (L₂₁ + L₂₃)ρ₂₂ + κn
    // ρ₂₂ = D + ρ₃₃, ρ₁₁ + ρ₂₂ + ρ₃₃ = 1
    let a = r.l23 * inv / (r.l31 - r.l23);
    let b = kappa / (r.l31 - r.l23);
    // ρ₃₃ = a + b·n, ρ₂₂ = inv + a + b·n
    // ρ₁₁ = ((L₂₁+L₂₃)(inv + a + b n) + κ n)/Λ
    let k = r.l21 + r.l23;
    let c0 = k * (inv + a) / lam;
    let c1 = (k * b + kappa) / lam;
    // c0 + c1 n + inv + 2a + 2b n = 1
    let n = (1.0 - c0 - inv - 2.0 * a) / (c1 + 2.0 * b);
    let rho33 = a + b * n;
    let rho22 = inv + rho33;
    (n, [1.0 - rho22 - rho33, rho22, rho33])
}

#[test]
fn undriven_laser_matches_closed_form() {
    for lam in [1.5e6, 3e6, 10e6] {
        let mut cfg = baseline().with_pump(lam);
        cfg.drive.omega = 0.0;
        let g = cfg.gain_coupling().unwrap();
        let ss = solve_steady_state(&cfg).unwrap();
        let (n, pops) = undriven_lasing(&cfg, g);
        assert!(n > 0.0);
        assert_relative_eq!(ss.n, n, max_relative = 1e-9);
        let p = ss.aligned();
        assert_relative_eq!(p.rho11, pops[0], max_relative = 1e-9);
        assert_relative_eq!(p.rho22, pops[1], max_relative = 1e-9);
        assert_relative_eq!(p.rho33, pops[2], max_relative = 1e-9);
        assert!(p.rho44.abs() < 1e-12 && p.rho55.abs() < 1e-12 && p.rho77.abs() < 1e-12);
    }
}

#[test]
fn undriven_threshold_matches_closed_form() {
    let mut cfg = baseline();
    cfg.drive.omega = 0.0;
    let r = cfg.rates;
    let g = cfg.gain_coupling().unwrap();
    // ρ₂₂ − ρ₃₃ = κ/G at n = 0 with ρ₂₂ = Λρ₁₁/(L₂₁+L₂₃), ρ₃₃ = L₂₃ρ₂₂/L₃₁.
    let a = 1.0 / (r.l21 + r.l23);
    let c = 1.0 + r.l23 / r.l31;
    let k = cfg.geometry.kappa / (g * (1.0 - r.l23 / r.l31));
    let expected = k / (a * (1.0 - k * c));
    let got = threshold_pump(&cfg, 0.0).unwrap();
    assert_relative_eq!(got, expected, max_relative = 1e-10);
}

#[test]
fn derived_constants_by_hand() {
    let cfg = baseline();
    let d = cfg.derived().unwrap();
    let n_at = 5.7e-9 * CARBON_NUMBER_DENSITY * 1e-9;
    assert_relative_eq!(d.n_atoms, n_at, max_relative = 1e-12);
    let nu = 299_792_458.0 / 709e-9;
    let lam: f64 = 709e-9 / 2.4;
    let g =
        3.0 * nu * 18e6 * lam.powi(3) * n_at / (4.0 * std::f64::consts::PI.powi(2) * 24e12 * 2e-9);
    assert_relative_eq!(d.g_rate, g, max_relative = 1e-12);
    assert_relative_eq!(d.g_rate, 308e6, max_relative = 0.02);
    assert_relative_eq!(d.quality_factor, 8.9e8, max_relative = 0.01);
    // 1 MHz of detuning corresponds to 5.68 uT.
    assert_relative_eq!(
        detuning_to_b_field(1e6, &cfg.constants),
        5.68e-6,
        max_relative = 0.005
    );
    // One photon per centre at κ = 3 MHz.
    let p = output_power(1.0, &cfg).unwrap();
    assert_relative_eq!(p, n_at * 3e6 * 6.626_070_15e-34 * nu, max_relative = 1e-9);
}

#[test]
fn shot_factor_halves_with_four_times_the_centres() {
    let mut cfg = baseline();
    cfg.g_override = Some(308e6);
    let b = detuning_to_b_field(60e6, &cfg.constants);
    let one = dc_sensitivity(&cfg, b).unwrap();
    let mut more = cfg;
    more.geometry.nv_concentration *= 4.0;
    let four = dc_sensitivity(&more, b).unwrap();
    assert_eq!(four.n, one.n);
    assert_eq!(four.shot_factor, 0.5 * one.shot_factor);
    assert_eq!(four.eta.unwrap(), 0.5 * one.eta.unwrap());
}
