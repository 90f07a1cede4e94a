// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

//! Pre-registered figure reproductions. Each curve is one table; its
//! parameter values are recorded as provenance notes.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use ltm_core::dynamics::relaxation_time;
use ltm_core::model::{b_field_to_detuning, detuning_to_b_field, output_power};
use ltm_core::sensitivity::{
    ac_sensitivity, dc_sensitivity_curve, l27_robustness, linspace, AcMethod, AcSignalModel,
};
use ltm_core::steady::{find_operating_point, solve_steady_state, threshold_pump};
use ltm_core::{Execution, ModelConfig, Preset};

use crate::config::apply_override;
use crate::error::{CliError, Result};
use crate::sweep::{run_sweep, Axis, Output, Spacing, SweepSpec};
use crate::table::{Column, OutputTable, Provenance};

const MHZ: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Fig1b,
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig4,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Fig1b,
        Experiment::Fig2a,
        Experiment::Fig2b,
        Experiment::Fig3a,
        Experiment::Fig3b,
        Experiment::Fig4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig1b => "fig1b",
            Experiment::Fig2a => "fig2a",
            Experiment::Fig2b => "fig2b",
            Experiment::Fig3a => "fig3a",
            Experiment::Fig3b => "fig3b",
            Experiment::Fig4 => "fig4",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                CliError::usage(format!(
                    "unknown experiment `{s}` (expected one of fig1b, fig2a, fig2b, fig3a, fig3b, fig4)"
                ))
            })
    }
}

/// A named curve configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub name: &'static str,
    pub preset: Preset,
    pub config: ModelConfig,
    /// Whether the parameters are the published ones or stand-ins.
    pub published: bool,
}

impl Curve {
    fn provenance(&self, table: impl Into<String>) -> Provenance {
        let c = &self.config;
        Provenance::new(table, c, self.preset.name())
            .note("curve", self.name)
            .note(
                "parameters",
                if self.published {
                    "published"
                } else {
                    "representative (not published)"
                },
            )
            .note("omega_rad_per_s", format!("{:e}", c.drive.omega))
            .note("lambda_rad_per_s", format!("{:e}", c.drive.lambda12))
            .note("kappa_rad_per_s", format!("{:e}", c.geometry.kappa))
            .note("gamma14_rad_per_s", format!("{:e}", c.rates.gamma14))
            .note(
                "nv_concentration",
                format!("{:e}", c.geometry.nv_concentration),
            )
    }
}

fn with_overrides(mut cfg: ModelConfig, overrides: &[String]) -> Result<ModelConfig> {
    for o in overrides {
        apply_override(&mut cfg, o)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// The operating-point curve and its two retuned variants.
pub fn tuning_curves(overrides: &[String]) -> Result<Vec<Curve>> {
    let solid = with_overrides(Preset::Baseline.config(), overrides)?;
    let retuned = |omega: f64| -> Result<ModelConfig> {
        let mut c = solid;
        c.drive.omega = omega;
        Ok(c.with_pump(find_operating_point(&c, omega)?))
    };
    Ok(vec![
        Curve {
            name: "operating_point",
            preset: Preset::Baseline,
            config: solid,
            published: true,
        },
        Curve {
            name: "precision",
            preset: Preset::Baseline,
            config: retuned(1.5 * MHZ)?,
            published: false,
        },
        Curve {
            name: "range",
            preset: Preset::Baseline,
            config: retuned(8.0 * MHZ)?,
            published: false,
        },
    ])
}

/// Every sensitivity curve: the high-sensitivity device plus the tuning set.
pub fn sensitivity_curves(overrides: &[String]) -> Result<Vec<Curve>> {
    let mut curves = vec![Curve {
        name: "high_sensitivity",
        preset: Preset::HighSensitivity,
        config: with_overrides(Preset::HighSensitivity.config(), overrides)?,
        published: true,
    }];
    curves.extend(tuning_curves(overrides)?);
    Ok(curves)
}

/// Field grid shared by the sensitivity figures, tesla.
pub fn sensitivity_fields() -> Vec<f64> {
    linspace(-300e-6, 300e-6, 121)
}

pub fn run_experiment(
    which: Experiment,
    overrides: &[String],
    exec: Execution,
) -> Result<Vec<OutputTable>> {
    match which {
        Experiment::Fig1b => fig1b(overrides, exec),
        Experiment::Fig2a => fig2a(overrides, exec),
        Experiment::Fig2b => fig2b(overrides, exec),
        Experiment::Fig3a => fig3a(overrides, exec),
        Experiment::Fig3b => fig3b(overrides, exec),
        Experiment::Fig4 => fig4(overrides, exec),
    }
}

fn fig1b(overrides: &[String], exec: Execution) -> Result<Vec<OutputTable>> {
    let base = with_overrides(Preset::Baseline.config(), overrides)?;
    let mut out = Vec::new();
    for (name, delta) in [("resonant", 0.0), ("off_resonant", 100.0 * MHZ)] {
        let cfg = base.with_delta(delta);
        let threshold = threshold_pump(&cfg, delta)?;
        let curve = Curve {
            name,
            preset: Preset::Baseline,
            config: cfg,
            published: true,
        };
        let prov = curve
            .provenance(format!("fig1b_{name}"))
            .note("delta_rad_per_s", format!("{delta:e}"))
            .note("lambda_threshold_rad_per_s", format!("{threshold:e}"));
        let spec = SweepSpec {
            axis1: Axis::new(
                ltm_core::params::ParamPath::Lambda,
                0.0,
                4.0 * MHZ,
                201,
                Spacing::Linear,
            )?,
            axis2: None,
            overrides: vec![],
            outputs: vec![Output::N, Output::POut],
        };
        out.push(run_sweep(&spec, &cfg, prov, exec)?);
    }
    Ok(out)
}

fn fig2a(overrides: &[String], exec: Execution) -> Result<Vec<OutputTable>> {
    let cfg = with_overrides(Preset::Baseline.config(), overrides)?;
    let curve = Curve {
        name: "output_map",
        preset: Preset::Baseline,
        config: cfg,
        published: true,
    };
    let spec = SweepSpec {
        axis1: Axis::new(
            ltm_core::params::ParamPath::Delta,
            -150.0 * MHZ,
            150.0 * MHZ,
            61,
            Spacing::Linear,
        )?,
        axis2: Some(Axis::new(
            ltm_core::params::ParamPath::Lambda,
            0.0,
            4.0 * MHZ,
            41,
            Spacing::Linear,
        )?),
        overrides: vec![],
        outputs: vec![Output::POut],
    };
    Ok(vec![run_sweep(
        &spec,
        &cfg,
        curve.provenance("fig2a"),
        exec,
    )?])
}

fn fig2b(overrides: &[String], exec: Execution) -> Result<Vec<OutputTable>> {
    let deltas = linspace(-150.0 * MHZ, 150.0 * MHZ, 301);
    let mut out = Vec::new();
    for curve in tuning_curves(overrides)? {
        let cfg = curve.config;
        let rows = exec.map(&deltas, |&d| {
            let c = cfg.with_delta(d);
            let ss = solve_steady_state(&c).ok();
            let n = ss.map(|s| s.n);
            vec![
                Some(detuning_to_b_field(d, &c.constants)),
                Some(d),
                n,
                n.and_then(|n| output_power(n, &c).ok()),
            ]
        });
        let mut t = OutputTable::new(
            vec![
                Column::new("field", "T"),
                Column::new("drive.delta", "rad/s"),
                Column::new("n", "1"),
                Column::new("P_out", "W"),
            ],
            curve.provenance(format!("fig2b_{}", curve.name)),
        );
        rows.into_iter().for_each(|r| t.push(r));
        out.push(t);
    }
    Ok(out)
}

fn eta_table(curve: &Curve, table: String, fields: &[f64], exec: Execution) -> Result<OutputTable> {
    let results = dc_sensitivity_curve(&curve.config, fields, exec)?;
    let mut t = OutputTable::new(
        vec![
            Column::new("field", "T"),
            Column::new("eta_dc", "T/sqrt(Hz)"),
            Column::new("n", "1"),
            Column::new("slope", "1/T"),
        ],
        curve.provenance(table),
    );
    for (b, r) in fields.iter().zip(results) {
        t.push(vec![
            Some(*b),
            r.as_ref().and_then(|r| r.eta),
            r.as_ref().map(|r| r.n),
            r.as_ref().map(|r| r.slope),
        ]);
    }
    Ok(t)
}

fn fig3a(overrides: &[String], exec: Execution) -> Result<Vec<OutputTable>> {
    let fields = sensitivity_fields();
    sensitivity_curves(overrides)?
        .iter()
        .map(|c| eta_table(c, format!("fig3a_{}", c.name), &fields, exec))
        .collect()
}

/// Signal frequencies of the a.c. figure, Hz.
pub fn fig3b_frequencies() -> Vec<f64> {
    (0..=10).map(|k| 10f64.powf(3.0 + 0.5 * k as f64)).collect()
}

fn fig3b(overrides: &[String], exec: Execution) -> Result<Vec<OutputTable>> {
    let cfg = with_overrides(Preset::HighSensitivity.config(), overrides)?;
    let curve = Curve {
        name: "high_sensitivity",
        preset: Preset::HighSensitivity,
        config: cfg,
        published: true,
    };
    let bias = 164e-6;
    let amplitude = 1e-9;
    let t_r = relaxation_time(&cfg, b_field_to_detuning(bias, &cfg.constants))?;
    let freqs = fig3b_frequencies();
    let rows = exec.map(&freqs, |&f| {
        let sig = AcSignalModel::new(bias, amplitude, TAU * f);
        let r = ac_sensitivity(&cfg, sig, AcMethod::TimeDomain).ok();
        vec![
            Some(f),
            r.as_ref().and_then(|r| r.eta),
            r.as_ref().map(|r| r.slope),
        ]
    });
    let mut t = OutputTable::new(
        vec![
            Column::new("frequency", "Hz"),
            Column::new("eta_ac", "T/sqrt(Hz)"),
            Column::new("response", "1/T"),
        ],
        curve
            .provenance("fig3b")
            .note("bias_T", format!("{bias:e}"))
            .note("amplitude_T", format!("{amplitude:e}"))
            .note("relaxation_time_s", format!("{t_r:e}")),
    );
    rows.into_iter().for_each(|r| t.push(r));
    Ok(vec![t])
}

fn fig4(overrides: &[String], exec: Execution) -> Result<Vec<OutputTable>> {
    let fields = sensitivity_fields();
    let ratios = [0.1, 0.01];
    let mut out = Vec::new();
    for curve in sensitivity_curves(overrides)? {
        let r = l27_robustness(&curve.config, &ratios, &fields, exec)?;
        let mut reference_cfg = curve.config;
        reference_cfg.rates.l27 = 0.0;
        let mut prov = Provenance::new(
            format!("fig4_{}", curve.name),
            &reference_cfg,
            curve.preset.name(),
        )
        .note("curve", curve.name);
        for c in &r.curves {
            prov = prov
                .note(
                    format!("max_rel_deviation_{}", c.ratio),
                    format!("{:e}", c.max_rel_deviation),
                )
                .note(format!("mismatched_points_{}", c.ratio), c.mismatched);
        }
        let mut cols = vec![
            Column::new("field", "T"),
            Column::new("eta_dc_l27_0", "T/sqrt(Hz)"),
        ];
        cols.extend(
            r.curves
                .iter()
                .map(|c| Column::new(format!("eta_dc_l27_{}", c.ratio), "T/sqrt(Hz)")),
        );
        let mut t = OutputTable::new(cols, prov);
        for (k, b) in r.fields.iter().enumerate() {
            let mut row = vec![Some(*b), r.reference[k]];
            row.extend(r.curves.iter().map(|c| c.eta[k]));
            t.push(row);
        }
        out.push(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("fig9".parse::<Experiment>().is_err());
    }

    #[test]
    fn fig1b_threshold_ordering() {
        let t = fig1b(&[], Execution::Sequential).unwrap();
        assert_eq!(t.len(), 2);
        let th = |t: &OutputTable| -> f64 {
            let (_, v) = t
                .provenance
                .notes
                .iter()
                .find(|(k, _)| k == "lambda_threshold_rad_per_s")
                .unwrap();
            v.parse().unwrap()
        };
        assert!(th(&t[0]) > th(&t[1]));
        let p = t[1].column("P_out").unwrap();
        assert_eq!(p[0], Some(0.0));
        assert!(p.last().unwrap().unwrap() > 0.0);
    }
}
