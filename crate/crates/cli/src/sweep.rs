// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

//! One- and two-axis parameter sweeps over the steady state.

use std::str::FromStr;

use ltm_core::model::{detuning_to_b_field, output_power};
use ltm_core::params::ParamPath;
use ltm_core::sensitivity::dc_sensitivity;
use ltm_core::steady::solve_steady_state;
use ltm_core::units::Quantity;
use ltm_core::{Execution, ModelConfig};

use crate::config::apply_override;
use crate::error::{CliError, Result};
use crate::table::{Column, OutputTable, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// One swept parameter, in canonical units.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub path: ParamPath,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn new(
        path: ParamPath,
        min: f64,
        max: f64,
        points: usize,
        spacing: Spacing,
    ) -> Result<Self> {
        if points < 2 {
            return Err(CliError::usage(format!(
                "axis {} needs at least 2 points",
                path.path()
            )));
        }
        if !(min.is_finite() && max.is_finite()) {
            return Err(CliError::usage(format!(
                "axis {} has a non-finite bound",
                path.path()
            )));
        }
        if spacing == Spacing::Log && !(min > 0.0 && max > 0.0) {
            return Err(CliError::usage(format!(
                "log axis {} needs strictly positive bounds",
                path.path()
            )));
        }
        Ok(Self {
            path,
            min,
            max,
            points,
            spacing,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                let t = k as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * t,
                    Spacing::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                }
            })
            .collect()
    }

    fn column(&self) -> Column {
        Column::new(self.path.path(), self.path.dimension().canonical_unit())
    }
}

/// Parses `path:min:max:points[:log]`, e.g. `drive.delta:-150 MHz:150 MHz:61`.
impl FromStr for Axis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let (path, min, max, points, spacing) = match parts.as_slice() {
            [p, a, b, n] => (p, a, b, n, Spacing::Linear),
            [p, a, b, n, "lin"] => (p, a, b, n, Spacing::Linear),
            [p, a, b, n, "log"] => (p, a, b, n, Spacing::Log),
            _ => {
                return Err(CliError::usage(format!(
                    "axis `{s}` must look like path:min:max:points[:log]"
                )))
            }
        };
        let path: ParamPath = path.parse()?;
        let dim = path.dimension();
        let min = Quantity::parse(min)?.to_canonical(dim)?;
        let max = Quantity::parse(max)?.to_canonical(dim)?;
        let points = points
            .parse()
            .map_err(|_| CliError::usage(format!("bad point count `{points}`")))?;
        Axis::new(path, min, max, points, spacing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    N,
    POut,
    Populations,
    Eta,
}

impl FromStr for Output {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "n" => Ok(Output::N),
            "p_out" | "power" => Ok(Output::POut),
            "populations" | "rho" => Ok(Output::Populations),
            "eta" | "eta_dc" => Ok(Output::Eta),
            other => Err(CliError::usage(format!(
                "unknown output `{other}` (expected n, p_out, populations or eta)"
            ))),
        }
    }
}

pub const POPULATION_COLUMNS: [&str; 9] = [
    "rho11", "rho22", "rho33", "rho44", "rho55", "rho66", "rho77", "rho14_re", "rho14_im",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    /// `key=value` overrides applied before the sweep.
    pub overrides: Vec<String>,
    pub outputs: Vec<Output>,
}

impl SweepSpec {
    fn columns(&self) -> Vec<Column> {
        let mut cols = vec![self.axis1.column()];
        if let Some(a) = &self.axis2 {
            cols.push(a.column());
        }
        for o in &self.outputs {
            match o {
                Output::N => cols.push(Column::new("n", "1")),
                Output::POut => cols.push(Column::new("P_out", "W")),
                Output::Populations => {
                    cols.extend(POPULATION_COLUMNS.iter().map(|c| Column::new(*c, "1")))
                }
                Output::Eta => cols.push(Column::new("eta_dc", "T/sqrt(Hz)")),
            }
        }
        cols
    }
}

fn evaluate(cfg: &ModelConfig, outputs: &[Output]) -> Vec<Option<f64>> {
    let ss = solve_steady_state(cfg).ok();
    let mut row = Vec::new();
    for o in outputs {
        match o {
            Output::N => row.push(ss.as_ref().map(|s| s.n)),
            Output::POut => {
                row.push(ss.as_ref().and_then(|s| output_power(s.n, cfg).ok()));
            }
            Output::Populations => match &ss {
                Some(s) => row.extend(s.aligned().to_array().iter().map(|v| Some(*v))),
                None => row.extend([None; 9]),
            },
            Output::Eta => {
                let b = detuning_to_b_field(cfg.drive.delta, &cfg.constants);
                row.push(dc_sensitivity(cfg, b).ok().and_then(|r| r.eta));
            }
        }
    }
    row
}

/// Evaluates the grid with axis 2 varying fastest. Point failures become
/// empty cells.
pub fn run_sweep(
    spec: &SweepSpec,
    cfg: &ModelConfig,
    provenance: Provenance,
    exec: Execution,
) -> Result<OutputTable> {
    if spec.outputs.is_empty() {
        return Err(CliError::usage("sweep needs at least one output"));
    }
    let mut base = *cfg;
    for o in &spec.overrides {
        apply_override(&mut base, o)?;
    }
    base.validate()?;
    let xs = spec.axis1.values();
    let ys = spec.axis2.as_ref().map(Axis::values);
    let mut points: Vec<(f64, Option<f64>)> = Vec::new();
    for &x in &xs {
        match &ys {
            Some(ys) => points.extend(ys.iter().map(|&y| (x, Some(y)))),
            None => points.push((x, None)),
        }
    }
    let rows = exec.map(&points, |&(x, y)| {
        let mut c = base;
        spec.axis1.path.set(&mut c, x);
        if let (Some(a), Some(y)) = (&spec.axis2, y) {
            a.path.set(&mut c, y);
        }
        let cells = if c.validate().is_ok() {
            evaluate(&c, &spec.outputs)
        } else {
            let width = spec.columns().len() - 1 - usize::from(y.is_some());
            vec![None; width]
        };
        let mut row = vec![Some(x)];
        if y.is_some() {
            row.push(y);
        }
        row.extend(cells);
        row
    });
    let mut table = OutputTable::new(spec.columns(), provenance);
    for r in rows {
        table.push(r);
    }
    Ok(table)
}
