// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

//! Command-line surface.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ltm_core::dynamics::{
    ac_response, integrate_sampled, step_response, DriveModulation, StateVector, TimeSeries,
    DEFAULT_SEED_N,
};
use ltm_core::model::{detuning_to_b_field, output_power};
use ltm_core::params::ParamPath;
use ltm_core::sensitivity::{
    ac_sensitivity, dc_sensitivity, dc_sensitivity_curve, optimize_sensitivity, AcMethod,
    AcSignalModel, FreeParameter, OptimizeOptions, ParameterBound,
};
use ltm_core::steady::{find_operating_point, solve_steady_state, threshold_pump};
use ltm_core::units::{Dimension, Quantity};
use ltm_core::{Execution, Preset};

use crate::config::{apply_override, load_config_file, ResolvedConfig};
use crate::error::{CliError, Result};
use crate::experiments::{run_experiment, Experiment};
use crate::sweep::{run_sweep, Axis, Output, SweepSpec, POPULATION_COLUMNS};
use crate::table::{Column, OutputTable, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "ltm",
    version,
    about = "NV laser threshold magnetometer simulator"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Named parameter set (baseline, high_sensitivity).
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// TOML or JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Parameter override `path=value [unit]`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output file; several tables go to `<stem>_<table>.<ext>`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Evaluate grids on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stationary populations and photon number.
    SteadyState(PointArgs),
    /// One- or two-axis parameter sweep.
    Sweep(SweepArgs),
    /// Turn-on/turn-off times after a detuning step.
    Response(ResponseArgs),
    /// Harmonic response to an oscillating field.
    Ac(AcArgs),
    /// Shot-noise-limited d.c. sensitivity.
    SensitivityDc(DcArgs),
    /// Shot-noise-limited a.c. sensitivity.
    SensitivityAc(SensAcArgs),
    /// Pump rate that puts the resonant laser exactly at threshold.
    OperatingPoint(OperatingPointArgs),
    /// Minimise the d.c. sensitivity over kappa, lambda and omega.
    Optimize(OptimizeArgs),
    /// Reproduce a published figure.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct PointArgs {
    /// RF detuning, e.g. `100 MHz`.
    #[arg(long, conflicts_with = "field", allow_hyphen_values = true)]
    pub delta: Option<String>,
    /// External field, e.g. `164 uT`.
    #[arg(long, allow_hyphen_values = true)]
    pub field: Option<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// `path:min:max:points[:log]`.
    #[arg(long)]
    pub axis1: String,
    /// Second axis; varies fastest.
    #[arg(long)]
    pub axis2: Option<String>,
    /// Comma-separated: n, p_out, populations, eta.
    #[arg(long, default_value = "n,p_out")]
    pub outputs: String,
}

#[derive(Debug, Args)]
pub struct ResponseArgs {
    /// Detuning before the step.
    #[arg(long, default_value = "0 MHz", allow_hyphen_values = true)]
    pub from: String,
    /// Detuning after the step.
    #[arg(long, default_value = "100 MHz", allow_hyphen_values = true)]
    pub to: String,
    /// Photon seed added to a dark start.
    #[arg(long, default_value_t = DEFAULT_SEED_N)]
    pub seed_n: f64,
    /// Also emit the sampled trajectory.
    #[arg(long)]
    pub trace: bool,
    /// Samples in the trajectory.
    #[arg(long, default_value_t = 400)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct SignalArgs {
    /// d.c. bias field.
    #[arg(long, default_value = "164 uT", allow_hyphen_values = true)]
    pub bias: String,
    /// Signal amplitude.
    #[arg(long, default_value = "1 nT")]
    pub amplitude: String,
    /// Signal frequency (ordinary).
    #[arg(long, default_value = "1 kHz")]
    pub frequency: String,
}

#[derive(Debug, Args)]
pub struct AcArgs {
    #[command(flatten)]
    pub signal: SignalArgs,
}

#[derive(Debug, Args)]
pub struct DcArgs {
    /// Single field value.
    #[arg(long, conflicts_with = "range", allow_hyphen_values = true)]
    pub field: Option<String>,
    /// Field grid `min:max:points`.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AcMethodArg {
    TimeDomain,
    QuasiStatic,
}

#[derive(Debug, Args)]
pub struct SensAcArgs {
    #[command(flatten)]
    pub signal: SignalArgs,
    #[arg(long, value_enum, default_value_t = AcMethodArg::TimeDomain)]
    pub method: AcMethodArg,
    /// Signal-contribution factor of the shot-noise term.
    #[arg(long)]
    pub i_factor: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OperatingPointArgs {
    /// Rabi rate; defaults to the configured one.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Comma-separated free parameters.
    #[arg(long, default_value = "kappa,lambda,omega")]
    pub vary: String,
    /// Bounds are the current value divided and multiplied by this factor.
    #[arg(long, default_value_t = 10.0)]
    pub factor: f64,
    #[arg(long, default_value_t = 150)]
    pub max_evaluations: usize,
    /// Field window `min:max` of the inner search.
    #[arg(long, default_value = "-300 uT:300 uT", allow_hyphen_values = true)]
    pub window: String,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// fig1b, fig2a, fig2b, fig3a, fig3b or fig4.
    pub name: String,
}

fn quantity(text: &str, dim: Dimension) -> Result<f64> {
    Ok(Quantity::parse(text)?.to_canonical(dim)?)
}

/// Builds the configuration from preset, file and overrides, in that order.
pub fn resolve(global: &GlobalArgs) -> Result<ResolvedConfig> {
    let preset = global
        .preset
        .as_deref()
        .map(str::parse::<Preset>)
        .transpose()?;
    let mut resolved = match &global.config {
        Some(path) => load_config_file(path, preset)?,
        None => ResolvedConfig::from_preset(preset.unwrap_or(Preset::Baseline)),
    };
    for o in &global.overrides {
        apply_override(&mut resolved.config, o)?;
    }
    resolved.config.validate()?;
    Ok(resolved)
}

fn provenance(r: &ResolvedConfig, table: &str) -> Provenance {
    Provenance::new(table, &r.config, r.preset_name())
}

fn one_row(columns: Vec<Column>, row: Vec<Option<f64>>, prov: Provenance) -> OutputTable {
    let mut t = OutputTable::new(columns, prov);
    t.push(row);
    t
}

pub fn time_series_table(ts: &TimeSeries, prov: Provenance) -> Result<OutputTable> {
    let mut cols = vec![Column::new("t", "s")];
    cols.extend(POPULATION_COLUMNS.iter().map(|c| Column::new(*c, "1")));
    cols.push(Column::new("n", "1"));
    cols.push(Column::new("P_out_W", "W"));
    let mut t = OutputTable::new(cols, prov);
    for (time, s) in ts.times.iter().zip(&ts.states) {
        let mut row = vec![Some(*time)];
        row.extend(s.ensembles[0].to_array().iter().map(|v| Some(*v)));
        row.push(Some(s.n));
        row.push(Some(output_power(s.n.max(0.0), &ts.config)?));
        t.push(row);
    }
    Ok(t)
}

fn steady_state(r: &ResolvedConfig, a: &PointArgs) -> Result<Vec<OutputTable>> {
    let mut cfg = r.config;
    if let Some(d) = &a.delta {
        cfg = cfg.with_delta(quantity(d, Dimension::Rate)?);
    }
    if let Some(b) = &a.field {
        cfg = cfg.with_field(quantity(b, Dimension::MagneticField)?);
    }
    let ss = solve_steady_state(&cfg)?;
    let mut cols = vec![
        Column::new("drive.delta", "rad/s"),
        Column::new("field", "T"),
        Column::new("n", "1"),
        Column::new("P_out", "W"),
        Column::new("lasing", "1"),
        Column::new("net_gain", "rad/s"),
        Column::new("residual", "rad/s"),
    ];
    cols.extend(POPULATION_COLUMNS.iter().map(|c| Column::new(*c, "1")));
    let mut row = vec![
        Some(cfg.drive.delta),
        Some(detuning_to_b_field(cfg.drive.delta, &cfg.constants)),
        Some(ss.n),
        Some(output_power(ss.n, &cfg)?),
        Some(if ss.is_lasing() { 1.0 } else { 0.0 }),
        Some(ss.net_gain_at_n),
        Some(ss.residual),
    ];
    row.extend(ss.aligned().to_array().iter().map(|v| Some(*v)));
    let prov = Provenance::new("steady_state", &cfg, r.preset_name());
    Ok(vec![one_row(cols, row, prov)])
}

fn sweep(r: &ResolvedConfig, a: &SweepArgs, exec: Execution) -> Result<Vec<OutputTable>> {
    let spec = SweepSpec {
        axis1: a.axis1.parse::<Axis>()?,
        axis2: a.axis2.as_deref().map(str::parse::<Axis>).transpose()?,
        overrides: vec![],
        outputs: a
            .outputs
            .split(',')
            .map(str::parse::<Output>)
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(vec![run_sweep(
        &spec,
        &r.config,
        provenance(r, "sweep"),
        exec,
    )?])
}

fn response(r: &ResolvedConfig, a: &ResponseArgs) -> Result<Vec<OutputTable>> {
    let cfg = r.config;
    let from = quantity(&a.from, Dimension::Rate)?;
    let to = quantity(&a.to, Dimension::Rate)?;
    let res = step_response(&cfg, from, to, a.seed_n)?;
    let summary = one_row(
        vec![
            Column::new("delta_before", "rad/s"),
            Column::new("delta_after", "rad/s"),
            Column::new("t_63", "s"),
            Column::new("t_90", "s"),
            Column::new("n_initial", "1"),
            Column::new("n_final", "1"),
        ],
        vec![
            Some(from),
            Some(to),
            Some(res.t_63),
            Some(res.t_90),
            Some(res.initial.n),
            Some(res.r#final.n),
        ],
        provenance(r, "response"),
    );
    let mut out = vec![summary];
    if a.trace {
        if a.samples < 2 {
            return Err(CliError::usage("--samples must be at least 2"));
        }
        let mut start = StateVector::from_steady(&res.initial);
        start.n = start.n.max(a.seed_n);
        let t_end = 3.0 * res.t_90;
        let times: Vec<f64> = (0..a.samples)
            .map(|k| t_end * k as f64 / (a.samples - 1) as f64)
            .collect();
        let ts = integrate_sampled(
            &cfg,
            &start,
            &times,
            DriveModulation::Constant { delta: to },
            1e-9,
            1e-15,
        )?;
        out.push(time_series_table(&ts, provenance(r, "trace"))?);
    }
    Ok(out)
}

fn signal(a: &SignalArgs) -> Result<AcSignalModel> {
    Ok(AcSignalModel::new(
        quantity(&a.bias, Dimension::MagneticField)?,
        quantity(&a.amplitude, Dimension::MagneticField)?,
        TAU * quantity(&a.frequency, Dimension::Frequency)?,
    ))
}

fn ac(r: &ResolvedConfig, a: &AcArgs) -> Result<Vec<OutputTable>> {
    let s = signal(&a.signal)?;
    let h = ac_response(&r.config, s.bias, s.amplitude, s.omega)?;
    Ok(vec![one_row(
        vec![
            Column::new("bias", "T"),
            Column::new("amplitude", "T"),
            Column::new("frequency", "Hz"),
            Column::new("n_o", "1"),
            Column::new("n_s", "1"),
            Column::new("phase", "rad"),
            Column::new("distortion", "1"),
            Column::new("relaxation_time", "s"),
        ],
        vec![
            Some(s.bias),
            Some(s.amplitude),
            Some(s.omega / TAU),
            Some(h.n_o),
            Some(h.n_s),
            Some(h.phase),
            Some(h.distortion),
            Some(h.relaxation_time),
        ],
        provenance(r, "ac_response"),
    )])
}

fn eta_columns() -> Vec<Column> {
    vec![
        Column::new("field", "T"),
        Column::new("eta_dc", "T/sqrt(Hz)"),
        Column::new("n", "1"),
        Column::new("slope", "1/T"),
        Column::new("fd_step", "T"),
    ]
}

fn sensitivity_dc(r: &ResolvedConfig, a: &DcArgs, exec: Execution) -> Result<Vec<OutputTable>> {
    let mut t = OutputTable::new(eta_columns(), provenance(r, "sensitivity_dc"));
    match (&a.field, &a.range) {
        (_, Some(range)) => {
            let parts: Vec<&str> = range.split(':').collect();
            let [lo, hi, n] = parts.as_slice() else {
                return Err(CliError::usage("--range must look like min:max:points"));
            };
            let axis = Axis::new(
                ParamPath::Field,
                quantity(lo, Dimension::MagneticField)?,
                quantity(hi, Dimension::MagneticField)?,
                n.trim()
                    .parse()
                    .map_err(|_| CliError::usage(format!("bad point count `{n}`")))?,
                crate::sweep::Spacing::Linear,
            )?;
            let fields = axis.values();
            for (b, res) in fields
                .iter()
                .zip(dc_sensitivity_curve(&r.config, &fields, exec)?)
            {
                t.push(vec![
                    Some(*b),
                    res.as_ref().and_then(|s| s.eta),
                    res.as_ref().map(|s| s.n),
                    res.as_ref().map(|s| s.slope),
                    res.as_ref().and_then(|s| s.fd_step),
                ]);
            }
        }
        (field, None) => {
            let b = match field {
                Some(f) => quantity(f, Dimension::MagneticField)?,
                None => detuning_to_b_field(r.config.drive.delta, &r.config.constants),
            };
            let s = dc_sensitivity(&r.config, b)?;
            t.push(vec![Some(b), s.eta, Some(s.n), Some(s.slope), s.fd_step]);
        }
    }
    Ok(vec![t])
}

fn sensitivity_ac(r: &ResolvedConfig, a: &SensAcArgs) -> Result<Vec<OutputTable>> {
    let mut s = signal(&a.signal)?;
    if let Some(i) = a.i_factor {
        s.i_factor = i;
    }
    let method = match a.method {
        AcMethodArg::TimeDomain => AcMethod::TimeDomain,
        AcMethodArg::QuasiStatic => AcMethod::QuasiStatic,
    };
    let res = ac_sensitivity(&r.config, s, method)?;
    Ok(vec![one_row(
        vec![
            Column::new("bias", "T"),
            Column::new("amplitude", "T"),
            Column::new("frequency", "Hz"),
            Column::new("eta_ac", "T/sqrt(Hz)"),
            Column::new("n_o", "1"),
            Column::new("response", "1/T"),
            Column::new("i_factor", "1"),
        ],
        vec![
            Some(s.bias),
            Some(s.amplitude),
            Some(s.omega / TAU),
            res.eta,
            Some(res.n),
            Some(res.slope),
            Some(res.i_factor),
        ],
        provenance(r, "sensitivity_ac").note(
            "method",
            match a.method {
                AcMethodArg::TimeDomain => "time_domain",
                AcMethodArg::QuasiStatic => "quasi_static",
            },
        ),
    )])
}

fn operating_point(r: &ResolvedConfig, a: &OperatingPointArgs) -> Result<Vec<OutputTable>> {
    let omega = match &a.omega {
        Some(o) => quantity(o, Dimension::Rate)?,
        None => r.config.drive.omega,
    };
    let lambda_star = find_operating_point(&r.config, omega)?;
    let mut at = r.config;
    at.drive.omega = omega;
    let lambda_delta = threshold_pump(&at, at.drive.delta)?;
    Ok(vec![one_row(
        vec![
            Column::new("drive.omega", "rad/s"),
            Column::new("lambda_star", "rad/s"),
            Column::new("drive.delta", "rad/s"),
            Column::new("lambda_threshold", "rad/s"),
        ],
        vec![
            Some(omega),
            Some(lambda_star),
            Some(at.drive.delta),
            Some(lambda_delta),
        ],
        provenance(r, "operating_point"),
    )])
}

fn optimize(r: &ResolvedConfig, a: &OptimizeArgs, exec: Execution) -> Result<Vec<OutputTable>> {
    if !(a.factor >= 1.0) {
        return Err(CliError::usage("--factor must be >= 1"));
    }
    let bounds = a
        .vary
        .split(',')
        .map(|p| {
            Ok(ParameterBound::around(
                &r.config,
                p.trim().parse::<FreeParameter>()?,
                a.factor,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = a
        .window
        .split_once(':')
        .ok_or_else(|| CliError::usage("--window must look like min:max"))?;
    let opts = OptimizeOptions {
        field_range: (
            quantity(lo, Dimension::MagneticField)?,
            quantity(hi, Dimension::MagneticField)?,
        ),
        max_evaluations: a.max_evaluations,
        exec,
        ..OptimizeOptions::default()
    };
    let o = optimize_sensitivity(&r.config, &bounds, opts)?;
    Ok(vec![one_row(
        vec![
            Column::new("geometry.kappa", "rad/s"),
            Column::new("drive.lambda", "rad/s"),
            Column::new("drive.omega", "rad/s"),
            Column::new("field", "T"),
            Column::new("eta_dc", "T/sqrt(Hz)"),
            Column::new("start_eta_dc", "T/sqrt(Hz)"),
            Column::new("evaluations", "1"),
            Column::new("converged", "1"),
        ],
        vec![
            Some(o.kappa),
            Some(o.lambda),
            Some(o.omega),
            Some(o.field),
            Some(o.best_eta),
            o.start_eta,
            Some(o.evaluations as f64),
            Some(if o.converged { 1.0 } else { 0.0 }),
        ],
        provenance(r, "optimize"),
    )])
}

/// Runs one parsed command and returns its tables.
pub fn execute(cli: &Cli) -> Result<Vec<OutputTable>> {
    let exec = if cli.global.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    if let Command::Experiment(a) = &cli.command {
        let which: Experiment = a.name.parse()?;
        return run_experiment(which, &cli.global.overrides, exec);
    }
    let r = resolve(&cli.global)?;
    match &cli.command {
        Command::SteadyState(a) => steady_state(&r, a),
        Command::Sweep(a) => sweep(&r, a, exec),
        Command::Response(a) => response(&r, a),
        Command::Ac(a) => ac(&r, a),
        Command::SensitivityDc(a) => sensitivity_dc(&r, a, exec),
        Command::SensitivityAc(a) => sensitivity_ac(&r, a),
        Command::OperatingPoint(a) => operating_point(&r, a),
        Command::Optimize(a) => optimize(&r, a, exec),
        Command::Experiment(_) => unreachable!("handled above"),
    }
}

fn render(t: &OutputTable, format: Format) -> Result<String> {
    match format {
        Format::Csv => t.to_csv(),
        Format::Json => Ok(t.to_json() + "\n"),
    }
}

/// Path of table `name` when several tables share one `--out`.
pub fn table_path(out: &Path, name: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = name
        .strip_prefix(stem)
        .and_then(|n| n.strip_prefix('_'))
        .unwrap_or(name);
    let file = match out.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_{name}.{ext}"),
        None => format!("{stem}_{name}"),
    };
    out.with_file_name(file)
}

/// Writes tables to `out` (or stdout) and returns the files written.
pub fn emit(tables: &[OutputTable], out: Option<&Path>, format: Format) -> Result<Vec<PathBuf>> {
    let write = |path: &Path, text: &str| {
        std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
    };
    match out {
        None => {
            let mut text = String::new();
            for (k, t) in tables.iter().enumerate() {
                if k > 0 {
                    text.push('\n');
                }
                text.push_str(&render(t, format)?);
            }
            print!("{text}");
            Ok(vec![])
        }
        Some(path) if tables.len() == 1 => {
            write(path, &render(&tables[0], format)?)?;
            Ok(vec![path.to_path_buf()])
        }
        Some(path) => {
            let mut written = Vec::new();
            for t in tables {
                let p = table_path(path, &t.provenance.table);
                write(&p, &render(t, format)?)?;
                written.push(p);
            }
            Ok(written)
        }
    }
}

/// Reads a table written by [`emit`], choosing the reader by extension.
pub fn read_table(path: &Path) -> Result<OutputTable> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    if path.extension().is_some_and(|e| e == "json") {
        OutputTable::from_json(&text)
    } else {
        OutputTable::from_csv(&text)
    }
}
