//! Run configuration, tabular reports and the reproduction targets.
//!
//! Every command produces a [`Report`]: one or more tables, each available as
//! CSV (units in the column names), JSON or an aligned text table, plus the
//! pass/fail checks of a reproduction target. Rows always come out in
//! parameter order, however the work was scheduled.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drx::{
    evaluate_drx_grid, relative_power_saving, select_drx_optimum, DrxConfig, DrxGrid, DrxPowerTable,
};
use crate::error::{Error, Result};
use crate::metrics::{
    average_delay_full_adaptive, average_delay_simplified, average_power_full,
    average_power_simplified, delay_gradient, power_gradient,
};
use crate::optimizer::{optimize, turnoff_arrival_rate, BoundaryCase, OptimizationResult, Regime};
use crate::params::{
    ChannelErrorModel, Constraint, PowerProfile, TimingParams, TrafficModel, WuConfig,
};
use crate::sim::{energy_share_sweep, simulate, Horizon, SimConfig, SimulationReport};

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "txt",
        }
    }
}

/// Simulation length and batching.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSettings {
    /// Sleep cycles per run; each command has its own default.
    pub cycles: Option<u64>,
    /// Simulated time per run in ms; takes precedence over `cycles`.
    pub duration_ms: Option<f64>,
    pub warmup: Option<f64>,
    pub batches: usize,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            cycles: None,
            duration_ms: None,
            warmup: None,
            batches: 20,
        }
    }
}

impl SimSettings {
    pub fn sim_config(&self, default_cycles: u64, seed: u64, stream: u64) -> SimConfig {
        let horizon = match self.duration_ms {
            Some(d) => Horizon::Duration(d),
            None => Horizon::SleepCycles(self.cycles.unwrap_or(default_cycles)),
        };
        SimConfig {
            horizon,
            warmup: self.warmup,
            seed,
            stream,
            batches: self.batches,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrxSettings {
    pub table: DrxPowerTable,
    pub grid: DrxGrid,
    /// Simulated time per grid configuration, ms.
    pub horizon_ms: f64,
    /// Added to the delay bound when judging DRX feasibility, ms.
    pub delay_slack: f64,
}

impl Default for DrxSettings {
    fn default() -> Self {
        Self {
            table: DrxPowerTable::reference(),
            grid: DrxGrid::default(),
            horizon_ms: 2e5,
            delay_slack: 0.0,
        }
    }
}

/// Everything a command needs. Loaded from JSON, then overridden by flags.
///
/// `timing.t_s` and `timing.tti` are replaced by each entry of `ttis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: String,
    pub profile: PowerProfile,
    pub timing: TimingParams,
    pub channel: ChannelErrorModel,
    pub lambdas: Vec<f64>,
    pub d_max: Vec<f64>,
    pub ttis: Vec<f64>,
    pub seeds: Vec<u64>,
    pub t_w: Option<f64>,
    pub t_i: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub sim: SimSettings,
    pub drx: DrxSettings,
}

impl Default for RunConfig {
    /// Reference profile (φ = 1.1), reference ramps with the on-duration
    /// neglected, ideal wake-up detection, 1 ms TTI, seed 1.
    fn default() -> Self {
        Self {
            scenario: "default".into(),
            profile: PowerProfile::reference(),
            timing: TimingParams::reference_ideal(1.0),
            channel: ChannelErrorModel::ideal(),
            lambdas: Vec::new(),
            d_max: Vec::new(),
            ttis: vec![1.0],
            seeds: vec![1],
            t_w: None,
            t_i: None,
            out_dir: None,
            sim: SimSettings::default(),
            drx: DrxSettings::default(),
        }
    }
}

/// One (TTI, arrival rate, delay bound) combination.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Point {
    tti: f64,
    lambda: f64,
    d_max: Option<f64>,
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// The configured timing on a given TTI grid.
    pub fn timing(&self, tti: f64) -> TimingParams {
        TimingParams {
            t_s: tti,
            tti,
            ..self.timing
        }
    }

    pub fn seed(&self) -> u64 {
        self.seeds.first().copied().unwrap_or(1)
    }

    pub fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        self.channel.validate()?;
        if self.ttis.is_empty() {
            return Err(Error::Config("the TTI list is empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("the seed list is empty".into()));
        }
        for &tti in &self.ttis {
            self.timing(tti).validate()?;
        }
        for &l in &self.lambdas {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "lambda",
                    value: l,
                    reason: "must be positive",
                });
            }
        }
        for &d in &self.d_max {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "d_max",
                    value: d,
                    reason: "must be positive",
                });
            }
        }
        Ok(())
    }

    fn points(&self) -> Vec<Point> {
        let bounds: Vec<Option<f64>> = if self.d_max.is_empty() {
            vec![None]
        } else {
            self.d_max.iter().map(|&d| Some(d)).collect()
        };
        let mut out = Vec::new();
        for &tti in &self.ttis {
            for &lambda in &self.lambdas {
                for &d_max in &bounds {
                    out.push(Point { tti, lambda, d_max });
                }
            }
        }
        out
    }

    fn require_lambdas(&self) -> Result<()> {
        if self.lambdas.is_empty() {
            Err(Error::Config(
                "at least one arrival rate is required".into(),
            ))
        } else {
            Ok(())
        }
    }

    fn require_d_max(&self) -> Result<()> {
        if self.d_max.is_empty() {
            Err(Error::Config("at least one delay bound is required".into()))
        } else {
            Ok(())
        }
    }
}

fn required(value: Option<f64>, name: &str) -> Result<f64> {
    value.ok_or_else(|| Error::Config(format!("{name} is required")))
}

/// A table in three encodings.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub csv: String,
    pub json: serde_json::Value,
}

impl Table {
    /// CSV from the flat `rows`, JSON from `json` (often a richer view of the
    /// same points).
    pub fn new<R: Serialize, J: Serialize + ?Sized>(
        name: &str,
        rows: &[R],
        json: &J,
    ) -> Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| Error::Output(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Output(e.to_string()))?;
        Ok(Self {
            name: name.into(),
            csv: String::from_utf8(bytes).map_err(|e| Error::Output(e.to_string()))?,
            json: serde_json::to_value(json).map_err(|e| Error::Output(e.to_string()))?,
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("values serialize");
                s.push('\n');
                s
            }
            Format::Csv => self.csv.clone(),
            Format::Text => align_columns(&self.csv),
        }
    }
}

fn align_columns(csv_text: &str) -> String {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(csv_text.as_bytes());
    let rows: Vec<Vec<String>> = reader
        .records()
        .filter_map(|r| r.ok())
        .map(|r| r.iter().map(str::to_owned).collect())
        .collect();
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0; cols];
    for r in &rows {
        for (k, cell) in r.iter().enumerate() {
            widths[k] = widths[k].max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for r in &rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(k, c)| format!("{c:<w$}", w = widths[k]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Outcome of one tolerance check of a reproduction target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    /// The first table is the primary one, shown on standard output.
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
}

impl Report {
    fn single(table: Table) -> Self {
        Self {
            tables: vec![table],
            checks: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn checks_table(&self) -> Result<Table> {
        Table::new("checks", &self.checks, &self.checks)
    }

    /// Writes every table (and the checks, if any) into `dir` as
    /// `<name>.<ext>`, creating it if needed. Returns the paths in order.
    pub fn write_to(&self, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::Output(format!("{}: {e}", dir.display())))?;
        let mut tables = self.tables.clone();
        if !self.checks.is_empty() {
            tables.push(self.checks_table()?);
        }
        let mut paths = Vec::new();
        for t in &tables {
            let path = dir.join(format!("{}.{}", t.name, format.extension()));
            std::fs::write(&path, t.render(format))
                .map_err(|e| Error::Output(format!("{}: {e}", path.display())))?;
            paths.push(path);
        }
        Ok(paths)
    }
}

// ---------------------------------------------------------------- eval

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub tti_ms: f64,
    pub lambda_per_ms: f64,
    pub t_w_ms: f64,
    pub t_i_ms: f64,
    pub p_fa: f64,
    pub p_md: f64,
    pub t_on_ms: f64,
    pub power_full_mw: f64,
    pub power_simplified_mw: f64,
    pub delay_full_ms: f64,
    pub delay_simplified_ms: f64,
    pub delay_series_terms: usize,
    pub dpower_dtw_mw_per_ms: f64,
    pub dpower_dti_mw_per_ms: f64,
    pub ddelay_dtw_ms_per_ms: f64,
    pub ddelay_dti_ms_per_ms: f64,
    pub d_max_ms: Option<f64>,
    pub feasible: Option<bool>,
}

/// Analytical power, delay and gradients at a given `(t_w, t_i)`; `t_i`
/// defaults to one TTI.
pub fn eval(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    cfg.require_lambdas()?;
    let t_w = required(cfg.t_w, "t_w")?;
    let rows = cfg
        .points()
        .into_iter()
        .map(|pt| {
            let timing = cfg.timing(pt.tti);
            let traffic = TrafficModel::new(pt.lambda);
            let wu = WuConfig::relaxed(t_w, cfg.t_i.unwrap_or(pt.tti));
            let delay = average_delay_full_adaptive(&timing, &traffic, &cfg.channel, &wu)?;
            let pg = power_gradient(&cfg.profile, &timing, &traffic, &wu)?;
            let dg = delay_gradient(&timing, &traffic, &wu)?;
            Ok(EvalRecord {
                tti_ms: pt.tti,
                lambda_per_ms: pt.lambda,
                t_w_ms: wu.t_w,
                t_i_ms: wu.t_i,
                p_fa: cfg.channel.p_fa,
                p_md: cfg.channel.p_md,
                t_on_ms: timing.t_on,
                power_full_mw: average_power_full(
                    &cfg.profile,
                    &timing,
                    &traffic,
                    &cfg.channel,
                    &wu,
                )?,
                power_simplified_mw: average_power_simplified(
                    &cfg.profile,
                    &timing,
                    &traffic,
                    &wu,
                )?,
                delay_full_ms: delay.delay,
                delay_simplified_ms: average_delay_simplified(&timing, &traffic, &wu)?,
                delay_series_terms: delay.series_terms,
                dpower_dtw_mw_per_ms: pg.d_tw,
                dpower_dti_mw_per_ms: pg.d_ti,
                ddelay_dtw_ms_per_ms: dg.d_tw,
                ddelay_dti_ms_per_ms: dg.d_ti,
                d_max_ms: pt.d_max,
                feasible: pt.d_max.map(|d| delay.delay <= d),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Report::single(Table::new("eval", &rows, &rows)?))
}

// ---------------------------------------------------------------- optimize

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeRecord {
    pub tti_ms: f64,
    pub lambda_per_ms: f64,
    pub d_max_ms: f64,
    pub regime: Regime,
    pub t_w_ms: Option<f64>,
    pub t_i_ms: Option<f64>,
    pub advisory_t_w_ms: Option<f64>,
    pub advisory_t_i_ms: Option<f64>,
    pub lambda_t_per_ms: Option<f64>,
    pub t_wb_ms: f64,
    pub boundary_case: Option<BoundaryCase>,
    pub t_ws_ms: Option<f64>,
    pub power_mw: f64,
    pub delay_ms: f64,
    pub power_infimum_mw: f64,
}

impl From<&OptimizationResult> for OptimizeRecord {
    fn from(r: &OptimizationResult) -> Self {
        Self {
            tti_ms: r.tti,
            lambda_per_ms: r.lambda,
            d_max_ms: r.d_max,
            regime: r.regime,
            t_w_ms: r.t_w_star,
            t_i_ms: r.t_i_star,
            advisory_t_w_ms: r.advisory.map(|c| c.t_w),
            advisory_t_i_ms: r.advisory.map(|c| c.t_i),
            lambda_t_per_ms: r.lambda_t,
            t_wb_ms: r.t_wb,
            boundary_case: r.boundary_case,
            t_ws_ms: r.t_ws,
            power_mw: r.predicted_power,
            delay_ms: r.predicted_delay,
            power_infimum_mw: r.power_infimum,
        }
    }
}

fn optimize_point(
    cfg: &RunConfig,
    tti: f64,
    lambda: f64,
    d_max: f64,
) -> Result<OptimizationResult> {
    optimize(
        &cfg.profile,
        &cfg.timing(tti),
        &TrafficModel::new(lambda),
        &Constraint::new(d_max),
    )
}

/// Closed-form optimum for every (TTI, λ, D̄max) point.
pub fn optimize_points(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    cfg.require_lambdas()?;
    cfg.require_d_max()?;
    let results = cfg
        .points()
        .par_iter()
        .map(|pt| optimize_point(cfg, pt.tti, pt.lambda, pt.d_max.expect("bounds required")))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<OptimizeRecord> = results.iter().map(OptimizeRecord::from).collect();
    Ok(Report::single(Table::new("optimize", &rows, &results)?))
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateRecord {
    pub tti_ms: f64,
    pub lambda_per_ms: f64,
    pub d_max_ms: Option<f64>,
    pub seed: u64,
    pub t_w_ms: f64,
    pub t_i_ms: f64,
    pub p_fa: f64,
    pub p_md: f64,
    pub t_on_ms: f64,
    pub power_mw: f64,
    pub power_stderr_mw: f64,
    pub delay_ms: f64,
    pub delay_stderr_ms: f64,
    pub packet_delay_ms: f64,
    pub analytical_power_mw: f64,
    pub analytical_delay_ms: f64,
    pub share_monitor: f64,
    pub share_decode: f64,
    pub share_inactivity: f64,
    pub share_sleep: f64,
    pub share_startup: f64,
    pub share_powerdown: f64,
    pub cycles: u64,
    pub wakeups: u64,
    pub false_alarms: u64,
    pub misdetections: u64,
    pub packets: u64,
}

/// A simulated point together with its inputs, for the JSON view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedPoint {
    pub tti_ms: f64,
    pub lambda_per_ms: f64,
    pub d_max_ms: Option<f64>,
    pub seed: u64,
    pub config: WuConfig,
    pub channel: ChannelErrorModel,
    pub t_on_ms: f64,
    pub analytical_power_mw: f64,
    pub analytical_delay_ms: f64,
    pub report: SimulationReport,
}

impl From<&SimulatedPoint> for SimulateRecord {
    fn from(p: &SimulatedPoint) -> Self {
        let r = &p.report;
        let e = r.energy_share;
        Self {
            tti_ms: p.tti_ms,
            lambda_per_ms: p.lambda_per_ms,
            d_max_ms: p.d_max_ms,
            seed: p.seed,
            t_w_ms: p.config.t_w,
            t_i_ms: p.config.t_i,
            p_fa: p.channel.p_fa,
            p_md: p.channel.p_md,
            t_on_ms: p.t_on_ms,
            power_mw: r.mean_power,
            power_stderr_mw: r.power_stderr,
            delay_ms: r.mean_delay,
            delay_stderr_ms: r.delay_stderr,
            packet_delay_ms: r.mean_packet_delay,
            analytical_power_mw: p.analytical_power_mw,
            analytical_delay_ms: p.analytical_delay_ms,
            share_monitor: e.monitor,
            share_decode: e.decode,
            share_inactivity: e.inactivity,
            share_sleep: e.sleep,
            share_startup: e.startup,
            share_powerdown: e.powerdown,
            cycles: r.counters.cycles,
            wakeups: r.counters.wakeups,
            false_alarms: r.counters.false_alarms,
            misdetections: r.counters.misdetections,
            packets: r.counters.packets,
        }
    }
}

/// Default length of a single simulation run, in sleep cycles.
pub const DEFAULT_SIM_CYCLES: u64 = 200_000;

/// Simulates every point, at `(t_w, t_i)` when given and at the closed-form
/// optimum of each delay bound otherwise. Point `k` uses generator stream `k`.
pub fn simulate_points(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    cfg.require_lambdas()?;
    if cfg.t_w.is_none() {
        cfg.require_d_max()?;
    }
    let mut jobs = Vec::new();
    for pt in cfg.points() {
        for &seed in &cfg.seeds {
            jobs.push((pt, seed));
        }
    }
    let points = jobs
        .par_iter()
        .enumerate()
        .map(|(k, &(pt, seed))| {
            let timing = cfg.timing(pt.tti);
            let traffic = TrafficModel::new(pt.lambda);
            let config = match cfg.t_w {
                Some(t_w) => WuConfig::integral(t_w, cfg.t_i.unwrap_or(pt.tti), pt.tti)?,
                None => optimize_point(cfg, pt.tti, pt.lambda, pt.d_max.expect("bounds required"))?
                    .config()
                    .expect("optimize always yields a configuration"),
            };
            let sim = cfg.sim.sim_config(DEFAULT_SIM_CYCLES, seed, k as u64);
            let report = simulate(&cfg.profile, &timing, &traffic, &cfg.channel, &config, &sim)?;
            Ok(SimulatedPoint {
                tti_ms: pt.tti,
                lambda_per_ms: pt.lambda,
                d_max_ms: pt.d_max,
                seed,
                config,
                channel: cfg.channel,
                t_on_ms: timing.t_on,
                analytical_power_mw: average_power_full(
                    &cfg.profile,
                    &timing,
                    &traffic,
                    &cfg.channel,
                    &config,
                )?,
                analytical_delay_ms: average_delay_full_adaptive(
                    &timing,
                    &traffic,
                    &cfg.channel,
                    &config,
                )?
                .delay,
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<SimulateRecord> = points.iter().map(SimulateRecord::from).collect();
    Ok(Report::single(Table::new("simulate", &rows, &points)?))
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub tti_ms: f64,
    pub lambda_per_ms: f64,
    pub d_max_ms: f64,
    pub regime: Regime,
    pub lambda_t_per_ms: Option<f64>,
    pub t_w_ms: f64,
    pub t_i_ms: f64,
    pub power_mw: f64,
    pub delay_ms: f64,
    pub sim_power_mw: Option<f64>,
    pub sim_power_stderr_mw: Option<f64>,
    pub sim_delay_ms: Option<f64>,
    pub sim_delay_stderr_ms: Option<f64>,
}

/// Optimizes every point and evaluates the full model (configured detection
/// errors and on-duration) at the result; optionally simulates it too.
pub fn sweep(cfg: &RunConfig, with_simulation: bool) -> Result<Report> {
    cfg.validate()?;
    cfg.require_lambdas()?;
    cfg.require_d_max()?;
    let rows = cfg
        .points()
        .par_iter()
        .enumerate()
        .map(|(k, pt)| {
            let d_max = pt.d_max.expect("bounds required");
            let opt = optimize_point(cfg, pt.tti, pt.lambda, d_max)?;
            let c = opt
                .config()
                .expect("optimize always yields a configuration");
            let timing = cfg.timing(pt.tti);
            let traffic = TrafficModel::new(pt.lambda);
            let sim = if with_simulation {
                let s = cfg.sim.sim_config(DEFAULT_SIM_CYCLES, cfg.seed(), k as u64);
                Some(simulate(
                    &cfg.profile,
                    &timing,
                    &traffic,
                    &cfg.channel,
                    &c,
                    &s,
                )?)
            } else {
                None
            };
            Ok(SweepRecord {
                tti_ms: pt.tti,
                lambda_per_ms: pt.lambda,
                d_max_ms: d_max,
                regime: opt.regime,
                lambda_t_per_ms: opt.lambda_t,
                t_w_ms: c.t_w,
                t_i_ms: c.t_i,
                power_mw: average_power_full(&cfg.profile, &timing, &traffic, &cfg.channel, &c)?,
                delay_ms: average_delay_full_adaptive(&timing, &traffic, &cfg.channel, &c)?.delay,
                sim_power_mw: sim.as_ref().map(|r| r.mean_power),
                sim_power_stderr_mw: sim.as_ref().map(|r| r.power_stderr),
                sim_delay_ms: sim.as_ref().map(|r| r.mean_delay),
                sim_delay_stderr_ms: sim.as_ref().map(|r| r.delay_stderr),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Report::single(Table::new("sweep", &rows, &rows)?))
}

// ---------------------------------------------------------------- compare-drx

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRecord {
    pub tti_ms: f64,
    pub lambda_per_ms: f64,
    pub d_max_ms: f64,
    pub wus_regime: Regime,
    pub wus_t_w_ms: f64,
    pub wus_t_i_ms: f64,
    pub wus_power_mw: f64,
    pub wus_power_stderr_mw: f64,
    pub wus_delay_ms: f64,
    pub drx_t_on_ms: f64,
    pub drx_t_inactivity_ms: f64,
    pub drx_t_short_ms: f64,
    pub drx_n_short: u32,
    pub drx_t_long_ms: f64,
    pub drx_power_mw: f64,
    pub drx_delay_ms: f64,
    pub eta_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrxGridRecord {
    pub tti_ms: f64,
    pub lambda_per_ms: f64,
    pub d_max_ms: f64,
    pub t_on_ms: f64,
    pub t_inactivity_ms: f64,
    pub t_short_ms: f64,
    pub n_short: u32,
    pub t_long_ms: f64,
    pub power_mw: f64,
    pub delay_ms: f64,
    pub delay_stderr_ms: f64,
    pub feasible: bool,
}

/// Winner of one comparison point plus the full DRX grid behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparePoint {
    pub record: CompareRecord,
    pub drx_config: DrxConfig,
    pub grid: Vec<DrxGridRecord>,
}

/// Optimized wake-up scheme (simulated under `channel` and `timing.t_on`)
/// against the best DRX grid configuration for every (TTI, λ, D̄max).
/// The DRX grid is simulated once per (TTI, λ) and shared by all bounds.
fn compare_points(
    cfg: &RunConfig,
    channel: &ChannelErrorModel,
    t_on: f64,
) -> Result<Vec<ComparePoint>> {
    cfg.validate()?;
    cfg.require_lambdas()?;
    cfg.require_d_max()?;
    let seed = cfg.seed();
    let mut pairs = Vec::new();
    for &tti in &cfg.ttis {
        for &lambda in &cfg.lambdas {
            pairs.push((tti, lambda));
        }
    }
    let grids = pairs
        .iter()
        .enumerate()
        .map(|(k, &(tti, lambda))| {
            let sim = SimConfig {
                horizon: Horizon::Duration(cfg.drx.horizon_ms),
                warmup: None,
                seed,
                stream: k as u64,
                batches: cfg.sim.batches,
            };
            evaluate_drx_grid(
                &cfg.drx.table,
                &TrafficModel::new(lambda),
                tti,
                &cfg.drx.grid,
                &sim,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let mut jobs = Vec::new();
    for (g, &(tti, lambda)) in pairs.iter().enumerate() {
        for &d_max in &cfg.d_max {
            jobs.push((g, tti, lambda, d_max));
        }
    }
    jobs.par_iter()
        .enumerate()
        .map(|(k, &(g, tti, lambda, d_max))| {
            let traffic = TrafficModel::new(lambda);
            let opt = optimize_point(cfg, tti, lambda, d_max)?;
            let wu = opt
                .config()
                .expect("optimize always yields a configuration");
            let timing = cfg.timing(tti).with_t_on(t_on);
            let sim = cfg.sim.sim_config(DEFAULT_SIM_CYCLES, seed, k as u64);
            let wus = simulate(&cfg.profile, &timing, &traffic, channel, &wu, &sim)?;
            let best = select_drx_optimum(&grids[g], &Constraint::new(d_max), cfg.drx.delay_slack)?;
            let c = best.config;
            let grid = best
                .rows
                .iter()
                .map(|r| DrxGridRecord {
                    tti_ms: tti,
                    lambda_per_ms: lambda,
                    d_max_ms: d_max,
                    t_on_ms: r.config.t_on_drx,
                    t_inactivity_ms: r.config.t_inactivity,
                    t_short_ms: r.config.t_short,
                    n_short: r.config.n_short,
                    t_long_ms: r.config.t_long,
                    power_mw: r.mean_power,
                    delay_ms: r.mean_delay,
                    delay_stderr_ms: r.delay_stderr,
                    feasible: r.feasible,
                })
                .collect();
            Ok(ComparePoint {
                record: CompareRecord {
                    tti_ms: tti,
                    lambda_per_ms: lambda,
                    d_max_ms: d_max,
                    wus_regime: opt.regime,
                    wus_t_w_ms: wu.t_w,
                    wus_t_i_ms: wu.t_i,
                    wus_power_mw: wus.mean_power,
                    wus_power_stderr_mw: wus.power_stderr,
                    wus_delay_ms: wus.mean_delay,
                    drx_t_on_ms: c.t_on_drx,
                    drx_t_inactivity_ms: c.t_inactivity,
                    drx_t_short_ms: c.t_short,
                    drx_n_short: c.n_short,
                    drx_t_long_ms: c.t_long,
                    drx_power_mw: best.power,
                    drx_delay_ms: best.delay,
                    eta_percent: relative_power_saving(best.power, wus.mean_power)?,
                },
                drx_config: c,
                grid,
            })
        })
        .collect()
}

fn compare_report(name: &str, points: &[ComparePoint]) -> Result<Report> {
    let rows: Vec<CompareRecord> = points.iter().map(|p| p.record.clone()).collect();
    let grid: Vec<DrxGridRecord> = points.iter().flat_map(|p| p.grid.iter().cloned()).collect();
    Ok(Report {
        tables: vec![
            Table::new(name, &rows, &rows)?,
            Table::new(&format!("{name}_drx_grid"), &grid, &grid)?,
        ],
        checks: Vec::new(),
    })
}

/// η per point, with the wake-up scheme simulated under the configured
/// detection errors and on-duration.
pub fn compare_drx(cfg: &RunConfig) -> Result<Report> {
    let points = compare_points(cfg, &cfg.channel, cfg.timing.t_on)?;
    compare_report("compare_drx", &points)
}

// ---------------------------------------------------------------- reproduce

/// Reproduction targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// Optimal wake-up cycles for three arrival rates and three bounds.
    Table3,
    /// Minimum power for four TTI sizes.
    Table5,
    /// Turnoff arrival rate versus delay bound and transition time.
    Fig4,
    /// Per-state energy shares across the turnoff rate.
    Fig5,
    /// Power under ideal and realistic detection.
    Fig6,
    /// Delay under ideal and realistic detection.
    Fig7,
    /// Relative power saving over DRX.
    Fig8,
}

impl Target {
    pub const ALL: [Target; 7] = [
        Target::Table3,
        Target::Table5,
        Target::Fig4,
        Target::Fig5,
        Target::Fig6,
        Target::Fig7,
        Target::Fig8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Target::Table3 => "table3",
            Target::Table5 => "table5",
            Target::Fig4 => "fig4",
            Target::Fig5 => "fig5",
            Target::Fig6 => "fig6",
            Target::Fig7 => "fig7",
            Target::Fig8 => "fig8",
        }
    }
}

/// Realistic detection used by the ideal-versus-realistic targets.
pub const REALISTIC_T_ON: f64 = 1.0 / 14.0;

const REFERENCE_LAMBDAS: [f64; 3] = [0.01, 0.08, 0.15];
const REFERENCE_BOUNDS: [f64; 3] = [30.0, 75.0, 500.0];
const TABLE3_T_W: [[f64; 3]; 3] = [
    [180.0, 380.0, 2099.0],
    [124.0, 315.0, 2124.0],
    [125.0, 328.0, 2246.0],
];
const TABLE5_TTIS: [f64; 4] = [1.0, 0.5, 0.25, 0.125];
const TABLE5_POWER: [[f64; 9]; 4] = [
    [54.2, 31.6, 6.6, 88.7, 39.0, 6.1, 88.9, 38.1, 5.9],
    [50.4, 29.4, 5.7, 83.7, 36.8, 5.8, 85.4, 36.6, 5.7],
    [48.3, 28.1, 5.5, 81.1, 35.7, 5.7, 83.7, 35.9, 5.6],
    [47.5, 27.7, 5.4, 80.1, 35.3, 5.6, 83.1, 35.7, 5.6],
];
/// Tolerance of the published-cycle check, in TTIs.
pub const TABLE3_TOLERANCE_TTI: f64 = 2.0;
/// Tolerance of the published-power check: the larger of 5 % and 1 mW.
pub const TABLE5_REL_TOLERANCE: f64 = 0.05;
pub const TABLE5_ABS_TOLERANCE_MW: f64 = 1.0;
/// Largest allowed spread of the turnoff rate across delay bounds.
pub const FIG4_MAX_VARIATION: f64 = 0.05;
pub const FIG4_MIN_TURNOFF_RATE: f64 = 0.15;
/// Largest ramp energy share above the turnoff rate.
pub const FIG5_MAX_RAMP_SHARE: f64 = 0.01;
pub const FIG8_MIN_MAX_ETA: f64 = 30.0;

/// Runs a reproduction target. Checks never abort the run; inspect
/// [`Report::passed`].
pub fn reproduce(target: Target, cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    match target {
        Target::Table3 => table3(cfg),
        Target::Table5 => table5(cfg),
        Target::Fig4 => fig4(cfg),
        Target::Fig5 => fig5(cfg),
        Target::Fig6 => detection_gap(cfg, true),
        Target::Fig7 => detection_gap(cfg, false),
        Target::Fig8 => fig8(cfg),
    }
}

fn or_default(values: &[f64], default: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        default.to_vec()
    } else {
        values.to_vec()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table3Record {
    pub lambda_per_ms: f64,
    pub d_max_ms: f64,
    pub published_t_w_ms: f64,
    pub t_w_ms: f64,
    pub t_i_ms: f64,
    pub difference_tti: f64,
    pub pass: bool,
}

fn table3(cfg: &RunConfig) -> Result<Report> {
    let tti = 1.0;
    let mut rows = Vec::new();
    for (i, &lambda) in REFERENCE_LAMBDAS.iter().enumerate() {
        for (j, &d_max) in REFERENCE_BOUNDS.iter().enumerate() {
            let opt = optimize_point(cfg, tti, lambda, d_max)?;
            let published = TABLE3_T_W[i][j];
            let t_w = opt.t_w_star.unwrap_or(f64::NAN);
            let t_i = opt.t_i_star.unwrap_or(f64::NAN);
            let diff = (t_w - published) / tti;
            rows.push(Table3Record {
                lambda_per_ms: lambda,
                d_max_ms: d_max,
                published_t_w_ms: published,
                t_w_ms: t_w,
                t_i_ms: t_i,
                difference_tti: diff,
                pass: diff.abs() <= TABLE3_TOLERANCE_TTI && t_i == tti,
            });
        }
    }
    let checks = rows
        .iter()
        .map(|r| {
            Check::new(
                format!("table3 lambda={} d_max={}", r.lambda_per_ms, r.d_max_ms),
                r.pass,
                format!(
                    "t_w={} ms (published {}), t_i={} ms, |diff|<={} TTI",
                    r.t_w_ms, r.published_t_w_ms, r.t_i_ms, TABLE3_TOLERANCE_TTI
                ),
            )
        })
        .collect();
    Ok(Report {
        tables: vec![Table::new("table3", &rows, &rows)?],
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table5Record {
    pub tti_ms: f64,
    pub lambda_per_ms: f64,
    pub d_max_ms: f64,
    pub t_w_ms: f64,
    pub t_i_ms: f64,
    pub published_power_mw: f64,
    pub power_mw: f64,
    pub abs_error_mw: f64,
    pub rel_error: f64,
    pub pass: bool,
}

fn table5(cfg: &RunConfig) -> Result<Report> {
    let mut jobs = Vec::new();
    for (r, &tti) in TABLE5_TTIS.iter().enumerate() {
        for (i, &lambda) in REFERENCE_LAMBDAS.iter().enumerate() {
            for (j, &d_max) in REFERENCE_BOUNDS.iter().enumerate() {
                jobs.push((tti, lambda, d_max, TABLE5_POWER[r][3 * i + j]));
            }
        }
    }
    let rows = jobs
        .par_iter()
        .map(|&(tti, lambda, d_max, published)| {
            let opt = optimize_point(cfg, tti, lambda, d_max)?;
            let c = opt
                .config()
                .expect("optimize always yields a configuration");
            let power = average_power_full(
                &cfg.profile,
                &cfg.timing(tti),
                &TrafficModel::new(lambda),
                &cfg.channel,
                &c,
            )?;
            let abs = (power - published).abs();
            Ok(Table5Record {
                tti_ms: tti,
                lambda_per_ms: lambda,
                d_max_ms: d_max,
                t_w_ms: c.t_w,
                t_i_ms: c.t_i,
                published_power_mw: published,
                power_mw: power,
                abs_error_mw: abs,
                rel_error: abs / published,
                pass: abs <= (TABLE5_REL_TOLERANCE * published).max(TABLE5_ABS_TOLERANCE_MW),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let checks = rows
        .iter()
        .map(|r| {
            Check::new(
                format!(
                    "table5 tti={} lambda={} d_max={}",
                    r.tti_ms, r.lambda_per_ms, r.d_max_ms
                ),
                r.pass,
                format!(
                    "{:.3} mW (published {} mW)",
                    r.power_mw, r.published_power_mw
                ),
            )
        })
        .collect();
    Ok(Report {
        tables: vec![Table::new("table5", &rows, &rows)?],
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig4Record {
    pub d_max_ms: f64,
    pub t_su_ms: f64,
    pub t_pd_ms: f64,
    pub transition_sum_ms: f64,
    pub lambda_t_per_ms: Option<f64>,
}

/// Transition-time sums of the turnoff-rate sweep; each is split 3:2
/// between start-up and power-down.
pub const FIG4_TRANSITION_SUMS: [f64; 4] = [10.0, 25.0, 50.0, 100.0];
const FIG4_BOUNDS: [f64; 8] = [30.0, 50.0, 75.0, 100.0, 200.0, 300.0, 400.0, 500.0];

fn turnoff_or_none(cfg: &RunConfig, timing: &TimingParams, d_max: f64) -> Result<Option<f64>> {
    match turnoff_arrival_rate(&cfg.profile, timing, &Constraint::new(d_max)) {
        Ok(l) => Ok(Some(l)),
        Err(Error::NoTurnoffRate { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn fig4(cfg: &RunConfig) -> Result<Report> {
    let tti = cfg.ttis[0];
    let bounds = or_default(&cfg.d_max, &FIG4_BOUNDS);
    let mut rows = Vec::new();
    for &d_max in &bounds {
        for &sum in &FIG4_TRANSITION_SUMS {
            let timing = TimingParams {
                t_su: 0.6 * sum,
                t_pd: 0.4 * sum,
                ..cfg.timing(tti)
            };
            rows.push(Fig4Record {
                d_max_ms: d_max,
                t_su_ms: timing.t_su,
                t_pd_ms: timing.t_pd,
                transition_sum_ms: sum,
                lambda_t_per_ms: turnoff_or_none(cfg, &timing, d_max)?,
            });
        }
    }

    let mut checks = Vec::new();
    for &d_max in &bounds {
        let seq: Vec<Option<f64>> = rows
            .iter()
            .filter(|r| r.d_max_ms == d_max)
            .map(|r| r.lambda_t_per_ms)
            .collect();
        let ok = seq.iter().all(Option::is_some)
            && seq.windows(2).all(|w| w[1].unwrap() < w[0].unwrap());
        checks.push(Check::new(
            format!("fig4 lambda_t decreasing in t_su+t_pd at d_max={d_max}"),
            ok,
            format!("{seq:?}"),
        ));
    }
    let reference = cfg.timing(tti);
    let l30 = turnoff_or_none(cfg, &reference, 30.0)?;
    let l500 = turnoff_or_none(cfg, &reference, 500.0)?;
    let (ok, detail) = match (l30, l500) {
        (Some(a), Some(b)) => {
            let v = (a - b).abs() / a.max(b);
            (
                v < FIG4_MAX_VARIATION,
                format!("{a:.5} vs {b:.5} per ms, variation {:.2}%", 100.0 * v),
            )
        }
        _ => (false, format!("{l30:?} vs {l500:?}")),
    };
    checks.push(Check::new(
        "fig4 lambda_t variation over d_max {30, 500} below 5%",
        ok,
        detail,
    ));
    let mut low = Vec::new();
    for &d_max in &bounds {
        let l = turnoff_or_none(cfg, &reference, d_max)?;
        if !l.is_some_and(|l| l > FIG4_MIN_TURNOFF_RATE) {
            low.push((d_max, l));
        }
    }
    checks.push(Check::new(
        "fig4 lambda_t above 0.15 per ms at the configured timing",
        low.is_empty(),
        if low.is_empty() {
            format!("all {} bounds", bounds.len())
        } else {
            format!("violations: {low:?}")
        },
    ));
    Ok(Report {
        tables: vec![Table::new("fig4", &rows, &rows)?],
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig5Record {
    pub lambda_per_ms: f64,
    pub d_max_ms: f64,
    pub regime: Regime,
    pub t_w_ms: f64,
    pub t_i_ms: f64,
    pub power_mw: f64,
    pub delay_ms: f64,
    pub share_monitor: f64,
    pub share_decode: f64,
    pub share_inactivity: f64,
    pub share_sleep: f64,
    pub share_startup: f64,
    pub share_powerdown: f64,
}

const FIG5_LAMBDAS: [f64; 9] = [0.005, 0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5];
/// Above the turnoff rate sleep cycles get very long, so the energy-share
/// sweep counts far fewer of them than a single simulation.
pub const FIG5_DEFAULT_CYCLES: u64 = 2_000;

fn fig5(cfg: &RunConfig) -> Result<Report> {
    let tti = cfg.ttis[0];
    let mut lambdas = or_default(&cfg.lambdas, &FIG5_LAMBDAS);
    lambdas.sort_by(f64::total_cmp);
    let d_max = cfg.d_max.first().copied().unwrap_or(30.0);
    let sim = cfg.sim.sim_config(FIG5_DEFAULT_CYCLES, cfg.seed(), 0);
    let sweep = energy_share_sweep(
        &cfg.profile,
        &cfg.timing(tti),
        &cfg.channel,
        &lambdas,
        &Constraint::new(d_max),
        &sim,
    )?;
    let rows: Vec<Fig5Record> = sweep
        .iter()
        .map(|s| {
            let e = s.report.energy_share;
            Fig5Record {
                lambda_per_ms: s.lambda,
                d_max_ms: d_max,
                regime: s.regime,
                t_w_ms: s.config.t_w,
                t_i_ms: s.config.t_i,
                power_mw: s.report.mean_power,
                delay_ms: s.report.mean_delay,
                share_monitor: e.monitor,
                share_decode: e.decode,
                share_inactivity: e.inactivity,
                share_sleep: e.sleep,
                share_startup: e.startup,
                share_powerdown: e.powerdown,
            }
        })
        .collect();

    let decode: Vec<f64> = rows.iter().map(|r| r.share_decode).collect();
    let mut checks = vec![Check::new(
        "fig5 decode share increases with lambda",
        decode.windows(2).all(|w| w[1] > w[0]),
        format!("{decode:.4?}"),
    )];
    let above: Vec<&Fig5Record> = rows
        .iter()
        .filter(|r| r.regime == Regime::WusIneffective)
        .collect();
    let worst = above
        .iter()
        .map(|r| r.share_startup + r.share_powerdown)
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "fig5 start-up + power-down share near zero above lambda_t",
        !above.is_empty() && worst <= FIG5_MAX_RAMP_SHARE,
        format!(
            "{} points above lambda_t, largest ramp share {worst:.5} (limit {FIG5_MAX_RAMP_SHARE})",
            above.len()
        ),
    ));
    let sums_ok = sweep
        .iter()
        .all(|s| (s.report.energy_share.total() - 1.0).abs() <= 1e-9);
    checks.push(Check::new("fig5 shares sum to one", sums_ok, ""));
    Ok(Report {
        tables: vec![Table::new("fig5", &rows, &rows)?],
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig6Record {
    pub lambda_per_ms: f64,
    pub d_max_ms: f64,
    pub t_w_ms: f64,
    pub t_i_ms: f64,
    pub analytical_power_mw: f64,
    pub sim_ideal_power_mw: f64,
    pub sim_realistic_power_mw: f64,
    pub sim_realistic_power_stderr_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig7Record {
    pub lambda_per_ms: f64,
    pub d_max_ms: f64,
    pub t_w_ms: f64,
    pub t_i_ms: f64,
    pub analytical_delay_ms: f64,
    pub sim_ideal_delay_ms: f64,
    pub sim_realistic_delay_ms: f64,
    pub sim_realistic_delay_stderr_ms: f64,
}

const GAP_LAMBDAS: [f64; 9] = [0.005, 0.01, 0.02, 0.04, 0.06, 0.08, 0.1, 0.12, 0.15];

struct GapPoint {
    lambda: f64,
    d_max: f64,
    config: WuConfig,
    analytical: (f64, f64),
    ideal: SimulationReport,
    realistic: SimulationReport,
}

/// Optimized configurations simulated twice: ideal detection without
/// on-duration, and realistic detection (10 % false alarms, 1 %
/// misdetections, 1/14 ms on-duration).
fn detection_gap(cfg: &RunConfig, power: bool) -> Result<Report> {
    let tti = cfg.ttis[0];
    let lambdas = or_default(&cfg.lambdas, &GAP_LAMBDAS);
    let bounds = or_default(&cfg.d_max, &REFERENCE_BOUNDS);
    let mut jobs = Vec::new();
    for &d_max in &bounds {
        for &lambda in &lambdas {
            jobs.push((lambda, d_max));
        }
    }
    let ideal_timing = cfg.timing(tti).with_t_on(0.0);
    let real_timing = cfg.timing(tti).with_t_on(REALISTIC_T_ON);
    let points = jobs
        .par_iter()
        .enumerate()
        .map(|(k, &(lambda, d_max))| {
            let traffic = TrafficModel::new(lambda);
            let opt = optimize(
                &cfg.profile,
                &ideal_timing,
                &traffic,
                &Constraint::new(d_max),
            )?;
            let c = opt
                .config()
                .expect("optimize always yields a configuration");
            let ideal = ChannelErrorModel::ideal();
            let sim = cfg.sim.sim_config(DEFAULT_SIM_CYCLES, cfg.seed(), k as u64);
            Ok(GapPoint {
                lambda,
                d_max,
                config: c,
                analytical: (
                    average_power_full(&cfg.profile, &ideal_timing, &traffic, &ideal, &c)?,
                    average_delay_full_adaptive(&ideal_timing, &traffic, &ideal, &c)?.delay,
                ),
                ideal: simulate(&cfg.profile, &ideal_timing, &traffic, &ideal, &c, &sim)?,
                realistic: simulate(
                    &cfg.profile,
                    &real_timing,
                    &traffic,
                    &ChannelErrorModel::realistic(),
                    &c,
                    &sim,
                )?,
            })
        })
        .collect::<Result<Vec<GapPoint>>>()?;

    let label = |p: &GapPoint| format!("lambda={} d_max={}", p.lambda, p.d_max);
    if power {
        let rows: Vec<Fig6Record> = points
            .iter()
            .map(|p| Fig6Record {
                lambda_per_ms: p.lambda,
                d_max_ms: p.d_max,
                t_w_ms: p.config.t_w,
                t_i_ms: p.config.t_i,
                analytical_power_mw: p.analytical.0,
                sim_ideal_power_mw: p.ideal.mean_power,
                sim_realistic_power_mw: p.realistic.mean_power,
                sim_realistic_power_stderr_mw: p.realistic.power_stderr,
            })
            .collect();
        let checks = points
            .iter()
            .map(|p| {
                Check::new(
                    format!("fig6 realistic power >= ideal analytical, {}", label(p)),
                    p.realistic.mean_power >= p.analytical.0,
                    format!("{:.4} vs {:.4} mW", p.realistic.mean_power, p.analytical.0),
                )
            })
            .collect();
        Ok(Report {
            tables: vec![Table::new("fig6", &rows, &rows)?],
            checks,
        })
    } else {
        let rows: Vec<Fig7Record> = points
            .iter()
            .map(|p| Fig7Record {
                lambda_per_ms: p.lambda,
                d_max_ms: p.d_max,
                t_w_ms: p.config.t_w,
                t_i_ms: p.config.t_i,
                analytical_delay_ms: p.analytical.1,
                sim_ideal_delay_ms: p.ideal.mean_delay,
                sim_realistic_delay_ms: p.realistic.mean_delay,
                sim_realistic_delay_stderr_ms: p.realistic.delay_stderr,
            })
            .collect();
        let checks = points
            .iter()
            .map(|p| {
                Check::new(
                    format!("fig7 realistic delay >= ideal analytical, {}", label(p)),
                    p.realistic.mean_delay >= p.analytical.1,
                    format!("{:.4} vs {:.4} ms", p.realistic.mean_delay, p.analytical.1),
                )
            })
            .collect();
        Ok(Report {
            tables: vec![Table::new("fig7", &rows, &rows)?],
            checks,
        })
    }
}

const FIG8_LAMBDAS: [f64; 6] = [0.005, 0.01, 0.02, 0.05, 0.1, 0.15];

/// Least-squares slope of `ys` against `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn fig8(cfg: &RunConfig) -> Result<Report> {
    let mut run = cfg.clone();
    run.ttis.truncate(1);
    run.lambdas = or_default(&cfg.lambdas, &FIG8_LAMBDAS);
    run.lambdas.sort_by(f64::total_cmp);
    run.d_max = or_default(&cfg.d_max, &REFERENCE_BOUNDS);
    let points = compare_points(&run, &ChannelErrorModel::realistic(), REALISTIC_T_ON)?;
    let mut report = compare_report("fig8", &points)?;

    let best = points
        .iter()
        .map(|p| &p.record)
        .max_by(|a, b| a.eta_percent.total_cmp(&b.eta_percent))
        .expect("at least one point");
    report.checks.push(Check::new(
        "fig8 max eta >= 30%",
        best.eta_percent >= FIG8_MIN_MAX_ETA,
        format!(
            "max eta {:.2}% at lambda={} d_max={}",
            best.eta_percent, best.lambda_per_ms, best.d_max_ms
        ),
    ));
    for &d_max in &run.d_max {
        let (xs, ys): (Vec<f64>, Vec<f64>) = points
            .iter()
            .filter(|p| p.record.d_max_ms == d_max)
            .map(|p| (p.record.lambda_per_ms, p.record.eta_percent))
            .unzip();
        let slope = ols_slope(&xs, &ys);
        report.checks.push(Check::new(
            format!("fig8 eta trends downward in lambda at d_max={d_max}"),
            xs.len() >= 2 && slope < 0.0,
            format!("least-squares slope {slope:.3} %/(packet/ms); eta {ys:.2?}"),
        ));
    }
    Ok(report)
}
