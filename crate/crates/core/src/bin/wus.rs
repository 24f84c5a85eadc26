use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use wus_core::report::{self, Format, RunConfig, Target};
use wus_core::{ChannelErrorModel, Error};

#[derive(Parser, Debug)]
#[command(
    name = "wus",
    version,
    about = "Wake-up signal power/delay modeling, optimization and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analytical power, delay and gradients at a given (t_w, t_i).
    Eval(CommonArgs),
    /// Closed-form optimal (t_w, t_i) per arrival rate and delay bound.
    Optimize(CommonArgs),
    /// Discrete-event simulation at (t_w, t_i), or at the optimum when --tw is absent.
    Simulate(CommonArgs),
    /// Relative power saving of the optimized wake-up scheme over the best DRX configuration.
    CompareDrx(CommonArgs),
    /// Regenerate a table or figure and check it; exits 1 when a check fails.
    Reproduce {
        target: Target,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Optimize a grid of points and evaluate the full model there.
    Sweep(CommonArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Arrival rates in packets/ms, comma separated.
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<f64>,
    /// Delay bounds in ms, comma separated.
    #[arg(long, value_delimiter = ',')]
    dmax: Vec<f64>,
    /// TTI sizes in ms, comma separated.
    #[arg(long, value_delimiter = ',')]
    tti: Vec<f64>,
    /// Wake-up cycle in ms.
    #[arg(long)]
    tw: Option<f64>,
    /// Inactivity timer in ms (defaults to one TTI).
    #[arg(long)]
    ti: Option<f64>,
    /// False-alarm probability of the wake-up indicator.
    #[arg(long)]
    pfa: Option<f64>,
    /// Misdetection probability of the wake-up indicator.
    #[arg(long)]
    pmd: Option<f64>,
    /// Wake-up monitoring duration in ms.
    #[arg(long)]
    ton: Option<f64>,
    /// Start-up ramp in ms.
    #[arg(long)]
    tsu: Option<f64>,
    /// Power-down ramp in ms.
    #[arg(long)]
    tpd: Option<f64>,
    /// Decode-to-inactivity power ratio.
    #[arg(long)]
    phi: Option<f64>,
    /// Seeds, comma separated; sweeps use the first.
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory receiving every table of the run.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Sleep cycles per simulation run.
    #[arg(long)]
    cycles: Option<u64>,
    /// Simulated time per run in ms (overrides --cycles).
    #[arg(long)]
    horizon_ms: Option<f64>,
    /// Simulated time per DRX grid configuration in ms.
    #[arg(long)]
    drx_horizon_ms: Option<f64>,
    /// Extra delay allowance when judging DRX feasibility, ms.
    #[arg(long)]
    delay_slack: Option<f64>,
    /// Also simulate each sweep point.
    #[arg(long)]
    simulate: bool,
}

impl CommonArgs {
    fn run_config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_json_file(path)?,
            None => RunConfig::default(),
        };
        if !self.lambda.is_empty() {
            cfg.lambdas = self.lambda.clone();
        }
        if !self.dmax.is_empty() {
            cfg.d_max = self.dmax.clone();
        }
        if !self.tti.is_empty() {
            cfg.ttis = self.tti.clone();
        }
        if !self.seed.is_empty() {
            cfg.seeds = self.seed.clone();
        }
        cfg.t_w = self.tw.or(cfg.t_w);
        cfg.t_i = self.ti.or(cfg.t_i);
        if self.pfa.is_some() || self.pmd.is_some() {
            cfg.channel = ChannelErrorModel::new(
                self.pfa.unwrap_or(cfg.channel.p_fa),
                self.pmd.unwrap_or(cfg.channel.p_md),
            )?;
        }
        if let Some(t) = self.ton {
            cfg.timing.t_on = t;
        }
        if let Some(t) = self.tsu {
            cfg.timing.t_su = t;
        }
        if let Some(t) = self.tpd {
            cfg.timing.t_pd = t;
        }
        if let Some(phi) = self.phi {
            cfg.profile = cfg.profile.with_phi(phi)?;
        }
        if self.out.is_some() {
            cfg.out_dir = self.out.clone();
        }
        if self.cycles.is_some() {
            cfg.sim.cycles = self.cycles;
        }
        if self.horizon_ms.is_some() {
            cfg.sim.duration_ms = self.horizon_ms;
        }
        if let Some(h) = self.drx_horizon_ms {
            cfg.drx.horizon_ms = h;
        }
        if let Some(s) = self.delay_slack {
            cfg.drx.delay_slack = s;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let common = match &cli.command {
        Command::Eval(c)
        | Command::Optimize(c)
        | Command::Simulate(c)
        | Command::CompareDrx(c)
        | Command::Sweep(c)
        | Command::Reproduce { common: c, .. } => c,
    };
    let cfg = common.run_config()?;
    let report = match &cli.command {
        Command::Eval(_) => report::eval(&cfg)?,
        Command::Optimize(_) => report::optimize_points(&cfg)?,
        Command::Simulate(_) => report::simulate_points(&cfg)?,
        Command::CompareDrx(_) => report::compare_drx(&cfg)?,
        Command::Sweep(_) => report::sweep(&cfg, common.simulate)?,
        Command::Reproduce { target, .. } => report::reproduce(*target, &cfg)?,
    };

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if let Some(primary) = report.tables.first() {
        out.write_all(primary.render(common.format).as_bytes())?;
    }
    if !report.checks.is_empty() && common.format == Format::Text {
        out.write_all(report.checks_table()?.render(Format::Text).as_bytes())?;
    }
    if let Some(dir) = &cfg.out_dir {
        report
            .write_to(dir, common.format)
            .with_context(|| format!("writing results to {}", dir.display()))?;
    }
    for check in report.failures() {
        eprintln!("FAIL {}: {}", check.name, check.detail);
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = matches!(e.downcast_ref::<Error>(), Some(Error::Config(_)));
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
