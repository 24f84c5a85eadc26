//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so every line is printed even
//! when an earlier criterion fails. The process exits non-zero only when a
//! criterion cannot be evaluated at all; a FAIL line is a measured outcome and
//! is reported, not turned into a panic. The properties behind the criteria
//! that hold are asserted individually by the other test targets.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wus_core::metrics::{
    average_delay_full_adaptive, average_delay_simplified, average_power_full,
    average_power_simplified, delay_gradient, power_gradient,
};
use wus_core::optimizer::{
    boundary_coefficients, boundary_inactivity_timer, boundary_power, grid_search_oracle,
    min_boundary_wakeup_cycle, optimize, turnoff_arrival_rate,
};
use wus_core::report::{reproduce, RunConfig, Target};
use wus_core::sim::{simulate, Horizon, SimConfig};
use wus_core::{ChannelErrorModel, Constraint, PowerProfile, TimingParams, TrafficModel, WuConfig};

use common::hp;

const LAMBDAS: [f64; 3] = [0.01, 0.08, 0.15];
const BOUNDS: [f64; 3] = [30.0, 75.0, 500.0];
const TABLE3: [[f64; 3]; 3] = [
    [180.0, 380.0, 2099.0],
    [124.0, 315.0, 2124.0],
    [125.0, 328.0, 2246.0],
];
const TABLE5_TTIS: [f64; 4] = [1.0, 0.5, 0.25, 0.125];
const TABLE5: [[f64; 9]; 4] = [
    [54.2, 31.6, 6.6, 88.7, 39.0, 6.1, 88.9, 38.1, 5.9],
    [50.4, 29.4, 5.7, 83.7, 36.8, 5.8, 85.4, 36.6, 5.7],
    [48.3, 28.1, 5.5, 81.1, 35.7, 5.7, 83.7, 35.9, 5.6],
    [47.5, 27.7, 5.4, 80.1, 35.3, 5.6, 83.1, 35.7, 5.6],
];
const SIM_CYCLES: u64 = 1_000_000;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

type Criterion = fn() -> anyhow::Result<Outcome>;

fn profile() -> PowerProfile {
    PowerProfile::reference()
}

fn timing() -> TimingParams {
    TimingParams::reference_ideal(1.0)
}

fn table3_points() -> impl Iterator<Item = (f64, f64, f64)> {
    LAMBDAS.iter().enumerate().flat_map(|(i, &l)| {
        BOUNDS
            .iter()
            .enumerate()
            .map(move |(j, &d)| (l, d, TABLE3[i][j]))
    })
}

fn within_budget(elapsed: Duration, budget: Duration) -> bool {
    elapsed < budget
}

fn c1_table3() -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for (lam, d, published) in table3_points() {
        let r = optimize(
            &profile(),
            &timing(),
            &TrafficModel::new(lam),
            &Constraint::new(d),
        )?;
        let t_w = r.t_w_star.unwrap_or(f64::INFINITY);
        let diff = (t_w - published).abs();
        worst = worst.max(diff);
        if diff > 2.0 || r.t_i_star != Some(1.0) {
            bad.push(format!("({lam}, {d}): t_w={t_w} t_i={:?}", r.t_i_star));
        }
    }
    let elapsed = start.elapsed();
    let fast = within_budget(elapsed, Duration::from_secs(1));
    Ok(outcome(
        bad.is_empty() && fast,
        format!("max |t_w - table| = {worst} TTI, {elapsed:.2?} (< 1 s), misses {bad:?}"),
    ))
}

fn c2_table5() -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut worst_rel: f64 = 0.0;
    for (r, &tti) in TABLE5_TTIS.iter().enumerate() {
        let t = TimingParams::reference_ideal(tti);
        for (i, &lam) in LAMBDAS.iter().enumerate() {
            for (j, &d) in BOUNDS.iter().enumerate() {
                let traffic = TrafficModel::new(lam);
                let opt = optimize(&profile(), &t, &traffic, &Constraint::new(d))?;
                let cfg = opt.config().expect("configuration");
                let p = average_power_full(
                    &profile(),
                    &t,
                    &traffic,
                    &ChannelErrorModel::ideal(),
                    &cfg,
                )?;
                let published = TABLE5[r][3 * i + j];
                let err = (p - published).abs();
                worst_rel = worst_rel.max(err / published);
                if err > (0.05 * published).max(1.0) {
                    bad.push(format!("tti={tti} ({lam}, {d}): {p:.3} vs {published}"));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let fast = within_budget(elapsed, Duration::from_secs(5));
    Ok(outcome(
        bad.is_empty() && fast,
        format!(
            "36 cells, max relative error {:.2}%, {elapsed:.2?} (< 5 s), misses {bad:?}",
            100.0 * worst_rel
        ),
    ))
}

fn c3_grid_oracle() -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut n = 0;
    for &lam in &[0.005, 0.01, 0.02, 0.05, 0.08, 0.12, 0.15] {
        for &d in &[30.0, 75.0, 200.0, 500.0] {
            let traffic = TrafficModel::new(lam);
            let c = Constraint::new(d);
            let opt = optimize(&profile(), &timing(), &traffic, &c)?;
            let grid = grid_search_oracle(&profile(), &timing(), &traffic, &c, 3000.0, 20.0)?;
            n += 1;
            if opt.t_w_star != Some(grid.config.t_w) || opt.t_i_star != Some(grid.config.t_i) {
                bad.push(format!(
                    "({lam}, {d}): closed form ({:?}, {:?}) vs grid ({}, {})",
                    opt.t_w_star, opt.t_i_star, grid.config.t_w, grid.config.t_i
                ));
            }
        }
    }
    let elapsed = start.elapsed();
    let fast = within_budget(elapsed, Duration::from_secs(120));
    Ok(outcome(
        bad.is_empty() && fast,
        format!(
            "{n} points, exact matches {}, {elapsed:.2?} (< 2 min), misses {bad:?}",
            n - bad.len()
        ),
    ))
}

/// Plain bisection on the simplified delay at one TTI of inactivity.
fn bisect_t_wb(t: &TimingParams, lam: f64, d: f64) -> f64 {
    let traffic = TrafficModel::new(lam);
    let g =
        |tw: f64| average_delay_simplified(t, &traffic, &WuConfig::relaxed(tw, t.tti)).unwrap() - d;
    let (mut lo, mut hi) = (1e-9, 1.0);
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn c4_lambert() -> anyhow::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 100 {
        let lam = rng.random_range(0.001..0.3);
        let d = rng.random_range(30.0..500.0);
        let t_wb = match min_boundary_wakeup_cycle(
            &TrafficModel::new(lam),
            &timing(),
            &Constraint::new(d),
        ) {
            Ok(v) => v,
            Err(e) => return Ok(outcome(false, format!("({lam}, {d}): {e}"))),
        };
        worst = worst.max((t_wb - bisect_t_wb(&timing(), lam, d)).abs());
        n += 1;
    }
    Ok(outcome(
        worst <= 1e-6,
        format!("100 random (lambda, d_max), max |t_wb - bisection| = {worst:.2e} ms (<= 1e-6)"),
    ))
}

fn c5_gradients() -> anyhow::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = profile();
    let t = timing();
    let mut worst = [0.0f64; 4];
    let mut sign_errors = 0;
    let n = 1000;
    for _ in 0..n {
        let lam = rng.random_range(0.001..0.3);
        let tw = rng.random_range(1.0..5000.0);
        let ti = rng.random_range(1.0..500.0);
        let traffic = TrafficModel::new(lam);
        let cfg = WuConfig::relaxed(tw, ti);
        let pg = power_gradient(&p, &t, &traffic, &cfg)?;
        let dg = delay_gradient(&t, &traffic, &cfg)?;
        let (fp_w, fp_i) = hp::gradient(|a, b| hp::power(&p, &t, lam, a, b), tw, ti);
        let (fd_w, fd_i) = hp::gradient(|a, b| hp::delay(&t, lam, a, b), tw, ti);
        let analytic = [pg.d_ti, pg.d_tw, dg.d_ti, dg.d_tw];
        let numeric = [fp_i, fp_w, fd_i, fd_w];
        for k in 0..4 {
            worst[k] = worst[k].max((analytic[k] - numeric[k]).abs() / numeric[k].abs());
        }
        if !(pg.d_ti > 0.0 && pg.d_tw < 0.0 && dg.d_ti < 0.0 && dg.d_tw > 0.0) {
            sign_errors += 1;
        }
    }
    let max = worst.iter().cloned().fold(0.0, f64::max);
    Ok(outcome(
        max <= 1e-6 && sign_errors == 0,
        format!(
            "{n} points, max relative error (dP/dti, dP/dtw, dD/dti, dD/dtw) = {:.1e}/{:.1e}/{:.1e}/{:.1e} (<= 1e-6), sign violations {sign_errors}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    ))
}

fn c6_boundary_identity() -> anyhow::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let p = profile();
    let t = timing();
    let mut scenarios: Vec<(f64, f64)> = table3_points().map(|(l, d, _)| (l, d)).collect();
    scenarios.push((0.05, 100.0));
    let (mut worst_delay, mut worst_power): (f64, f64) = (0.0, 0.0);
    for &(lam, d) in &scenarios {
        let traffic = TrafficModel::new(lam);
        let c = Constraint::new(d);
        let t_wb = min_boundary_wakeup_cycle(&traffic, &t, &c)?;
        let coeffs = boundary_coefficients(&p, &t, &traffic, &c)?;
        for _ in 0..50 {
            let tw = rng.random_range(t_wb..10.0 * t_wb);
            let ti = boundary_inactivity_timer(tw, &traffic, &t, &c)?;
            let cfg = WuConfig::relaxed(tw, ti);
            worst_delay =
                worst_delay.max((average_delay_simplified(&t, &traffic, &cfg)? - d).abs());
            let composed = average_power_simplified(&p, &t, &traffic, &cfg)?;
            worst_power =
                worst_power.max((boundary_power(tw, &coeffs, &p) - composed).abs() / composed);
        }
    }
    Ok(outcome(
        worst_delay <= 1e-9 && worst_power <= 1e-9,
        format!(
            "{} scenarios x 50 cycles, max |D - d_max| = {worst_delay:.1e} ms, max boundary power error {worst_power:.1e}",
            scenarios.len()
        ),
    ))
}

fn sim_config(k: u64) -> SimConfig {
    SimConfig::new(Horizon::SleepCycles(SIM_CYCLES), 2024).with_stream(k)
}

fn c7_simulator_agreement() -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let p = profile();
    let t = timing();
    let ideal = ChannelErrorModel::ideal();
    let mut lines = Vec::new();
    let mut all = true;
    for (k, (lam, _, tw)) in table3_points().enumerate() {
        let traffic = TrafficModel::new(lam);
        let cfg = WuConfig::integral(tw, 1.0, 1.0)?;
        let r = simulate(&p, &t, &traffic, &ideal, &cfg, &sim_config(k as u64))?;
        let ap = average_power_full(&p, &t, &traffic, &ideal, &cfg)?;
        let ad = average_delay_full_adaptive(&t, &traffic, &ideal, &cfg)?.delay;
        let p_ok = (r.mean_power - ap).abs() <= (0.02 * ap).max(2.0 * r.power_stderr);
        let d_ok = (r.mean_delay - ad).abs() <= (0.02 * ad).max(2.0 * r.delay_stderr);
        all &= p_ok && d_ok;
        lines.push(format!(
            "({lam}, t_w={tw}) power {:.3}/{ap:.3}{} delay {:.2}/{ad:.2}{}",
            r.mean_power,
            if p_ok { "" } else { " FAIL" },
            r.mean_delay,
            if d_ok { "" } else { " FAIL" },
        ));
    }
    let elapsed = start.elapsed();
    let fast = within_budget(elapsed, Duration::from_secs(600));
    Ok(outcome(
        all && fast,
        format!(
            "{SIM_CYCLES} cycles each, {elapsed:.1?} (< 10 min); sim/analytical: {}",
            lines.join("; ")
        ),
    ))
}

fn c8_realistic_gap() -> anyhow::Result<Outcome> {
    let p = profile();
    let t = timing();
    let real_t = t.with_t_on(1.0 / 14.0);
    let ideal = ChannelErrorModel::ideal();
    let real = ChannelErrorModel::new(0.1, 0.01)?;
    let mut lines = Vec::new();
    let (mut p_fail, mut d_fail) = (0, 0);
    for (k, (lam, _, tw)) in table3_points().enumerate() {
        let traffic = TrafficModel::new(lam);
        let cfg = WuConfig::integral(tw, 1.0, 1.0)?;
        let r = simulate(
            &p,
            &real_t,
            &traffic,
            &real,
            &cfg,
            &sim_config(100 + k as u64),
        )?;
        let ap = average_power_full(&p, &t, &traffic, &ideal, &cfg)?;
        let ad = average_delay_full_adaptive(&t, &traffic, &ideal, &cfg)?.delay;
        let p_ok = r.mean_power >= ap;
        let d_ok = r.mean_delay >= ad;
        p_fail += usize::from(!p_ok);
        d_fail += usize::from(!d_ok);
        lines.push(format!(
            "({lam}, t_w={tw}) power {:.3}{}{ap:.3} delay {:.2}{}{ad:.2}",
            r.mean_power,
            if p_ok { ">=" } else { "<" },
            r.mean_delay,
            if d_ok { ">=" } else { "<" },
        ));
    }
    Ok(outcome(
        p_fail == 0 && d_fail == 0,
        format!(
            "power below ideal at {p_fail}/9, delay below ideal at {d_fail}/9; realistic sim vs ideal analytical: {}",
            lines.join("; ")
        ),
    ))
}

fn c9_turnoff() -> anyhow::Result<Outcome> {
    let p = profile();
    let mut notes = Vec::new();
    let mut ok = true;
    for &d in &BOUNDS {
        let mut seq = Vec::new();
        for &sum in &[10.0, 25.0, 50.0, 100.0] {
            let t = TimingParams {
                t_su: 0.6 * sum,
                t_pd: 0.4 * sum,
                ..timing()
            };
            seq.push(turnoff_arrival_rate(&p, &t, &Constraint::new(d))?);
        }
        ok &= seq.windows(2).all(|w| w[1] < w[0]);
        notes.push(format!("d_max={d}: {seq:.4?}"));
    }
    let l30 = turnoff_arrival_rate(&p, &timing(), &Constraint::new(30.0))?;
    let l500 = turnoff_arrival_rate(&p, &timing(), &Constraint::new(500.0))?;
    let variation = (l30 - l500).abs() / l30.max(l500);
    ok &= variation < 0.05;
    let mut low = f64::INFINITY;
    for &d in &BOUNDS {
        low = low.min(turnoff_arrival_rate(&p, &timing(), &Constraint::new(d))?);
    }
    ok &= low > 0.15;
    Ok(outcome(
        ok,
        format!(
            "{}; variation 30 vs 500 ms {:.2}% (< 5%); min lambda_t at reference timing {low:.4} (> 0.15)",
            notes.join("; "),
            100.0 * variation
        ),
    ))
}

fn c10_drx() -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let report = reproduce(Target::Fig8, &RunConfig::default())?;
    let elapsed = start.elapsed();
    let details: Vec<String> = report
        .checks
        .iter()
        .map(|c| {
            format!(
                "[{}] {}: {}",
                if c.passed { "ok" } else { "fail" },
                c.name,
                c.detail
            )
        })
        .collect();
    let fast = within_budget(elapsed, Duration::from_secs(1800));
    Ok(outcome(
        report.passed() && fast,
        format!("{elapsed:.1?} (< 30 min); {}", details.join("; ")),
    ))
}

fn run_cli(args: &[&str], out: &Path) -> anyhow::Result<()> {
    let status = Command::new(env!("CARGO_BIN_EXE_wus"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()?
        .status;
    anyhow::ensure!(
        status.code().is_some_and(|c| c <= 1),
        "wus {args:?} exited with {status}"
    );
    Ok(())
}

fn read_dir_sorted(dir: &Path) -> anyhow::Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        files.push((
            entry.file_name().to_string_lossy().into_owned(),
            std::fs::read(entry.path())?,
        ));
    }
    files.sort();
    Ok(files)
}

fn c11_determinism() -> anyhow::Result<Outcome> {
    let commands: [&[&str]; 6] = [
        &[
            "eval",
            "--lambda",
            "0.01,0.08",
            "--tw",
            "315",
            "--pfa",
            "0.1",
            "--pmd",
            "0.01",
            "--format",
            "csv",
        ],
        &[
            "optimize",
            "--lambda",
            "0.01,0.08,0.15",
            "--dmax",
            "30,75,500",
            "--tti",
            "1,0.5",
            "--format",
            "json",
        ],
        &[
            "simulate", "--lambda", "0.05,0.1", "--dmax", "75", "--seed", "7", "--cycles", "20000",
            "--format", "csv",
        ],
        &[
            "sweep",
            "--lambda",
            "0.02,0.2",
            "--dmax",
            "30",
            "--simulate",
            "--cycles",
            "2000",
            "--format",
            "text",
        ],
        &[
            "compare-drx",
            "--lambda",
            "0.02",
            "--dmax",
            "75",
            "--cycles",
            "20000",
            "--drx-horizon-ms",
            "20000",
            "--format",
            "json",
        ],
        &["reproduce", "fig5", "--cycles", "300", "--format", "csv"],
    ];
    let dir = tempfile::tempdir()?;
    let mut compared = 0;
    for (k, args) in commands.iter().enumerate() {
        let a = dir.path().join(format!("{k}a"));
        let b = dir.path().join(format!("{k}b"));
        run_cli(args, &a)?;
        run_cli(args, &b)?;
        let (fa, fb) = (read_dir_sorted(&a)?, read_dir_sorted(&b)?);
        if fa.is_empty() || fa != fb {
            return Ok(outcome(
                false,
                format!("wus {} produced differing output", args.join(" ")),
            ));
        }
        compared += fa.len();
    }
    Ok(outcome(
        true,
        format!(
            "{} commands run twice, {compared} output files byte-identical",
            commands.len()
        ),
    ))
}

fn main() {
    let criteria: [(&str, Criterion); 11] = [
        ("1 optimal wake-up cycles (table3)", c1_table3),
        ("2 minimum power over TTI sizes (table5)", c2_table5),
        ("3 closed form equals brute force", c3_grid_oracle),
        ("4 Lambert-W minimum cycle", c4_lambert),
        ("5 gradient values and signs", c5_gradients),
        ("6 boundary identity", c6_boundary_identity),
        ("7 simulator agrees with model", c7_simulator_agreement),
        ("8 realistic-detection gap direction", c8_realistic_gap),
        ("9 turnoff arrival rate", c9_turnoff),
        ("10 power saving over DRX", c10_drx),
        ("11 determinism", c11_determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut passed = 0;
    let mut ran = 0;
    let mut errored = false;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        match run() {
            Ok(o) => {
                passed += usize::from(o.passed);
                println!(
                    "{} criterion {name}: {}",
                    if o.passed { "PASS" } else { "FAIL" },
                    o.detail
                );
            }
            Err(e) => {
                errored = true;
                println!("FAIL criterion {name}: error: {e:#}");
            }
        }
    }
    println!("acceptance: {passed}/{ran} criteria passed");
    if errored {
        std::process::exit(1);
    }
}
