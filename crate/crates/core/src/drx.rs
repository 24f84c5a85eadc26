//! Short/long-cycle DRX reference system: simulator, exhaustive parameter
//! search under the same delay bound, and the relative power saving of the
//! wake-up scheme over it.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, ensure, Error, Result};
use crate::params::{Constraint, TrafficModel};
use crate::sim::{
    align_up, next_boundary, snap, Collector, DelayMetric, Phase, SimConfig, SimulationReport,
    Tally, Traffic,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrxConfig {
    pub t_on_drx: f64,
    pub t_inactivity: f64,
    pub t_short: f64,
    pub n_short: u32,
    pub t_long: f64,
}

impl DrxConfig {
    pub fn validate(&self, tti: f64) -> Result<()> {
        for (name, v) in [
            ("t_on_drx", self.t_on_drx),
            ("t_inactivity", self.t_inactivity),
            ("t_short", self.t_short),
            ("t_long", self.t_long),
        ] {
            check_finite(name, v)?;
            ensure(v >= tti * (1.0 - 1e-9), name, v, "must be at least one TTI")?;
        }
        ensure(
            self.t_short <= self.t_long,
            "t_short",
            self.t_short,
            "must not exceed t_long",
        )?;
        ensure(
            self.t_on_drx < self.t_short,
            "t_on_drx",
            self.t_on_drx,
            "must be shorter than the short cycle",
        )
    }

    /// Key under which two configurations behave identically: the short
    /// cycle is irrelevant without short cycles or when it equals the long one.
    fn behaviour_key(&self) -> [u64; 5] {
        let (t_short, n_short) = if self.n_short == 0 || self.t_short == self.t_long {
            (self.t_long, 0)
        } else {
            (self.t_short, self.n_short)
        };
        [
            self.t_on_drx.to_bits(),
            self.t_inactivity.to_bits(),
            t_short.to_bits(),
            n_short as u64,
            self.t_long.to_bits(),
        ]
    }

    /// Ordering used to break power ties.
    fn tie_key(&self) -> (f64, f64, f64, u32, f64) {
        (
            self.t_long,
            self.t_short,
            self.t_inactivity,
            self.n_short,
            self.t_on_drx,
        )
    }
}

/// Power levels and transition times of an LTE-class modem under DRX.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrxPowerTable {
    pub pw_sleep_short: f64,
    pub pw_sleep_long: f64,
    pub pw_active: f64,
    pub pw_decode: f64,
    pub t_su_short: f64,
    pub t_pd_short: f64,
    pub t_su_long: f64,
    pub t_pd_long: f64,
}

impl DrxPowerTable {
    /// 20 MHz LTE module: 395 mW light sleep with 1 ms ramps, ~0 mW deep
    /// sleep with 15/10 ms ramps, 850 mW active, 935 mW decoding.
    pub fn reference() -> Self {
        Self {
            pw_sleep_short: 395.0,
            pw_sleep_long: 0.0,
            pw_active: 850.0,
            pw_decode: 935.0,
            t_su_short: 1.0,
            t_pd_short: 1.0,
            t_su_long: 15.0,
            t_pd_long: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("pw_sleep_short", self.pw_sleep_short),
            ("pw_sleep_long", self.pw_sleep_long),
            ("pw_active", self.pw_active),
            ("pw_decode", self.pw_decode),
            ("t_su_short", self.t_su_short),
            ("t_pd_short", self.t_pd_short),
            ("t_su_long", self.t_su_long),
            ("t_pd_long", self.t_pd_long),
        ] {
            check_finite(name, v)?;
            ensure(v >= 0.0, name, v, "must be non-negative")?;
        }
        ensure(
            self.pw_decode >= self.pw_active,
            "pw_decode",
            self.pw_decode,
            "must be at least pw_active",
        )?;
        ensure(
            self.pw_active > self.pw_sleep_short,
            "pw_active",
            self.pw_active,
            "must exceed pw_sleep_short",
        )?;
        ensure(
            self.pw_sleep_short > self.pw_sleep_long,
            "pw_sleep_short",
            self.pw_sleep_short,
            "must exceed pw_sleep_long",
        )
    }

    /// Cheapest way to spend an off period of length `window`: deep sleep,
    /// light sleep (each only if both ramps fit) or staying active.
    pub fn sleep_plan(&self, window: f64) -> SleepPlan {
        let ramp = |t: f64, level: f64| t * (level + 0.5 * (self.pw_active - level));
        let mut best = SleepPlan {
            mode: SleepMode::Awake,
            energy: self.pw_active * window,
            t_su: 0.0,
            t_pd: 0.0,
            level: self.pw_active,
        };
        for (mode, level, t_su, t_pd) in [
            (
                SleepMode::Light,
                self.pw_sleep_short,
                self.t_su_short,
                self.t_pd_short,
            ),
            (
                SleepMode::Deep,
                self.pw_sleep_long,
                self.t_su_long,
                self.t_pd_long,
            ),
        ] {
            if t_su + t_pd > window {
                continue;
            }
            let energy = ramp(t_su, level) + ramp(t_pd, level) + level * (window - t_su - t_pd);
            if energy < best.energy {
                best = SleepPlan {
                    mode,
                    energy,
                    t_su,
                    t_pd,
                    level,
                };
            }
        }
        best
    }
}

impl Default for DrxPowerTable {
    fn default() -> Self {
        Self::reference()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SleepMode {
    Awake,
    Light,
    Deep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SleepPlan {
    pub mode: SleepMode,
    pub energy: f64,
    pub t_su: f64,
    pub t_pd: f64,
    pub level: f64,
}

/// Candidate values for the exhaustive search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrxGrid {
    pub t_on_drx: Vec<f64>,
    pub t_inactivity: Vec<f64>,
    pub t_short: Vec<f64>,
    pub n_short: Vec<u32>,
    pub t_long: Vec<f64>,
}

impl Default for DrxGrid {
    fn default() -> Self {
        Self {
            t_on_drx: vec![1.0, 2.0, 5.0, 10.0],
            t_inactivity: vec![1.0, 10.0, 20.0, 40.0, 80.0, 100.0, 200.0],
            t_short: vec![2.0, 5.0, 8.0, 10.0, 20.0, 32.0, 40.0, 64.0, 80.0],
            n_short: vec![0, 1, 2, 4, 8, 16],
            t_long: vec![40.0, 80.0, 160.0, 320.0, 640.0, 1280.0, 2560.0],
        }
    }
}

impl DrxGrid {
    /// All valid combinations, in the tie-break order.
    pub fn configs(&self, tti: f64) -> Vec<DrxConfig> {
        let mut out = Vec::new();
        for &t_long in &self.t_long {
            for &t_short in &self.t_short {
                for &t_inactivity in &self.t_inactivity {
                    for &n_short in &self.n_short {
                        for &t_on_drx in &self.t_on_drx {
                            let c = DrxConfig {
                                t_on_drx,
                                t_inactivity,
                                t_short,
                                n_short,
                                t_long,
                            };
                            if c.validate(tti).is_ok() {
                                out.push(c);
                            }
                        }
                    }
                }
            }
        }
        out.sort_by(|a, b| {
            let (x, y) = (a.tie_key(), b.tie_key());
            x.0.total_cmp(&y.0)
                .then(x.1.total_cmp(&y.1))
                .then(x.2.total_cmp(&y.2))
                .then(x.3.cmp(&y.3))
                .then(x.4.total_cmp(&y.4))
        });
        out.dedup();
        out
    }
}

/// Simulates DRX.
///
/// Each cycle is an off period of `T - t_on_drx` followed by an on-duration
/// at active power. Packets arriving while off wait for the next on-duration;
/// if the buffer is non-empty there, they are decoded in TTI slots and the
/// inactivity timer starts, restarted by every new packet. When it expires,
/// `n_short` short cycles follow, then long cycles. The off period uses
/// whichever of deep sleep, light sleep or staying awake costs least for its
/// length, with triangular ramps inside it.
pub fn simulate_drx(
    table: &DrxPowerTable,
    drx: &DrxConfig,
    traffic: &TrafficModel,
    tti: f64,
    sim: &SimConfig,
) -> Result<SimulationReport> {
    table.validate()?;
    check_finite("tti", tti)?;
    ensure(tti > 0.0, "tti", tti, "must be positive")?;
    drx.validate(tti)?;
    check_finite("lambda", traffic.lambda)?;
    ensure(
        traffic.lambda > 0.0 && traffic.lambda * tti < 1.0,
        "lambda",
        traffic.lambda,
        "must lie in (0, 1/tti)",
    )?;
    sim.validate()?;

    let plans = [
        table.sleep_plan(drx.t_short - drx.t_on_drx),
        table.sleep_plan(drx.t_long - drx.t_on_drx),
    ];
    let mut rng = sim.rng();
    let mut arrivals = Traffic::new(traffic.lambda, &mut rng);
    let mut out = Collector::new(sim, tti, DelayMetric::PerPacket);

    let mut t = 0.0;
    // Short cycles remaining before falling back to long ones.
    let mut short_left = 0u32;
    while out.wants_more(t) {
        let start = t;
        let mut tally = Tally::default();
        let (cycle, plan) = if short_left > 0 {
            short_left -= 1;
            (drx.t_short, &plans[0])
        } else {
            (drx.t_long, &plans[1])
        };
        let window = cycle - drx.t_on_drx;

        tally.enter(Phase::Sleep);
        tally.counters().cycles += 1;
        t = snap(t + window, tti);
        arrivals.pull(t, true, &mut rng);
        spend_off_period(&mut tally, table, plan, window);

        tally.enter(Phase::Monitor);
        let woke_busy = !arrivals.is_empty();
        let mut active = woke_busy;
        if !woke_busy {
            let end = snap(t + drx.t_on_drx, tti);
            let next = arrivals.next_arrival();
            if next < end {
                let resume = align_up(next_boundary(next, tti), tti);
                arrivals.pull(resume, false, &mut rng);
                tally.spend(Phase::Monitor, resume - t, table.pw_active * (resume - t));
                t = resume;
                active = true;
            } else {
                tally.spend(Phase::Monitor, drx.t_on_drx, table.pw_active * drx.t_on_drx);
                t = end;
            }
        }
        if active {
            tally.counters().wakeups += 1;
            t = run_active(
                t,
                drx.t_inactivity,
                tti,
                table,
                &mut arrivals,
                &mut tally,
                &mut rng,
                out.deadline(),
            );
            short_left = drx.n_short;
        }
        out.commit(start, &tally);
    }
    Ok(out.finish())
}

fn spend_off_period(tally: &mut Tally, table: &DrxPowerTable, plan: &SleepPlan, window: f64) {
    if plan.mode == SleepMode::Awake {
        tally.spend(Phase::Inactivity, window, plan.energy);
        return;
    }
    let ramp = |t: f64| t * (plan.level + 0.5 * (table.pw_active - plan.level));
    let rest = window - plan.t_su - plan.t_pd;
    tally.spend(Phase::Powerdown, plan.t_pd, ramp(plan.t_pd));
    tally.spend(Phase::Sleep, rest, plan.level * rest);
    tally.spend(Phase::Startup, plan.t_su, ramp(plan.t_su));
}

#[allow(clippy::too_many_arguments)]
fn run_active(
    mut t: f64,
    t_inactivity: f64,
    tti: f64,
    table: &DrxPowerTable,
    arrivals: &mut Traffic,
    tally: &mut Tally,
    rng: &mut ChaCha8Rng,
    deadline: f64,
) -> f64 {
    loop {
        if t >= deadline {
            return t;
        }
        if !arrivals.is_empty() {
            tally.enter(Phase::Decode);
            arrivals.decode(t, tally);
            t += tti;
            arrivals.pull(t, false, rng);
            tally.spend(Phase::Decode, tti, table.pw_decode * tti);
            continue;
        }
        tally.enter(Phase::Inactivity);
        let next = arrivals.next_arrival();
        if next < t + t_inactivity {
            let resume = next_boundary(next, tti);
            arrivals.pull(resume, false, rng);
            tally.spend(
                Phase::Inactivity,
                resume - t,
                table.pw_active * (resume - t),
            );
            t = resume;
        } else {
            tally.spend(
                Phase::Inactivity,
                t_inactivity,
                table.pw_active * t_inactivity,
            );
            return snap(t + t_inactivity, tti);
        }
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrxGridRow {
    pub config: DrxConfig,
    pub mean_power: f64,
    pub mean_delay: f64,
    pub delay_stderr: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrxOptimum {
    pub config: DrxConfig,
    pub power: f64,
    pub delay: f64,
    pub rows: Vec<DrxGridRow>,
}

/// Simulates every grid configuration once. All configurations share the
/// generator seed and stream, so they see the same arrival sequence.
/// Configurations that behave identically are simulated once.
pub fn evaluate_drx_grid(
    table: &DrxPowerTable,
    traffic: &TrafficModel,
    tti: f64,
    grid: &DrxGrid,
    sim: &SimConfig,
) -> Result<Vec<(DrxConfig, SimulationReport)>> {
    let configs = grid.configs(tti);
    if configs.is_empty() {
        return Err(Error::EmptyFeasibleSet(
            "DRX grid has no valid configuration".into(),
        ));
    }
    let mut keys: Vec<[u64; 5]> = configs.iter().map(DrxConfig::behaviour_key).collect();
    keys.sort_unstable();
    keys.dedup();
    let reports: Vec<SimulationReport> = keys
        .par_iter()
        .map(|k| {
            let c = configs
                .iter()
                .find(|c| c.behaviour_key() == *k)
                .expect("key taken from configs");
            simulate_drx(table, c, traffic, tti, sim)
        })
        .collect::<Result<_>>()?;
    Ok(configs
        .into_iter()
        .map(|c| {
            let i = keys.binary_search(&c.behaviour_key()).expect("key present");
            (c, reports[i].clone())
        })
        .collect())
}

/// Feasibility and selection over already evaluated grid points. A point is
/// feasible when its simulated mean delay plus one standard error stays
/// within `d_max + delay_slack`.
pub fn select_drx_optimum(
    evaluated: &[(DrxConfig, SimulationReport)],
    constraint: &Constraint,
    delay_slack: f64,
) -> Result<DrxOptimum> {
    let rows: Vec<DrxGridRow> = evaluated
        .iter()
        .map(|(c, r)| {
            let se = if r.delay_stderr.is_finite() {
                r.delay_stderr
            } else {
                0.0
            };
            DrxGridRow {
                config: *c,
                mean_power: r.mean_power,
                mean_delay: r.mean_delay,
                delay_stderr: r.delay_stderr,
                feasible: r.mean_delay + se <= constraint.d_max + delay_slack,
            }
        })
        .collect();
    // Rows are in tie-break order, so the first minimum wins.
    let best = rows
        .iter()
        .filter(|r| r.feasible)
        .fold(None::<&DrxGridRow>, |acc, r| match acc {
            Some(b) if b.mean_power <= r.mean_power => Some(b),
            _ => Some(r),
        })
        .ok_or_else(|| {
            Error::EmptyFeasibleSet(format!(
                "no DRX configuration meets d_max = {} ms",
                constraint.d_max
            ))
        })?;
    Ok(DrxOptimum {
        config: best.config,
        power: best.mean_power,
        delay: best.mean_delay,
        rows,
    })
}

/// Lowest-power grid configuration meeting the delay bound.
pub fn optimize_drx_exhaustive(
    table: &DrxPowerTable,
    traffic: &TrafficModel,
    constraint: &Constraint,
    grid: &DrxGrid,
    tti: f64,
    sim: &SimConfig,
) -> Result<DrxOptimum> {
    let evaluated = evaluate_drx_grid(table, traffic, tti, grid, sim)?;
    select_drx_optimum(&evaluated, constraint, 0.0)
}

/// Relative power saving of the wake-up scheme over DRX, in percent.
pub fn relative_power_saving(p_drx: f64, p_wus: f64) -> Result<f64> {
    check_finite("p_drx", p_drx)?;
    check_finite("p_wus", p_wus)?;
    ensure(p_drx > 0.0, "p_drx", p_drx, "must be positive")?;
    Ok((p_drx - p_wus) / p_drx * 100.0)
}
