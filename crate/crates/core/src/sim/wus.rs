use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    align_up, next_boundary, snap, Collector, DelayMetric, Phase, SimConfig, SimulationReport,
    Tally, Traffic,
};
use crate::error::Result;
use crate::optimizer::{optimize, Regime};
use crate::params::{
    ChannelErrorModel, Constraint, PowerProfile, TimingParams, TrafficModel, WuConfig,
};

/// Simulates the wake-up scheme.
///
/// Each cycle sleeps for `t_w - t_on` and monitors for `t_on`; the wake-up
/// indicator is then drawn against the buffer content (misdetection when
/// packets wait, false alarm when none do). A wake-up costs a triangular
/// start-up ramp, after which buffered packets are decoded in TTI-aligned
/// slots. The inactivity timer runs for `t_i`; an arrival during it is decoded
/// at the next TTI boundary. Expiry triggers a triangular power-down ramp.
///
/// Packets arriving during the ramps, monitoring or sleep stay buffered until
/// the next decode slot. A false alarm wakes the baseband with nothing to
/// decode, so it goes straight to the inactivity timer unless packets arrived
/// during start-up.
pub fn simulate(
    profile: &PowerProfile,
    timing: &TimingParams,
    traffic: &TrafficModel,
    channel: &ChannelErrorModel,
    cfg: &WuConfig,
    sim: &SimConfig,
) -> Result<SimulationReport> {
    profile.check_finite()?;
    timing.validate()?;
    traffic.validate(timing)?;
    channel.validate()?;
    cfg.validate(timing.tti)?;
    sim.validate()?;

    let tti = timing.tti;
    let mut rng = sim.rng();
    let mut arrivals = Traffic::new(traffic.lambda, &mut rng);
    let mut out = Collector::new(sim, tti, DelayMetric::PerJump);
    let p = profile;
    let startup_energy = timing.t_su * (p.pw4 + 0.5 * (p.pw2 - p.pw4));
    let powerdown_energy = timing.t_pd * (p.pw4 + 0.5 * (p.pw3 - p.pw4));
    let sleep_len = cfg.t_w - timing.t_on;

    let mut t = 0.0;
    while out.wants_more(t) {
        let start = t;
        let mut tally = Tally::default();

        tally.enter(Phase::Sleep);
        tally.counters().cycles += 1;
        t += sleep_len;
        arrivals.pull(t, true, &mut rng);
        tally.spend(Phase::Sleep, sleep_len, p.pw4 * sleep_len);

        tally.enter(Phase::Monitor);
        t = snap(t + timing.t_on, tti);
        arrivals.pull(t, true, &mut rng);
        tally.spend(Phase::Monitor, timing.t_on, p.pw1 * timing.t_on);

        let pending = !arrivals.is_empty();
        let draw: f64 = rng.random();
        let wake = if pending {
            draw >= channel.p_md
        } else {
            draw < channel.p_fa
        };
        if !wake {
            if pending {
                tally.counters().misdetections += 1;
            }
            out.commit(start, &tally);
            continue;
        }
        tally.counters().wakeups += 1;
        if !pending {
            tally.counters().false_alarms += 1;
        }

        t += timing.t_su;
        arrivals.pull(t, true, &mut rng);
        tally.spend(Phase::Startup, timing.t_su, startup_energy);
        let aligned = align_up(t, tti);
        if aligned > t {
            arrivals.pull(aligned, true, &mut rng);
            tally.spend(Phase::Inactivity, aligned - t, p.pw3 * (aligned - t));
        }
        t = aligned;

        t = run_active(
            t,
            cfg.t_i,
            tti,
            p,
            &mut arrivals,
            &mut tally,
            &mut rng,
            out.deadline(),
        );

        t = snap(t + timing.t_pd, tti);
        arrivals.pull(t, true, &mut rng);
        tally.spend(Phase::Powerdown, timing.t_pd, powerdown_energy);
        out.commit(start, &tally);
    }
    Ok(out.finish())
}

/// Decode and inactivity phases from an aligned instant `t` until the
/// inactivity timer expires; returns the expiry time.
#[allow(clippy::too_many_arguments)]
fn run_active(
    mut t: f64,
    t_i: f64,
    tti: f64,
    p: &PowerProfile,
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
            tally.spend(Phase::Decode, tti, p.pw2 * tti);
            continue;
        }
        tally.enter(Phase::Inactivity);
        let next = arrivals.next_arrival();
        if next < t + t_i {
            let resume = next_boundary(next, tti);
            arrivals.pull(resume, false, rng);
            tally.spend(Phase::Inactivity, resume - t, p.pw3 * (resume - t));
            t = resume;
        } else {
            tally.spend(Phase::Inactivity, t_i, p.pw3 * t_i);
            return snap(t + t_i, tti);
        }
    }
}

/// One point of an energy-share sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub regime: Regime,
    /// Optimal configuration, or the advisory one when the scheme is off.
    pub config: WuConfig,
    pub report: SimulationReport,
}

/// Optimizes and then simulates each arrival rate; point `k` uses generator
/// stream `k`. Rows come back in input order.
pub fn energy_share_sweep(
    profile: &PowerProfile,
    timing: &TimingParams,
    channel: &ChannelErrorModel,
    lambdas: &[f64],
    constraint: &Constraint,
    sim: &SimConfig,
) -> Result<Vec<SweepRow>> {
    lambdas
        .par_iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let traffic = TrafficModel::new(lambda);
            let opt = optimize(profile, timing, &traffic, constraint)?;
            let config = opt
                .config()
                .expect("optimize always yields a configuration");
            let report = simulate(
                profile,
                timing,
                &traffic,
                channel,
                &config,
                &sim.with_stream(sim.stream + k as u64),
            )?;
            Ok(SweepRow {
                lambda,
                regime: opt.regime,
                config,
                report,
            })
        })
        .collect()
}
