//! Discrete-event simulators and the report type they share.
//!
//! Both simulators advance phase by phase (sleep, monitoring, start-up,
//! decode TTIs, inactivity, power-down) and draw Poisson arrivals lazily, so a
//! run costs a handful of operations per packet. Statistics are collected per
//! sleep cycle and grouped into batches for standard errors.

mod wus;

pub use wus::{energy_share_sweep, simulate, SweepRow};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// How long a simulation runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    /// Simulated time in ms.
    Duration(f64),
    /// Number of sleep cycles.
    SleepCycles(u64),
}

impl Horizon {
    fn amount(&self) -> f64 {
        match *self {
            Horizon::Duration(t) => t,
            Horizon::SleepCycles(n) => n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon: Horizon,
    /// Discarded prefix, in the unit of the horizon (ms or cycles).
    /// Defaults to 5 % of the horizon.
    pub warmup: Option<f64>,
    pub seed: u64,
    /// Independent stream of the generator, e.g. a sweep-point index.
    pub stream: u64,
    /// Number of batches used for the standard errors.
    pub batches: usize,
}

impl SimConfig {
    pub fn new(horizon: Horizon, seed: u64) -> Self {
        Self {
            horizon,
            warmup: None,
            seed,
            stream: 0,
            batches: 20,
        }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    pub fn with_warmup(self, warmup: f64) -> Self {
        Self {
            warmup: Some(warmup),
            ..self
        }
    }

    pub fn warmup_amount(&self) -> f64 {
        self.warmup.unwrap_or(0.05 * self.horizon.amount())
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.horizon.amount();
        ensure(h.is_finite() && h > 0.0, "horizon", h, "must be positive")?;
        let w = self.warmup_amount();
        ensure(w >= 0.0 && w < h, "warmup", w, "must lie in [0, horizon)")?;
        ensure(
            self.batches >= 2,
            "batches",
            self.batches as f64,
            "need at least two batches",
        )
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Fraction of the energy spent in each phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyShare {
    /// Wake-up receiver monitoring (DRX: on-duration without traffic).
    pub monitor: f64,
    pub decode: f64,
    pub inactivity: f64,
    pub sleep: f64,
    pub startup: f64,
    pub powerdown: f64,
}

impl EnergyShare {
    pub fn total(&self) -> f64 {
        self.monitor + self.decode + self.inactivity + self.sleep + self.startup + self.powerdown
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub cycles: u64,
    pub wakeups: u64,
    pub false_alarms: u64,
    pub misdetections: u64,
    /// Packets decoded.
    pub packets: u64,
    /// Packets that found an empty buffer while the baseband was down.
    pub head_of_line: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub mean_power: f64,
    pub power_stderr: f64,
    /// Wake-up scheme: first-packet buffering per state jump plus half a
    /// TTI, the quantity the analytical delay describes. DRX: mean packet
    /// delay plus half a TTI.
    pub mean_delay: f64,
    pub delay_stderr: f64,
    /// Arrival to start of the decoding TTI, averaged over packets.
    pub mean_packet_delay: f64,
    pub packet_delay_stderr: f64,
    pub energy_share: EnergyShare,
    pub counters: Counters,
    /// Entries into monitoring, decode TTIs, inactivity and sleep.
    pub state_visits: [u64; 4],
    /// Time in ms spent in the same four states, ramps excluded.
    pub state_time: [f64; 4],
    pub ramp_time: f64,
    pub measured_time: f64,
}

impl SimulationReport {
    /// Share of the non-ramp time spent in each state.
    pub fn state_time_fractions(&self) -> [f64; 4] {
        let total: f64 = self.state_time.iter().sum();
        self.state_time.map(|t| t / total)
    }

    pub fn jumps(&self) -> u64 {
        self.state_visits.iter().sum()
    }
}

/// Phase indices into the energy and time accumulators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Phase {
    Monitor = 0,
    Decode = 1,
    Inactivity = 2,
    Sleep = 3,
    Startup = 4,
    Powerdown = 5,
}

/// Statistics of one sleep cycle and whatever activity follows it.
#[derive(Debug, Clone, Default)]
pub(crate) struct Tally {
    energy: [f64; 6],
    time: [f64; 6],
    visits: [u64; 4],
    hol_sum: f64,
    pkt_sum: f64,
    counters: Counters,
}

impl Tally {
    pub(crate) fn spend(&mut self, phase: Phase, duration: f64, energy: f64) {
        self.time[phase as usize] += duration;
        self.energy[phase as usize] += energy;
    }

    pub(crate) fn enter(&mut self, phase: Phase) {
        self.visits[phase as usize] += 1;
    }

    pub(crate) fn counters(&mut self) -> &mut Counters {
        &mut self.counters
    }

    fn add(&mut self, o: &Tally) {
        for k in 0..6 {
            self.energy[k] += o.energy[k];
            self.time[k] += o.time[k];
        }
        for k in 0..4 {
            self.visits[k] += o.visits[k];
        }
        self.hol_sum += o.hol_sum;
        self.pkt_sum += o.pkt_sum;
        let (c, d) = (&mut self.counters, &o.counters);
        c.cycles += d.cycles;
        c.wakeups += d.wakeups;
        c.false_alarms += d.false_alarms;
        c.misdetections += d.misdetections;
        c.packets += d.packets;
        c.head_of_line += d.head_of_line;
    }

    fn energy(&self) -> f64 {
        self.energy.iter().sum()
    }

    fn duration(&self) -> f64 {
        self.time.iter().sum()
    }

    fn jumps(&self) -> u64 {
        self.visits.iter().sum()
    }
}

/// A buffered packet: arrival time and whether it opened a sleep backlog.
#[derive(Debug, Clone, Copy)]
struct Packet {
    arrival: f64,
    head_of_line: bool,
}

/// Poisson arrivals plus the downlink buffer.
pub(crate) struct Traffic {
    exp: Exp<f64>,
    next: f64,
    buffer: Vec<Packet>,
}

impl Traffic {
    pub(crate) fn new(lambda: f64, rng: &mut ChaCha8Rng) -> Self {
        let exp = Exp::new(lambda).expect("rate validated as positive");
        let next = exp.sample(rng);
        Self {
            exp,
            next,
            buffer: Vec::new(),
        }
    }

    /// Buffers every arrival strictly before `until`. `asleep` marks whether
    /// the baseband is down, which decides head-of-line status.
    pub(crate) fn pull(&mut self, until: f64, asleep: bool, rng: &mut ChaCha8Rng) {
        while self.next < until {
            let head_of_line = asleep && self.buffer.is_empty();
            self.buffer.push(Packet {
                arrival: self.next,
                head_of_line,
            });
            self.next += self.exp.sample(rng);
        }
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub(crate) fn next_arrival(&self) -> f64 {
        self.next
    }

    /// Decodes the whole buffer in a TTI starting at `start`.
    pub(crate) fn decode(&mut self, start: f64, tally: &mut Tally) {
        for p in self.buffer.drain(..) {
            let wait = start - p.arrival;
            tally.pkt_sum += wait;
            tally.counters.packets += 1;
            if p.head_of_line {
                tally.hol_sum += wait;
                tally.counters.head_of_line += 1;
            }
        }
    }
}

/// Snaps `t` onto the TTI grid when it is within rounding noise of it.
pub(crate) fn snap(t: f64, tti: f64) -> f64 {
    let k = (t / tti).round();
    if (t - k * tti).abs() <= 1e-9 * tti.max(t.abs() * 1e-6) {
        k * tti
    } else {
        t
    }
}

/// First TTI boundary at or after `t`.
pub(crate) fn align_up(t: f64, tti: f64) -> f64 {
    let s = snap(t, tti);
    (s / tti).ceil() * tti
}

/// First TTI boundary strictly after `t`.
pub(crate) fn next_boundary(t: f64, tti: f64) -> f64 {
    ((t / tti).floor() + 1.0) * tti
}

/// What `SimulationReport::mean_delay` averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DelayMetric {
    /// Head-of-line buffering per state entry, plus half a TTI.
    PerJump,
    /// Arrival to start of decoding per packet, plus half a TTI.
    PerPacket,
}

/// Accumulates cycle tallies into batches and produces the report.
pub(crate) struct Collector {
    sim: SimConfig,
    metric: DelayMetric,
    warmup: f64,
    horizon: f64,
    batches: Vec<Tally>,
    seen_cycles: u64,
    half_tti: f64,
}

impl Collector {
    pub(crate) fn new(sim: &SimConfig, tti: f64, metric: DelayMetric) -> Self {
        Self {
            sim: *sim,
            metric,
            warmup: sim.warmup_amount(),
            horizon: sim.horizon.amount(),
            batches: vec![Tally::default(); sim.batches],
            seen_cycles: 0,
            half_tti: 0.5 * tti,
        }
    }

    /// Whether another cycle starting at `start` should be simulated.
    pub(crate) fn wants_more(&self, start: f64) -> bool {
        match self.sim.horizon {
            Horizon::Duration(h) => start < h,
            Horizon::SleepCycles(n) => self.seen_cycles < n,
        }
    }

    /// Instant at which an unfinished active period is cut short; only a
    /// time horizon has one.
    pub(crate) fn deadline(&self) -> f64 {
        match self.sim.horizon {
            Horizon::Duration(h) => h,
            Horizon::SleepCycles(_) => f64::INFINITY,
        }
    }

    /// Files the tally of the cycle that began at `start`.
    pub(crate) fn commit(&mut self, start: f64, tally: &Tally) {
        let position = match self.sim.horizon {
            Horizon::Duration(_) => start,
            Horizon::SleepCycles(_) => self.seen_cycles as f64,
        };
        self.seen_cycles += 1;
        if position < self.warmup {
            return;
        }
        let frac = (position - self.warmup) / (self.horizon - self.warmup);
        let b = ((frac * self.batches.len() as f64) as usize).min(self.batches.len() - 1);
        self.batches[b].add(tally);
    }

    pub(crate) fn finish(self) -> SimulationReport {
        let mut total = Tally::default();
        for b in &self.batches {
            total.add(b);
        }
        let half = self.half_tti;
        let power = |t: &Tally| t.energy() / t.duration();
        let pkt = |t: &Tally| t.pkt_sum / t.counters.packets as f64;
        let metric = self.metric;
        let delay = |t: &Tally| match metric {
            DelayMetric::PerJump => t.hol_sum / t.jumps() as f64 + half,
            DelayMetric::PerPacket => pkt(t) + half,
        };

        let e = total.energy();
        let share = |p: Phase| {
            if e > 0.0 {
                total.energy[p as usize] / e
            } else {
                0.0
            }
        };
        SimulationReport {
            mean_power: power(&total),
            power_stderr: batch_stderr(&self.batches, power),
            mean_delay: delay(&total),
            delay_stderr: batch_stderr(&self.batches, delay),
            mean_packet_delay: pkt(&total),
            packet_delay_stderr: batch_stderr(&self.batches, pkt),
            energy_share: EnergyShare {
                monitor: share(Phase::Monitor),
                decode: share(Phase::Decode),
                inactivity: share(Phase::Inactivity),
                sleep: share(Phase::Sleep),
                startup: share(Phase::Startup),
                powerdown: share(Phase::Powerdown),
            },
            counters: total.counters,
            state_visits: total.visits,
            state_time: [total.time[0], total.time[1], total.time[2], total.time[3]],
            ramp_time: total.time[Phase::Startup as usize] + total.time[Phase::Powerdown as usize],
            measured_time: total.duration(),
        }
    }
}

/// Standard error of the batch means of `stat`, skipping empty batches.
fn batch_stderr(batches: &[Tally], stat: impl Fn(&Tally) -> f64) -> f64 {
    let values: Vec<f64> = batches
        .iter()
        .filter(|b| b.duration() > 0.0)
        .map(&stat)
        .filter(|v| v.is_finite())
        .collect();
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}
