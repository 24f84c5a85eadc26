//! Discrete-event simulation of the optimized wake-up scheme next to the
//! analytical prediction.

use wus_core::metrics::{average_delay_full_adaptive, average_power_full};
use wus_core::optimizer::optimize;
use wus_core::sim::{simulate, Horizon, SimConfig};
use wus_core::{ChannelErrorModel, Constraint, PowerProfile, TimingParams, TrafficModel};

fn main() -> anyhow::Result<()> {
    let profile = PowerProfile::reference();
    let timing = TimingParams::reference(1.0);
    let channel = ChannelErrorModel::realistic();
    let traffic = TrafficModel::new(0.02);
    let opt = optimize(&profile, &timing, &traffic, &Constraint::new(75.0))?;
    let cfg = opt.config().expect("configuration");

    let sim = SimConfig::new(Horizon::SleepCycles(200_000), 42);
    let r = simulate(&profile, &timing, &traffic, &channel, &cfg, &sim)?;
    let power = average_power_full(&profile, &timing, &traffic, &channel, &cfg)?;
    let delay = average_delay_full_adaptive(&timing, &traffic, &channel, &cfg)?.delay;

    println!("configuration: t_w = {} ms, t_i = {} ms", cfg.t_w, cfg.t_i);
    println!(
        "power: simulated {:.3} ± {:.3} mW, model {power:.3} mW",
        r.mean_power, r.power_stderr
    );
    println!(
        "delay: simulated {:.3} ± {:.3} ms, model {delay:.3} ms",
        r.mean_delay, r.delay_stderr
    );
    println!("per-packet delay: {:.3} ms", r.mean_packet_delay);
    println!("{:?}", r.counters);
    Ok(())
}
