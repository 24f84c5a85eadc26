//! Where the energy goes as the load grows, with the wake-up scheme optimized
//! at each arrival rate.

use wus_core::sim::{energy_share_sweep, Horizon, SimConfig};
use wus_core::{ChannelErrorModel, Constraint, PowerProfile, TimingParams};

fn main() -> anyhow::Result<()> {
    let lambdas = [0.005, 0.02, 0.05, 0.1, 0.15, 0.2, 0.3];
    let rows = energy_share_sweep(
        &PowerProfile::reference(),
        &TimingParams::reference_ideal(1.0),
        &ChannelErrorModel::ideal(),
        &lambdas,
        &Constraint::new(30.0),
        &SimConfig::new(Horizon::SleepCycles(5000), 7),
    )?;
    println!("lambda  regime           decode  inactivity  ramps   monitor+sleep");
    for row in rows {
        let e = row.report.energy_share;
        println!(
            "{:<7} {:<16} {:<7.3} {:<11.3} {:<7.3} {:.3}",
            row.lambda,
            format!("{:?}", row.regime),
            e.decode,
            e.inactivity,
            e.startup + e.powerdown,
            e.monitor + e.sleep
        );
    }
    Ok(())
}
