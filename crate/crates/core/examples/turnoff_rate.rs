//! Arrival rate above which waking up on demand stops paying off, as a
//! function of the start-up and power-down ramps.

use wus_core::optimizer::turnoff_arrival_rate;
use wus_core::{Constraint, Error, PowerProfile, TimingParams};

fn main() -> anyhow::Result<()> {
    let profile = PowerProfile::reference();
    println!("t_su+t_pd  d_max=30  d_max=75  d_max=500");
    for &ramps in &[5.0, 10.0, 25.0, 50.0, 100.0] {
        let timing = TimingParams {
            t_su: 0.6 * ramps,
            t_pd: 0.4 * ramps,
            ..TimingParams::reference_ideal(1.0)
        };
        let mut line = format!("{ramps:<10}");
        for &d in &[30.0, 75.0, 500.0] {
            match turnoff_arrival_rate(&profile, &timing, &Constraint::new(d)) {
                Ok(lam) => line += &format!(" {lam:<9.4}"),
                Err(Error::NoTurnoffRate { .. }) => line += " never    ",
                Err(e) => return Err(e.into()),
            }
        }
        println!("{line}");
    }
    Ok(())
}
