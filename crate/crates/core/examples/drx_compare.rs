//! Power saving of the optimized wake-up scheme over the best DRX
//! configuration meeting the same delay bound.

use wus_core::drx::{optimize_drx_exhaustive, relative_power_saving, DrxGrid, DrxPowerTable};
use wus_core::metrics::average_power_full;
use wus_core::optimizer::optimize;
use wus_core::sim::{Horizon, SimConfig};
use wus_core::{ChannelErrorModel, Constraint, PowerProfile, TimingParams, TrafficModel};

fn main() -> anyhow::Result<()> {
    let profile = PowerProfile::reference();
    let timing = TimingParams::reference(1.0);
    let channel = ChannelErrorModel::realistic();
    let sim = SimConfig::new(Horizon::Duration(1e5), 3);

    for &(lam, d) in &[(0.005, 30.0), (0.02, 75.0), (0.1, 75.0)] {
        let traffic = TrafficModel::new(lam);
        let c = Constraint::new(d);
        let wus = optimize(&profile, &timing, &traffic, &c)?;
        let cfg = wus.config().expect("configuration");
        let p_wus = average_power_full(&profile, &timing, &traffic, &channel, &cfg)?;
        let drx = optimize_drx_exhaustive(
            &DrxPowerTable::reference(),
            &traffic,
            &c,
            &DrxGrid::default(),
            timing.tti,
            &sim,
        )?;
        println!(
            "lambda={lam} d_max={d}: WuS {p_wus:.2} mW (t_w={}), DRX {:.2} mW \
             (long cycle {} ms, on {} ms), saving {:.1}%",
            cfg.t_w,
            drx.power,
            drx.config.t_long,
            drx.config.t_on_drx,
            relative_power_saving(drx.power, p_wus)?
        );
    }
    Ok(())
}
