//! Closed-form sensitivities of power and delay to the two timers.

use wus_core::metrics::{delay_gradient, power_gradient};
use wus_core::{PowerProfile, TimingParams, TrafficModel, WuConfig};

fn main() -> anyhow::Result<()> {
    let profile = PowerProfile::reference();
    let timing = TimingParams::reference_ideal(1.0);
    println!("lambda   t_w    t_i   dP/dt_w      dP/dt_i      dD/dt_w     dD/dt_i");
    for &(lam, t_w, t_i) in &[(0.01, 180.0, 1.0), (0.08, 315.0, 1.0), (0.15, 2246.0, 5.0)] {
        let traffic = TrafficModel::new(lam);
        let cfg = WuConfig::relaxed(t_w, t_i);
        let gp = power_gradient(&profile, &timing, &traffic, &cfg)?;
        let gd = delay_gradient(&timing, &traffic, &cfg)?;
        println!(
            "{lam:<8} {t_w:<6} {t_i:<5} {:<12.4e} {:<12.4e} {:<11.4} {:.4e}",
            gp.d_tw, gp.d_ti, gd.d_tw, gd.d_ti
        );
    }
    Ok(())
}
