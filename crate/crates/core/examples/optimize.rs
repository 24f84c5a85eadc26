//! Optimal wake-up cycle and inactivity timer across arrival rates and delay
//! bounds.

use wus_core::optimizer::{optimize, Regime};
use wus_core::{Constraint, PowerProfile, TimingParams, TrafficModel};

fn main() -> anyhow::Result<()> {
    let profile = PowerProfile::reference();
    let timing = TimingParams::reference_ideal(1.0);
    println!("lambda  d_max  t_w*   t_i*  power_mw  delay_ms  case");
    for &lam in &[0.005, 0.01, 0.08, 0.15, 0.3] {
        for &d in &[30.0, 75.0, 500.0] {
            let r = optimize(
                &profile,
                &timing,
                &TrafficModel::new(lam),
                &Constraint::new(d),
            )?;
            match r.regime {
                Regime::WusEffective => println!(
                    "{lam:<7} {d:<6} {:<6} {:<5} {:<9.3} {:<9.3} {:?}",
                    r.t_w_star.unwrap(),
                    r.t_i_star.unwrap(),
                    r.predicted_power,
                    r.predicted_delay,
                    r.boundary_case.unwrap()
                ),
                Regime::WusIneffective => println!(
                    "{lam:<7} {d:<6} off: power only approaches {:.3} mW (advisory t_w = {:?})",
                    r.power_infimum,
                    r.advisory.map(|c| c.t_w)
                ),
            }
        }
    }
    Ok(())
}
