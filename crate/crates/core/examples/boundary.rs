//! The delay-bound boundary: the smallest boundary cycle from the Lambert W
//! closed form, the inactivity timer along the boundary, and its power.

use wus_core::optimizer::{
    boundary_coefficients, boundary_inactivity_timer, boundary_power, min_boundary_wakeup_cycle,
};
use wus_core::specfun::lambert_w0;
use wus_core::{Constraint, PowerProfile, TimingParams, TrafficModel};

fn main() -> anyhow::Result<()> {
    println!("W0(1) = {:.15} (omega constant)", lambert_w0(1.0)?);

    let profile = PowerProfile::reference();
    let timing = TimingParams::reference_ideal(1.0);
    let traffic = TrafficModel::new(0.05);
    let c = Constraint::new(75.0);
    let t_wb = min_boundary_wakeup_cycle(&traffic, &timing, &c)?;
    let coeffs = boundary_coefficients(&profile, &timing, &traffic, &c)?;
    println!("t_wb = {t_wb:.4} ms");
    println!("t_w_ms     t_i_ms     power_mw");
    for k in 0..8 {
        let t_w = t_wb * 1.5f64.powi(k);
        let t_i = boundary_inactivity_timer(t_w, &traffic, &timing, &c)?;
        println!(
            "{t_w:<10.2} {t_i:<10.3} {:.4}",
            boundary_power(t_w, &coeffs, &profile)
        );
    }
    println!(
        "limit as t_w grows: {:.4} mW",
        profile.pw3 * coeffs.asymptotic_ratio()
    );
    Ok(())
}
