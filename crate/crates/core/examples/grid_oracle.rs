//! Cross-checks the closed-form optimum against an exhaustive TTI-grid search.

use std::time::Instant;

use wus_core::optimizer::{grid_search_oracle, optimize};
use wus_core::{Constraint, PowerProfile, TimingParams, TrafficModel};

fn main() -> anyhow::Result<()> {
    let profile = PowerProfile::reference();
    let timing = TimingParams::reference_ideal(1.0);
    for &(lam, d) in &[(0.01, 30.0), (0.05, 75.0), (0.12, 200.0)] {
        let traffic = TrafficModel::new(lam);
        let c = Constraint::new(d);
        let start = Instant::now();
        let closed = optimize(&profile, &timing, &traffic, &c)?;
        let t_closed = start.elapsed();
        let start = Instant::now();
        let grid = grid_search_oracle(&profile, &timing, &traffic, &c, 2000.0, 20.0)?;
        let t_grid = start.elapsed();
        println!(
            "lambda={lam} d_max={d}: closed form ({:?}, {:?}) in {t_closed:.1?}; \
             grid ({}, {}) over {} points in {t_grid:.1?}",
            closed.t_w_star, closed.t_i_star, grid.config.t_w, grid.config.t_i, grid.evaluated
        );
    }
    Ok(())
}
