//! Average power and buffering delay of one wake-up configuration, under an
//! ideal and a realistic wake-up indicator.

use wus_core::metrics::{
    average_delay_full_adaptive, average_delay_simplified, average_power_full,
    average_power_simplified,
};
use wus_core::{ChannelErrorModel, PowerProfile, TimingParams, TrafficModel, WuConfig};

fn main() -> anyhow::Result<()> {
    let profile = PowerProfile::reference();
    let traffic = TrafficModel::new(0.02);
    let cfg = WuConfig::integral(200.0, 2.0, 1.0)?;

    let ideal = TimingParams::reference_ideal(1.0);
    println!(
        "simplified model: {:.3} mW, {:.3} ms",
        average_power_simplified(&profile, &ideal, &traffic, &cfg)?,
        average_delay_simplified(&ideal, &traffic, &cfg)?
    );

    let timing = TimingParams::reference(1.0);
    for (name, channel) in [
        ("ideal", ChannelErrorModel::ideal()),
        ("realistic", ChannelErrorModel::realistic()),
    ] {
        let power = average_power_full(&profile, &timing, &traffic, &channel, &cfg)?;
        let delay = average_delay_full_adaptive(&timing, &traffic, &channel, &cfg)?;
        println!(
            "{name:>9} indicator: {power:.3} mW, {:.3} ms ({} series terms)",
            delay.delay, delay.series_terms
        );
    }
    Ok(())
}
