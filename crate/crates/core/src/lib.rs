//! Power and delay modeling, closed-form parameter optimization and
//! discrete-event simulation of wake-up-signal based downlink access, with a
//! DRX reference system for comparison.
//!
//! Times are in milliseconds, powers in milliwatts and arrival rates in
//! packets per millisecond throughout.

pub mod chain;
pub mod drx;
pub mod error;
pub mod metrics;
pub mod optimizer;
pub mod params;
pub mod report;
pub mod sim;
pub mod specfun;

pub use chain::{SemiMarkovSummary, State, TransitionMatrix};
pub use error::{Error, Result};
pub use params::{
    ChannelErrorModel, Constraint, PowerProfile, TimingParams, TrafficModel, WuConfig,
};
