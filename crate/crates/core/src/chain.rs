//! Semi-Markov description of the four-state wake-up scheme.
//!
//! States: S1 wake-up receiver on, S2 decoding, S3 inactivity timer, S4 sleep.
//! The embedded jump chain is
//!
//! ```text
//! S1 -> S2 (P12) | S4 (P14)
//! S2 -> S2 (P22) | S3 (P23)
//! S3 -> S2 (P32) | S4 (P34)
//! S4 -> S1 (1)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ChannelErrorModel, TimingParams, TrafficModel, WuConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum State {
    WrxOn,
    Decoding,
    Inactivity,
    Sleep,
}

impl State {
    pub const ALL: [State; 4] = [
        State::WrxOn,
        State::Decoding,
        State::Inactivity,
        State::Sleep,
    ];

    pub fn index(self) -> usize {
        match self {
            State::WrxOn => 0,
            State::Decoding => 1,
            State::Inactivity => 2,
            State::Sleep => 3,
        }
    }
}

/// Row-stochastic 4x4 jump matrix, indexed by [`State::index`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix(pub [[f64; 4]; 4]);

impl TransitionMatrix {
    pub fn get(&self, from: State, to: State) -> f64 {
        self.0[from.index()][to.index()]
    }

    pub fn p12(&self) -> f64 {
        self.0[0][1]
    }
    pub fn p14(&self) -> f64 {
        self.0[0][3]
    }
    pub fn p22(&self) -> f64 {
        self.0[1][1]
    }
    pub fn p23(&self) -> f64 {
        self.0[1][2]
    }
    pub fn p32(&self) -> f64 {
        self.0[2][1]
    }
    pub fn p34(&self) -> f64 {
        self.0[2][3]
    }

    /// Builds the matrix from its three free entries.
    pub fn from_free(p12: f64, p23: f64, p34: f64) -> Self {
        let mut m = [[0.0; 4]; 4];
        m[0][1] = p12;
        m[0][3] = 1.0 - p12;
        m[1][1] = 1.0 - p23;
        m[1][2] = p23;
        m[2][1] = 1.0 - p34;
        m[2][3] = p34;
        m[3][0] = 1.0;
        Self(m)
    }
}

/// Transition matrix, embedded-chain stationary law and mean holding times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiMarkovSummary {
    pub p: TransitionMatrix,
    pub pi: [f64; 4],
    /// Expected holding time per visit, ms.
    pub hold: [f64; 4],
}

impl SemiMarkovSummary {
    pub fn compute(
        traffic: &TrafficModel,
        timing: &TimingParams,
        channel: &ChannelErrorModel,
        cfg: &WuConfig,
    ) -> Result<Self> {
        let p = transition_probabilities(traffic, timing, channel, cfg)?;
        let pi = steady_state(&p)?;
        let hold = expected_holding_times(traffic, timing, cfg)?;
        Ok(Self { p, pi, hold })
    }

    /// Long-run fraction of time spent in each state, ignoring ramps.
    pub fn time_fractions(&self) -> [f64; 4] {
        let w: Vec<f64> = (0..4).map(|k| self.pi[k] * self.hold[k]).collect();
        let total: f64 = w.iter().sum();
        [w[0] / total, w[1] / total, w[2] / total, w[3] / total]
    }
}

pub(crate) fn validate_inputs(
    traffic: &TrafficModel,
    timing: &TimingParams,
    cfg: &WuConfig,
) -> Result<()> {
    timing.validate()?;
    traffic.validate(timing)?;
    cfg.validate(timing.tti)
}

/// Jump probabilities of the embedded chain.
///
/// A wake-up happens after a correct detection of pending traffic or after a
/// false alarm on an empty cycle.
pub fn transition_probabilities(
    traffic: &TrafficModel,
    timing: &TimingParams,
    channel: &ChannelErrorModel,
    cfg: &WuConfig,
) -> Result<TransitionMatrix> {
    validate_inputs(traffic, timing, cfg)?;
    channel.validate()?;
    let lam = traffic.lambda;
    let idle = (-lam * cfg.t_w).exp();
    let busy = -(-lam * cfg.t_w).exp_m1();
    let p12 = idle * channel.p_fa + busy * (1.0 - channel.p_md);
    let p23 = (-lam * timing.t_s).exp();
    let p34 = (-lam * cfg.t_i).exp();
    Ok(TransitionMatrix::from_free(p12, p23, p34))
}

/// Closed-form solution of the balance equations.
pub fn steady_state(p: &TransitionMatrix) -> Result<[f64; 4]> {
    let (p12, p23, p34) = (p.p12(), p.p23(), p.p34());
    if p23 <= 0.0 || !p23.is_finite() {
        return Err(Error::SingularChain("P23 vanishes: decoding never ends"));
    }
    if p34 <= 0.0 || !p34.is_finite() {
        return Err(Error::SingularChain(
            "P34 vanishes: inactivity never expires",
        ));
    }
    let pi1 = p34 * p23 / (2.0 * p34 * p23 + p12 * (1.0 + p23));
    let pi2 = pi1 * p12 / (p23 * p34);
    let pi3 = pi1 * p12 / p34;
    Ok([pi1, pi2, pi3, pi1])
}

/// Mean time spent per visit to each state.
pub fn expected_holding_times(
    traffic: &TrafficModel,
    timing: &TimingParams,
    cfg: &WuConfig,
) -> Result<[f64; 4]> {
    validate_inputs(traffic, timing, cfg)?;
    let lam = traffic.lambda;
    // E[min(t_p, t_i)] for exponential t_p.
    let inactivity = -(-lam * cfg.t_i).exp_m1() / lam;
    Ok([timing.t_on, timing.t_s, inactivity, cfg.t_w - timing.t_on])
}
