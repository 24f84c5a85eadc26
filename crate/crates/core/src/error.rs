use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The embedded chain has no stationary distribution in closed form
    /// (P23 or P34 vanished).
    #[error("singular semi-Markov chain: {0}")]
    SingularChain(&'static str),

    #[error("argument {x} outside the domain of {function}")]
    Domain { function: &'static str, x: f64 },

    #[error("no sign change on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("wake-up cycle {t_w} ms is below the feasible boundary: {reason}")]
    InfeasibleWakeupCycle { t_w: f64, reason: &'static str },

    #[error("delay bound {d_max} ms cannot be met: {reason}")]
    InfeasibleConstraint { d_max: f64, reason: &'static str },

    #[error("no turnoff arrival rate in (0, {upper}) per ms: F1 keeps sign {sign}")]
    NoTurnoffRate { upper: f64, sign: f64 },

    #[error("degenerate boundary case: {0}")]
    DegenerateCase(&'static str),

    #[error("empty feasible set: {0}")]
    EmptyFeasibleSet(String),

    #[error("run configuration: {0}")]
    Config(String),

    #[error("output: {0}")]
    Output(String),
}

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}

pub(crate) fn ensure(
    cond: bool,
    name: &'static str,
    value: f64,
    reason: &'static str,
) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}
