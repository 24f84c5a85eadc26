//! Value types shared by the analytical model, the optimizer and the simulators.
//!
//! Every duration is in milliseconds and every power in milliwatts. Arrival
//! rates are packets per millisecond; the per-TTI rate is `lambda * tti`.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, ensure, Result};

/// Relative slack used when checking that a duration is a TTI multiple.
const TTI_MULTIPLE_SLACK: f64 = 1e-9;

/// Power drawn by the cellular module in each of the four WuS states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile {
    /// Wake-up receiver monitoring (S1).
    pub pw1: f64,
    /// Baseband active, decoding (S2).
    pub pw2: f64,
    /// Baseband active, inactivity timer running (S3).
    pub pw3: f64,
    /// Sleep (S4).
    pub pw4: f64,
}

impl PowerProfile {
    /// Builds a profile and checks `pw2 >= pw3 > pw1 > pw4 >= 0`.
    pub fn new(pw1: f64, pw2: f64, pw3: f64, pw4: f64) -> Result<Self> {
        let p = Self { pw1, pw2, pw3, pw4 };
        p.validate()?;
        Ok(p)
    }

    /// Reference WuS module: 57 / 935 / 850 / 0 mW, which gives `phi = 1.1`.
    pub fn reference() -> Self {
        Self {
            pw1: 57.0,
            pw2: 935.0,
            pw3: 850.0,
            pw4: 0.0,
        }
    }

    /// Same profile with `pw2` rescaled so that `pw2 / pw3 == phi`.
    pub fn with_phi(self, phi: f64) -> Result<Self> {
        Self::new(self.pw1, phi * self.pw3, self.pw3, self.pw4)
    }

    /// Decode-to-inactivity power ratio.
    pub fn phi(&self) -> f64 {
        self.pw2 / self.pw3
    }

    pub fn validate(&self) -> Result<()> {
        self.check_finite()?;
        ensure(self.pw4 >= 0.0, "pw4", self.pw4, "must be non-negative")?;
        ensure(self.pw1 > self.pw4, "pw1", self.pw1, "must exceed pw4")?;
        ensure(self.pw3 > self.pw1, "pw3", self.pw3, "must exceed pw1")?;
        ensure(
            self.pw2 >= self.pw3,
            "pw2",
            self.pw2,
            "must be at least pw3",
        )
    }

    /// Weaker check used by the metric functions: finite and non-negative.
    /// Lets degenerate profiles (all levels equal) be evaluated.
    pub(crate) fn check_finite(&self) -> Result<()> {
        for (name, v) in [
            ("pw1", self.pw1),
            ("pw2", self.pw2),
            ("pw3", self.pw3),
            ("pw4", self.pw4),
        ] {
            check_finite(name, v)?;
            ensure(v >= 0.0, name, v, "must be non-negative")?;
        }
        Ok(())
    }
}

impl Default for PowerProfile {
    fn default() -> Self {
        Self::reference()
    }
}

/// Fixed timing of the scheme: ramps, on-duration and the TTI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingParams {
    /// Baseband start-up ramp.
    pub t_su: f64,
    /// Baseband power-down ramp.
    pub t_pd: f64,
    /// Wake-up receiver on-duration.
    pub t_on: f64,
    /// Service time of one (concatenated) transmission. Always one TTI.
    pub t_s: f64,
    pub tti: f64,
}

impl TimingParams {
    /// `t_s` is set to one TTI.
    pub fn new(t_su: f64, t_pd: f64, t_on: f64, tti: f64) -> Result<Self> {
        let t = Self {
            t_su,
            t_pd,
            t_on,
            t_s: tti,
            tti,
        };
        t.validate()?;
        Ok(t)
    }

    /// 15 ms start-up, 10 ms power-down, 1/14 ms on-duration.
    pub fn reference(tti: f64) -> Self {
        Self {
            t_su: 15.0,
            t_pd: 10.0,
            t_on: 1.0 / 14.0,
            t_s: tti,
            tti,
        }
    }

    /// Reference timing with the on-duration neglected.
    pub fn reference_ideal(tti: f64) -> Self {
        Self {
            t_on: 0.0,
            ..Self::reference(tti)
        }
    }

    pub fn with_t_on(self, t_on: f64) -> Self {
        Self { t_on, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("t_su", self.t_su),
            ("t_pd", self.t_pd),
            ("t_on", self.t_on),
            ("t_s", self.t_s),
            ("tti", self.tti),
        ] {
            check_finite(name, v)?;
        }
        ensure(self.tti > 0.0, "tti", self.tti, "must be positive")?;
        ensure(self.t_su > 0.0, "t_su", self.t_su, "must be positive")?;
        ensure(self.t_pd > 0.0, "t_pd", self.t_pd, "must be positive")?;
        ensure(self.t_on >= 0.0, "t_on", self.t_on, "must be non-negative")?;
        ensure(
            self.t_on < self.tti,
            "t_on",
            self.t_on,
            "must be shorter than one TTI",
        )?;
        ensure(
            (self.t_s - self.tti).abs() <= TTI_MULTIPLE_SLACK * self.tti,
            "t_s",
            self.t_s,
            "service time must equal one TTI",
        )
    }
}

/// Poisson downlink traffic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficModel {
    /// Packets per millisecond.
    pub lambda: f64,
}

impl TrafficModel {
    pub fn new(lambda: f64) -> Self {
        Self { lambda }
    }

    pub fn per_tti(&self, timing: &TimingParams) -> f64 {
        self.lambda * timing.tti
    }

    /// Requires `0 < lambda * tti < 1`.
    pub fn validate(&self, timing: &TimingParams) -> Result<()> {
        check_finite("lambda", self.lambda)?;
        ensure(self.lambda > 0.0, "lambda", self.lambda, "must be positive")?;
        ensure(
            self.per_tti(timing) < 1.0,
            "lambda",
            self.lambda,
            "must be below one packet per TTI",
        )
    }
}

/// Wake-up indicator decoding errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelErrorModel {
    pub p_fa: f64,
    pub p_md: f64,
}

impl ChannelErrorModel {
    pub fn new(p_fa: f64, p_md: f64) -> Result<Self> {
        let c = Self { p_fa, p_md };
        c.validate()?;
        Ok(c)
    }

    pub fn ideal() -> Self {
        Self {
            p_fa: 0.0,
            p_md: 0.0,
        }
    }

    /// 10 % false alarms, 1 % misdetections.
    pub fn realistic() -> Self {
        Self {
            p_fa: 0.1,
            p_md: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("p_fa", self.p_fa)?;
        check_finite("p_md", self.p_md)?;
        ensure(
            (0.0..1.0).contains(&self.p_fa),
            "p_fa",
            self.p_fa,
            "must lie in [0, 1)",
        )?;
        ensure(
            (0.0..1.0).contains(&self.p_md),
            "p_md",
            self.p_md,
            "must lie in [0, 1)",
        )
    }
}

impl Default for ChannelErrorModel {
    fn default() -> Self {
        Self::ideal()
    }
}

/// The two tunable parameters: wake-up cycle and inactivity timer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WuConfig {
    pub t_w: f64,
    pub t_i: f64,
    /// Both values are whole multiples of the TTI.
    pub integral: bool,
}

impl WuConfig {
    /// Real-valued configuration, as used by the relaxed problem.
    pub fn relaxed(t_w: f64, t_i: f64) -> Self {
        Self {
            t_w,
            t_i,
            integral: false,
        }
    }

    /// Configuration on the TTI grid; rejects values that are not multiples.
    pub fn integral(t_w: f64, t_i: f64, tti: f64) -> Result<Self> {
        let c = Self {
            t_w,
            t_i,
            integral: true,
        };
        c.validate(tti)?;
        Ok(c)
    }

    /// Configuration given in whole TTIs.
    pub fn from_ttis(n_w: u64, n_i: u64, tti: f64) -> Result<Self> {
        Self::integral(n_w as f64 * tti, n_i as f64 * tti, tti)
    }

    pub fn validate(&self, tti: f64) -> Result<()> {
        check_finite("t_w", self.t_w)?;
        check_finite("t_i", self.t_i)?;
        let slack = TTI_MULTIPLE_SLACK * tti;
        ensure(
            self.t_w >= tti - slack,
            "t_w",
            self.t_w,
            "must be at least one TTI",
        )?;
        ensure(
            self.t_i >= tti - slack,
            "t_i",
            self.t_i,
            "must be at least one TTI",
        )?;
        if self.integral {
            ensure(
                is_tti_multiple(self.t_w, tti),
                "t_w",
                self.t_w,
                "must be a TTI multiple",
            )?;
            ensure(
                is_tti_multiple(self.t_i, tti),
                "t_i",
                self.t_i,
                "must be a TTI multiple",
            )?;
        }
        Ok(())
    }
}

pub(crate) fn is_tti_multiple(t: f64, tti: f64) -> bool {
    let k = t / tti;
    (k - k.round()).abs() <= TTI_MULTIPLE_SLACK * k.max(1.0)
}

/// Delay bound of the optimization problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    /// Maximum tolerable average buffering delay.
    pub d_max: f64,
}

impl Constraint {
    pub fn new(d_max: f64) -> Self {
        Self { d_max }
    }

    /// `d_max - t_s / 2`, the part of the bound left for sleep buffering.
    pub fn margin(&self, timing: &TimingParams) -> f64 {
        self.d_max - 0.5 * timing.t_s
    }

    pub fn validate(&self, timing: &TimingParams) -> Result<()> {
        check_finite("d_max", self.d_max)?;
        if self.margin(timing) <= 0.0 {
            return Err(crate::Error::InfeasibleConstraint {
                d_max: self.d_max,
                reason: "bound must exceed half a service time",
            });
        }
        Ok(())
    }
}
