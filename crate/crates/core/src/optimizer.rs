//! Delay-constrained power minimization over the wake-up cycle and the
//! inactivity timer.
//!
//! The optimum lies on the boundary curve where the average delay equals the
//! bound. Along that curve the power is a ratio of two affine-plus-exponential
//! functions of `t_w`; the sign of its derivative decides whether the
//! shortest feasible cycle is optimal or whether the wake-up scheme should be
//! switched off altogether.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{average_delay_simplified, average_power_simplified};
use crate::params::{
    is_tti_multiple, Constraint, PowerProfile, TimingParams, TrafficModel, WuConfig,
};
use crate::specfun::{find_root, lambert_w0, scan_for_bracket, Bracket, DEFAULT_TOL};

/// Relative width below which `F1` or `F3` counts as zero.
const CASE_TIE_TOLERANCE: f64 = 1e-12;
/// Advisory configurations must come within this factor of the power infimum.
const ADVISORY_FACTOR: f64 = 1.001;
/// Number of sub-intervals used when scanning for the turnoff rate.
const TURNOFF_SCAN_STEPS: usize = 1000;

/// `u1..u3`, `w1..w3` such that the boundary power is
/// `pw3 (u1 + u2 t_w + u3 e^{-lam t_w}) / (w1 + w2 t_w + w3 e^{-lam t_w})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCoefficients {
    pub lambda: f64,
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

/// Constants of `Y(t_w) = F1 + (F2 - lam F3 t_w) e^{-lam t_w}`, the numerator
/// of the boundary-power derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppendixConstants {
    pub lambda: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryCase {
    /// `F3 > 0`: boundary power increasing.
    A,
    /// `F3 < 0 < F1`: boundary power increasing.
    B,
    /// `F3 < 0`, `F1 < 0`: boundary power decreasing on the feasible range.
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    WusEffective,
    WusIneffective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub lambda: f64,
    pub d_max: f64,
    pub tti: f64,
    /// `None` is the unbounded sentinel of the ineffective regime.
    pub t_w_star: Option<f64>,
    pub t_i_star: Option<f64>,
    pub regime: Regime,
    /// `None` when `F1` stays positive up to one packet per TTI.
    pub lambda_t: Option<f64>,
    /// Minimum feasible wake-up cycle at the minimum inactivity timer.
    pub t_wb: f64,
    pub boundary_case: Option<BoundaryCase>,
    /// Stationary point of the boundary power (case C only).
    pub t_ws: Option<f64>,
    /// Power of the returned configuration (the advisory one when the
    /// scheme is ineffective).
    pub predicted_power: f64,
    pub predicted_delay: f64,
    /// Lower bound `pw3 u2 / w2` approached as `t_w` grows.
    pub power_infimum: f64,
    /// Finite configuration within 0.1 % of the infimum, for callers that
    /// need concrete values even though the wake-up scheme should be off.
    pub advisory: Option<WuConfig>,
}

impl OptimizationResult {
    /// The configuration to apply: the optimum, or the advisory fallback.
    pub fn config(&self) -> Option<WuConfig> {
        match (self.t_w_star, self.t_i_star) {
            (Some(t_w), Some(t_i)) => Some(WuConfig {
                t_w,
                t_i,
                integral: true,
            }),
            _ => self.advisory,
        }
    }
}

/// Exhaustive integer-grid optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub config: WuConfig,
    pub power: f64,
    pub delay: f64,
    pub evaluated: usize,
    pub feasible: usize,
}

fn checked_margin(
    traffic: &TrafficModel,
    timing: &TimingParams,
    constraint: &Constraint,
) -> Result<f64> {
    timing.validate()?;
    traffic.validate(timing)?;
    constraint.validate(timing)?;
    Ok(constraint.margin(timing))
}

/// Inactivity timer that puts `(t_w, t_i)` exactly on the delay bound.
pub fn boundary_inactivity_timer(
    t_w: f64,
    traffic: &TrafficModel,
    timing: &TimingParams,
    constraint: &Constraint,
) -> Result<f64> {
    let d = checked_margin(traffic, timing, constraint)?;
    let lam = traffic.lambda;
    let x = -(-lam * t_w).exp_m1();
    let b = 1.0 + (lam * timing.t_s).exp();
    let buffering = t_w + (timing.t_su - 1.0 / lam) * x;
    let num = buffering - 2.0 * d;
    if !(num > 0.0) {
        return Err(Error::InfeasibleWakeupCycle {
            t_w,
            reason: "delay bound is met for every inactivity timer",
        });
    }
    let t_i = (num / (d * x * b)).ln() / lam;
    if t_i < timing.tti * (1.0 - 1e-9) {
        return Err(Error::InfeasibleWakeupCycle {
            t_w,
            reason: "boundary inactivity timer is shorter than one TTI",
        });
    }
    Ok(t_i)
}

/// Smallest wake-up cycle on the boundary, reached at `t_i = 1 TTI`, in
/// closed form through the principal Lambert W branch.
pub fn min_boundary_wakeup_cycle(
    traffic: &TrafficModel,
    timing: &TimingParams,
    constraint: &Constraint,
) -> Result<f64> {
    let d = checked_margin(traffic, timing, constraint)?;
    let lam = traffic.lambda;
    let e_tti = (lam * timing.tti).exp();
    let b = 1.0 + (lam * timing.t_s).exp();
    let f = ((e_tti * b + 2.0) * d - timing.t_su) * lam + 1.0;
    let h = lam * timing.t_su - e_tti * d * b * lam - 1.0;
    let t_wb = (f + lambert_w0(h * (-f).exp())?) / lam;
    if t_wb < timing.tti {
        return Err(Error::InfeasibleConstraint {
            d_max: constraint.d_max,
            reason: "bound is tighter than one wake-up cycle at the minimum inactivity timer",
        });
    }
    Ok(t_wb)
}

/// Shared pieces of the boundary coefficients.
struct BoundaryParts {
    lam: f64,
    d: f64,
    /// `t_s e^{lam t_s} + 1/lam`
    a: f64,
    /// `phi t_s e^{lam t_s} + 1/lam`
    a_phi: f64,
    /// `1 + e^{lam t_s}`
    b: f64,
    /// `(phi t_su + t_pd)/2 - 1/lam`
    c: f64,
    /// `t_su + t_pd - 1/lam`
    c_full: f64,
    /// `t_su - 1/lam`
    l: f64,
}

impl BoundaryParts {
    fn new(profile: &PowerProfile, timing: &TimingParams, lam: f64, d: f64) -> Self {
        let inv = 1.0 / lam;
        let es = (lam * timing.t_s).exp();
        let phi = profile.phi();
        Self {
            lam,
            d,
            a: timing.t_s * es + inv,
            a_phi: phi * timing.t_s * es + inv,
            b: 1.0 + es,
            c: 0.5 * (phi * timing.t_su + timing.t_pd) - inv,
            c_full: timing.t_su + timing.t_pd - inv,
            l: timing.t_su - inv,
        }
    }

    fn f1(&self) -> f64 {
        let (bd, d) = (self.b * self.d, self.d);
        bd * (self.a_phi * (self.c_full - self.l + 2.0 * d) - self.a * self.c) - self.c * bd * bd
    }
}

pub fn boundary_coefficients(
    profile: &PowerProfile,
    timing: &TimingParams,
    traffic: &TrafficModel,
    constraint: &Constraint,
) -> Result<BoundaryCoefficients> {
    profile.validate()?;
    let d = checked_margin(traffic, timing, constraint)?;
    let p = BoundaryParts::new(profile, timing, traffic.lambda, d);
    let bd = p.b * d;
    let k = p.l - 2.0 * d;
    Ok(BoundaryCoefficients {
        lambda: p.lam,
        u1: p.c * bd + p.a_phi * k,
        u2: p.a_phi,
        u3: -p.c * bd - p.a_phi * p.l,
        w1: p.c_full * bd + p.a * k,
        w2: p.a + bd,
        w3: -p.c_full * bd - p.a * p.l,
    })
}

/// Power along the boundary curve.
pub fn boundary_power(t_w: f64, coeffs: &BoundaryCoefficients, profile: &PowerProfile) -> f64 {
    let e = (-coeffs.lambda * t_w).exp();
    profile.pw3 * (coeffs.u1 + coeffs.u2 * t_w + coeffs.u3 * e)
        / (coeffs.w1 + coeffs.w2 * t_w + coeffs.w3 * e)
}

impl BoundaryCoefficients {
    /// Limit of the boundary power as `t_w` grows without bound, divided by
    /// `pw3`.
    pub fn asymptotic_ratio(&self) -> f64 {
        self.u2 / self.w2
    }

    /// Derivative of the boundary power with respect to `t_w`.
    pub fn power_slope(&self, t_w: f64, profile: &PowerProfile) -> f64 {
        let e = (-self.lambda * t_w).exp();
        let den = self.w1 + self.w2 * t_w + self.w3 * e;
        let y = (self.u2 - self.lambda * self.u3 * e) * den
            - (self.u1 + self.u2 * t_w + self.u3 * e) * (self.w2 - self.lambda * self.w3 * e);
        profile.pw3 * y / (den * den)
    }
}

impl AppendixConstants {
    pub fn y(&self, t_w: f64) -> f64 {
        self.f1 + (self.f2 - self.lambda * self.f3 * t_w) * (-self.lambda * t_w).exp()
    }

    pub fn f1_plus_f2_positive(&self) -> bool {
        self.f1 + self.f2 > 0.0
    }

    pub fn f2_plus_f3_positive(&self) -> bool {
        self.f2 + self.f3 > 0.0
    }

    pub fn f1_exceeds_f3(&self) -> bool {
        self.f1 > self.f3
    }

    /// All three inequalities the case analysis relies on.
    pub fn inequalities_hold(&self) -> bool {
        self.f1_plus_f2_positive() && self.f2_plus_f3_positive() && self.f1_exceeds_f3()
    }

    /// Root of `Y` when it decreases from `F1 + F2 > 0` to `F1 < 0` (case C).
    pub fn stationary_point(&self) -> Result<f64> {
        let mut hi = 1.0 / self.lambda;
        let mut guard = 0;
        while self.y(hi) > 0.0 {
            hi *= 2.0;
            guard += 1;
            if guard > 200 {
                return Err(Error::DegenerateCase("Y(t_w) stays positive"));
            }
        }
        find_root(|t| self.y(t), Bracket::new(0.0, hi)?, DEFAULT_TOL)
    }
}

pub fn appendix_constants(
    profile: &PowerProfile,
    timing: &TimingParams,
    traffic: &TrafficModel,
    constraint: &Constraint,
) -> Result<AppendixConstants> {
    profile.validate()?;
    let d = checked_margin(traffic, timing, constraint)?;
    let consts = appendix_from_parts(&BoundaryParts::new(profile, timing, traffic.lambda, d));
    if !consts.inequalities_hold() {
        log::warn!(
            "case-analysis inequalities fail at lambda={} (phi={}): {:?}",
            traffic.lambda,
            profile.phi(),
            consts
        );
    }
    Ok(consts)
}

fn appendix_from_parts(p: &BoundaryParts) -> AppendixConstants {
    let bd2 = p.b * p.d * p.d;
    let f1 = p.f1();
    let f3 = f1 - 2.0 * p.a_phi * bd2;
    let f2 = -f3 + 2.0 * p.lam * bd2 * (p.a_phi * p.c_full - p.c * p.a);
    AppendixConstants {
        lambda: p.lam,
        f1,
        f2,
        f3,
    }
}

pub fn classify_boundary_case(constants: &AppendixConstants) -> Result<BoundaryCase> {
    let scale = constants
        .f1
        .abs()
        .max(constants.f2.abs())
        .max(constants.f3.abs());
    let tie = CASE_TIE_TOLERANCE * scale;
    if constants.f3.abs() <= tie {
        return Err(Error::DegenerateCase("F3 vanishes"));
    }
    if constants.f3 > 0.0 {
        return Ok(BoundaryCase::A);
    }
    if constants.f1.abs() <= tie {
        return Err(Error::DegenerateCase("F1 vanishes"));
    }
    Ok(if constants.f1 > 0.0 {
        BoundaryCase::B
    } else {
        BoundaryCase::C
    })
}

/// `F1` as a function of the arrival rate, for the given profile and bound.
pub fn f1_of_lambda(
    profile: &PowerProfile,
    timing: &TimingParams,
    constraint: &Constraint,
    lambda: f64,
) -> f64 {
    BoundaryParts::new(profile, timing, lambda, constraint.margin(timing)).f1()
}

/// Arrival rate above which the wake-up scheme stops saving power: the root
/// of `F1(lambda)` on `(0, 1/tti)`.
pub fn turnoff_arrival_rate(
    profile: &PowerProfile,
    timing: &TimingParams,
    constraint: &Constraint,
) -> Result<f64> {
    profile.validate()?;
    timing.validate()?;
    constraint.validate(timing)?;
    let upper = 1.0 / timing.tti;
    let lo = 1e-6 * upper;
    let hi = upper * (1.0 - 1e-9);
    let f = |lam: f64| f1_of_lambda(profile, timing, constraint, lam);
    let bracket = scan_for_bracket(f, lo, hi, TURNOFF_SCAN_STEPS).ok_or(Error::NoTurnoffRate {
        upper,
        sign: f(hi).signum(),
    })?;
    find_root(f, bracket, 1e-13 * upper)
}

/// Closed-form optimal `(t_w, t_i)` on the TTI grid.
pub fn optimize(
    profile: &PowerProfile,
    timing: &TimingParams,
    traffic: &TrafficModel,
    constraint: &Constraint,
) -> Result<OptimizationResult> {
    profile.validate()?;
    checked_margin(traffic, timing, constraint)?;
    let tti = timing.tti;
    let lam = traffic.lambda;

    let lambda_t = match turnoff_arrival_rate(profile, timing, constraint) {
        Ok(l) => Some(l),
        Err(Error::NoTurnoffRate { sign, .. }) if sign > 0.0 => None,
        Err(e) => return Err(e),
    };
    let t_wb = min_boundary_wakeup_cycle(traffic, timing, constraint)?;
    let coeffs = boundary_coefficients(profile, timing, traffic, constraint)?;
    let consts = appendix_constants(profile, timing, traffic, constraint)?;
    let boundary_case = match classify_boundary_case(&consts) {
        Ok(c) => Some(c),
        Err(e) => {
            log::warn!("{e}");
            None
        }
    };
    let power_infimum = profile.pw3 * coeffs.asymptotic_ratio();

    let effective = lambda_t.is_none_or(|lt| lam <= lt);
    let mut result = OptimizationResult {
        lambda: lam,
        d_max: constraint.d_max,
        tti,
        t_w_star: None,
        t_i_star: None,
        regime: if effective {
            Regime::WusEffective
        } else {
            Regime::WusIneffective
        },
        lambda_t,
        t_wb,
        boundary_case,
        t_ws: None,
        predicted_power: f64::NAN,
        predicted_delay: f64::NAN,
        power_infimum,
        advisory: None,
    };

    if boundary_case == Some(BoundaryCase::C) {
        let t_ws = consts.stationary_point()?;
        if t_ws < t_wb {
            log::info!("stationary point {t_ws:.3} ms lies below t_wb {t_wb:.3} ms");
        } else {
            log::warn!("stationary point {t_ws:.3} ms is not below t_wb {t_wb:.3} ms");
        }
        result.t_ws = Some(t_ws);
    }

    let cfg = if effective {
        let n = floor_ttis(t_wb, tti);
        let cfg = WuConfig::from_ttis(n.max(1), 1, tti)?;
        result.t_w_star = Some(cfg.t_w);
        result.t_i_star = Some(cfg.t_i);
        cfg
    } else {
        let cfg = advisory_config(
            profile,
            timing,
            traffic,
            constraint,
            &coeffs,
            t_wb,
            power_infimum,
        )?;
        result.advisory = Some(cfg);
        cfg
    };
    result.predicted_power = average_power_simplified(profile, timing, traffic, &cfg)?;
    result.predicted_delay = average_delay_simplified(timing, traffic, &cfg)?;
    Ok(result)
}

/// `floor(t / tti)` that tolerates rounding noise just below an integer.
fn floor_ttis(t: f64, tti: f64) -> u64 {
    let k = t / tti;
    if is_tti_multiple(t, tti) {
        k.round() as u64
    } else {
        k.floor() as u64
    }
}

fn ceil_ttis(t: f64, tti: f64) -> u64 {
    let k = t / tti;
    if is_tti_multiple(t, tti) {
        k.round() as u64
    } else {
        k.ceil() as u64
    }
}

/// Shortest boundary cycle whose rounded configuration reaches the power
/// infimum within [`ADVISORY_FACTOR`].
fn advisory_config(
    profile: &PowerProfile,
    timing: &TimingParams,
    traffic: &TrafficModel,
    constraint: &Constraint,
    coeffs: &BoundaryCoefficients,
    t_wb: f64,
    infimum: f64,
) -> Result<WuConfig> {
    let tti = timing.tti;
    let mut factor = 1.0 + 0.9 * (ADVISORY_FACTOR - 1.0);
    for _ in 0..40 {
        let target = factor * infimum;
        let excess = |t: f64| boundary_power(t, coeffs, profile) - target;
        let t_w = if excess(t_wb) <= 0.0 {
            t_wb
        } else {
            let mut hi = 2.0 * t_wb;
            while excess(hi) > 0.0 {
                hi *= 2.0;
                if !hi.is_finite() {
                    return Err(Error::DegenerateCase(
                        "boundary power does not approach its limit",
                    ));
                }
            }
            find_root(excess, Bracket::new(t_wb, hi)?, DEFAULT_TOL)?
        };
        let t_i = boundary_inactivity_timer(t_w, traffic, timing, constraint)
            .unwrap_or(tti)
            .max(tti);
        let n_i = ceil_ttis(t_i, tti);
        // Rounding t_i up leaves delay slack; spend it on a longer cycle.
        let t_w = widest_cycle(timing, traffic, constraint, n_i as f64 * tti, t_w)?;
        let cfg = WuConfig::from_ttis(floor_ttis(t_w, tti).max(1), n_i, tti)?;
        let power = average_power_simplified(profile, timing, traffic, &cfg)?;
        if power <= ADVISORY_FACTOR * infimum {
            return Ok(cfg);
        }
        factor = 1.0 + 0.5 * (factor - 1.0);
    }
    Err(Error::DegenerateCase(
        "no finite configuration reaches the power infimum",
    ))
}

/// Largest wake-up cycle meeting the delay bound at inactivity timer `t_i`,
/// searched from `from`, which must already meet it.
fn widest_cycle(
    timing: &TimingParams,
    traffic: &TrafficModel,
    constraint: &Constraint,
    t_i: f64,
    from: f64,
) -> Result<f64> {
    let slack = |t_w: f64| {
        average_delay_simplified(timing, traffic, &WuConfig::relaxed(t_w, t_i))
            .map_or(f64::NAN, |d| d - constraint.d_max)
    };
    if !(slack(from) < 0.0) {
        return Ok(from);
    }
    let mut hi = 2.0 * from;
    while slack(hi) < 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::DegenerateCase("delay bound is never reached"));
        }
    }
    find_root(slack, Bracket::new(from, hi)?, DEFAULT_TOL)
}

/// Exhaustive search over `t_w = 1..=t_w_max` and `t_i = 1..=t_i_max` TTIs
/// (bounds in ms) for the lowest simplified power meeting the delay bound.
/// Ties go to the smaller `t_w`, then the smaller `t_i`.
pub fn grid_search_oracle(
    profile: &PowerProfile,
    timing: &TimingParams,
    traffic: &TrafficModel,
    constraint: &Constraint,
    t_w_max: f64,
    t_i_max: f64,
) -> Result<GridSearchResult> {
    profile.validate()?;
    timing.validate()?;
    traffic.validate(timing)?;
    let tti = timing.tti;
    let n_w_max = (t_w_max / tti).floor() as u64;
    let n_i_max = (t_i_max / tti).floor() as u64;
    let empty = || {
        Error::EmptyFeasibleSet(format!(
            "no (t_w, t_i) up to ({t_w_max}, {t_i_max}) ms meets d_max = {}",
            constraint.d_max
        ))
    };
    if n_w_max == 0 || n_i_max == 0 || constraint.margin(timing) <= 0.0 {
        return Err(empty());
    }

    // (power, n_w, n_i, delay, feasible count)
    type Best = (f64, u64, u64, f64, usize);
    let better = |x: Best, y: Best| -> Best {
        let ord = x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2));
        let mut win = if ord.is_le() { x } else { y };
        win.4 = x.4 + y.4;
        win
    };
    let none: Best = (f64::INFINITY, u64::MAX, u64::MAX, f64::NAN, 0);

    let best = (1..=n_w_max)
        .into_par_iter()
        .map(|n_w| {
            let mut local = none;
            for n_i in 1..=n_i_max {
                let cfg = WuConfig::relaxed(n_w as f64 * tti, n_i as f64 * tti);
                let delay = match average_delay_simplified(timing, traffic, &cfg) {
                    Ok(v) => v,
                    Err(_) => continue,
                };
                if delay > constraint.d_max {
                    continue;
                }
                let power = match average_power_simplified(profile, timing, traffic, &cfg) {
                    Ok(v) => v,
                    Err(_) => continue,
                };
                local = better(local, (power, n_w, n_i, delay, 1));
            }
            local
        })
        .reduce(|| none, better);

    if best.4 == 0 {
        return Err(empty());
    }
    Ok(GridSearchResult {
        config: WuConfig::from_ttis(best.1, best.2, tti)?,
        power: best.0,
        delay: best.3,
        evaluated: (n_w_max * n_i_max) as usize,
        feasible: best.4,
    })
}
