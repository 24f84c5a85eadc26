//! Principal-branch Lambert W and bracketed scalar root finding.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};

/// Default hybrid absolute/relative tolerance of [`find_root`].
pub const DEFAULT_TOL: f64 = 1e-12;

const BRANCH_POINT: f64 = -1.0 / E;
const DOMAIN_SLACK: f64 = 1e-15;
const MAX_ITER: usize = 200;

/// Principal branch `W0(x)`, the solution `w >= -1` of `w e^w = x`.
///
/// The initial guess is the branch-point series in `p = sqrt(2(ex + 1))`
/// near `-1/e`, `ln(1 + x)` for moderate arguments and the two-term
/// asymptotic `ln x - ln ln x` for large ones; Halley steps refine it.
pub fn lambert_w0(x: f64) -> Result<f64> {
    check_finite("x", x)?;
    if x < BRANCH_POINT - DOMAIN_SLACK {
        return Err(Error::Domain {
            function: "lambert_w0",
            x,
        });
    }
    if x.abs() < 1e-300 {
        return Ok(x);
    }
    let p2 = 2.0 * (E * x + 1.0);
    if p2 <= 0.0 {
        return Ok(-1.0);
    }

    let mut w = if x < -0.25 {
        let p = p2.sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        x.ln_1p()
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };

    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        let next = w - step;
        if !next.is_finite() {
            break;
        }
        w = next.max(-1.0);
        if step.abs() <= 1e-16 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

/// Interval on which a continuous function changes sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        check_finite("lo", lo)?;
        check_finite("hi", hi)?;
        if lo < hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::InvalidParameter {
                name: "hi",
                value: hi,
                reason: "bracket must satisfy lo < hi",
            })
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Finds a root of `f` inside `bracket`.
///
/// Illinois-modified regula falsi, falling back to bisection whenever the
/// interpolated step does not shrink the bracket fast enough. Stops when
/// `|f(x)| <= tol` or the bracket is narrower than `tol * max(1, |x|)`.
/// Fully deterministic.
pub fn find_root<F>(mut f: F, bracket: Bracket, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NoSignChange {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }

    // Side that was retained on the previous step: -1 = a, 1 = b.
    let mut kept = 0i8;
    for _ in 0..MAX_ITER * 2 {
        let width = b - a;
        let mid = a + 0.5 * width;
        if width <= tol * mid.abs().max(1.0) {
            return Ok(mid);
        }
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a && x < b) {
            x = mid;
        }
        let fx = f(x);
        if fx.abs() <= tol || fx == 0.0 {
            return Ok(x);
        }
        let old_width = width;
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if kept == 1 {
                fb *= 0.5;
            }
            kept = 1;
        } else {
            b = x;
            fb = fx;
            if kept == -1 {
                fa *= 0.5;
            }
            kept = -1;
        }
        // Guarantee progress: bisect if the bracket shrank by less than half.
        if b - a > 0.5 * old_width {
            let m = a + 0.5 * (b - a);
            let fm = f(m);
            if fm == 0.0 {
                return Ok(m);
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
            kept = 0;
        }
    }
    Ok(a + 0.5 * (b - a))
}

/// Scans `[lo, hi]` on `steps` equal sub-intervals and returns the first one
/// on which `f` changes sign.
pub fn scan_for_bracket<F>(mut f: F, lo: f64, hi: f64, steps: usize) -> Option<Bracket>
where
    F: FnMut(f64) -> f64,
{
    let h = (hi - lo) / steps as f64;
    let mut x0 = lo;
    let mut f0 = f(x0);
    for k in 1..=steps {
        let x1 = if k == steps { hi } else { lo + k as f64 * h };
        let f1 = f(x1);
        if f0 == 0.0 || f0.signum() != f1.signum() {
            return Some(Bracket { lo: x0, hi: x1 });
        }
        x0 = x1;
        f0 = f1;
    }
    None
}
