//! High-precision reference evaluations of the simplified power and delay.
//!
//! The gradients can be smaller than the rounding unit of the functions they
//! differentiate (∂P/∂t_i scales like e^{-λ t_i}), so double-precision finite
//! differences are useless as an oracle there. These evaluate the textbook
//! formulas with 1024-bit floats and difference them with a tiny step.

use dashu_float::FBig;
use wus_core::{PowerProfile, TimingParams};

const BITS: usize = 1024;

fn f(x: f64) -> FBig {
    FBig::try_from(x)
        .expect("finite")
        .with_precision(BITS)
        .value()
}

fn one() -> FBig {
    f(1.0)
}

pub fn power(p: &PowerProfile, t: &TimingParams, lam: f64, tw: FBig, ti: FBig) -> FBig {
    let lam = f(lam);
    let phi = f(p.pw2) / f(p.pw3);
    let (ts, tsu, tpd) = (f(t.t_s), f(t.t_su), f(t.t_pd));
    let inv = one() / lam.clone();
    let e_ts = (lam.clone() * ts.clone()).exp();
    let e_ti = (lam.clone() * ti).exp();
    let e_tw = (-(lam * tw.clone())).exp();
    let num = e_ti.clone() * (phi.clone() * ts.clone() * e_ts.clone() + inv.clone())
        + (phi * tsu.clone() + tpd.clone()) / f(2.0)
        - inv.clone();
    let den = e_ti * (ts * e_ts + inv.clone()) + tw / (one() - e_tw) + tsu + tpd - inv;
    f(p.pw3) * num / den
}

pub fn delay(t: &TimingParams, lam: f64, tw: FBig, ti: FBig) -> FBig {
    let lam = f(lam);
    let (ts, tsu) = (f(t.t_s), f(t.t_su));
    let q = one() - (-(lam.clone() * tw.clone())).exp();
    let num = tw + (tsu - one() / lam.clone()) * q.clone();
    let den = f(2.0) + q * (one() + (lam.clone() * ts.clone()).exp()) * (lam * ti).exp();
    num / den + ts / f(2.0)
}

/// Central differences `(∂g/∂t_w, ∂g/∂t_i)` of `g` at `(tw, ti)`.
pub fn gradient(g: impl Fn(FBig, FBig) -> FBig, tw: f64, ti: f64) -> (f64, f64) {
    let h = FBig::try_from(1e-40).unwrap().with_precision(BITS).value();
    let two_h = h.clone() * f(2.0);
    let d_tw = (g(f(tw) + h.clone(), f(ti)) - g(f(tw) - h.clone(), f(ti))) / two_h.clone();
    let d_ti = (g(f(tw), f(ti) + h.clone()) - g(f(tw), f(ti) - h)) / two_h;
    (d_tw.to_f64().value(), d_ti.to_f64().value())
}

pub fn value(x: FBig) -> f64 {
    x.to_f64().value()
}

pub fn at(x: f64) -> FBig {
    f(x)
}
