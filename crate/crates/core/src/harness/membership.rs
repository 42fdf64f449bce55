use std::f64::consts::{E, PI};
use std::fmt;

use super::presets::RadialDensity;
use crate::error::{Error, Result};
use crate::quad::adaptive;

/// Relative increment below which the modular trace counts as settled.
pub const SETTLE_TOL: f64 = 0.01;

/// Change between successive increment ratios below which the ratio
/// counts as settled.
pub const RATIO_TOL: f64 = 0.01;

/// Default schedule: `log10 cap = 2^k` for `k = 1..=22`.
pub fn default_cap_schedule() -> Vec<f64> {
    (1..=22).map(|k| 2f64.powi(k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    In,
    Out,
    Undecided,
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Membership::In => "IN",
            Membership::Out => "OUT",
            Membership::Undecided => "UNDECIDED",
        })
    }
}

/// Modular of the capped profile at one cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub log10_cap: f64,
    pub modular: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipVerdict {
    pub verdict: Membership,
    pub alpha: f64,
    /// Modular at every cap evaluated, in schedule order.
    pub trace: Vec<TracePoint>,
}

/// `ln beta(e^ln_s)` for `beta(s) = s ln(e + s)^alpha`, without overflow.
fn ln_beta(ln_s: f64, alpha: f64) -> f64 {
    // ln(e + s) = ln s + ln(1 + e/s) for large s
    let ln_e_plus_s = if ln_s > 1.0 { ln_s + (E * (-ln_s).exp()).ln_1p() } else { (E + ln_s.exp()).ln() };
    ln_s + alpha * ln_e_plus_s.ln()
}

/// `u` beyond which the profile exceeds `e^ln_cap`, or `None` when it never
/// does. The profile is increasing in `u`.
fn cap_crossing(f: &dyn RadialDensity, ln_cap: f64) -> Option<f64> {
    if f.ln_sup() <= ln_cap {
        return None;
    }
    let mut lo = f.u_min();
    let mut hi = lo + 1.0;
    while f.ln_density(hi) < ln_cap {
        lo = hi;
        hi = 2.0 * hi;
        if !hi.is_finite() {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f.ln_density(mid) < ln_cap {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// `int beta(min(|f|, cap)) dx` over all copies of the profile, by
/// adaptive quadrature in `v = ln u` with `r = e^(1 - u)`.
pub fn capped_modular(f: &dyn RadialDensity, alpha: f64, log10_cap: f64) -> f64 {
    let ln_cap = log10_cap * std::f64::consts::LN_10;
    let u0 = f.u_min();
    let crossing = cap_crossing(f, ln_cap);
    // bounded profiles: the r^2 weight leaves nothing beyond u0 + 40
    let u1 = crossing.unwrap_or(u0 + 40.0);
    let body = |v: f64| {
        let u = v.exp();
        let ln_f = f.ln_density(u);
        if ln_f == f64::NEG_INFINITY {
            return 0.0;
        }
        // dx = 2 pi r^2 du = 2 pi r^2 u dv
        (ln_beta(ln_f.min(ln_cap), alpha) + 2.0 * (1.0 - u) + v).exp() * 2.0 * PI
    };
    let (inner, _) = adaptive(body, u0.ln(), u1.ln(), 1e-11, 0.0);
    let core = crossing.map_or(0.0, |uc| (ln_beta(ln_cap, alpha) + 2.0 * (1.0 - uc)).exp() * PI);
    f.copies() * (inner + core)
}

/// Decides membership of the uncapped profile in `L (log L)^alpha` from
/// the modular of its truncations along `caps` (given as `log10 cap`).
///
/// IN once two successive increments are each below 1% of the value;
/// OUT once three successive increments are each above 1% of the value
/// and their ratios have settled at or above 1, so that the increments no
/// longer shrink; UNDECIDED if the schedule runs out first.
pub fn verify_membership(f: &dyn RadialDensity, alpha: f64, caps: &[f64]) -> Result<MembershipVerdict> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
    }
    if caps.len() < 3 || caps.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("cap schedule needs at least three increasing entries".into()));
    }
    let mut trace: Vec<TracePoint> = Vec::new();
    let mut verdict = Membership::Undecided;
    for &log10_cap in caps {
        let modular = capped_modular(f, alpha, log10_cap);
        if !modular.is_finite() {
            return Err(Error::Divergence(format!("modular overflowed at cap 1e{log10_cap}")));
        }
        trace.push(TracePoint { log10_cap, modular });
        let incs: Vec<f64> = trace.windows(2).map(|w| w[1].modular - w[0].modular).collect();
        let value = modular.abs();
        if let [.., a, b] = incs[..] {
            if a.abs() < SETTLE_TOL * value && b.abs() < SETTLE_TOL * value {
                verdict = Membership::In;
                break;
            }
        }
        // the increment ratio tends to 2^(alpha + 1 - beta) from above
        if let [.., a, b, c, d] = incs[..] {
            let large = [b, c, d].iter().all(|&x| x > SETTLE_TOL * value);
            let (r1, r2, r3) = (b / a, c / b, d / c);
            let settled = (r2 - r1).abs() <= RATIO_TOL && (r3 - r2).abs() <= RATIO_TOL;
            if large && settled && r1.min(r2).min(r3) >= 1.0 {
                verdict = Membership::Out;
                break;
            }
        }
    }
    Ok(MembershipVerdict { verdict, alpha, trace })
}
