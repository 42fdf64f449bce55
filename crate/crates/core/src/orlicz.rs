//! Orlicz-space quantities on grid fields: `log+`, the Young function
//! `beta(s) = s (log(e + s))^alpha`, its modular and the Luxemburg norm.

use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::grid::{FieldValue, GridField, ScalarField};

/// Exponent of the `L (log L)^alpha` scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrliczParams {
    alpha: f64,
}

impl OrliczParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
        }
        Ok(OrliczParams { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Warning text when `alpha <= 1/2`, outside the regime where the
    /// uniform bounds are expected.
    pub fn regime_warning(&self) -> Option<String> {
        (self.alpha <= 0.5)
            .then(|| format!("alpha = {} <= 1/2: outside the studied regime", self.alpha))
    }
}

pub fn log_plus(t: f64) -> f64 {
    if t > 1.0 {
        t.ln()
    } else {
        0.0
    }
}

pub fn beta_fn(s: f64, alpha: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    s * (E + s).ln().powf(alpha)
}

/// Midpoint-rule integral of `beta(|f|)`.
pub fn modular(f: &ScalarField, alpha: f64) -> Result<f64> {
    f.check_finite()?;
    let s: f64 = f.values().iter().map(|v| beta_fn(v.abs(), alpha)).sum();
    Ok(s * f.spec().cell_area())
}

/// `Phi(k) = int (|f|/k) (log+(|f|/k))^alpha`.
fn luxemburg_constraint(f: &ScalarField, alpha: f64, k: f64) -> f64 {
    let s: f64 = f
        .values()
        .iter()
        .map(|v| {
            let t = v.abs() / k;
            if t > 1.0 {
                t * t.ln().powf(alpha)
            } else {
                0.0
            }
        })
        .sum();
    s * f.spec().cell_area()
}

/// Luxemburg norm `inf { k > 0 : Phi(k) <= 1 }` by bisection on `Phi(k) = 1`.
pub fn luxemburg_norm(f: &ScalarField, alpha: f64) -> Result<f64> {
    f.check_finite()?;
    let l1 = lp_norm(f, 1.0);
    if l1 == 0.0 {
        return Ok(0.0);
    }
    let area = f.spec().cell_area() * f.spec().len() as f64;
    let mut lo = l1 / (2.0 * (1.0 + area));
    let mut hi = modular(f, alpha)? + l1;
    // Phi is nonincreasing in k; widen until it straddles 1
    for _ in 0..2000 {
        if luxemburg_constraint(f, alpha, hi) <= 1.0 {
            break;
        }
        hi *= 2.0;
    }
    for _ in 0..2000 {
        if luxemburg_constraint(f, alpha, lo) > 1.0 {
            break;
        }
        lo *= 0.5;
        if lo < f.max_magnitude() * 1e-300 {
            break;
        }
    }
    if luxemburg_constraint(f, alpha, lo) <= 1.0 {
        // Phi never exceeds 1 once every |f|/k drops to 1 or below; the
        // infimum is where the largest value stops contributing
        return Ok(lo);
    }
    while (hi - lo) > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if luxemburg_constraint(f, alpha, mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Midpoint-rule `L^p` norm; `p = f64::INFINITY` gives the max norm.
pub fn lp_norm<T: FieldValue>(f: &GridField<T>, p: f64) -> f64 {
    assert!(p >= 1.0, "L^p norm needs p >= 1, got {p}");
    if p.is_infinite() {
        return f.max_magnitude();
    }
    let a = f.spec().cell_area();
    if p == 1.0 {
        return f.values().iter().map(|v| v.magnitude()).sum::<f64>() * a;
    }
    if p == 2.0 {
        return (f.values().iter().map(|v| v.magnitude().powi(2)).sum::<f64>() * a).sqrt();
    }
    (f.values().iter().map(|v| v.magnitude().powf(p)).sum::<f64>() * a).powf(1.0 / p)
}
