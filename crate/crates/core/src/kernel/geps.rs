use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::adaptive;

fn check(eps: f64, alpha: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Domain(format!("g_eps norm needs 0 < eps < 1/2, got {eps}")));
    }
    if !(alpha > 0.5) {
        return Err(Error::Divergence(format!(
            "g_eps is not integrable for alpha = {alpha} <= 1/2"
        )));
    }
    Ok((1.0 / (2.0 * eps)).ln())
}

/// L1 norm of `chi_{|x| < 2 eps} / (|x|^2 (log 1/|x|)^(2 alpha))`, in closed form.
pub fn g_eps_l1(eps: f64, alpha: f64) -> Result<f64> {
    let u0 = check(eps, alpha)?;
    Ok(2.0 * PI * u0.powf(1.0 - 2.0 * alpha) / (2.0 * alpha - 1.0))
}

/// The same norm by adaptive radial quadrature.
///
/// With `r = exp(-u)` the radial integral becomes `2 pi int u^(-2 alpha) du`
/// over `u > log(1/(2 eps))`; a further `u = u0 e^s` makes the integrand
/// decay exponentially so the range can be truncated.
pub fn g_eps_l1_quadrature(eps: f64, alpha: f64) -> Result<f64> {
    let u0 = check(eps, alpha)?;
    let rate = 2.0 * alpha - 1.0;
    let s_max = 40.0 / rate;
    let f = |s: f64| {
        let u = u0 * s.exp();
        2.0 * PI * u.powf(-2.0 * alpha) * u
    };
    let (v, _) = adaptive(f, 0.0, s_max, 1e-12, 0.0);
    Ok(v)
}
