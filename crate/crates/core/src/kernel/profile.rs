use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::Error;
use crate::quad::GaussRule;
use crate::special::{exp_int_e1, EULER_GAMMA};

/// Normalization `c` of the bump `c exp(-1/(1-|x|^2))`: `1 / (pi E_2(1))`.
pub const BUMP_NORMALIZATION: f64 = 2.143_565_775_792_236_6;

/// Radial unit-mass blob profile; `phi_eps(x) = eps^-2 phi(x/eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlobProfile {
    /// `exp(-|x|^2) / pi`. Not compactly supported.
    #[default]
    Gaussian,
    /// `c exp(-1/(1-|x|^2))` on the unit disc.
    Bump,
}

const TABLE_SIZE: usize = 2048;

impl BlobProfile {
    /// Unit-width density at radius `rho`.
    pub fn density(self, rho: f64) -> f64 {
        match self {
            BlobProfile::Gaussian => (-rho * rho).exp() / PI,
            BlobProfile::Bump => {
                if rho >= 1.0 {
                    0.0
                } else {
                    BUMP_NORMALIZATION * (-1.0 / (1.0 - rho * rho)).exp()
                }
            }
        }
    }

    /// Radial derivative of the unit-width density.
    pub fn density_slope(self, rho: f64) -> f64 {
        match self {
            BlobProfile::Gaussian => -2.0 * rho * (-rho * rho).exp() / PI,
            BlobProfile::Bump => {
                if rho >= 1.0 {
                    0.0
                } else {
                    let q = 1.0 - rho * rho;
                    -2.0 * rho / (q * q) * self.density(rho)
                }
            }
        }
    }

    /// Density of width `eps` at radius `r`.
    pub fn density_eps(self, r: f64, eps: f64) -> f64 {
        self.density(r / eps) / (eps * eps)
    }

    /// Mass of the unit-width profile inside radius `rho`.
    pub fn enclosed_mass(self, rho: f64) -> f64 {
        match self {
            BlobProfile::Gaussian => -(-rho * rho).exp_m1(),
            BlobProfile::Bump => {
                if rho >= 1.0 {
                    1.0
                } else if rho < 0.01 {
                    // direct integration keeps relative accuracy near the centre
                    bump_small_rule().integrate(0.0, rho, |s| 2.0 * PI * s * self.density(s))
                } else {
                    bump_mass_table().eval(rho)
                }
            }
        }
    }

    /// Radius (in units of eps) beyond which `K_eps` equals `K` to a
    /// relative 1e-13 (exactly, for the bump).
    pub fn kernel_cutoff(self) -> f64 {
        match self {
            BlobProfile::Gaussian => 5.5,
            BlobProfile::Bump => 1.0,
        }
    }

    /// Grid margin (in units of eps) needed around blobs for reconstruction.
    pub fn reconstruction_margin(self) -> f64 {
        match self {
            BlobProfile::Gaussian => 4.0,
            BlobProfile::Bump => 1.0,
        }
    }

    /// Support radius of the density, in units of eps, beyond which it is
    /// treated as zero when summing.
    pub fn density_cutoff(self) -> f64 {
        match self {
            BlobProfile::Gaussian => 6.1,
            BlobProfile::Bump => 1.0,
        }
    }

    /// Regularized logarithmic interaction `(log * phi_eps * phi_eps)(r)`.
    ///
    /// Equals `log r` once the two blobs no longer overlap.
    pub fn log_interaction(self, r: f64, eps: f64) -> f64 {
        self.log_interaction_sq(r * r, eps)
    }

    /// [`log_interaction`](Self::log_interaction) from the squared distance.
    #[inline]
    pub fn log_interaction_sq(self, r2: f64, eps: f64) -> f64 {
        match self {
            BlobProfile::Gaussian => {
                // log r + E1(q)/2 = log s + h(q) with s^2 = 2 eps^2, q = r^2/s^2
                let s2 = 2.0 * eps * eps;
                let q = r2 / s2;
                if q >= GAUSS_LOG_QMAX {
                    0.5 * r2.ln()
                } else {
                    0.5 * s2.ln() + gaussian_log_table().eval(q)
                }
            }
            BlobProfile::Bump => {
                let rho = r2.sqrt() / eps;
                if rho >= 2.0 {
                    0.5 * r2.ln()
                } else {
                    eps.ln() + bump_energy_table().eval(rho)
                }
            }
        }
    }

    /// `log_interaction(0, eps)`: the self-interaction constant.
    pub fn self_interaction(self, eps: f64) -> f64 {
        self.log_interaction(0.0, eps)
    }

    pub fn name(self) -> &'static str {
        match self {
            BlobProfile::Gaussian => "gaussian",
            BlobProfile::Bump => "bump",
        }
    }
}

impl fmt::Display for BlobProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BlobProfile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(BlobProfile::Gaussian),
            "bump" => Ok(BlobProfile::Bump),
            other => Err(Error::Config(format!("unknown blob profile `{other}`"))),
        }
    }
}

fn bump_small_rule() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::legendre(8))
}

/// Cubic Hermite table on a uniform grid over [0, x_max].
#[derive(Debug)]
struct HermiteTable {
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl HermiteTable {
    fn eval(&self, x: f64) -> f64 {
        let last = self.values.len() - 1;
        let t = (x / self.step).max(0.0);
        let k = (t as usize).min(last - 1);
        let s = t - k as f64;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (self.slopes[k] * self.step, self.slopes[k + 1] * self.step);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * d1
    }
}

const GAUSS_LOG_QMAX: f64 = 40.0;

/// `h(q) = (E1(q) + log q) / 2` on [0, 40], an entire function.
fn gaussian_log_table() -> &'static HermiteTable {
    static TABLE: OnceLock<HermiteTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = 8192;
        let step = GAUSS_LOG_QMAX / n as f64;
        let h = |q: f64| -> f64 {
            if q == 0.0 {
                -0.5 * EULER_GAMMA
            } else {
                0.5 * (exp_int_e1(q) + q.ln())
            }
        };
        let dh = |q: f64| -> f64 {
            if q < 1e-8 {
                0.5 - 0.25 * q
            } else {
                -0.5 * (-q).exp_m1() / q
            }
        };
        let values = (0..=n).map(|k| h(k as f64 * step)).collect();
        let slopes = (0..=n).map(|k| dh(k as f64 * step)).collect();
        HermiteTable { step, values, slopes }
    })
}

/// Cumulative bump mass with exact slopes `2 pi rho phi(rho)`.
fn bump_mass_table() -> &'static HermiteTable {
    static TABLE: OnceLock<HermiteTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let p = BlobProfile::Bump;
        let rule = GaussRule::legendre(12);
        let step = 1.0 / TABLE_SIZE as f64;
        let mut values = Vec::with_capacity(TABLE_SIZE + 1);
        let mut slopes = Vec::with_capacity(TABLE_SIZE + 1);
        let mut acc = 0.0;
        for k in 0..=TABLE_SIZE {
            let rho = k as f64 * step;
            if k > 0 {
                acc += rule.integrate(rho - step, rho, |s| 2.0 * PI * s * p.density(s));
            }
            values.push(acc);
            slopes.push(2.0 * PI * rho * p.density(rho));
        }
        // the last node is exactly the full mass
        *values.last_mut().expect("table is non-empty") = 1.0;
        HermiteTable { step, values, slopes }
    })
}

/// Unit-width double-mollified log interaction minus `log eps`, on [0, 2].
///
/// Built from the radial profile of `phi * phi`, evaluated by polar
/// quadrature, and two cumulative radial integrations.
fn bump_energy_table() -> &'static HermiteTable {
    static TABLE: OnceLock<HermiteTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let p = BlobProfile::Bump;
        let n = TABLE_SIZE;
        let step = 2.0 / n as f64;
        let radial = GaussRule::legendre(48);
        let n_theta = 96;
        let conv = |r: f64| -> f64 {
            // (phi * phi)(r) for the point (r, 0)
            let mut s = 0.0;
            for (rho, w) in radial.mapped(0.0, 1.0) {
                let pr = p.density(rho);
                if pr == 0.0 {
                    continue;
                }
                let mut ang = 0.0;
                for j in 0..n_theta {
                    let th = 2.0 * PI * (j as f64 + 0.5) / n_theta as f64;
                    let dx = r - rho * th.cos();
                    let dy = rho * th.sin();
                    ang += p.density((dx * dx + dy * dy).sqrt());
                }
                s += w * rho * pr * ang * (2.0 * PI / n_theta as f64);
            }
            s
        };
        // q(r) = 2 pi r (phi*phi)(r) at nodes and midpoints
        let q_node: Vec<f64> = (0..=n).map(|k| {
            let r = k as f64 * step;
            2.0 * PI * r * conv(r)
        }).collect();
        let q_mid: Vec<f64> = (0..n).map(|k| {
            let r = (k as f64 + 0.5) * step;
            2.0 * PI * r * conv(r)
        }).collect();
        // enclosed mass of phi*phi at nodes (Simpson per interval)
        let mut mass = vec![0.0; n + 1];
        for k in 0..n {
            mass[k + 1] = mass[k] + step / 6.0 * (q_node[k] + 4.0 * q_mid[k] + q_node[k + 1]);
        }
        let total = mass[n];
        for m in &mut mass {
            *m /= total;
        }
        let mass_table = HermiteTable {
            step,
            values: mass.clone(),
            slopes: q_node.iter().map(|q| q / total).collect(),
        };
        // H(r) = int_r^2 M(s)/s ds; the interaction is log 2 - H(r)
        let ratio = |r: f64| -> f64 {
            if r == 0.0 {
                0.0
            } else {
                mass_table.eval(r) / r
            }
        };
        let mut h = vec![0.0; n + 1];
        for k in (0..n).rev() {
            let (a, b) = (k as f64 * step, (k + 1) as f64 * step);
            let mid = 0.5 * (a + b);
            h[k] = h[k + 1] + step / 6.0 * (ratio(a) + 4.0 * ratio(mid) + ratio(b));
        }
        let values: Vec<f64> = h.iter().map(|hk| 2f64.ln() - hk).collect();
        // d/dr (log 2 - H(r)) = M(r)/r
        let slopes: Vec<f64> = (0..=n).map(|k| ratio(k as f64 * step)).collect();
        HermiteTable { step, values, slopes }
    })
}

/// Exact bump enclosed mass through E1, for tests.
#[cfg(test)]
pub(crate) fn bump_mass_closed_form(rho: f64) -> f64 {
    if rho >= 1.0 {
        return 1.0;
    }
    let a = 1.0 - rho * rho;
    1.0 - PI * BUMP_NORMALIZATION * (a * (-1.0 / a).exp() - exp_int_e1(1.0 / a))
}

#[cfg(test)]
fn e2_at_one() -> f64 {
    (-1.0f64).exp() - exp_int_e1(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn bump_normalization_constant() {
        let c = 1.0 / (PI * e2_at_one());
        assert!((c - BUMP_NORMALIZATION).abs() < 1e-13, "{c}");
    }

    #[test]
    fn bump_table_matches_closed_form() {
        for k in 1..200 {
            let rho = 0.3 + k as f64 * 0.0035;
            let a = BlobProfile::Bump.enclosed_mass(rho);
            let b = bump_mass_closed_form(rho);
            assert!((a - b).abs() < 1e-12, "rho={rho}: {a} vs {b}");
        }
        // small radii against the series c pi e^-1 (rho^2 - rho^4/2)
        let rho: f64 = 1e-3;
        let series = PI * BUMP_NORMALIZATION / E * (rho * rho - rho.powi(4) / 2.0);
        let got = BlobProfile::Bump.enclosed_mass(rho);
        assert!(((got - series) / series).abs() < 1e-8);
    }

    #[test]
    fn gaussian_interaction_limits() {
        let eps = 0.1;
        let p = BlobProfile::Gaussian;
        let far = p.log_interaction(1.0, eps);
        assert!(far.abs() < 1e-15);
        let a = p.log_interaction(1e-5, eps);
        let b = p.self_interaction(eps);
        assert!((a - b).abs() < 1e-8);
        for k in 1..400 {
            let r = k as f64 * 0.003;
            let got = p.log_interaction(r, eps);
            let q = r * r / (2.0 * eps * eps);
            let want = r.ln() + 0.5 * exp_int_e1(q);
            assert!((got - want).abs() < 1e-11, "r={r}: {got} vs {want}");
        }
    }

    #[test]
    fn bump_interaction_is_continuous_and_matches_log() {
        let p = BlobProfile::Bump;
        let eps = 0.5;
        let inside = p.log_interaction(2.0 * eps - 1e-9, eps);
        let outside = (2.0 * eps).ln();
        assert!((inside - outside).abs() < 1e-8, "{inside} vs {outside}");
        // interaction is increasing in r with slope M(r)/r <= 1/r
        let mut prev = p.self_interaction(eps);
        for k in 1..50 {
            let v = p.log_interaction(k as f64 * 0.02, eps);
            assert!(v >= prev);
            prev = v;
        }
    }
}
