//! Biot–Savart kernel, blob-mollified kernels and the cutoff-weighted
//! kernels that enter the near/far velocity splitting.

mod cutoff;
mod geps;
mod profile;

pub use cutoff::{
    far_kernel_l2_norms, gradient_far_kernel, near_kernel, serfati_far_kernel, viscous_far_kernel,
    CutoffPair,
};
pub use geps::{g_eps_l1, g_eps_l1_quadrature};
pub use profile::{BlobProfile, BUMP_NORMALIZATION};

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::quad::GaussRule;

/// Points closer to the origin than this are rejected by [`biot_savart`].
pub const MIN_RADIUS: f64 = 1e-300;

/// Plane Biot–Savart kernel `x^perp / (2 pi |x|^2)`.
pub fn biot_savart(x: Vec2) -> Result<Vec2> {
    let r = x.norm();
    if !(r >= MIN_RADIUS) {
        return Err(Error::Domain(format!(
            "Biot-Savart kernel evaluated at |x| = {r:e}"
        )));
    }
    Ok(raw_kernel(x, r))
}

/// Kernel evaluation for a known nonzero radius.
#[inline]
pub(crate) fn raw_kernel(x: Vec2, r: f64) -> Vec2 {
    if r < 1e-150 {
        // r^2 would underflow
        (x.perp() / r) / (2.0 * PI * r)
    } else {
        x.perp() / (2.0 * PI * (x.x * x.x + x.y * x.y))
    }
}

/// Blob-mollified kernel `K * phi_eps`, equal to `K(x) m(|x|/eps)` with
/// `m` the enclosed mass of the profile. Zero at the origin.
pub fn mollified_kernel(x: Vec2, eps: f64, profile: BlobProfile) -> Vec2 {
    let r2 = x.norm_sq();
    if r2 == 0.0 {
        return Vec2::ZERO;
    }
    let r = r2.sqrt();
    let m = profile.enclosed_mass(r / eps);
    raw_kernel(x, r) * m
}

/// `K_eps(x) / x^perp` as a function of `|x|^2`; the scalar factor shared
/// by all pair interactions. Finite at the origin.
#[derive(Clone, Copy)]
pub(crate) struct PairFactor {
    profile: BlobProfile,
    eps: f64,
    inv_eps2: f64,
    /// `1 / (2 pi eps^2)`
    core: f64,
    table: &'static QuinticTable,
}

impl PairFactor {
    pub(crate) fn new(eps: f64, profile: BlobProfile) -> Self {
        PairFactor { profile, eps, inv_eps2: 1.0 / (eps * eps), core: 1.0 / (2.0 * PI * eps * eps), table: gaussian_factor_table() }
    }

    #[inline]
    pub(crate) fn at(&self, r2: f64) -> f64 {
        let q = r2 * self.inv_eps2;
        match self.profile {
            BlobProfile::Gaussian => {
                if q >= GAUSS_FACTOR_QMAX {
                    1.0 / (2.0 * PI * r2)
                } else {
                    self.table.eval(q) * self.core
                }
            }
            BlobProfile::Bump => {
                if q >= 1.0 {
                    1.0 / (2.0 * PI * r2)
                } else if r2 == 0.0 {
                    0.5 * self.profile.density(0.0) * self.inv_eps2
                } else {
                    self.profile.enclosed_mass(r2.sqrt() / self.eps) / (2.0 * PI * r2)
                }
            }
        }
    }
}

const GAUSS_FACTOR_QMAX: f64 = 37.0;

/// Piecewise quintic on a uniform grid, stored as per-interval monomial
/// coefficients in the local variable.
struct QuinticTable {
    inv_step: f64,
    coeffs: Vec<[f64; 6]>,
}

impl QuinticTable {
    /// Hermite interpolant of value, first and second derivative.
    fn new(n: usize, hi: f64, jet: impl Fn(f64) -> [f64; 3]) -> Self {
        let step = hi / n as f64;
        let jets: Vec<[f64; 3]> = (0..=n).map(|k| jet(k as f64 * step)).collect();
        let coeffs = jets
            .windows(2)
            .map(|w| {
                let [f0, d0, s0] = w[0];
                let [f1, d1, s1] = w[1];
                let (d0, d1) = (d0 * step, d1 * step);
                let (s0, s1) = (s0 * step * step, s1 * step * step);
                let c0 = f0;
                let c1 = d0;
                let c2 = 0.5 * s0;
                // remaining cubic part matches f, f', f'' at t = 1
                let a = f1 - c0 - c1 - c2;
                let b = d1 - c1 - 2.0 * c2;
                let c = s1 - 2.0 * c2;
                let c3 = 10.0 * a - 4.0 * b + 0.5 * c;
                let c4 = -15.0 * a + 7.0 * b - c;
                let c5 = 6.0 * a - 3.0 * b + 0.5 * c;
                [c0, c1, c2, c3, c4, c5]
            })
            .collect();
        QuinticTable { inv_step: 1.0 / step, coeffs }
    }

    #[inline]
    fn eval(&self, x: f64) -> f64 {
        let t = x * self.inv_step;
        let k = (t as usize).min(self.coeffs.len() - 1);
        let s = t - k as f64;
        let c = &self.coeffs[k];
        ((((c[5] * s + c[4]) * s + c[3]) * s + c[2]) * s + c[1]) * s + c[0]
    }
}

/// `g(q) = (1 - e^-q) / q` on [0, 37], so that the Gaussian pair factor is
/// `g(|x|^2 / eps^2) / (2 pi eps^2)` with no division by `|x|^2`.
fn gaussian_factor_table() -> &'static QuinticTable {
    static TABLE: OnceLock<QuinticTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        // g^(n)(q) = (-1)^n int_0^1 t^n e^{-q t} dt
        let rule = GaussRule::legendre(40);
        QuinticTable::new(37 * 64, GAUSS_FACTOR_QMAX, |q| {
            let mut jet = [0.0; 3];
            for (t, w) in rule.mapped(0.0, 1.0) {
                let e = w * (-q * t).exp();
                jet[0] += e;
                jet[1] -= t * e;
                jet[2] += t * t * e;
            }
            jet
        })
    })
}
