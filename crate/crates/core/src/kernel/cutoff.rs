use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::{Tensor2, Vec2};
use crate::quad::GaussRule;

/// Radial cutoff `a` equal to 1 inside `inner`, 0 outside `outer`, with a
/// polynomial smoothstep of the given order in between (C^order).
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffPair {
    inner: f64,
    outer: f64,
    order: u32,
    /// Smoothstep coefficients, lowest degree first.
    coeffs: Vec<f64>,
}

impl Default for CutoffPair {
    fn default() -> Self {
        CutoffPair::new(1.0, 2.0, 2).expect("default cutoff is valid")
    }
}

/// Radial profile `b = 1 - a` with its first two derivatives.
#[derive(Debug, Clone, Copy)]
struct Radial {
    b: f64,
    db: f64,
    d2b: f64,
}

impl CutoffPair {
    pub fn new(inner: f64, outer: f64, order: u32) -> Result<Self> {
        if !(inner > 0.0 && outer > inner && outer.is_finite()) {
            return Err(Error::Config(format!(
                "cutoff radii must satisfy 0 < inner < outer, got {inner}, {outer}"
            )));
        }
        if order < 2 {
            return Err(Error::Config(format!(
                "smoothstep order must be >= 2 for a C^2 cutoff, got {order}"
            )));
        }
        Ok(CutoffPair {
            inner,
            outer,
            order,
            coeffs: smoothstep_coeffs(order),
        })
    }

    /// Cutoff with the default transition scaled to radii `(r, 2r)`.
    pub fn scaled(r: f64) -> Result<Self> {
        CutoffPair::new(r, 2.0 * r, 2)
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Value of `a` at radius `r`.
    pub fn value_at(&self, r: f64) -> f64 {
        1.0 - self.radial(r).b
    }

    /// Value of `a` at point `x`.
    pub fn eval(&self, x: Vec2) -> f64 {
        self.value_at(x.norm())
    }

    fn radial(&self, r: f64) -> Radial {
        if r <= self.inner {
            return Radial { b: 0.0, db: 0.0, d2b: 0.0 };
        }
        if r >= self.outer {
            return Radial { b: 1.0, db: 0.0, d2b: 0.0 };
        }
        let w = self.outer - self.inner;
        let s = (r - self.inner) / w;
        let (mut p, mut dp, mut d2p) = (0.0, 0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            d2p = d2p * s + dp;
            dp = dp * s + p;
            p = p * s + c;
        }
        Radial { b: p, db: dp / w, d2b: 2.0 * d2p / (w * w) }
    }
}

/// Coefficients of the order-n smoothstep
/// `s^(n+1) sum_k C(n+k,k) C(2n+1,n-k) (-s)^k`.
fn smoothstep_coeffs(n: u32) -> Vec<f64> {
    let n = n as usize;
    let binom = |a: usize, b: usize| -> f64 {
        (0..b).fold(1.0, |acc, i| acc * (a - i) as f64 / (i + 1) as f64)
    };
    let mut c = vec![0.0; 2 * n + 2];
    for k in 0..=n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        c[n + 1 + k] = sign * binom(n + k, k) * binom(2 * n + 1, n - k);
    }
    c
}

/// Index of the coordinate in `K_i = sign_i x_{m_i} / (2 pi r^2)`.
const K_COMPONENT: [(f64, usize); 2] = [(-1.0, 1), (1.0, 0)];

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Value, gradient and Hessian of `K_i` at `x != 0`.
pub(crate) fn kernel_jet(x: Vec2, i: usize) -> (f64, [f64; 2], Tensor2) {
    let (sign, m) = K_COMPONENT[i];
    let c = sign / (2.0 * PI);
    let p = [x.x, x.y];
    let r2 = x.norm_sq();
    let r4 = r2 * r2;
    let r6 = r4 * r2;
    let val = c * p[m] / r2;
    let mut grad = [0.0; 2];
    let mut hess = [[0.0; 2]; 2];
    for l in 0..2 {
        grad[l] = c * (delta(l, m) / r2 - 2.0 * p[m] * p[l] / r4);
        for j in 0..2 {
            hess[j][l] = c
                * (-2.0 * (delta(l, m) * p[j] + delta(j, m) * p[l] + delta(j, l) * p[m]) / r4
                    + 8.0 * p[m] * p[l] * p[j] / r6);
        }
    }
    (val, grad, hess)
}

/// Near-field kernel `a K` (zero at the origin).
pub fn near_kernel(x: Vec2, cut: &CutoffPair) -> Vec2 {
    let r = x.norm();
    if r == 0.0 {
        return Vec2::ZERO;
    }
    super::raw_kernel(x, r) * cut.value_at(r)
}

/// `grad grad^perp [(1 - a) K_i](x)` for `i = 0, 1`, indexed `[i][j][k]`
/// as `d_j (grad^perp f)_k` with `grad^perp = (-d_2, d_1)`.
pub fn serfati_far_kernel(x: Vec2, cut: &CutoffPair) -> [Tensor2; 2] {
    let r = x.norm();
    let mut out = [[[0.0; 2]; 2]; 2];
    if r <= cut.inner {
        return out;
    }
    let rad = cut.radial(r);
    let p = [x.x, x.y];
    // derivatives of the radial factor b
    let mut gb = [0.0; 2];
    let mut hb = [[0.0; 2]; 2];
    for j in 0..2 {
        gb[j] = rad.db * p[j] / r;
        for l in 0..2 {
            let e = p[j] * p[l] / (r * r);
            hb[j][l] = rad.d2b * e + rad.db / r * (delta(j, l) - e);
        }
    }
    for (i, slot) in out.iter_mut().enumerate() {
        let (k, gk, hk) = kernel_jet(x, i);
        let mut h = [[0.0; 2]; 2];
        for j in 0..2 {
            for l in 0..2 {
                h[j][l] = hb[j][l] * k + gb[j] * gk[l] + gb[l] * gk[j] + rad.b * hk[j][l];
            }
        }
        for j in 0..2 {
            slot[j][0] = -h[j][1];
            slot[j][1] = h[j][0];
        }
    }
    out
}

/// `Laplacian [(1 - a) K_i](x)` for `i = 0, 1`; supported in the annulus.
pub fn viscous_far_kernel(x: Vec2, cut: &CutoffPair) -> Vec2 {
    let r = x.norm();
    if r <= cut.inner || r >= cut.outer {
        return Vec2::ZERO;
    }
    let rad = cut.radial(r);
    // K is harmonic and homogeneous of degree -1, so x.grad K = -K
    super::raw_kernel(x, r) * (rad.d2b - rad.db / r)
}

/// `grad [(1 - a) K_i](x)` for `i = 0, 1`, indexed `[i]` then by derivative.
pub fn gradient_far_kernel(x: Vec2, cut: &CutoffPair) -> [Vec2; 2] {
    let r = x.norm();
    if r <= cut.inner {
        return [Vec2::ZERO; 2];
    }
    let rad = cut.radial(r);
    let mut out = [Vec2::ZERO; 2];
    for (i, slot) in out.iter_mut().enumerate() {
        let (k, gk, _) = kernel_jet(x, i);
        *slot = Vec2::new(
            rad.db * x.x / r * k + rad.b * gk[0],
            rad.db * x.y / r * k + rad.b * gk[1],
        );
    }
    out
}

/// L2 norms over `|x| < r_max` of the far-field kernels, as
/// `(serfati, viscous)`, each summed over components.
pub fn far_kernel_l2_norms(cut: &CutoffPair, r_max: f64) -> (f64, f64) {
    let rule = GaussRule::legendre(16);
    let n_theta = 64;
    let mut serfati = 0.0;
    let mut viscous = 0.0;
    // geometric radial panels from the inner radius outwards
    let mut a = cut.inner;
    while a < r_max {
        let b = if a < cut.outer { (a + 0.25 * (cut.outer - cut.inner)).min(cut.outer) } else { (a * 1.5).min(r_max) };
        let b = b.min(r_max);
        for (r, w) in rule.mapped(a, b) {
            let mut ring_s = 0.0;
            let mut ring_v = 0.0;
            for j in 0..n_theta {
                let th = 2.0 * PI * j as f64 / n_theta as f64;
                let x = Vec2::new(r * th.cos(), r * th.sin());
                let t = serfati_far_kernel(x, cut);
                ring_s += t.iter().flatten().flatten().map(|v| v * v).sum::<f64>();
                ring_v += viscous_far_kernel(x, cut).norm_sq();
            }
            let dth = 2.0 * PI / n_theta as f64;
            serfati += w * r * ring_s * dth;
            viscous += w * r * ring_v * dth;
        }
        a = b;
    }
    (serfati.sqrt(), viscous.sqrt())
}
