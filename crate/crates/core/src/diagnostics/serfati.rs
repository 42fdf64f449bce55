//! Residual of the cutoff-split velocity identity
//!
//! `u_i(t) = u_i(0) + (a K_i) * (w(t) - w(0))
//!           - int_0^t grad grad^perp [(1 - a) K_i] : (u (x) u) ds
//!           + nu int_0^t Lap[(1 - a) K_i] * w ds
//!           + int_0^t grad [(1 - a) K_i] . F ds`
//!
//! evaluated on a grid from a sequence of snapshots. The last two terms
//! are the corrections of the viscous and blob routes; `F` is the blob
//! flux error. The near term uses exact cell integrals of the singular
//! kernel, the far terms sample their smooth kernels at grid offsets, and
//! the time integrals use the trapezoid rule.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::Method;
use crate::error::{Error, Result};
use crate::fft::{Convolver, Topology};
use crate::geom::Vec2;
use crate::grid::{same_grid, GridSpec, ScalarField, VectorField};
use crate::kernel::{gradient_far_kernel, near_kernel, serfati_far_kernel, viscous_far_kernel, CutoffPair};
use crate::quad::GaussRule;
use crate::special::GAMMA_QUARTER;

/// Image shells summed explicitly for periodic far kernels; the rest is
/// the leading term of the lattice tail.
const IMAGE_SHELLS: i64 = 8;

#[derive(Debug, Clone)]
pub struct SerfatiConfig {
    pub cutoff: CutoffPair,
    /// Inner radius of the auxiliary cutoff `a_eps_cut` that isolates the
    /// singularity: `a_eps_cut K` is integrated exactly over cells, the
    /// smooth rest `(a - a_eps_cut) K` by the midpoint rule.
    pub eps_cut: f64,
    /// Grid shared by all snapshots.
    pub grid: GridSpec,
    /// `Periodic` when the grid is one period of the flow (spectral
    /// runs), `Free` when the flow lives in the plane.
    pub topology: Topology,
}

impl SerfatiConfig {
    /// Default cutoff `(1, 2)` and `eps_cut = 1/4`.
    pub fn new(grid: GridSpec, topology: Topology) -> Self {
        SerfatiConfig { cutoff: CutoffPair::default(), eps_cut: 0.25, grid, topology }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps_cut > 0.0 && self.eps_cut < self.cutoff.inner()) {
            return Err(Error::Config(format!(
                "split radius {} must lie in (0, {}), the inner cutoff radius",
                self.eps_cut,
                self.cutoff.inner()
            )));
        }
        if self.topology == Topology::Periodic {
            let g = &self.grid;
            let (px, py) = (g.nx as f64 * g.spacing.x, g.ny as f64 * g.spacing.y);
            if (px - py).abs() > 1e-12 * px {
                return Err(Error::Config(format!("periodic identity needs a square period, got {px} x {py}")));
            }
            if self.cutoff.outer() > 0.5 * px {
                return Err(Error::Config(format!(
                    "outer cutoff radius {} exceeds half the period {}",
                    self.cutoff.outer(),
                    0.5 * px
                )));
            }
        }
        Ok(())
    }
}

/// One sample of the flow on the configured grid.
#[derive(Debug, Clone)]
pub struct SerfatiSnapshot {
    pub t: f64,
    pub omega: ScalarField,
    pub velocity: VectorField,
    /// Blob flux error `F`, required for the blob route.
    pub flux: Option<VectorField>,
}

/// Which correction terms are present.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Correction {
    None,
    Viscous(f64),
    Blob,
}

/// Kernel spectra, one per convolution.
struct Kernels {
    /// `a K_i`
    near: [Vec<Complex64>; 2],
    /// far tensor contracted against `(u0 u0, u0 u1, u1 u1)`
    far: [[Vec<Complex64>; 3]; 2],
    viscous: Option<[Vec<Complex64>; 2]>,
    /// `d_j [(1 - a) K_i]`, indexed `[i][j]`
    gradient: Option<[[Vec<Complex64>; 2]; 2]>,
}

/// Streaming evaluator: push snapshots in time order, get the residual
/// of each.
pub struct SerfatiResidual {
    cfg: SerfatiConfig,
    conv: Convolver,
    kernels: Kernels,
    correction: Correction,
    first: Option<SerfatiSnapshot>,
    last: Option<(f64, Vec<[f64; 6]>)>,
    /// Running trapezoid integrals of `(u0 u0, u0 u1, u1 u1, w, F0, F1)`.
    integral: Vec<[f64; 6]>,
}

impl SerfatiResidual {
    /// `nu` is required for the viscous route and ignored otherwise.
    pub fn new(cfg: SerfatiConfig, method: Method, nu: Option<f64>) -> Result<Self> {
        cfg.validate()?;
        let correction = match method {
            Method::Es => Correction::None,
            Method::Vv => match nu {
                Some(nu) if nu >= 0.0 => Correction::Viscous(nu),
                _ => return Err(Error::Config("viscous route needs the viscosity nu".into())),
            },
            Method::Vb => {
                if cfg.topology == Topology::Periodic {
                    return Err(Error::Config("blob route lives in the plane; use the free topology".into()));
                }
                Correction::Blob
            }
        };
        let g = cfg.grid;
        let conv = Convolver::new(g.nx, g.ny, g.cell_area(), cfg.topology);
        let kernels = build_kernels(&cfg, &conv, correction);
        let integral = vec![[0.0; 6]; g.len()];
        Ok(SerfatiResidual { cfg, conv, kernels, correction, first: None, last: None, integral })
    }

    /// Adds the next snapshot and returns the L2 norm of the identity's
    /// residual at its time.
    pub fn push(&mut self, snap: SerfatiSnapshot) -> Result<f64> {
        same_grid(&self.cfg.grid, snap.omega.spec())?;
        same_grid(&self.cfg.grid, snap.velocity.spec())?;
        let flux = match (self.correction, &snap.flux) {
            (Correction::Blob, None) => {
                return Err(Error::Config("blob route needs the flux error field at every snapshot".into()))
            }
            (Correction::Blob, Some(f)) => {
                same_grid(&self.cfg.grid, f.spec())?;
                Some(f.values())
            }
            _ => None,
        };
        let n = self.cfg.grid.len();
        let u = snap.velocity.values();
        let w = snap.omega.values();
        let integrand: Vec<[f64; 6]> = (0..n)
            .map(|k| {
                let f = flux.map_or(Vec2::ZERO, |f| f[k]);
                [u[k].x * u[k].x, u[k].x * u[k].y, u[k].y * u[k].y, w[k], f.x, f.y]
            })
            .collect();
        if let Some((t_prev, prev)) = &self.last {
            let h = snap.t - t_prev;
            if !(h > 0.0) {
                return Err(Error::Data(format!("snapshot at t = {} does not follow t = {t_prev}", snap.t)));
            }
            for ((acc, a), b) in self.integral.iter_mut().zip(prev).zip(&integrand) {
                for c in 0..6 {
                    acc[c] += 0.5 * h * (a[c] + b[c]);
                }
            }
        }
        self.last = Some((snap.t, integrand));
        let first = match &self.first {
            Some(f) => f,
            None => {
                self.first = Some(snap);
                return Ok(0.0);
            }
        };
        let dw: Vec<f64> = w.iter().zip(first.omega.values()).map(|(a, b)| a - b).collect();
        let col = |c: usize| -> Vec<f64> { self.integral.iter().map(|v| v[c]).collect() };
        let dw_hat = self.conv.data_spectrum(&dw);
        let pair_hat: Vec<Vec<Complex64>> = (0..3).map(|c| self.conv.data_spectrum(&col(c))).collect();
        let w_hat = matches!(self.correction, Correction::Viscous(_)).then(|| self.conv.data_spectrum(&col(3)));
        let f_hat: Option<Vec<Vec<Complex64>>> = (self.correction == Correction::Blob)
            .then(|| (4..6).map(|c| self.conv.data_spectrum(&col(c))).collect());
        let u0 = first.velocity.values();
        let mut sum_sq = 0.0;
        for i in 0..2 {
            let k = &self.kernels;
            let mut acc = vec![Complex64::default(); self.conv.spectral_len()];
            Convolver::accumulate(&mut acc, &k.near[i], &dw_hat, 1.0);
            for (p, d) in pair_hat.iter().enumerate() {
                Convolver::accumulate(&mut acc, &k.far[i][p], d, -1.0);
            }
            if let (Correction::Viscous(nu), Some(wh), Some(vk)) = (self.correction, &w_hat, &k.viscous) {
                Convolver::accumulate(&mut acc, &vk[i], wh, nu);
            }
            if let (Some(fh), Some(gk)) = (&f_hat, &k.gradient) {
                for j in 0..2 {
                    Convolver::accumulate(&mut acc, &gk[i][j], &fh[j], 1.0);
                }
            }
            let rhs = self.conv.to_grid(&acc);
            sum_sq += (0..n).map(|k| (u[k].get(i) - u0[k].get(i) - rhs[k]).powi(2)).sum::<f64>();
        }
        Ok((sum_sq * self.cfg.grid.cell_area()).sqrt())
    }
}

/// Residual at every snapshot time; the first is zero by construction.
pub fn serfati_residual(
    snapshots: impl IntoIterator<Item = SerfatiSnapshot>,
    cfg: SerfatiConfig,
    method: Method,
    nu: Option<f64>,
) -> Result<Vec<f64>> {
    let mut r = SerfatiResidual::new(cfg, method, nu)?;
    snapshots.into_iter().map(|s| r.push(s)).collect()
}

/// Offsets of the convolution buffer as positions.
struct OffsetTable {
    fx: usize,
    fy: usize,
    spacing: Vec2,
}

impl OffsetTable {
    fn new(conv: &Convolver, cfg: &SerfatiConfig) -> Self {
        let (fx, fy) = match cfg.topology {
            Topology::Periodic => (cfg.grid.nx, cfg.grid.ny),
            Topology::Free => ((2 * cfg.grid.nx).next_power_of_two(), (2 * cfg.grid.ny).next_power_of_two()),
        };
        debug_assert_eq!(fx * fy, conv.spectral_len());
        OffsetTable { fx, fy, spacing: cfg.grid.spacing }
    }

    /// Samples `f` at every offset; the result is indexed like the
    /// buffer.
    fn sample<const C: usize>(&self, f: impl Fn(i64, i64, Vec2) -> [f64; C] + Sync) -> Vec<[f64; C]> {
        use rayon::prelude::*;
        (0..self.fx * self.fy)
            .into_par_iter()
            .map(|k| {
                let ox = crate::fft::freq_index(k % self.fx, self.fx);
                let oy = crate::fft::freq_index(k / self.fx, self.fy);
                f(ox, oy, Vec2::new(ox as f64 * self.spacing.x, oy as f64 * self.spacing.y))
            })
            .collect()
    }

    fn lookup<'b, const C: usize>(&self, table: &'b [[f64; C]], c: usize) -> impl Fn(i64, i64) -> f64 + 'b {
        let (fx, fy) = (self.fx, self.fy);
        move |ox, oy| {
            let k = oy.rem_euclid(fy as i64) as usize * fx + ox.rem_euclid(fx as i64) as usize;
            table[k][c]
        }
    }
}

fn build_kernels(cfg: &SerfatiConfig, conv: &Convolver, correction: Correction) -> Kernels {
    let offs = OffsetTable::new(conv, cfg);
    let weights = NearWeights::new(cfg);
    let near = offs.sample(|ox, oy, x| {
        let v = weights.at(ox, oy, x);
        [v.x, v.y]
    });
    let images = (cfg.topology == Topology::Periodic).then(|| ImageSum::new(cfg.grid.nx as f64 * cfg.grid.spacing.x));
    let far = offs.sample(|_, _, x| {
        let t = serfati_far_kernel(x, &cfg.cutoff);
        let mut out = [0.0; 6];
        for i in 0..2 {
            out[3 * i] = t[i][0][0];
            out[3 * i + 1] = t[i][0][1] + t[i][1][0];
            out[3 * i + 2] = t[i][1][1];
        }
        if let Some(img) = &images {
            let s = img.at(x);
            for (o, a) in out.iter_mut().zip(&img.coeffs) {
                *o += (a * s).re;
            }
        }
        out
    });
    let spectra2 = |table: &[[f64; 2]]| [0, 1].map(|c| conv.kernel_spectrum(offs.lookup(table, c)));
    let near = spectra2(&near);
    let far = [0, 1].map(|i| [0, 1, 2].map(|p| conv.kernel_spectrum(offs.lookup(&far, 3 * i + p))));
    let viscous = matches!(correction, Correction::Viscous(_)).then(|| {
        let t = offs.sample(|_, _, x| {
            let v = viscous_far_kernel(x, &cfg.cutoff);
            [v.x, v.y]
        });
        spectra2(&t)
    });
    let gradient = (correction == Correction::Blob).then(|| {
        let t = offs.sample(|_, _, x| {
            let g = gradient_far_kernel(x, &cfg.cutoff);
            [g[0].x, g[0].y, g[1].x, g[1].y]
        });
        [0, 1].map(|i| [0, 1].map(|j| conv.kernel_spectrum(offs.lookup(&t, 2 * i + j))))
    });
    Kernels { near, far, viscous, gradient }
}

/// Cell averages of `a K` around grid offsets.
struct NearWeights<'a> {
    cut: &'a CutoffPair,
    split: CutoffPair,
    spacing: Vec2,
    /// Offsets whose cells come within reach of the split cutoff.
    reach: f64,
    rule: GaussRule,
}

/// Subcells per axis for exact cell integrals.
const SUBCELLS: usize = 4;

impl<'a> NearWeights<'a> {
    fn new(cfg: &'a SerfatiConfig) -> Self {
        let split = CutoffPair::scaled(cfg.eps_cut).expect("validated split radius");
        let h = cfg.grid.spacing;
        NearWeights { cut: &cfg.cutoff, reach: split.outer() + h.norm(), split, spacing: h, rule: GaussRule::legendre(8) }
    }

    fn at(&self, ox: i64, oy: i64, x: Vec2) -> Vec2 {
        let smooth = if x.norm() < self.cut.outer() {
            near_kernel(x, self.cut) - near_kernel(x, &self.split)
        } else {
            Vec2::ZERO
        };
        if x.norm() > self.reach || (ox == 0 && oy == 0) {
            // the origin cell integral of the odd singular part vanishes
            return smooth;
        }
        smooth + self.cell_average(x)
    }

    /// Average of `a_eps_cut K` over the cell centred at `c`.
    fn cell_average(&self, c: Vec2) -> Vec2 {
        let h = self.spacing;
        let (sx, sy) = (h.x / SUBCELLS as f64, h.y / SUBCELLS as f64);
        let mut sum = Vec2::ZERO;
        for j in 0..SUBCELLS {
            let y0 = c.y - 0.5 * h.y + j as f64 * sy;
            for i in 0..SUBCELLS {
                let x0 = c.x - 0.5 * h.x + i as f64 * sx;
                for (y, wy) in self.rule.mapped(y0, y0 + sy) {
                    for (x, wx) in self.rule.mapped(x0, x0 + sx) {
                        sum += near_kernel(Vec2::new(x, y), &self.split) * (wx * wy);
                    }
                }
            }
        }
        sum / (h.x * h.y)
    }
}

/// Sum over the nonzero images `z + P n` of the complex kernel
/// `z^-3`, which represents every component of the far tensor once the
/// cutoff is 1: a third derivative of `log|z| / 2 pi`.
struct ImageSum {
    period: f64,
    /// Complex amplitudes `A` with component `= Re(A z^-3)`.
    coeffs: [Complex64; 6],
    /// Leading tail term `-3 z P^-4 sum_{|n|_inf > M} n^-4`.
    tail4: f64,
}

impl ImageSum {
    fn new(period: f64) -> Self {
        // Read the amplitudes off the exact kernel at z = R and z = iR
        // with R beyond any cutoff: Re(A R^-3) and Re(A (iR)^-3) = -Im(A) R^-3.
        let far = CutoffPair::new(1e-3, 2e-3, 2).expect("valid");
        let r = 1.0;
        let at = |x: Vec2| {
            let t = serfati_far_kernel(x, &far);
            let mut o = [0.0; 6];
            for i in 0..2 {
                o[3 * i] = t[i][0][0];
                o[3 * i + 1] = t[i][0][1] + t[i][1][0];
                o[3 * i + 2] = t[i][1][1];
            }
            o
        };
        let (a, b) = (at(Vec2::new(r, 0.0)), at(Vec2::new(0.0, r)));
        let coeffs = [0, 1, 2, 3, 4, 5].map(|c| Complex64::new(a[c], -b[c]) * r.powi(3));
        ImageSum { period, coeffs, tail4: lattice_tail4(IMAGE_SHELLS) }
    }

    /// `sum_{n != 0} (z + P n)^-3` for `z = x + i y`.
    fn at(&self, x: Vec2) -> Complex64 {
        let z = Complex64::new(x.x, x.y);
        let m = IMAGE_SHELLS;
        let mut s = Complex64::default();
        for ny in -m..=m {
            for nx in -m..=m {
                if nx == 0 && ny == 0 {
                    continue;
                }
                let w = z + Complex64::new(nx as f64, ny as f64) * self.period;
                let inv = w.inv();
                s += inv * inv * inv;
            }
        }
        s - z * (3.0 * self.tail4 / self.period.powi(4))
    }
}

/// Square-lattice constant `sum_{n != 0} (n_1 + i n_2)^-4`.
pub(crate) fn lattice_g4() -> f64 {
    GAMMA_QUARTER.powi(8) / (960.0 * PI * PI)
}

/// `sum_{|n|_inf > m} (n_1 + i n_2)^-4`, real by symmetry.
fn lattice_tail4(m: i64) -> f64 {
    let mut inner = 0.0;
    for ny in -m..=m {
        for nx in -m..=m {
            if nx == 0 && ny == 0 {
                continue;
            }
            inner += Complex64::new(nx as f64, ny as f64).powi(-4).re;
        }
    }
    lattice_g4() - inner
}
