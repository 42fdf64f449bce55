//! Periodic pseudo-spectral solver for `d_t w + u . grad w = nu lap w` on
//! the box `[-L, L)^2`, standing in for the plane when the vorticity is
//! supported well inside `[-L/2, L/2]^2`.
//!
//! Coefficients are Fourier-series coefficients (transform divided by
//! `n^2`). The nonlinear term is dealiased by the 2/3 rule and time
//! stepping is classical RK4 with an exact integrating factor for the
//! diffusion.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{freq_index, Fft2};
use crate::geom::Vec2;
use crate::grid::{GridSpec, ScalarField, VectorField, VorticitySource};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Solver state: vorticity coefficients on an `n x n` periodic grid.
#[derive(Debug, Clone)]
pub struct SpectralState {
    spec: GridSpec,
    half: f64,
    n: usize,
    nu: f64,
    pub t: f64,
    omega_hat: Vec<Complex64>,
    fft: Fft2,
    /// Angular wavenumber of each slot along one axis.
    wave: Vec<f64>,
    /// Modes kept by the 2/3 rule.
    mask: Vec<bool>,
}

/// What one step did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub dt: f64,
    /// Largest speed on the grid at the start of the step.
    pub max_speed: f64,
    /// `int rate dt` over the step by the RK4 stage weights.
    pub dissipated: f64,
}

impl SpectralState {
    fn empty(half: f64, n: usize, nu: f64) -> Result<Self> {
        if !(half > 0.0 && half.is_finite()) {
            return Err(Error::Config(format!("box half-width must be positive, got {half}")));
        }
        if !n.is_power_of_two() || n < 8 {
            return Err(Error::Config(format!("spectral grid size must be a power of two >= 8, got {n}")));
        }
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::Config(format!("viscosity must be nonnegative, got {nu}")));
        }
        let spec = GridSpec::periodic_square(half, n)?;
        let wave: Vec<f64> = (0..n).map(|i| PI / half * freq_index(i, n) as f64).collect();
        let keep = |i: usize| 3 * freq_index(i, n).unsigned_abs() as usize <= n;
        let mask = (0..n * n).map(|k| keep(k % n) && keep(k / n)).collect();
        Ok(SpectralState {
            spec,
            half,
            n,
            nu,
            t: 0.0,
            omega_hat: vec![Complex64::default(); n * n],
            fft: Fft2::new(n, n),
            wave,
            mask,
        })
    }

    /// Starts from vorticity sampled on a periodic square grid as produced
    /// by [`GridSpec::periodic_square`].
    pub fn from_grid(omega: &ScalarField, nu: f64) -> Result<Self> {
        let g = omega.spec();
        let half = 0.5 * g.nx as f64 * g.spacing.x;
        let tol = 1e-12 * half;
        let periodic = g.nx == g.ny
            && (g.spacing.x - g.spacing.y).abs() <= 1e-12 * g.spacing.x
            && (g.origin.x + half).abs() <= tol
            && (g.origin.y + half).abs() <= tol;
        if !periodic {
            return Err(Error::Config(format!(
                "grid {}x{} at {:?} is not a periodic square layout [-L, L)^2",
                g.nx, g.ny, g.origin
            )));
        }
        let mut s = SpectralState::empty(half, g.nx, nu)?;
        s.load(omega.values(), 0.0);
        Ok(s)
    }

    /// Samples `src` on `[-half, half)^2` with `n^2` nodes and smooths it by
    /// the Gaussian filter `exp(-|k|^2 delta^2 / 4)`, the transform of the
    /// unit-mass Gaussian of width `delta`. The support must lie inside
    /// `[-half/2, half/2]^2`.
    pub fn from_source(src: &dyn VorticitySource, half: f64, n: usize, nu: f64, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) {
            return Err(Error::Config(format!("filter width must be nonnegative, got {delta}")));
        }
        let (lo, hi) = src.support_box();
        let limit = 0.5 * half;
        if lo.x < -limit || lo.y < -limit || hi.x > limit || hi.y > limit {
            return Err(Error::Config(format!(
                "support [{lo:?}, {hi:?}] leaves [-L/2, L/2]^2 with L = {half}; enlarge the box"
            )));
        }
        let mut s = SpectralState::empty(half, n, nu)?;
        let h = s.spec.spacing;
        let sampled: Vec<f64> = s.spec.nodes().map(|x| src.cell_average(x, h)).collect();
        if let Some(i) = sampled.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite initial vorticity at node {i}")));
        }
        s.load(&sampled, delta);
        Ok(s)
    }

    fn load(&mut self, values: &[f64], delta: f64) {
        let mut hat = self.fft.forward_real(values);
        let norm = 1.0 / (self.n * self.n) as f64;
        for (k, v) in hat.iter_mut().enumerate() {
            let k2 = self.k2(k);
            *v *= if self.mask[k] { norm * (-0.25 * k2 * delta * delta).exp() } else { 0.0 };
        }
        self.omega_hat = hat;
        self.symmetrize();
    }

    #[inline]
    fn kvec(&self, k: usize) -> (f64, f64) {
        (self.wave[k % self.n], self.wave[k / self.n])
    }

    #[inline]
    fn k2(&self, k: usize) -> f64 {
        let (kx, ky) = self.kvec(k);
        kx * kx + ky * ky
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Half-width `L` of the periodic box.
    pub fn half_width(&self) -> f64 {
        self.half
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.omega_hat
    }

    /// Whether mode slot `k` survives dealiasing.
    pub fn is_kept(&self, k: usize) -> bool {
        self.mask[k]
    }

    /// Coefficient of the constant mode; equals the mean vorticity.
    pub fn mean_mode(&self) -> Complex64 {
        self.omega_hat[0]
    }

    fn to_physical(&self, hat: &[Complex64]) -> Vec<f64> {
        let scale = (self.n * self.n) as f64;
        let mut c: Vec<Complex64> = hat.iter().map(|v| v * scale).collect();
        self.fft.inverse(&mut c);
        c.into_iter().map(|v| v.re).collect()
    }

    /// Inverse transform of two Hermitian spectra at once: returns
    /// `(ifft a, ifft b)`.
    fn pair_to_physical(&self, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let scale = (self.n * self.n) as f64;
        let mut c: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| (x + I * y) * scale).collect();
        self.fft.inverse(&mut c);
        c.into_iter().map(|v| (v.re, v.im)).unzip()
    }

    pub fn vorticity(&self) -> ScalarField {
        ScalarField::from_raw(self.spec, self.to_physical(&self.omega_hat))
    }

    /// Velocity coefficients of `w`: `u = grad^perp psi` with `lap psi = w`,
    /// so `u_hat = (i k_y, -i k_x) w_hat / |k|^2` and `u_hat(0) = 0`.
    fn velocity_hat(&self, w: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let n2 = self.n * self.n;
        let mut ux = vec![Complex64::default(); n2];
        let mut uy = vec![Complex64::default(); n2];
        for k in 1..n2 {
            let (kx, ky) = self.kvec(k);
            let f = w[k] / (kx * kx + ky * ky);
            ux[k] = I * ky * f;
            uy[k] = -I * kx * f;
        }
        (ux, uy)
    }

    pub fn velocity(&self) -> VectorField {
        let (ux, uy) = self.velocity_hat(&self.omega_hat);
        let (ux, uy) = self.pair_to_physical(&ux, &uy);
        VectorField::from_raw(self.spec, ux.into_iter().zip(uy).map(|(x, y)| Vec2::new(x, y)).collect())
    }

    /// Spectral divergence of the velocity, largest coefficient magnitude.
    pub fn velocity_divergence(&self) -> f64 {
        let (ux, uy) = self.velocity_hat(&self.omega_hat);
        (0..ux.len())
            .map(|k| {
                let (kx, ky) = self.kvec(k);
                (I * kx * ux[k] + I * ky * uy[k]).norm()
            })
            .fold(0.0, f64::max)
    }

    fn box_area(&self) -> f64 {
        4.0 * self.half * self.half
    }

    fn energy_of(&self, w: &[Complex64]) -> f64 {
        let s: f64 = (1..w.len()).map(|k| w[k].norm_sqr() / self.k2(k)).sum();
        0.5 * self.box_area() * s
    }

    fn rate_of(&self, w: &[Complex64]) -> f64 {
        self.nu * self.box_area() * w.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// `(1/2) int |u|^2` by Parseval.
    pub fn energy(&self) -> f64 {
        self.energy_of(&self.omega_hat)
    }

    /// `nu int w^2`, the energy dissipation rate.
    pub fn dissipation_rate(&self) -> f64 {
        self.rate_of(&self.omega_hat)
    }

    /// `int w^2` by Parseval.
    pub fn enstrophy(&self) -> f64 {
        self.box_area() * self.omega_hat.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// Dealiased `-P(u . grad w)` and the largest grid speed.
    fn nonlinear(&self, w: &[Complex64]) -> (Vec<Complex64>, f64) {
        let (ux_hat, uy_hat) = self.velocity_hat(w);
        let wx_hat: Vec<Complex64> = (0..w.len()).map(|k| I * self.kvec(k).0 * w[k]).collect();
        let wy_hat: Vec<Complex64> = (0..w.len()).map(|k| I * self.kvec(k).1 * w[k]).collect();
        let (ux, wx) = self.pair_to_physical(&ux_hat, &wx_hat);
        let (uy, wy) = self.pair_to_physical(&uy_hat, &wy_hat);
        let mut speed2: f64 = 0.0;
        let adv: Vec<f64> = (0..ux.len())
            .map(|k| {
                speed2 = speed2.max(ux[k] * ux[k] + uy[k] * uy[k]);
                ux[k] * wx[k] + uy[k] * wy[k]
            })
            .collect();
        let mut hat = self.fft.forward_real(&adv);
        let norm = -1.0 / (self.n * self.n) as f64;
        for (k, v) in hat.iter_mut().enumerate() {
            *v = if self.mask[k] && k != 0 { *v * norm } else { Complex64::default() };
        }
        (hat, speed2.sqrt())
    }

    /// `<P(u . grad w), w> / (|P(u . grad w)| |w|)`; zero up to rounding
    /// for the dealiased term.
    pub fn nonlinear_skewness(&self) -> f64 {
        let (nl, _) = self.nonlinear(&self.omega_hat);
        let dot: f64 = nl.iter().zip(&self.omega_hat).map(|(a, b)| (a.conj() * b).re).sum();
        let na = nl.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let nb = self.omega_hat.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            dot.abs() / (na * nb)
        }
    }

    pub fn max_speed(&self) -> f64 {
        self.velocity().max_magnitude()
    }

    pub fn grid_spacing(&self) -> f64 {
        self.spec.spacing.x
    }

    /// Largest step allowed by `dt <= 0.5 dx / max |u|` (infinite at rest).
    pub fn cfl_limit(&self) -> f64 {
        let u = self.max_speed();
        if u > 0.0 {
            0.5 * self.grid_spacing() / u
        } else {
            f64::INFINITY
        }
    }

    fn symmetrize(&mut self) {
        let n = self.n;
        for j in 0..n {
            for i in 0..n {
                let k = j * n + i;
                let m = ((n - j) % n) * n + (n - i) % n;
                if m < k {
                    continue;
                }
                let avg = 0.5 * (self.omega_hat[k] + self.omega_hat[m].conj());
                self.omega_hat[k] = avg;
                self.omega_hat[m] = avg.conj();
            }
        }
    }

    /// One integrating-factor RK4 step. Fails without changing the state
    /// when `dt` breaks the CFL bound.
    pub fn step(&mut self, dt: f64) -> Result<StepInfo> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("time step must be positive, got {dt}")));
        }
        let w = &self.omega_hat;
        let (a, speed) = self.nonlinear(w);
        let limit = 0.5 * self.grid_spacing() / speed;
        if dt > limit {
            return Err(Error::Instability(format!(
                "dt = {dt:e} exceeds the CFL bound {limit:e} (max speed {speed:e}) at t = {}; retry with dt <= {limit:e}",
                self.t
            )));
        }
        let n2 = w.len();
        let (e_full, e_half): (Vec<f64>, Vec<f64>) = (0..n2)
            .map(|k| {
                let d = -self.nu * self.k2(k) * dt;
                (d.exp(), (0.5 * d).exp())
            })
            .unzip();
        let h = 0.5 * dt;
        let w2: Vec<Complex64> = (0..n2).map(|k| e_half[k] * (w[k] + h * a[k])).collect();
        let (b, _) = self.nonlinear(&w2);
        let w3: Vec<Complex64> = (0..n2).map(|k| e_half[k] * w[k] + h * b[k]).collect();
        let (c, _) = self.nonlinear(&w3);
        let w4: Vec<Complex64> = (0..n2).map(|k| e_full[k] * w[k] + dt * e_half[k] * c[k]).collect();
        let (d, _) = self.nonlinear(&w4);
        let dissipated =
            dt / 6.0 * (self.rate_of(w) + 2.0 * self.rate_of(&w2) + 2.0 * self.rate_of(&w3) + self.rate_of(&w4));
        let next: Vec<Complex64> = (0..n2)
            .map(|k| {
                e_full[k] * w[k] + dt / 6.0 * (e_full[k] * a[k] + 2.0 * e_half[k] * (b[k] + c[k]) + d[k])
            })
            .collect();
        if let Some(k) = next.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Instability(format!(
                "mode {k} became non-finite at t = {}; retry with dt <= {:e}",
                self.t,
                0.5 * dt
            )));
        }
        self.omega_hat = next;
        self.symmetrize();
        self.t += dt;
        Ok(StepInfo { dt, max_speed: speed, dissipated })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_keeps_two_thirds() {
        let s = SpectralState::empty(PI, 32, 0.0).unwrap();
        let kept = (0..32).filter(|&i| s.mask[i]).count();
        // |m| <= 10 of 32 slots
        assert_eq!(kept, 21);
        assert!(s.mask[0] && !s.mask[16]);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(SpectralState::empty(PI, 48, 0.0).is_err());
        assert!(SpectralState::empty(-1.0, 64, 0.0).is_err());
        assert!(SpectralState::empty(PI, 64, -0.1).is_err());
    }
}
