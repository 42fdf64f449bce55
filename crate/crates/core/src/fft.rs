//! Two-dimensional FFTs and FFT-based discrete convolution on grids.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Row-major 2D complex FFT of `ny` rows by `nx` columns.
#[derive(Clone)]
pub struct Fft2 {
    nx: usize,
    ny: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fft2({}x{})", self.nx, self.ny)
    }
}

impl Fft2 {
    pub fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            nx,
            ny,
            row_fwd: planner.plan_fft_forward(nx),
            row_inv: planner.plan_fft_inverse(nx),
            col_fwd: planner.plan_fft_forward(ny),
            col_inv: planner.plan_fft_inverse(ny),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    fn run(&self, data: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.nx * self.ny);
        rows.process(data);
        let mut t = vec![Complex64::default(); data.len()];
        transpose(data, &mut t, self.nx, self.ny);
        cols.process(&mut t);
        transpose(&t, data, self.ny, self.nx);
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.row_fwd, &self.col_fwd);
    }

    /// Inverse transform in place, normalized so that it undoes `forward`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.row_inv, &self.col_inv);
        let s = 1.0 / (self.nx * self.ny) as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }

    pub fn forward_real(&self, data: &[f64]) -> Vec<Complex64> {
        let mut c: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut c);
        c
    }

    pub fn inverse_real(&self, data: &[Complex64]) -> Vec<f64> {
        let mut c = data.to_vec();
        self.inverse(&mut c);
        c.into_iter().map(|v| v.re).collect()
    }
}

/// `src` has `rows` rows of `cols` entries; `dst` receives the transpose.
fn transpose(src: &[Complex64], dst: &mut [Complex64], cols: usize, rows: usize) {
    const B: usize = 32;
    for r0 in (0..rows).step_by(B) {
        for c0 in (0..cols).step_by(B) {
            for r in r0..(r0 + B).min(rows) {
                for c in c0..(c0 + B).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// Signed FFT frequency index of slot `i` in a length-`n` transform.
pub fn freq_index(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Boundary treatment of a [`Convolver`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// The grid is one period of a doubly periodic field.
    Periodic,
    /// Values outside the grid are zero.
    Free,
}

/// Discrete convolution `(k * f)(x_p) = sum_q k(x_p - x_q) f(x_q) dA` on a
/// fixed grid, done by FFT.
#[derive(Debug, Clone)]
pub struct Convolver {
    fft: Fft2,
    nx: usize,
    ny: usize,
    topology: Topology,
    cell_area: f64,
}

impl Convolver {
    pub fn new(nx: usize, ny: usize, cell_area: f64, topology: Topology) -> Self {
        let (fx, fy) = match topology {
            Topology::Periodic => (nx, ny),
            Topology::Free => ((2 * nx).next_power_of_two(), (2 * ny).next_power_of_two()),
        };
        Convolver { fft: Fft2::new(fx, fy), nx, ny, topology, cell_area }
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    /// Size of the spectral arrays.
    pub fn spectral_len(&self) -> usize {
        let (fx, fy) = self.fft.dims();
        fx * fy
    }

    /// Spectrum of a kernel given as a function of the integer cell offset.
    /// The cell area is folded in.
    pub fn kernel_spectrum(&self, k: impl Fn(i64, i64) -> f64) -> Vec<Complex64> {
        let (fx, fy) = self.fft.dims();
        let mut buf = vec![Complex64::default(); fx * fy];
        for j in 0..fy {
            let oy = freq_index(j, fy);
            for i in 0..fx {
                let ox = freq_index(i, fx);
                buf[j * fx + i] = Complex64::new(k(ox, oy) * self.cell_area, 0.0);
            }
        }
        self.fft.forward(&mut buf);
        buf
    }

    /// Spectrum of grid data (row-major `ny x nx`), zero-padded if free.
    pub fn data_spectrum(&self, data: &[f64]) -> Vec<Complex64> {
        assert_eq!(data.len(), self.nx * self.ny);
        let (fx, fy) = self.fft.dims();
        let mut buf = vec![Complex64::default(); fx * fy];
        for j in 0..self.ny {
            for i in 0..self.nx {
                buf[j * fx + i] = Complex64::new(data[j * self.nx + i], 0.0);
            }
        }
        self.fft.forward(&mut buf);
        buf
    }

    /// Back to grid values from an accumulated product spectrum.
    pub fn to_grid(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let (fx, _) = self.fft.dims();
        let mut buf = spectrum.to_vec();
        self.fft.inverse(&mut buf);
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            out.extend(buf[j * fx..j * fx + self.nx].iter().map(|c| c.re));
        }
        out
    }

    /// `acc += kernel_hat * data_hat * scale`.
    pub fn accumulate(acc: &mut [Complex64], kernel_hat: &[Complex64], data_hat: &[Complex64], scale: f64) {
        for ((a, k), d) in acc.iter_mut().zip(kernel_hat).zip(data_hat) {
            *a += k * d * scale;
        }
    }

    pub fn convolve(&self, kernel_hat: &[Complex64], data: &[f64]) -> Vec<f64> {
        let d = self.data_spectrum(data);
        let prod: Vec<Complex64> = kernel_hat.iter().zip(&d).map(|(k, v)| k * v).collect();
        self.to_grid(&prod)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let f = Fft2::new(8, 4);
        let data: Vec<f64> = (0..32).map(|i| (i as f64 * 0.37).sin()).collect();
        let back = f.inverse_real(&f.forward_real(&data));
        for (a, b) in data.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    fn brute(nx: usize, ny: usize, k: &dyn Fn(i64, i64) -> f64, d: &[f64], periodic: bool) -> Vec<f64> {
        let mut out = vec![0.0; nx * ny];
        for py in 0..ny {
            for px in 0..nx {
                let mut s = 0.0;
                for qy in 0..ny {
                    for qx in 0..nx {
                        let (mut ox, mut oy) = (px as i64 - qx as i64, py as i64 - qy as i64);
                        if periodic {
                            ox = freq_index(ox.rem_euclid(nx as i64) as usize, nx);
                            oy = freq_index(oy.rem_euclid(ny as i64) as usize, ny);
                        }
                        s += k(ox, oy) * d[qy * nx + qx];
                    }
                }
                out[py * nx + px] = s;
            }
        }
        out
    }

    #[test]
    fn matches_direct_sums() {
        let (nx, ny) = (6, 5);
        let k = |x: i64, y: i64| 1.0 / (1.0 + (x * x + 2 * y * y) as f64) + 0.1 * x as f64;
        let d: Vec<f64> = (0..nx * ny).map(|i| ((i * 7 % 11) as f64) - 5.0).collect();
        for (topo, periodic) in [(Topology::Free, false), (Topology::Periodic, true)] {
            let c = Convolver::new(nx, ny, 1.0, topo);
            let got = c.convolve(&c.kernel_spectrum(k), &d);
            let want = brute(nx, ny, &k, &d, periodic);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-12, "{topo:?}: {a} vs {b}");
            }
        }
    }
}
