use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{Fft2, Topology};
use crate::grid::VectorField;

/// Second-order structure function
/// `S2(u; r) = ( avg_{|h| <= r} avg_x |u(x + h) - u(x)|^2 )^(1/2)`
/// over grid offsets `h` in the closed disc of radius `r`.
///
/// With [`Topology::Periodic`] the grid is one period and every node is
/// averaged; with [`Topology::Free`] only pairs with both ends on the grid
/// count.
pub fn structure_function(u: &VectorField, radii: &[f64], mode: Topology) -> Result<Vec<f64>> {
    let spec = *u.spec();
    let (nx, ny) = (spec.nx, spec.ny);
    let (dx, dy) = (spec.spacing.x, spec.spacing.y);
    let limit = 0.5 * (nx as f64 * dx).min(ny as f64 * dy);
    if let Some(r) = radii.iter().find(|&&r| !(r > 0.0 && r < limit)) {
        return Err(Error::Domain(format!(
            "structure-function radius {r} outside (0, {limit}), half the grid extent"
        )));
    }
    let r_max = radii.iter().fold(0.0, |a: f64, &b| a.max(b));
    let (mx, my) = ((r_max / dx).floor() as usize, (r_max / dy).floor() as usize);
    let mean_sq = match mode {
        Topology::Periodic => periodic_increments(u),
        Topology::Free => interior_increments(u, mx, my),
    };
    Ok(radii
        .iter()
        .map(|&r| {
            let (mut sum, mut count) = (0.0, 0usize);
            for (&(ox, oy), &v) in &mean_sq {
                let h2 = (ox as f64 * dx).powi(2) + (oy as f64 * dy).powi(2);
                if h2 <= r * r * (1.0 + 1e-12) {
                    sum += v;
                    count += 1;
                }
            }
            (sum / count as f64).sqrt()
        })
        .collect())
}

type Increments = std::collections::BTreeMap<(i64, i64), f64>;

/// Squared-increment averages for every offset of the periodic grid:
/// `avg |u(x+h) - u(x)|^2 = 2 (avg |u|^2 - C(h))` with `C` the circular
/// autocorrelation.
fn periodic_increments(u: &VectorField) -> Increments {
    let spec = u.spec();
    let (nx, ny) = (spec.nx, spec.ny);
    let fft = Fft2::new(nx, ny);
    let corr = autocorrelation(&fft, u, nx, ny);
    let n = (nx * ny) as f64;
    let energy = u.values().iter().map(|v| v.norm_sq()).sum::<f64>() / n;
    let mut out = Increments::new();
    for j in 0..ny {
        for i in 0..nx {
            let ox = crate::fft::freq_index(i, nx);
            let oy = crate::fft::freq_index(j, ny);
            out.insert((ox, oy), (2.0 * (energy - corr[j * nx + i] / n)).max(0.0));
        }
    }
    out
}

/// `sum_x u(x) . u(x + h)` for all offsets, by FFT on a `fx x fy` buffer.
fn autocorrelation(fft: &Fft2, u: &VectorField, fx: usize, fy: usize) -> Vec<f64> {
    let spec = u.spec();
    let mut acc = vec![Complex64::default(); fx * fy];
    for c in 0..2 {
        let mut buf = vec![Complex64::default(); fx * fy];
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                buf[j * fx + i] = Complex64::new(u.get(i, j).get(c), 0.0);
            }
        }
        fft.forward(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }
    fft.inverse(&mut acc);
    acc.iter().map(|c| c.re).collect()
}

/// Squared-increment averages over pairs inside the grid for offsets up
/// to `(mx, my)` cells.
fn interior_increments(u: &VectorField, mx: usize, my: usize) -> Increments {
    let spec = u.spec();
    let (nx, ny) = (spec.nx, spec.ny);
    let (fx, fy) = ((2 * nx).next_power_of_two(), (2 * ny).next_power_of_two());
    let fft = Fft2::new(fx, fy);
    let corr = autocorrelation(&fft, u, fx, fy);
    // summed-area table of |u|^2
    let mut sat = vec![0.0; (nx + 1) * (ny + 1)];
    for j in 0..ny {
        for i in 0..nx {
            sat[(j + 1) * (nx + 1) + i + 1] = u.get(i, j).norm_sq() + sat[j * (nx + 1) + i + 1]
                + sat[(j + 1) * (nx + 1) + i]
                - sat[j * (nx + 1) + i];
        }
    }
    let rect = |x0: usize, x1: usize, y0: usize, y1: usize| {
        sat[y1 * (nx + 1) + x1] - sat[y0 * (nx + 1) + x1] - sat[y1 * (nx + 1) + x0] + sat[y0 * (nx + 1) + x0]
    };
    let mut out = Increments::new();
    let (mx, my) = (mx.min(nx - 1) as i64, my.min(ny - 1) as i64);
    for oy in -my..=my {
        for ox in -mx..=mx {
            let (ax, ay) = (ox.unsigned_abs() as usize, oy.unsigned_abs() as usize);
            // x ranges over nodes with x + h on the grid
            let (x0, x1) = if ox >= 0 { (0, nx - ax) } else { (ax, nx) };
            let (y0, y1) = if oy >= 0 { (0, ny - ay) } else { (ay, ny) };
            let base = rect(x0, x1, y0, y1);
            let shifted = rect(
                (x0 as i64 + ox) as usize,
                (x1 as i64 + ox) as usize,
                (y0 as i64 + oy) as usize,
                (y1 as i64 + oy) as usize,
            );
            let slot = oy.rem_euclid(fy as i64) as usize * fx + ox.rem_euclid(fx as i64) as usize;
            let count = ((nx - ax) * (ny - ay)) as f64;
            let cross = corr[slot];
            out.insert((ox, oy), ((base + shifted - 2.0 * cross) / count).max(0.0));
        }
    }
    out
}
