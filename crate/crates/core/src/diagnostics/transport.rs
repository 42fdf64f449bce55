use crate::blob::{reconstruct_vorticity, velocity, BlobEnsemble, VelocityMethod};
use crate::error::{Error, Result};
use crate::fft::{Convolver, Topology};
use crate::geom::Vec2;
use crate::grid::ScalarField;

/// Outcome of [`transport_comparison`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransportComparison {
    pub t: f64,
    /// `|w_eps(t) - phi_eps * w_bar(t)|_1` over the nodes that were
    /// traced back inside the initial grid.
    pub l1: f64,
    /// Fraction of nodes whose characteristic left the initial grid.
    pub excluded_fraction: f64,
}

/// Compares the blob vorticity at the last time of `history` with the
/// initial vorticity `omega0` transported exactly by the blob velocity
/// and then mollified by the blob profile.
///
/// Characteristics are traced backward from the nodes of `omega0`'s grid
/// by RK4 with the history's time spacing; mid-interval velocities use
/// blob positions interpolated by cubic Hermite polynomials.
pub fn transport_comparison(
    history: &[BlobEnsemble],
    omega0: &ScalarField,
    method: VelocityMethod,
) -> Result<TransportComparison> {
    let last = history.last().ok_or_else(|| Error::Data("empty blob history".into()))?;
    for w in history.windows(2) {
        if !(w[1].t > w[0].t) || w[1].len() != w[0].len() {
            return Err(Error::Data(format!(
                "blob history is not a single time-ordered run near t = {}",
                w[1].t
            )));
        }
    }
    let spec = *omega0.spec();
    let mut feet: Vec<Vec2> = spec.nodes().collect();
    let blob_vel: Vec<Vec<Vec2>> = history.iter().map(|e| velocity(e, e.positions(), method)).collect();
    for k in (1..history.len()).rev() {
        let (a, b) = (&history[k - 1], &history[k]);
        let h = b.t - a.t;
        let mid: Vec<Vec2> = (0..a.len())
            .map(|i| {
                let (xa, xb) = (a.positions()[i], b.positions()[i]);
                (xa + xb) * 0.5 + (blob_vel[k - 1][i] - blob_vel[k][i]) * (h / 8.0)
            })
            .collect();
        let mid = a.with_positions(mid)?;
        let at = |e: &BlobEnsemble, pts: &[Vec2]| velocity(e, pts, method);
        // backward in time: dx/ds = -u
        let k1 = at(b, &feet);
        let s2: Vec<Vec2> = feet.iter().zip(&k1).map(|(&x, &v)| x - v * (0.5 * h)).collect();
        let k2 = at(&mid, &s2);
        let s3: Vec<Vec2> = feet.iter().zip(&k2).map(|(&x, &v)| x - v * (0.5 * h)).collect();
        let k3 = at(&mid, &s3);
        let s4: Vec<Vec2> = feet.iter().zip(&k3).map(|(&x, &v)| x - v * h).collect();
        let k4 = at(a, &s4);
        for i in 0..feet.len() {
            feet[i] -= (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    let (lo, hi) = spec.bounds();
    let inside: Vec<bool> = feet.iter().map(|p| p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y).collect();
    let carried: Vec<f64> = feet
        .iter()
        .zip(&inside)
        .map(|(&p, &ok)| if ok { interpolate(omega0, p) } else { 0.0 })
        .collect();
    let (eps, profile) = (last.eps(), last.profile());
    let conv = Convolver::new(spec.nx, spec.ny, spec.cell_area(), Topology::Free);
    let h = spec.spacing;
    let kernel = conv.kernel_spectrum(|i, j| profile.density_eps(Vec2::new(i as f64 * h.x, j as f64 * h.y).norm(), eps));
    let smoothed = conv.convolve(&kernel, &carried);
    let blobs = reconstruct_vorticity(last, spec);
    let l1 = blobs
        .values()
        .iter()
        .zip(&smoothed)
        .zip(&inside)
        .filter(|(_, &ok)| ok)
        .map(|((a, b), _)| (a - b).abs())
        .sum::<f64>()
        * spec.cell_area();
    let excluded = inside.iter().filter(|&&ok| !ok).count();
    Ok(TransportComparison { t: last.t, l1, excluded_fraction: excluded as f64 / spec.len() as f64 })
}

/// Catmull–Rom bicubic interpolation, clamped at the grid edge.
fn interpolate(f: &ScalarField, p: Vec2) -> f64 {
    let spec = f.spec();
    let gx = (p.x - spec.origin.x) / spec.spacing.x;
    let gy = (p.y - spec.origin.y) / spec.spacing.y;
    let (ix, iy) = (gx.floor() as i64, gy.floor() as i64);
    let (tx, ty) = (gx - ix as f64, gy - iy as f64);
    let weights = |t: f64| {
        [
            0.5 * (-t * t * t + 2.0 * t * t - t),
            0.5 * (3.0 * t * t * t - 5.0 * t * t + 2.0),
            0.5 * (-3.0 * t * t * t + 4.0 * t * t + t),
            0.5 * (t * t * t - t * t),
        ]
    };
    let (wx, wy) = (weights(tx), weights(ty));
    let clamp = |i: i64, n: usize| i.clamp(0, n as i64 - 1) as usize;
    let mut s = 0.0;
    for (b, wyb) in wy.iter().enumerate() {
        let y = clamp(iy - 1 + b as i64, spec.ny);
        for (a, wxa) in wx.iter().enumerate() {
            let x = clamp(ix - 1 + a as i64, spec.nx);
            s += wxa * wyb * f.get(x, y);
        }
    }
    s
}
