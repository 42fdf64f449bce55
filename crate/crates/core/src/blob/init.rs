use std::collections::BTreeMap;

use super::BlobEnsemble;
use crate::error::{Error, Result};
use crate::fft::{Convolver, Topology};
use crate::geom::Vec2;
use crate::grid::{GridSpec, ScalarField, VorticitySource};
use crate::kernel::BlobProfile;

/// Blobs with `|Gamma| < DROP_THRESHOLD * max |Gamma|` are discarded.
pub const DROP_THRESHOLD: f64 = 1e-14;

/// How the lattice spacing follows the blob width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HCoupling {
    /// `h` given directly.
    Manual(f64),
    /// `h = c eps^q`.
    Practical { c: f64, q: f64 },
    /// `h = eps^4 / exp(C1 eps^-2 |omega_0|_1 T)`.
    TheoreticalA1,
    /// `h = C1 eps^6 exp(-C0 eps^-2)`.
    TheoreticalA2,
}

/// Which of the two theoretical couplings to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoreticalH {
    A1,
    A2,
}

/// Evaluates a theoretical lattice spacing. Returns the value and a
/// warning when it is below `1e-12`.
pub fn theoretical_h(eps: f64, mode: TheoreticalH, c0: f64, c1: f64, l1_norm: f64, t_end: f64) -> (f64, Option<String>) {
    let ln_h = match mode {
        TheoreticalH::A1 => 4.0 * eps.ln() - c1 * l1_norm * t_end / (eps * eps),
        TheoreticalH::A2 => c1.ln() + 6.0 * eps.ln() - c0 / (eps * eps),
    };
    let h = ln_h.exp();
    let warning = (h < 1e-12).then(|| {
        format!("theoretical lattice spacing h = {h:e} (log h = {ln_h:.3}) at eps = {eps} is not runnable")
    });
    (h, warning)
}

/// Blob-method discretization parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct VortexBlobParams {
    pub eps: f64,
    /// Width of the initial-data mollifier.
    pub delta: f64,
    /// Lattice spacing.
    pub h: f64,
    pub coupling: HCoupling,
    pub c0: f64,
    pub c1: f64,
    /// Exponent in `delta = eps^sigma`.
    pub sigma: f64,
    pub profile: BlobProfile,
}

impl VortexBlobParams {
    /// Resolves `h` and `delta` from `eps`. `l1_norm` and `t_end` feed the
    /// first theoretical coupling. Returns warnings alongside.
    #[allow(clippy::too_many_arguments)]
    pub fn resolve(
        eps: f64,
        coupling: HCoupling,
        sigma: f64,
        c0: f64,
        c1: f64,
        l1_norm: f64,
        t_end: f64,
        profile: BlobProfile,
    ) -> Result<(Self, Vec<String>)> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Config(format!("eps must lie in (0, 1), got {eps}")));
        }
        if !(sigma > 0.0) {
            return Err(Error::Config(format!("delta exponent must be positive, got {sigma}")));
        }
        let mut warnings = Vec::new();
        let h = match coupling {
            HCoupling::Manual(h) => h,
            HCoupling::Practical { c, q } => {
                let h = c * eps.powf(q);
                if h > eps {
                    return Err(Error::Config(format!(
                        "lattice spacing h = {h} exceeds eps = {eps}: blobs would not overlap"
                    )));
                }
                h
            }
            HCoupling::TheoreticalA1 | HCoupling::TheoreticalA2 => {
                let mode = if coupling == HCoupling::TheoreticalA1 { TheoreticalH::A1 } else { TheoreticalH::A2 };
                let (h, w) = theoretical_h(eps, mode, c0, c1, l1_norm, t_end);
                warnings.extend(w);
                h
            }
        };
        if !(h > 0.0) {
            return Err(Error::Config(format!("lattice spacing must be positive, got {h:e}")));
        }
        if sigma >= 1.0 / 7.0 {
            warnings.push(format!(
                "delta = eps^{sigma}: exponent outside (0, 1/7), the regime of the convergence estimates"
            ));
        }
        let delta = eps.powf(sigma);
        Ok((VortexBlobParams { eps, delta, h, coupling, c0, c1, sigma, profile }, warnings))
    }
}

/// Normalized discrete mollifier stencil of radius `delta` on `spec`'s
/// spacing, as a function of the integer offset.
fn stencil(delta: f64, spacing: Vec2) -> impl Fn(i64, i64) -> f64 {
    let rx = (delta / spacing.x).floor() as i64;
    let ry = (delta / spacing.y).floor() as i64;
    let weight = move |i: i64, j: i64| -> f64 {
        if delta <= 0.0 {
            return if i == 0 && j == 0 { 1.0 } else { 0.0 };
        }
        let r = Vec2::new(i as f64 * spacing.x, j as f64 * spacing.y).norm() / delta;
        BlobProfile::Bump.density(r)
    };
    let mut total = 0.0;
    for j in -ry..=ry {
        for i in -rx..=rx {
            total += weight(i, j);
        }
    }
    move |i, j| {
        if i.abs() > rx || j.abs() > ry {
            0.0
        } else {
            weight(i, j) / total
        }
    }
}

fn convolve_stencil(field: &ScalarField, delta: f64) -> ScalarField {
    let spec = *field.spec();
    let conv = Convolver::new(spec.nx, spec.ny, 1.0, Topology::Free);
    let k = conv.kernel_spectrum(stencil(delta, spec.spacing));
    let values = conv.convolve(&k, field.values());
    ScalarField::from_raw(spec, values)
}

/// Mollifies a compactly supported grid field with the bump `j_delta`,
/// returning it on the grid grown by a `2 delta` margin.
pub fn mollify_initial(omega0: &ScalarField, delta: f64) -> Result<ScalarField> {
    if !(delta >= 0.0) {
        return Err(Error::Config(format!("mollifier width must be nonnegative, got {delta}")));
    }
    let spec = *omega0.spec();
    let max = omega0.max_magnitude();
    let edge = (0..spec.nx)
        .flat_map(|i| [omega0.get(i, 0), omega0.get(i, spec.ny - 1)])
        .chain((0..spec.ny).flat_map(|j| [omega0.get(0, j), omega0.get(spec.nx - 1, j)]))
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if edge > 1e-12 * max {
        return Err(Error::Config(format!(
            "initial vorticity reaches the grid edge (|edge| = {edge:e}); support escapes the grid"
        )));
    }
    let mx = (2.0 * delta / spec.spacing.x).ceil() as usize;
    let my = (2.0 * delta / spec.spacing.y).ceil() as usize;
    let big = GridSpec::new(
        spec.origin - Vec2::new(mx as f64 * spec.spacing.x, my as f64 * spec.spacing.y),
        spec.spacing,
        spec.nx + 2 * mx,
        spec.ny + 2 * my,
    )?;
    let mut values = vec![0.0; big.len()];
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            values[(j + my) * big.nx + i + mx] = omega0.get(i, j);
        }
    }
    Ok(convolve_stencil(&ScalarField::from_raw(big, values), delta))
}

/// Samples an analytic source on `spec` and mollifies it with `j_delta`.
/// The grid must contain the support grown by `delta`.
pub fn mollify_source(src: &dyn VorticitySource, delta: f64, spec: GridSpec) -> Result<ScalarField> {
    let (lo, hi) = src.support_box();
    let (glo, ghi) = spec.cell_bounds();
    if lo.x - delta < glo.x || lo.y - delta < glo.y || hi.x + delta > ghi.x || hi.y + delta > ghi.y {
        return Err(Error::Config(format!(
            "support box [{:?}, {:?}] grown by delta = {delta} escapes the grid [{:?}, {:?}]",
            lo, hi, glo, ghi
        )));
    }
    let sampled = ScalarField::from_fn(spec, |x| src.cell_average(x, spec.spacing))?;
    Ok(convolve_stencil(&sampled, delta))
}

/// Fine grid aligned with the lattice `offset + h Z^2`: each lattice square
/// holds `m x m` cells. Covers `[lo, hi]` grown by `margin`.
pub fn lattice_grid(lo: Vec2, hi: Vec2, h: f64, m: usize, offset: Vec2, margin: f64) -> Result<GridSpec> {
    if !(h > 0.0) || m == 0 {
        return Err(Error::Config(format!("lattice needs h > 0 and m >= 1, got h = {h}, m = {m}")));
    }
    let dx = h / m as f64;
    // cell k spans offset + [k dx, (k+1) dx)
    let k0x = ((lo.x - margin - offset.x) / h).floor() as i64 * m as i64;
    let k1x = ((hi.x + margin - offset.x) / h).ceil() as i64 * m as i64;
    let k0y = ((lo.y - margin - offset.y) / h).floor() as i64 * m as i64;
    let k1y = ((hi.y + margin - offset.y) / h).ceil() as i64 * m as i64;
    GridSpec::new(
        Vec2::new(offset.x + (k0x as f64 + 0.5) * dx, offset.y + (k0y as f64 + 0.5) * dx),
        Vec2::new(dx, dx),
        (k1x - k0x) as usize,
        (k1y - k0y) as usize,
    )
}

/// Bookkeeping from [`tile_and_weigh`].
#[derive(Debug, Clone, PartialEq)]
pub struct TileStats {
    /// Lattice squares that received any vorticity.
    pub squares: usize,
    /// Blobs removed by the drop threshold.
    pub dropped: usize,
    /// Absolute circulation threshold used.
    pub threshold: f64,
}

/// One blob per lattice square `offset + h ([i, i+1) x [j, j+1))`, with
/// circulation equal to the cell-quadrature integral of the field over the
/// square. Each grid cell is assigned to the square holding its centre.
pub fn tile_and_weigh(
    omega: &ScalarField,
    h: f64,
    offset: Vec2,
    eps: f64,
    profile: BlobProfile,
    max_blobs: usize,
) -> Result<(BlobEnsemble, TileStats)> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("lattice spacing must be positive, got {h}")));
    }
    let spec = omega.spec();
    let area = spec.cell_area();
    let mut squares: BTreeMap<(i64, i64), f64> = BTreeMap::new();
    for (idx, &w) in omega.values().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let c = spec.node_at(idx);
        let key = (((c.x - offset.x) / h).floor() as i64, ((c.y - offset.y) / h).floor() as i64);
        *squares.entry(key).or_insert(0.0) += w * area;
    }
    let gmax = squares.values().fold(0.0f64, |m, g| m.max(g.abs()));
    let threshold = DROP_THRESHOLD * gmax;
    let n_squares = squares.len();
    let kept: Vec<((i64, i64), f64)> = squares.into_iter().filter(|(_, g)| g.abs() >= threshold && *g != 0.0).collect();
    if kept.len() > max_blobs {
        return Err(Error::Resource(format!(
            "{} blobs exceed the cap of {max_blobs}",
            kept.len()
        )));
    }
    let positions = kept
        .iter()
        .map(|((i, j), _)| Vec2::new(offset.x + (*i as f64 + 0.5) * h, offset.y + (*j as f64 + 0.5) * h))
        .collect();
    let gammas = kept.iter().map(|(_, g)| *g).collect();
    let stats = TileStats { squares: n_squares, dropped: n_squares - kept.len(), threshold };
    Ok((BlobEnsemble::new(positions, gammas, eps, profile)?, stats))
}
