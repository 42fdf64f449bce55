use std::f64::consts::PI;

use rayon::prelude::*;

use super::tree::{BlobTree, TreeParams};
use super::BlobEnsemble;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::kernel::{BlobProfile, PairFactor};

/// How blob-induced velocities are summed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityMethod {
    Direct,
    Tree(TreeParams),
}

impl VelocityMethod {
    /// Direct below `threshold` blobs, treecode with `params` above.
    pub fn auto(n: usize, threshold: usize, params: TreeParams) -> Self {
        if n < threshold {
            VelocityMethod::Direct
        } else {
            VelocityMethod::Tree(params)
        }
    }
}

/// Velocity at one target from the blobs in `range`, skipping index `skip`.
#[inline]
pub(crate) fn direct_sum(
    target: Vec2,
    pos: &[Vec2],
    gam: &[f64],
    eps: f64,
    profile: BlobProfile,
    skip: Option<usize>,
) -> Vec2 {
    let factor = PairFactor::new(eps, profile);
    let mut ux = 0.0;
    let mut uy = 0.0;
    for (j, (p, g)) in pos.iter().zip(gam).enumerate() {
        if Some(j) == skip {
            continue;
        }
        let dx = target.x - p.x;
        let dy = target.y - p.y;
        let f = g * factor.at(dx * dx + dy * dy);
        ux -= dy * f;
        uy += dx * f;
    }
    Vec2::new(ux, uy)
}

/// Exact `u(x) = sum_i Gamma_i K_eps(x - X_i)` at every target.
pub fn velocity_direct(e: &BlobEnsemble, targets: &[Vec2]) -> Vec<Vec2> {
    targets
        .par_iter()
        .map(|&x| direct_sum(x, e.positions(), e.circulations(), e.eps(), e.profile(), None))
        .collect()
}

/// Treecode velocities with opening angle `theta` and default expansion
/// order and leaf size.
pub fn velocity_treecode(e: &BlobEnsemble, targets: &[Vec2], theta: f64) -> Vec<Vec2> {
    let params = TreeParams { theta, ..TreeParams::default() };
    BlobTree::build(e, params).velocities(targets)
}

pub fn velocity(e: &BlobEnsemble, targets: &[Vec2], method: VelocityMethod) -> Vec<Vec2> {
    match method {
        VelocityMethod::Direct => velocity_direct(e, targets),
        VelocityMethod::Tree(p) => BlobTree::build(e, p).velocities(targets),
    }
}

/// `-(1/4 pi) sum_i sum_j Gamma_i Gamma_j G(|X_i - X_j|)` by direct
/// summation, without the zero-mean gate. For nonzero total circulation
/// the value depends on the origin of the logarithm and is not a kinetic
/// energy.
pub fn pairwise_energy_unchecked(e: &BlobEnsemble) -> f64 {
    let pos = e.positions();
    let gam = e.circulations();
    let (eps, profile) = (e.eps(), e.profile());
    let self_g = profile.self_interaction(eps);
    let total: f64 = (0..pos.len())
        .into_par_iter()
        .map(|i| {
            let mut s = 0.5 * gam[i] * gam[i] * self_g;
            for j in (i + 1)..pos.len() {
                s += gam[i] * gam[j] * profile.log_interaction_sq((pos[i] - pos[j]).norm_sq(), eps);
            }
            s
        })
        .sum();
    -total / (2.0 * PI)
}

/// Checks the zero-mean condition for finite kinetic energy.
pub(crate) fn check_zero_mean(e: &BlobEnsemble) -> Result<()> {
    let total = e.total_circulation();
    let abs = e.abs_circulation();
    if total.abs() > 1e-6 * abs {
        return Err(Error::Domain(format!(
            "total circulation {total:e} is not zero (|sum| / sum|G| = {:e}); the kinetic energy is infinite",
            total.abs() / abs
        )));
    }
    Ok(())
}

/// Kinetic energy `(1/2) int |u_eps|^2` from pair interactions.
pub fn kinetic_energy_pairwise_direct(e: &BlobEnsemble) -> Result<f64> {
    check_zero_mean(e)?;
    Ok(pairwise_energy_unchecked(e))
}
