use std::ops::Sub;

use crate::blob::{check_zero_mean, kinetic_energy_pairwise_direct, BlobEnsemble, BlobTree, TreeParams};
use crate::error::Result;
use crate::grid::{same_grid, FieldValue, GridField, ScalarField, VectorField};

/// Relative size of the total circulation above which the kinetic energy
/// in the plane is treated as infinite.
pub const ZERO_MEAN_TOL: f64 = 1e-6;

/// Above this many blobs the pairwise energy is summed by the treecode.
pub const PAIRWISE_DIRECT_MAX: usize = 30_000;

/// Total circulation and the scale it is judged against.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanVorticity {
    /// `sum Gamma_i`, or the integral of the field.
    pub total: f64,
    /// `sum |Gamma_i|`, or the integral of `|w|`.
    pub total_abs: f64,
    /// Set when the total is not zero: the velocity then decays like
    /// `1/|x|` and the kinetic energy in the plane is infinite.
    pub warning: Option<String>,
}

impl MeanVorticity {
    fn new(total: f64, total_abs: f64) -> Self {
        let warning = (total.abs() > ZERO_MEAN_TOL * total_abs).then(|| {
            format!("total vorticity {total:e} is not zero; the kinetic energy in the plane is infinite")
        });
        MeanVorticity { total, total_abs, warning }
    }

    pub fn is_zero_mean(&self) -> bool {
        self.warning.is_none()
    }
}

/// Anything carrying a vorticity distribution.
pub trait CirculationSource {
    fn mean_vorticity(&self) -> MeanVorticity;
}

impl CirculationSource for BlobEnsemble {
    fn mean_vorticity(&self) -> MeanVorticity {
        MeanVorticity::new(self.total_circulation(), self.abs_circulation())
    }
}

impl CirculationSource for ScalarField {
    fn mean_vorticity(&self) -> MeanVorticity {
        let area = self.spec().cell_area();
        MeanVorticity::new(self.integral(), self.values().iter().map(|v| v.abs()).sum::<f64>() * area)
    }
}

/// `sum Gamma_i` for ensembles, the midpoint integral for fields.
pub fn mean_vorticity(source: &impl CirculationSource) -> MeanVorticity {
    source.mean_vorticity()
}

/// `(1/2) int |u|^2` by the midpoint rule.
pub fn kinetic_energy_grid(u: &VectorField) -> f64 {
    0.5 * u.values().iter().map(|v| v.norm_sq()).sum::<f64>() * u.spec().cell_area()
}

/// Kinetic energy from pair interactions of a mean-zero ensemble, summed
/// directly up to [`PAIRWISE_DIRECT_MAX`] blobs and by the treecode
/// beyond.
pub fn kinetic_energy_pairwise(e: &BlobEnsemble) -> Result<f64> {
    if e.len() <= PAIRWISE_DIRECT_MAX {
        return kinetic_energy_pairwise_direct(e);
    }
    check_zero_mean(e)?;
    Ok(BlobTree::build(e, TreeParams::default()).pair_energy())
}

/// L2 norm of `a - b` on their common grid.
pub fn cauchy_distance<T>(a: &GridField<T>, b: &GridField<T>) -> Result<f64>
where
    T: FieldValue + Sub<Output = T>,
{
    same_grid(a.spec(), b.spec())?;
    let s: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| {
            let d = (x - y).magnitude();
            d * d
        })
        .sum();
    Ok((s * a.spec().cell_area()).sqrt())
}
