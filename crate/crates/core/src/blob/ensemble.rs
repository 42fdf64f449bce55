use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::kernel::BlobProfile;

/// Blob centres, circulations, width and profile at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobEnsemble {
    positions: Vec<Vec2>,
    circulations: Vec<f64>,
    eps: f64,
    profile: BlobProfile,
    pub t: f64,
}

impl BlobEnsemble {
    pub fn new(positions: Vec<Vec2>, circulations: Vec<f64>, eps: f64, profile: BlobProfile) -> Result<Self> {
        if positions.len() != circulations.len() {
            return Err(Error::Data(format!(
                "{} positions but {} circulations",
                positions.len(),
                circulations.len()
            )));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Data(format!("blob width must be positive, got {eps}")));
        }
        if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
            return Err(Error::Data(format!("blob {i} has a non-finite position")));
        }
        if let Some(i) = circulations.iter().position(|g| !g.is_finite()) {
            return Err(Error::Data(format!("blob {i} has a non-finite circulation")));
        }
        Ok(BlobEnsemble { positions, circulations, eps, profile, t: 0.0 })
    }

    pub fn empty(eps: f64, profile: BlobProfile) -> Self {
        BlobEnsemble { positions: vec![], circulations: vec![], eps, profile, t: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn profile(&self) -> BlobProfile {
        self.profile
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    pub fn circulations(&self) -> &[f64] {
        &self.circulations
    }

    /// Replaces all positions, keeping circulations.
    pub(crate) fn set_positions(&mut self, p: Vec<Vec2>) {
        debug_assert_eq!(p.len(), self.circulations.len());
        self.positions = p;
    }

    pub fn with_positions(&self, p: Vec<Vec2>) -> Result<Self> {
        BlobEnsemble::new(p, self.circulations.clone(), self.eps, self.profile).map(|mut e| {
            e.t = self.t;
            e
        })
    }

    pub fn total_circulation(&self) -> f64 {
        self.circulations.iter().sum()
    }

    pub fn abs_circulation(&self) -> f64 {
        self.circulations.iter().map(|g| g.abs()).sum()
    }

    /// `sum Gamma_i X_i`.
    pub fn linear_impulse(&self) -> Vec2 {
        self.positions.iter().zip(&self.circulations).map(|(&p, &g)| p * g).sum()
    }

    /// `sum Gamma_i |X_i|^2`.
    pub fn angular_impulse(&self) -> f64 {
        self.positions.iter().zip(&self.circulations).map(|(p, g)| g * p.norm_sq()).sum()
    }

    /// Bounding box of the centres, or `None` when empty.
    pub fn bounding_box(&self) -> Option<(Vec2, Vec2)> {
        let first = *self.positions.first()?;
        Some(self.positions.iter().fold((first, first), |(lo, hi), p| {
            (Vec2::new(lo.x.min(p.x), lo.y.min(p.y)), Vec2::new(hi.x.max(p.x), hi.y.max(p.y)))
        }))
    }
}
