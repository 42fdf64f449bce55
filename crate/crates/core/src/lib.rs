//! Solvers and verification diagnostics for the 2D incompressible Euler
//! equations in vorticity form with `L (log L)^alpha` initial vorticity.
//!
//! Three approximation routes are provided: a periodic pseudo-spectral
//! solver (inviscid, or viscous for the vanishing-viscosity route) and a
//! vortex-blob particle method with direct or treecode summation. The
//! `diagnostics` and `harness` modules turn runs into CSV reports.

pub mod error;
pub mod fft;
pub mod geom;
pub mod grid;
pub mod harness;
pub mod kernel;
pub mod orlicz;
pub mod quad;
pub mod blob;
pub mod diagnostics;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use geom::{Tensor2, Vec2};
pub use grid::{GridField, GridSpec, ScalarField, VectorField, VorticitySource};
pub use blob::BlobEnsemble;
pub use kernel::{BlobProfile, CutoffPair};
pub use orlicz::OrliczParams;
