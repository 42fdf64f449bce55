//! Vortex-blob approximation: lattice initialization from mollified
//! initial vorticity, mollified Biot–Savart summation (direct or
//! treecode), RK4 transport of blob centres and the reconstructed fields.

mod ensemble;
mod fields;
mod init;
mod snapshot;
mod step;
mod tree;
mod velocity;

pub use ensemble::BlobEnsemble;
pub use fields::{blob_grid_fields, error_field_e, error_field_f, reconstruct_vorticity, BlobGridFields};
pub use init::{
    lattice_grid, mollify_initial, mollify_source, theoretical_h, tile_and_weigh, HCoupling,
    TheoreticalH, TileStats, VortexBlobParams, DROP_THRESHOLD,
};
pub use snapshot::{read_blob_snapshot, write_blob_snapshot};
pub use step::{auto_dt, step, BlobStepper, DtControl};
pub use tree::{BlobTree, TreeParams};
pub(crate) use velocity::check_zero_mean;
pub use velocity::{
    kinetic_energy_pairwise_direct, pairwise_energy_unchecked, velocity, velocity_direct,
    velocity_treecode, VelocityMethod,
};
