//! Experiment orchestration: configuration files, initial-data presets,
//! single runs into run directories, refinement sweeps and the
//! `L (log L)^alpha` membership check of radial presets.

mod config;
mod membership;
mod presets;
mod run;
mod sweep;

pub use config::{key_spec, membership_config, HMode, KeySpec, RawConfig, RunConfig, KEYS};
pub use membership::{
    capped_modular, default_cap_schedule, verify_membership, Membership, MembershipVerdict, TracePoint, RATIO_TOL,
    SETTLE_TOL,
};
pub use presets::{Preset, PresetName, PresetParams, RadialDensity, CIRCULATION, PAIR_OFFSET};
pub use run::{run, run_observed, snapshot_times, RunOutcome, DIRECT_BELOW, MAX_BLOBS, MAX_INIT_CELLS};
pub use sweep::{refinement_sweep, sweep_key, SweepLevel, SweepResult, SweepVerdicts};
