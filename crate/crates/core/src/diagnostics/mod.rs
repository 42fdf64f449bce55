//! Verification quantities computed from snapshots: energies, total
//! vorticity, structure functions, distances between runs, the residual
//! of the cutoff-split velocity identity and the transport comparison
//! for blob runs, plus the CSV report that collects them.

mod energy;
mod report;
mod serfati;
mod structure;
mod transport;

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

pub use energy::{
    cauchy_distance, kinetic_energy_grid, kinetic_energy_pairwise, mean_vorticity, CirculationSource, MeanVorticity,
    PAIRWISE_DIRECT_MAX, ZERO_MEAN_TOL,
};
pub use report::{format_number, DiagnosticsReport, ReportRow, REPORT_HEADER};
pub use serfati::{serfati_residual, SerfatiConfig, SerfatiResidual, SerfatiSnapshot};
pub use structure::structure_function;
pub use transport::{transport_comparison, TransportComparison};

/// Approximation route of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Inviscid spectral solver on smoothed data.
    Es,
    /// Viscous spectral solver.
    Vv,
    /// Vortex blobs.
    Vb,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Es => "ES",
            Method::Vv => "VV",
            Method::Vb => "VB",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ES" => Ok(Method::Es),
            "VV" => Ok(Method::Vv),
            "VB" => Ok(Method::Vb),
            other => Err(Error::Config(format!("unknown method {other:?}; expected ES, VV or VB"))),
        }
    }
}
