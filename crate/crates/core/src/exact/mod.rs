//! Exact engine: everything derived from the correlation table of a function
//! on a small product space.

mod decomposition;
mod energy;
mod identities;
mod interpolation;
mod table;
mod talagrand;
mod tfamily;

pub use decomposition::{
    b_and_derivatives, covariance_b, jackknife_from_table, CovarianceDecomposition,
    DecompositionReport,
};
pub use energy::{energies_from_values, energy_cross_check, hoeffding_energies, HoeffdingEnergies};
pub use identities::verify_identities;
pub use interpolation::{interpolation_check, BernsteinPoly};
pub use table::{
    correlation_table, correlation_table_from_values, cross_table, CorrelationTable, CrossTable,
    StateIndexer,
};
pub use talagrand::{weak_talagrand_check, TalagrandReport};
pub use tfamily::{t_family, TFamily};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{CoordFunction, ProductSpace};

/// Tolerance for instances flagged exact (dyadic laws, integer values).
pub const EXACT_TOLERANCE: f64 = 1e-12;
/// Default relative tolerance in double precision.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactConfig {
    /// Cap on `Σ log2 |support_i|`.
    pub max_state_bits: f64,
    /// Overrides the automatic choice between the exact and default
    /// tolerances.
    pub tolerance: Option<f64>,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self {
            max_state_bits: 20.0,
            tolerance: None,
        }
    }
}

impl ExactConfig {
    pub fn tolerance_for(&self, exact: bool) -> f64 {
        self.tolerance.unwrap_or(if exact {
            EXACT_TOLERANCE
        } else {
            DEFAULT_TOLERANCE
        })
    }
}

/// Table, decomposition and identity report in one go.
pub fn analyze(
    space: &ProductSpace,
    f: &CoordFunction,
    cfg: &ExactConfig,
) -> Result<(
    CorrelationTable,
    DecompositionReport,
    crate::report::IdentityReport,
)> {
    let t = correlation_table(space, f, cfg)?;
    let r = b_and_derivatives(&t);
    let ids = verify_identities(&r, &t, cfg);
    Ok((t, r, ids))
}
