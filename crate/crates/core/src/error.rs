//! Error taxonomy shared by the whole crate. The CLI maps these onto its
//! exit-code contract (parse errors, cap overruns, failed inequalities).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("resource cap exceeded: {what} needs {needed}, cap is {cap}")]
    Resource { what: String, needed: u128, cap: u128 },

    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("conditioning on a zero-probability event: {0}")]
    EmptyEvent(String),

    #[error("dominance violated: {0}")]
    Dominance(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Enumeration caps. These are configuration, not constants: every operation
/// that enumerates supports, subsets or LP cells checks the relevant cap and
/// raises a typed [`Error::Resource`] instead of degrading silently.
#[derive(Debug, Clone)]
pub struct Caps {
    /// Maximum ground-set size for subset enumeration (demand queries).
    pub demand_items: u32,
    /// Maximum number of LP cells (types x 2^n table entries).
    pub lp_cells: u64,
    /// Maximum number of full-support profiles enumerated at once.
    pub support_profiles: u64,
    /// Maximum number of price vectors tried by the item-pricing search.
    pub grid_vectors: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            demand_items: 20,
            lp_cells: 20_000,
            support_profiles: 200_000,
            grid_vectors: 1_000_000,
        }
    }
}

impl Caps {
    pub fn check(&self, what: &str, needed: u128, cap: u64) -> Result<()> {
        if needed > cap as u128 {
            Err(Error::Resource {
                what: what.to_string(),
                needed,
                cap: cap as u128,
            })
        } else {
            Ok(())
        }
    }
}
