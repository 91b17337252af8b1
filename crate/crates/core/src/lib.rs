//! Exact-arithmetic laboratory for revenue maximization with a single
//! combinatorial buyer whose valuation is subadditive over independent
//! items. The crate computes the optimal mechanism's revenue via the
//! lottery-menu LP, the simple-mechanism benchmarks (item pricing, grand
//! bundling, and the quantile proxy), the core-tail cutoff with its verified
//! inequality chain, concentration and approximate-monotonicity checks, and
//! a replica-surrogate reduction for multi-bidder BIC mechanisms.
//!
//! All values and probabilities are exact rationals; the only irrational
//! constants (logarithms and real powers) are handled as certified rational
//! enclosures with directed rounding, so every pass/fail verdict is sound.

pub mod bic;
pub mod concentration;
pub mod core_tail;
pub mod dist;
pub mod error;
pub mod gen;
pub mod interval;
pub mod items;
pub mod matching;
pub mod monotonicity;
pub mod optimal;
pub mod rat;
pub mod simple;
pub mod simplex;
pub mod typespace;
pub mod valuation;

pub use dist::{myerson_one_dim, rev_q, OneDimDist, QuantilePrice};
pub use error::{Caps, Error, Result};
pub use items::ItemSet;
pub use rat::Rat;
pub use typespace::{TypeEntry, TypeSpace};
pub use valuation::{PrivateInfo, PrivateInfoDist, ValClass, Valuation, ValuationSpec};
