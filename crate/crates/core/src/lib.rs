//! Cycles of gaps among the generators of Z mod N.
//!
//! Removing the multiples of each prime in turn leaves, at every stage,
//! the generators (totatives) of Z mod p#, and the gaps between them form
//! a cycle that the next prime refines by concatenation and closure. This
//! crate builds those cycles stage by stage, censuses their driving terms
//! (runs of consecutive gaps summing to a target), and evolves the census
//! counts across stages by exact recurrence — arbitrary precision
//! throughout, with closed forms for the limits the ratios approach.
//!
//! Quick tour:
//!
//! ```
//! use pgc_core::{census, Cycle};
//!
//! let c30 = Cycle::primorial(5).unwrap();
//! assert_eq!(c30.gaps_u64().collect::<Vec<_>>(), [6, 4, 2, 4, 2, 4, 6, 2]);
//!
//! let table = census(&c30, 10, 8);
//! assert_eq!(table.count(6, 2), 4u32.into());
//! ```
//!
//! Cycles persist to `.pgc` snapshot files with a checksummed fixed-width
//! format, and extensions can stream into a sink (census, max-gap scan,
//! or anything implementing [`GapSink`]) so a stage need never be
//! materialized to be measured.

pub mod census;
pub mod dynamics;
pub mod error;
pub mod gapcycle;
pub mod numtheory;

pub use census::{
    census, closure_audit, first_occurrence_stage, max_gap, max_gap_by_stage, CensusSink,
    ClosureAudit, DrivingTermTable, MaxGapSink,
};
pub use dynamics::{
    advance_counts, advance_counts_to, asymptotic_from_table, decimal_string,
    predict_vs_construct, stage_ratio_sum, total_driving_terms, AdvanceReport,
    DiscrepancyReport, RatioTable,
};
pub use error::{Error, Result};
pub use gapcycle::{
    read_snapshot, write_snapshot, CollectSink, Cycle, GapCycle, GapSink, GapWord,
    SnapshotHeader, StreamSummary, ValidationReport,
};
pub use numtheory::{
    convergence_factor, hl_ratio, is_prime, next_prime_after, primes_up_to, radical,
    FactoredInteger,
};

/// Exact rational scalar used for every ratio in the crate.
pub type ExactRational = num_rational::BigRational;

/// Exact unsigned integer scalar used for every count in the crate.
pub type CountInt = num_bigint::BigUint;

/// Gap cycle stored at 1 byte per gap (enough through every primorial
/// stage a desk can hold; the 31# stage's largest gap is 58).
pub type GapCycle8 = GapCycle<u8>;

/// Gap cycle stored at 2 bytes per gap.
pub type GapCycle16 = GapCycle<u16>;

/// Gap cycle stored at 4 bytes per gap.
pub type GapCycle32 = GapCycle<u32>;
