//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty prime range: bound {0} is below 2")]
    EmptyRange(u64),

    #[error("0 has no prime factorization")]
    ZeroFactorization,

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("gap {0} is odd; even gaps are required here")]
    OddGap(u64),

    #[error("gap {0} is below 2")]
    GapTooSmall(u64),

    #[error("convergence product cannot start at {0}; factors are positive only for primes above 3")]
    ConvergenceStart(u64),

    #[error("{q} divides the modulus; this operation requires q coprime to N")]
    DividesModulus { q: u64 },

    #[error("bad snapshot magic {found:?}")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported snapshot version {0}")]
    BadVersion(u8),

    #[error("unsupported gap width {0} (must be 1, 2 or 4)")]
    BadGapWidth(u8),

    #[error("snapshot checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    ChecksumMismatch { stored: u64, computed: u64 },

    #[error("phi mismatch: {0}")]
    PhiMismatch(String),

    #[error("malformed snapshot: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("stream ended after {got} gaps; {expected} were declared")]
    Truncated { got: u64, expected: u64 },

    #[error("sink aborted after {emitted} gaps (sum {sum}, {closures} closures)")]
    SinkAborted {
        emitted: u64,
        sum: u64,
        closures: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{p_next} is not the prime successor of stage {stage}")]
    NonSuccessorPrime { stage: u64, p_next: u64 },

    #[error("row g={g} is not complete at j_max={j_max}")]
    IncompleteRow { g: u64, j_max: usize },

    #[error("modulus {0} is not a primorial")]
    NotPrimorial(String),

    #[error("resource guard exceeded: {what} needs {needed}, limit is {limit}")]
    ResourceGuard {
        what: &'static str,
        needed: u64,
        limit: u64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
