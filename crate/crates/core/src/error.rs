use thiserror::Error;

use crate::bits::BitString;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("string {string} has length {len}, beyond weight domain depth {depth}")]
    DomainDepthExceeded {
        string: BitString,
        len: usize,
        depth: usize,
    },

    #[error("weight table has no entry for {0}")]
    MissingWeight(BitString),

    #[error("weight for {0} is not positive")]
    NonPositiveWeight(BitString),

    #[error("weight function is not in integer-exponent mode (at {0})")]
    NotIntegerExponent(BitString),

    #[error("convexity violated at {0}: w(s) > w(s0) + w(s1)")]
    ConvexityViolation(BitString),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("bounds too loose: {0}")]
    BoundsTooLoose(String),

    #[error("tree family too short: tree {needed} required")]
    FamilyTooShort { needed: usize },

    #[error("no feasible rational in band at {0}")]
    EmptyBand(BitString),

    #[error("request {index} unservable: running Kraft sum {running_sum} exceeds 1")]
    KraftExhausted { index: usize, running_sum: String },

    #[error("functional table is not monotone: {0} vs {1}")]
    NotMonotone(BitString, BitString),

    #[error("internal invariant failed: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
