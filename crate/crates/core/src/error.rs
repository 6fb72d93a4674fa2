use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitsError {
    #[error("invalid bit digit {found:?} at index {index}")]
    BadDigit { index: usize, found: char },
    #[error("malformed compact bit string {0:?} (expected <len>:<hex>)")]
    BadCompact(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// Input ended in the middle of a code.
    Truncated,
    /// A complete sentence was read but bits remain.
    Leftover,
    /// Bits are present but do not fit the grammar.
    Malformed,
}

/// Rejection of a bit string by the language grammar. `offset` is the bit
/// position at which parsing could not continue.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at bit {offset}: {what}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
    pub what: &'static str,
}

impl ParseError {
    pub(crate) fn truncated(offset: usize, what: &'static str) -> Self {
        ParseError { offset, kind: ParseErrorKind::Truncated, what }
    }

    pub(crate) fn malformed(offset: usize, what: &'static str) -> Self {
        ParseError { offset, kind: ParseErrorKind::Malformed, what }
    }

    pub(crate) fn leftover(offset: usize) -> Self {
        ParseError {
            offset,
            kind: ParseErrorKind::Leftover,
            what: "trailing bits after a complete sentence",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("delta code is defined only for n >= 1")]
    DeltaOfZero,
    #[error("composition needs at least one argument")]
    NoArguments,
    #[error("composition head must be a plain program")]
    HeadNotPlain,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BudgetError {
    #[error("malformed budget {0:?}")]
    BadSpec(String),
    #[error("budget not total within meta-fuel {meta_fuel} on w = {w}")]
    NotTotal { w: String, meta_fuel: u64 },
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("integrity error: conflicting records for key ({w}, {budget_id}, {vm_id})")]
    Conflict { w: String, budget_id: String, vm_id: String },
    #[error("{}:{line}: {msg}", path.display())]
    Load { path: PathBuf, line: usize, msg: String },
    #[error("shards disagree on vm id: {0:?} vs {1:?}")]
    VmMismatch(String, String),
    #[error("record for {found:?} offered to a store for {expected:?}")]
    WrongPartition { expected: String, found: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Umbrella error for the higher-level operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Bits(#[from] BitsError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Budget(#[from] BudgetError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("cap too small: no n0 <= {cap} admits the frame (frame length at cap is {frame_len_at_cap})")]
    CapTooSmall { cap: u64, frame_len_at_cap: usize },
    #[error("budget precondition violated on w = {w}: {lhs} > {rhs}")]
    NotDominated { w: String, lhs: String, rhs: String },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
