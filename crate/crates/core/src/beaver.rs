//! Busy Beaver and Busy Beaver Plus over a time-bounded submachine.
//!
//! `BB_{P_T}(N)` is the largest value `U_{P_T}(w)` over every valid `w`
//! with `|w| <= N` (timeouts contribute their value 0), and
//! `BB⁺_{P_T}(N) = BB_{P_T}(N) + 1`. An empty enumeration gives `BB = 0`.

use std::fmt::Write as _;

use num_bigint::BigUint;
use serde::Serialize;

use crate::bits::Bits;
use crate::error::Error;
use crate::scan::{scan, LevelStats, Scan, ScanOptions};
use crate::submachine::Budget;
use crate::vm::VM_ID;

pub const CSV_HEADER: &str = "n,bb,bb_plus,witness_len,witness_bits,halted,timed_out,total_programs";

/// Naturals go out as JSON numbers when they fit in 64 bits and as decimal
/// strings otherwise.
pub(crate) fn natural<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    match u64::try_from(v) {
        Ok(x) => s.serialize_u64(x),
        Err(_) => s.serialize_str(&v.to_string()),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tallies {
    pub total: u64,
    pub halted: u64,
    pub timed_out: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BBRecord {
    pub n: usize,
    pub budget_id: String,
    #[serde(serialize_with = "natural")]
    pub bb: BigUint,
    #[serde(serialize_with = "natural")]
    pub bb_plus: BigUint,
    pub witness: Option<Bits>,
    pub tallies: Tallies,
    pub vm_id: String,
}

impl BBRecord {
    pub fn csv_row(&self) -> String {
        let (len, bits) = match &self.witness {
            Some(w) => (w.len(), w.to_ascii()),
            None => (0, String::new()),
        };
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n, self.bb, self.bb_plus, len, bits, self.tallies.halted, self.tallies.timed_out, self.tallies.total
        )
    }
}

/// Cumulative records `n = 1..=max_len` from a scan.
pub fn table_from_scan(scan: &Scan) -> Vec<BBRecord> {
    let mut acc = LevelStats::default();
    let mut out = Vec::with_capacity(scan.max_len);
    for (n, level) in scan.levels.iter().enumerate() {
        acc = acc.merge(level.clone());
        if n >= 1 {
            out.push(record(n, &scan.budget_id, &acc));
        }
    }
    out
}

fn record(n: usize, budget_id: &str, acc: &LevelStats) -> BBRecord {
    BBRecord {
        n,
        budget_id: budget_id.to_string(),
        bb: acc.best.clone(),
        bb_plus: &acc.best + 1u32,
        witness: acc.witness.clone(),
        tallies: Tallies { total: acc.total(), halted: acc.halted, timed_out: acc.timed_out },
        vm_id: VM_ID.to_string(),
    }
}

/// Record for size bound `n` read off a scan that reached at least `n`.
pub fn record_at(scan: &Scan, n: usize) -> BBRecord {
    assert!(n <= scan.max_len, "scan to {} cannot answer n = {n}", scan.max_len);
    let acc = scan.levels[..=n].iter().cloned().fold(LevelStats::default(), LevelStats::merge);
    record(n, &scan.budget_id, &acc)
}

pub fn bb(n: usize, budget: &Budget, opts: &ScanOptions<'_>) -> Result<BBRecord, Error> {
    Ok(record_at(&scan(n, budget, opts)?, n))
}

pub fn bb_plus(n: usize, budget: &Budget, opts: &ScanOptions<'_>) -> Result<BigUint, Error> {
    Ok(bb(n, budget, opts)?.bb_plus)
}

pub fn bb_table(n_max: usize, budget: &Budget, opts: &ScanOptions<'_>) -> Result<Vec<BBRecord>, Error> {
    Ok(table_from_scan(&scan(n_max, budget, opts)?))
}

pub fn to_csv(records: &[BBRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

pub fn to_json(records: &[BBRecord]) -> String {
    serde_json::to_string_pretty(records).expect("records serialize") + "\n"
}
