//! Executable consequences of sub-uncomputability: per-level
//! sub-incompressibility, pointwise refutation of candidate BB⁺ programs,
//! eventual domination, budget ladders and structural checks on the
//! language itself.
//!
//! Every report serializes to JSON with a `pass` flag.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::beaver::{bb_plus, natural, record_at, table_from_scan};
use crate::bits::{length_lex_cmp, Bits};
use crate::codec::{compose, is_valid, lit_program_u64, LString};
use crate::enumeration::Grammar;
use crate::error::{DomainError, Error};
use crate::omega::{weighted_sum, DyadicRational};
use crate::scan::{evaluate, first_at_least, par_fold, scan, ScanOptions};
use crate::submachine::{sub_run_lstring, Budget};
use crate::vm::VM_ID;

struct Natural<'a>(&'a BigUint);

impl Serialize for Natural<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        natural(self.0, s)
    }
}

fn naturals<S: serde::Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(Natural))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelCheck {
    pub n: usize,
    #[serde(serialize_with = "natural")]
    pub bb_plus: BigUint,
    /// Valid sentences of at most `n` bits.
    pub programs: u64,
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Frontier {
    pub len: usize,
    pub witness: Bits,
    #[serde(serialize_with = "natural")]
    pub value: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IncompressibilityReport {
    pub check: &'static str,
    pub n: usize,
    pub budget_id: String,
    #[serde(serialize_with = "natural")]
    pub bb_plus: BigUint,
    pub programs: u64,
    pub violations: u64,
    pub levels: Vec<LevelCheck>,
    pub cap: usize,
    pub frontier: Option<Frontier>,
    pub frontier_status: &'static str,
    pub pass: bool,
}

/// Checks `sub_run(w) < bb_plus(k)` for every level `k <= n` and every
/// valid `|w| <= k`, then looks for the shortest sentence longer than `n`
/// (up to `cap` bits) reaching `bb_plus(n)`.
pub fn check_sub_incompressibility(
    n: usize,
    budget: &Budget,
    cap: usize,
    opts: &ScanOptions<'_>,
) -> Result<IncompressibilityReport, Error> {
    if n == 0 {
        return Err(Error::Invalid("sub-incompressibility needs a size bound of at least 1".into()));
    }
    let s = scan(n, budget, opts)?;
    let records: Vec<_> = (0..=n).map(|k| record_at(&s, k)).collect();
    let thresholds: Vec<BigUint> = records.iter().map(|r| r.bb_plus.clone()).collect();

    // Independent second pass: each sentence is compared against every
    // level that contains it.
    let violations = par_fold(
        n,
        opts,
        || vec![0u64; n + 1],
        |acc, w| {
            let (entry, _) = evaluate(w, budget, opts.cache)?;
            for k in w.len()..=n {
                if entry.output >= thresholds[k] {
                    acc[k] += 1;
                }
            }
            Ok(())
        },
        |a, b| a.into_iter().zip(b).map(|(x, y)| x + y).collect(),
    )?;

    let levels: Vec<LevelCheck> = (1..=n)
        .map(|k| LevelCheck {
            n: k,
            bb_plus: thresholds[k].clone(),
            programs: records[k].tallies.total,
            violations: violations[k],
        })
        .collect();
    let total_violations = violations.iter().sum();

    let mut frontier = None;
    for len in n + 1..=cap {
        if let Some((witness, value)) = first_at_least(len, budget, &thresholds[n], opts)? {
            frontier = Some(Frontier { len, witness, value });
            break;
        }
    }
    let frontier_status = if frontier.is_some() { "found" } else { "frontier beyond cap" };
    let pass = total_violations == 0 && frontier.as_ref().is_none_or(|f| f.len > n);
    Ok(IncompressibilityReport {
        check: "sub_incompressibility",
        n,
        budget_id: budget.id(),
        bb_plus: thresholds[n].clone(),
        programs: records[n].tallies.total,
        violations: total_violations,
        levels,
        cap,
        frontier,
        frontier_status,
        pass,
    })
}

/// `P∘lit(n)`: the candidate applied to the literal program for `n`.
pub fn frame(candidate: &LString, n: u64) -> Result<LString, Error> {
    Ok(compose(candidate, &[lit_program_u64(n)])?)
}

/// Smallest `n0 <= cap` whose frame fits in `n0` bits.
pub fn find_n0(candidate: &LString, cap: u64) -> Result<(u64, LString), Error> {
    if !candidate.is_plain() {
        return Err(DomainError::HeadNotPlain.into());
    }
    for n0 in 0..=cap {
        let f = frame(candidate, n0)?;
        if f.len() as u64 <= n0 {
            return Ok((n0, f));
        }
    }
    Err(Error::CapTooSmall { cap, frame_len_at_cap: frame(candidate, cap)?.len() })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RefutationRecord {
    pub candidate: Bits,
    pub budget_id: String,
    pub n0: u64,
    pub frame: Bits,
    pub frame_len: usize,
    #[serde(serialize_with = "natural")]
    pub sub_value: BigUint,
    #[serde(serialize_with = "natural")]
    pub bb_plus_n0: BigUint,
    pub gap_ok: bool,
}

/// Shows that `candidate` does not compute BB⁺ at the first size `n0`
/// where its own frame is small enough to be counted by `bb_plus(n0)`.
pub fn refute_candidate(
    candidate: &LString,
    budget: &Budget,
    cap: u64,
    opts: &ScanOptions<'_>,
) -> Result<RefutationRecord, Error> {
    let (n0, f) = find_n0(candidate, cap)?;
    let sub_value = sub_run_lstring(&f, budget)?.value;
    let bb_plus_n0 = bb_plus(n0 as usize, budget, opts)?;
    let gap_ok = bb_plus_n0 > sub_value;
    Ok(RefutationRecord {
        candidate: candidate.bits().clone(),
        budget_id: budget.id(),
        n0,
        frame_len: f.len(),
        frame: f.into_bits(),
        sub_value,
        bb_plus_n0,
        gap_ok,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DominationRow {
    pub n: u64,
    pub frame_len: usize,
    #[serde(serialize_with = "natural")]
    pub sub_value: BigUint,
    #[serde(serialize_with = "natural")]
    pub bb_plus: BigUint,
    pub gap_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EventualDominationReport {
    pub check: &'static str,
    pub candidate: Bits,
    pub budget_id: String,
    pub n0: u64,
    pub cap: u64,
    pub rows: Vec<DominationRow>,
    pub pass: bool,
}

/// `bb_plus(n) > sub_run(P∘lit(n))` for every `n` from `n0` to `cap`.
pub fn check_eventual_domination(
    candidate: &LString,
    budget: &Budget,
    cap: u64,
    opts: &ScanOptions<'_>,
) -> Result<EventualDominationReport, Error> {
    let (n0, _) = find_n0(candidate, cap)?;
    let s = scan(cap as usize, budget, opts)?;
    let mut rows = Vec::new();
    for n in n0..=cap {
        let f = frame(candidate, n)?;
        let sub_value = sub_run_lstring(&f, budget)?.value;
        let bb_plus = record_at(&s, n as usize).bb_plus;
        let gap_ok = f.len() as u64 <= n && bb_plus > sub_value;
        rows.push(DominationRow { n, frame_len: f.len(), sub_value, bb_plus, gap_ok });
    }
    let pass = rows.iter().all(|r| r.gap_ok);
    Ok(EventualDominationReport {
        check: "eventual_domination",
        candidate: candidate.bits().clone(),
        budget_id: budget.id(),
        n0,
        cap,
        rows,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrefixViolation {
    pub prefix: Bits,
    pub sentence: Bits,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructuralReport {
    pub check: &'static str,
    pub n: usize,
    pub strings_checked: u64,
    pub valid: u64,
    pub prefix_violations: u64,
    pub first_violation: Option<PrefixViolation>,
    pub kraft_sum: DyadicRational,
    pub kraft_decimal: String,
    pub kraft_le_one: bool,
    /// Brute-force counts per length match the grammar's counts.
    pub enumeration_agrees: bool,
    pub pass: bool,
}

#[derive(Default)]
struct PrefixScan {
    valid: u64,
    violations: u64,
    first: Option<(Bits, Bits)>,
}

impl PrefixScan {
    fn merge(mut self, other: PrefixScan) -> PrefixScan {
        self.valid += other.valid;
        self.violations += other.violations;
        self.first = match (self.first, other.first) {
            (Some(a), Some(b)) => Some(if length_lex_cmp(&b.1, &a.1).is_lt() { b } else { a }),
            (a, b) => a.or(b),
        };
        self
    }
}

fn bits_of(x: u64, len: usize) -> Vec<bool> {
    (0..len).rev().map(|i| x >> i & 1 == 1).collect()
}

/// Filters every bit string of at most `n` bits through the parser, checks
/// that no valid string has a valid proper prefix, and sums the Kraft
/// weights exactly.
pub fn check_structural(n: usize) -> Result<StructuralReport, Error> {
    if n >= 40 {
        return Err(Error::Invalid(format!("brute-force structural check refuses n = {n}")));
    }
    let grammar = Grammar::new(n);
    let mut counts = Vec::with_capacity(n + 1);
    let mut total = PrefixScan::default();
    for len in 0..=n {
        let level = (0..1u64 << len)
            .into_par_iter()
            .fold(PrefixScan::default, |mut acc, x| {
                let w = bits_of(x, len);
                if is_valid(&w) {
                    acc.valid += 1;
                    for p in 0..len {
                        if is_valid(&w[..p]) {
                            acc.violations += 1;
                            let v = (Bits::from_slice(&w[..p]), Bits::from_vec(w.clone()));
                            acc = acc.merge(PrefixScan { valid: 0, violations: 0, first: Some(v) });
                        }
                    }
                }
                acc
            })
            .reduce(PrefixScan::default, PrefixScan::merge);
        counts.push(level.valid);
        total = total.merge(level);
    }
    let enumeration_agrees = counts
        .iter()
        .enumerate()
        .all(|(len, &c)| grammar.count_exact(len) == BigUint::from(c));
    let kraft_sum = weighted_sum(counts.iter().copied().enumerate());
    let kraft_le_one = kraft_sum <= DyadicRational::one();
    Ok(StructuralReport {
        check: "structural",
        n,
        strings_checked: (1u64 << (n + 1)) - 1,
        valid: total.valid,
        prefix_violations: total.violations,
        first_violation: total.first.map(|(prefix, sentence)| PrefixViolation { prefix, sentence }),
        kraft_decimal: kraft_sum.to_decimal(20),
        kraft_sum,
        kraft_le_one,
        enumeration_agrees,
        pass: total.violations == 0 && kraft_le_one && enumeration_agrees,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LadderRow {
    pub n: usize,
    /// One entry per budget, in ladder order.
    #[serde(serialize_with = "naturals")]
    pub bb: Vec<BigUint>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Separation {
    pub lower: String,
    pub upper: String,
    /// First `n` with a strict increase, if any.
    pub first_strict: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LadderReport {
    pub check: &'static str,
    pub n: usize,
    pub budgets: Vec<String>,
    pub rows: Vec<LadderRow>,
    pub separations: Vec<Separation>,
    pub pass: bool,
}

impl LadderReport {
    /// Plain-text table, one row per size bound.
    pub fn table(&self) -> String {
        let mut out = format!("n,{}\n", self.budgets.join(","));
        for r in &self.rows {
            let cols: Vec<String> = r.bb.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("{},{}\n", r.n, cols.join(",")));
        }
        out
    }
}

/// Verifies `budget_of(lower, w) <= budget_of(upper, w)` on every valid
/// `|w| <= n`, reporting the smallest offender.
pub fn check_budget_precondition(
    n: usize,
    lower: &Budget,
    upper: &Budget,
    opts: &ScanOptions<'_>,
) -> Result<(), Error> {
    par_fold(
        n,
        opts,
        || (),
        |_, w| {
            let s = crate::codec::parse(w)?;
            let lo = lower.budget_of(&s)?;
            let hi = upper.budget_of(&s)?;
            if lo > hi {
                return Err(Error::NotDominated {
                    w: s.bits().to_ascii(),
                    lhs: format!("{lo} ({lower})"),
                    rhs: format!("{hi} ({upper})"),
                });
            }
            Ok(())
        },
        |_, _| (),
    )
}

/// `bb(k, b_i) <= bb(k, b_{i+1})` for `k = 1..=n` along a ladder of
/// pointwise-ordered budgets.
pub fn check_budget_ladder(
    n: usize,
    budgets: &[Budget],
    opts: &ScanOptions<'_>,
) -> Result<LadderReport, Error> {
    if budgets.is_empty() {
        return Err(Error::Invalid("a budget ladder needs at least one budget".into()));
    }
    for pair in budgets.windows(2) {
        check_budget_precondition(n, &pair[0], &pair[1], opts)?;
    }
    let tables = budgets
        .iter()
        .map(|b| Ok(table_from_scan(&scan(n, b, opts)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    let rows: Vec<LadderRow> = (0..n)
        .map(|i| {
            let bb: Vec<BigUint> = tables.iter().map(|t| t[i].bb.clone()).collect();
            let holds = bb.windows(2).all(|p| p[0] <= p[1]);
            LadderRow { n: i + 1, bb, holds }
        })
        .collect();
    let separations = (0..budgets.len() - 1)
        .map(|j| Separation {
            lower: budgets[j].id(),
            upper: budgets[j + 1].id(),
            first_strict: rows.iter().find(|r| r.bb[j] < r.bb[j + 1]).map(|r| r.n),
        })
        .collect();
    let pass = rows.iter().all(|r| r.holds);
    Ok(LadderReport {
        check: "budget_domination",
        n,
        budgets: budgets.iter().map(Budget::id).collect(),
        rows,
        separations,
        pass,
    })
}

pub fn check_budget_domination(
    n: usize,
    lower: &Budget,
    upper: &Budget,
    opts: &ScanOptions<'_>,
) -> Result<LadderReport, Error> {
    check_budget_ladder(n, &[lower.clone(), upper.clone()], opts)
}

/// A check that may be blocked by a too-small cap; the blocking error is
/// reported instead of propagated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Attempt<T> {
    pub pass: bool,
    #[serde(flatten)]
    pub report: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl<T> Attempt<T> {
    fn from_result(r: Result<T, Error>, pass: impl Fn(&T) -> bool) -> Result<Attempt<T>, Error> {
        match r {
            Ok(t) => Ok(Attempt { pass: pass(&t), report: Some(t), error: None }),
            Err(e @ Error::CapTooSmall { .. }) => {
                Ok(Attempt { pass: false, report: None, error: Some(e.to_string()) })
            }
            Err(e) => Err(e),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub max_len: usize,
    pub budget: Budget,
    pub budget2: Option<Budget>,
    pub candidate: Option<LString>,
    pub cap: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub max_len: usize,
    pub budget_id: String,
    pub vm_id: &'static str,
    pub structural: StructuralReport,
    pub sub_incompressibility: IncompressibilityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refutation: Option<Attempt<RefutationRecord>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eventual_domination: Option<Attempt<EventualDominationReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget_domination: Option<LadderReport>,
    pub pass: bool,
}

pub fn verify(cfg: &VerifyConfig, opts: &ScanOptions<'_>) -> Result<VerifyReport, Error> {
    let structural = check_structural(cfg.max_len)?;
    let sub_incompressibility =
        check_sub_incompressibility(cfg.max_len.max(1), &cfg.budget, cfg.cap, opts)?;
    let (refutation, eventual_domination) = match &cfg.candidate {
        Some(p) => {
            let cap = cfg.cap as u64;
            let r = Attempt::from_result(refute_candidate(p, &cfg.budget, cap, opts), |r| {
                r.gap_ok && r.frame_len as u64 <= r.n0
            })?;
            let d = Attempt::from_result(check_eventual_domination(p, &cfg.budget, cap, opts), |d| d.pass)?;
            (Some(r), Some(d))
        }
        None => (None, None),
    };
    let budget_domination = match &cfg.budget2 {
        Some(b2) => Some(check_budget_domination(cfg.max_len, &cfg.budget, b2, opts)?),
        None => None,
    };
    let pass = structural.pass
        && sub_incompressibility.pass
        && refutation.as_ref().is_none_or(|a| a.pass)
        && eventual_domination.as_ref().is_none_or(|a| a.pass)
        && budget_domination.as_ref().is_none_or(|r| r.pass);
    Ok(VerifyReport {
        max_len: cfg.max_len,
        budget_id: cfg.budget.id(),
        vm_id: VM_ID,
        structural,
        sub_incompressibility,
        refutation,
        eventual_domination,
        budget_domination,
        pass,
    })
}
