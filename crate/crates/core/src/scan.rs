//! Parallel exhaustive evaluation of the submachine over every valid
//! sentence up to a length bound.
//!
//! Work is split into prefix shards; each shard folds into a per-length
//! summary and the summaries are merged with associative, commutative
//! operations, so results do not depend on the worker count.

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::bits::{length_lex_cmp, Bits};
use crate::codec;
use crate::enumeration::{shard_cover, Grammar};
use crate::error::Error;
use crate::store::{Entry, Outcome, Partition, RunRecord};
use crate::submachine::{sub_run_lstring, Budget};
use crate::vm::VM_ID;

pub const DEFAULT_SHARD_DEPTH: usize = 10;

#[derive(Debug, Clone, Copy)]
pub struct ScanOptions<'a> {
    /// Worker threads; 1 runs on the calling thread.
    pub jobs: usize,
    pub shard_depth: usize,
    /// Previously computed results for this budget under the current vm.
    pub cache: Option<&'a Partition>,
    /// Collect results missing from the cache into `Scan::new_records`.
    pub record_new: bool,
}

impl Default for ScanOptions<'_> {
    fn default() -> Self {
        ScanOptions { jobs: 1, shard_depth: DEFAULT_SHARD_DEPTH, cache: None, record_new: false }
    }
}

impl<'a> ScanOptions<'a> {
    pub fn with_jobs(jobs: usize) -> Self {
        ScanOptions { jobs, ..Default::default() }
    }
}

/// Summary of all sentences of one exact length.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LevelStats {
    /// Largest submachine value seen (0 when there are no sentences).
    pub best: BigUint,
    /// Length-lex first sentence attaining `best`.
    pub witness: Option<Bits>,
    pub halted: u64,
    pub timed_out: u64,
}

impl LevelStats {
    pub fn total(&self) -> u64 {
        self.halted + self.timed_out
    }

    pub fn observe(&mut self, w: &[bool], value: &BigUint, halted: bool) {
        if halted {
            self.halted += 1;
        } else {
            self.timed_out += 1;
        }
        let better = match &self.witness {
            None => true,
            Some(cur) => {
                *value > self.best || (*value == self.best && length_lex_cmp(w, cur).is_lt())
            }
        };
        if better {
            self.best = value.clone();
            self.witness = Some(Bits::from_slice(w));
        }
    }

    pub fn merge(mut self, other: LevelStats) -> LevelStats {
        self.halted += other.halted;
        self.timed_out += other.timed_out;
        if let Some(w) = other.witness {
            let better = match &self.witness {
                None => true,
                Some(cur) => other.best > self.best || (other.best == self.best && w < *cur),
            };
            if better {
                self.best = other.best;
                self.witness = Some(w);
            }
        }
        self
    }
}

/// Result of one exhaustive scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scan {
    pub max_len: usize,
    pub budget_id: String,
    /// Indexed by exact sentence length, `0..=max_len`.
    pub levels: Vec<LevelStats>,
    /// Results computed during this scan that were not in the cache,
    /// length-lex ordered.
    pub new_records: Vec<RunRecord>,
}

/// Submachine evaluation of a raw sentence, consulting the cache first.
pub(crate) fn evaluate(
    w: &[bool],
    budget: &Budget,
    cache: Option<&Partition>,
) -> Result<(Entry, bool), Error> {
    if let Some(entry) = cache.and_then(|c| c.get(&Bits::from_slice(w))) {
        return Ok((entry.clone(), false));
    }
    let s = codec::parse(w)?;
    let r = sub_run_lstring(&s, budget)?;
    let outcome = if r.halted() { Outcome::Halted } else { Outcome::TimedOut };
    Ok((Entry { outcome, output: r.value, steps: r.outcome.steps() }, true))
}

/// Folds `visit` over every valid sentence of at most `max_len` bits, in
/// parallel over shards. On failure the error for the length-lex smallest
/// failing sentence is returned, independent of scheduling.
pub fn par_fold<T, V, M>(
    max_len: usize,
    opts: &ScanOptions<'_>,
    init: impl Fn() -> T + Sync,
    visit: V,
    merge: M,
) -> Result<T, Error>
where
    T: Send,
    V: Fn(&mut T, &[bool]) -> Result<(), Error> + Sync,
    M: Fn(T, T) -> T + Sync,
{
    let grammar = Grammar::new(max_len);
    let shards = shard_cover(&grammar, max_len, opts.shard_depth);
    let run_shard = |shard: &crate::enumeration::EnumerationShard| -> Result<T, (Bits, Error)> {
        let mut acc = init();
        let mut failure: Option<(Bits, Error)> = None;
        grammar.visit_shard(shard, &mut |w| {
            if let Err(e) = visit(&mut acc, w) {
                if failure.as_ref().is_none_or(|(fw, _)| length_lex_cmp(w, fw).is_lt()) {
                    failure = Some((Bits::from_slice(w), e));
                }
            }
        });
        match failure {
            Some(f) => Err(f),
            None => Ok(acc),
        }
    };
    let results: Vec<Result<T, (Bits, Error)>> = if opts.jobs <= 1 {
        shards.iter().map(run_shard).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::Invalid(format!("cannot start worker pool: {e}")))?;
        pool.install(|| shards.par_iter().map(run_shard).collect())
    };
    let mut acc = init();
    let mut failure: Option<(Bits, Error)> = None;
    for r in results {
        match r {
            Ok(t) => acc = merge(acc, t),
            Err((w, e)) => {
                if failure.as_ref().is_none_or(|(fw, _)| w < *fw) {
                    failure = Some((w, e));
                }
            }
        }
    }
    match failure {
        Some((_, e)) => Err(e),
        None => Ok(acc),
    }
}

#[derive(Default)]
struct Partial {
    levels: Vec<LevelStats>,
    new_records: Vec<RunRecord>,
}

/// Evaluates `sub_run(w, budget)` for every valid `w` with `|w| <= max_len`.
pub fn scan(max_len: usize, budget: &Budget, opts: &ScanOptions<'_>) -> Result<Scan, Error> {
    let budget_id = budget.id();
    let fresh = || Partial { levels: vec![LevelStats::default(); max_len + 1], new_records: Vec::new() };
    let merged = par_fold(
        max_len,
        opts,
        fresh,
        |acc, w| {
            let (entry, computed) = evaluate(w, budget, opts.cache)?;
            acc.levels[w.len()].observe(w, &entry.output, entry.outcome == Outcome::Halted);
            if computed && opts.record_new {
                acc.new_records.push(RunRecord {
                    w: Bits::from_slice(w),
                    budget_id: budget_id.clone(),
                    vm_id: VM_ID.to_string(),
                    entry,
                });
            }
            Ok(())
        },
        |mut a, b| {
            a.levels = a.levels.into_iter().zip(b.levels).map(|(x, y)| x.merge(y)).collect();
            a.new_records.extend(b.new_records);
            a
        },
    )?;
    let mut new_records = merged.new_records;
    new_records.sort_by(|a, b| a.w.cmp(&b.w));
    Ok(Scan { max_len, budget_id, levels: merged.levels, new_records })
}

/// Length-lex first sentence of exactly `len` bits whose submachine value
/// is at least `threshold`.
pub fn first_at_least(
    len: usize,
    budget: &Budget,
    threshold: &BigUint,
    opts: &ScanOptions<'_>,
) -> Result<Option<(Bits, BigUint)>, Error> {
    let pick = |a: Option<(Bits, BigUint)>, b: Option<(Bits, BigUint)>| match (a, b) {
        (Some(x), Some(y)) => Some(if y.0 < x.0 { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    };
    par_fold(
        len,
        opts,
        || None,
        |acc: &mut Option<(Bits, BigUint)>, w| {
            if w.len() != len {
                return Ok(());
            }
            let (entry, _) = evaluate(w, budget, opts.cache)?;
            if entry.output >= *threshold {
                *acc = pick(acc.take(), Some((Bits::from_slice(w), entry.output)));
            }
            Ok(())
        },
        pick,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_stats_merge_is_order_independent() {
        let ws = ["01", "110101", "00100001", "00100010"];
        let vals = [1u32, 5, 2, 5];
        let mut all = Vec::new();
        for (w, v) in ws.iter().zip(vals) {
            let mut s = LevelStats::default();
            s.observe(&Bits::from_ascii(w).unwrap(), &BigUint::from(v), true);
            all.push(s);
        }
        let fwd = all.iter().cloned().fold(LevelStats::default(), LevelStats::merge);
        let rev = all.iter().rev().cloned().fold(LevelStats::default(), LevelStats::merge);
        assert_eq!(fwd, rev);
        assert_eq!(fwd.best, BigUint::from(5u32));
        assert_eq!(fwd.witness.as_ref().unwrap().to_ascii(), "110101");
        assert_eq!(fwd.total(), 4);
    }

    #[test]
    fn scan_is_independent_of_jobs() {
        let b = Budget::constant(10);
        let one = scan(16, &b, &ScanOptions::with_jobs(1)).unwrap();
        let many = scan(16, &b, &ScanOptions::with_jobs(4)).unwrap();
        assert_eq!(one, many);
        let shallow = scan(16, &b, &ScanOptions { shard_depth: 2, ..Default::default() }).unwrap();
        assert_eq!(one, shallow);
    }

    #[test]
    fn reports_smallest_failing_sentence() {
        // [JB 1] never halts, so as a budget program it is never total
        let looping = codec::LString::plain(crate::program::Program::new(vec![
            crate::program::Instruction::jb(1),
        ]))
        .unwrap();
        let b = Budget::prog(looping, 20).unwrap();
        for jobs in [1, 3] {
            let err = scan(8, &b, &ScanOptions::with_jobs(jobs)).unwrap_err();
            assert_eq!(err.to_string(), "budget not total within meta-fuel 20 on w = 01");
        }
    }
}
