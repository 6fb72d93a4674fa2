//! Computation-time budgets and the time-bounded submachine `U_{P_T}`.
//!
//! `sub_run(w, b)` runs `U(w)` with the allowance `budget_of(b, w)` and
//! returns 0 on timeout, or the output shifted up by one when the run halts
//! within the allowance (inclusive). The result is defined for every valid
//! sentence.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Pow;

use crate::bits::Bits;
use crate::codec::{self, LString};
use crate::error::{BudgetError, Error};
use crate::vm::{self, Fuel, RunOutcome};

pub const DEFAULT_META_FUEL: u64 = 1_000_000;

/// A total computation-time function. The native families depend only on
/// `|w|`; `Prog` runs a program on `w` itself, as `U(P_T∘w)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Budget {
    Const { c: u64 },
    Linear { a: u64, b: u64 },
    Poly { a: u64, k: u32, b: u64 },
    Prog { program: LString, meta_fuel: u64 },
}

impl Budget {
    pub fn constant(c: u64) -> Budget {
        Budget::Const { c }
    }

    pub fn prog(program: LString, meta_fuel: u64) -> Result<Budget, BudgetError> {
        if !program.is_plain() {
            return Err(BudgetError::BadSpec(format!(
                "prog budget must be a plain program, got {}",
                program.bits()
            )));
        }
        Ok(Budget::Prog { program, meta_fuel })
    }

    /// Canonical id; keys every persisted result.
    pub fn id(&self) -> String {
        match self {
            Budget::Const { c } => format!("const:{c}"),
            Budget::Linear { a, b } => format!("linear:{a}:{b}"),
            Budget::Poly { a, k, b } => format!("poly:{a}:{k}:{b}"),
            Budget::Prog { program, meta_fuel } => {
                format!("prog:{}@{meta_fuel}", program.bits().to_compact())
            }
        }
    }

    pub fn is_native(&self) -> bool {
        !matches!(self, Budget::Prog { .. })
    }

    /// Parses a budget id. A `prog:` id may omit `@<meta_fuel>`, in which
    /// case `default_meta_fuel` is used.
    pub fn parse_with_meta(s: &str, default_meta_fuel: u64) -> Result<Budget, BudgetError> {
        let bad = || BudgetError::BadSpec(s.to_string());
        let num = |t: &str| t.parse::<u64>().map_err(|_| bad());
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "const" => Ok(Budget::Const { c: num(rest)? }),
            "linear" => {
                let (a, b) = rest.split_once(':').ok_or_else(bad)?;
                Ok(Budget::Linear { a: num(a)?, b: num(b)? })
            }
            "poly" => {
                let parts: Vec<&str> = rest.split(':').collect();
                let [a, k, b] = parts[..] else { return Err(bad()) };
                let k = k.parse::<u32>().map_err(|_| bad())?;
                Ok(Budget::Poly { a: num(a)?, k, b: num(b)? })
            }
            "prog" => {
                let (bits, meta) = match rest.split_once('@') {
                    Some((bits, meta)) => (bits, num(meta)?),
                    None => (rest, default_meta_fuel),
                };
                let bits = Bits::parse_any(bits).map_err(|_| bad())?;
                let program = codec::parse(&bits)
                    .map_err(|e| BudgetError::BadSpec(format!("{s}: {e}")))?;
                Budget::prog(program, meta)
            }
            _ => Err(bad()),
        }
    }

    /// Step allowance granted to `w`.
    pub fn budget_of(&self, w: &LString) -> Result<BigUint, BudgetError> {
        let len = BigUint::from(w.len());
        Ok(match self {
            Budget::Const { c } => BigUint::from(*c),
            Budget::Linear { a, b } => BigUint::from(*a) * len + *b,
            Budget::Poly { a, k, b } => BigUint::from(*a) * len.pow(*k) + *b,
            Budget::Prog { program, meta_fuel } => {
                let frame = codec::compose(program, std::slice::from_ref(w))
                    .expect("prog budgets hold plain programs");
                match vm::run_lstring(&frame, Fuel::Limited(*meta_fuel)) {
                    RunOutcome::Halted { output, .. } => output,
                    RunOutcome::OutOfFuel { .. } => {
                        return Err(BudgetError::NotTotal {
                            w: w.bits().to_ascii(),
                            meta_fuel: *meta_fuel,
                        })
                    }
                }
            }
        })
    }
}

impl FromStr for Budget {
    type Err = BudgetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Budget::parse_with_meta(s, DEFAULT_META_FUEL)
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Result of one submachine query: the shifted value and the raw run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubRun {
    pub value: BigUint,
    pub outcome: RunOutcome,
}

impl SubRun {
    pub fn halted(&self) -> bool {
        self.outcome.is_halted()
    }
}

/// `U_{P_T}(w)` on an already-parsed sentence.
pub fn sub_run_lstring(w: &LString, budget: &Budget) -> Result<SubRun, BudgetError> {
    let fuel = Fuel::from_natural(&budget.budget_of(w)?);
    let outcome = vm::run_lstring(w, fuel);
    let value = match &outcome {
        RunOutcome::Halted { output, .. } => output + 1u32,
        RunOutcome::OutOfFuel { .. } => BigUint::default(),
    };
    Ok(SubRun { value, outcome })
}

/// `U_{P_T}(w)`: 0 when `U(w)` exceeds its allowance, otherwise its output
/// plus one.
pub fn sub_run(w: &[bool], budget: &Budget) -> Result<BigUint, Error> {
    let w = codec::parse(w)?;
    Ok(sub_run_lstring(&w, budget)?.value)
}
