//! The universal machine: a step-counted stack machine over unbounded
//! naturals.
//!
//! Semantics are total. Popping an empty stack yields 0, `JZ` past the end
//! halts, and `JB` before the start clamps to the first instruction, so
//! every syntactically valid program has a well-defined run.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::codec::{self, Form, LString};
use crate::error::ParseError;
use crate::program::{Instruction, Program};

/// Identity of the instruction semantics. Persisted with every cached
/// result; bump it whenever the semantics change.
pub const VM_ID: &str = "SBVM-1";

/// Step allowance for one execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fuel {
    Limited(u64),
    Unbounded,
}

impl Fuel {
    /// Saturating conversion from an arbitrary natural. A run can never
    /// take 2^64 steps, so saturation does not change any outcome.
    pub fn from_natural(n: &BigUint) -> Fuel {
        Fuel::Limited(n.to_u64().unwrap_or(u64::MAX))
    }

    fn allows(self, steps: u64) -> bool {
        match self {
            Fuel::Limited(f) => steps < f,
            Fuel::Unbounded => true,
        }
    }
}

impl fmt::Display for Fuel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fuel::Limited(n) => write!(f, "{n}"),
            Fuel::Unbounded => f.write_str("unbounded"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RunOutcome {
    Halted { output: BigUint, steps: u64 },
    OutOfFuel { steps: u64 },
}

impl RunOutcome {
    pub fn steps(&self) -> u64 {
        match self {
            RunOutcome::Halted { steps, .. } | RunOutcome::OutOfFuel { steps } => *steps,
        }
    }

    pub fn output(&self) -> Option<&BigUint> {
        match self {
            RunOutcome::Halted { output, .. } => Some(output),
            RunOutcome::OutOfFuel { .. } => None,
        }
    }

    pub fn is_halted(&self) -> bool {
        matches!(self, RunOutcome::Halted { .. })
    }
}

impl fmt::Display for RunOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunOutcome::Halted { output, steps } => write!(f, "halted output={output} steps={steps}"),
            RunOutcome::OutOfFuel { steps } => write!(f, "out-of-fuel steps={steps}"),
        }
    }
}

fn jump_distance(d: &BigUint) -> usize {
    d.to_usize().unwrap_or(usize::MAX)
}

/// Runs `body` from instruction 0 on `stack` (last element is the top).
/// Each executed instruction costs one step.
pub fn execute(body: &Program, mut stack: Vec<BigUint>, fuel: Fuel) -> RunOutcome {
    let code = body.instructions();
    let mut pc = 0usize;
    let mut steps = 0u64;
    let pop = |s: &mut Vec<BigUint>| s.pop().unwrap_or_default();
    while pc < code.len() {
        if !fuel.allows(steps) {
            return RunOutcome::OutOfFuel { steps };
        }
        steps += 1;
        match &code[pc] {
            Instruction::Lit(m) => stack.push(m.clone()),
            Instruction::Inc => {
                let x = pop(&mut stack);
                stack.push(x + 1u32);
            }
            Instruction::Add => {
                let x = pop(&mut stack);
                let y = pop(&mut stack);
                stack.push(x + y);
            }
            Instruction::Mul => {
                let x = pop(&mut stack);
                let y = pop(&mut stack);
                stack.push(x * y);
            }
            Instruction::Dup => {
                let x = pop(&mut stack);
                stack.push(x.clone());
                stack.push(x);
            }
            Instruction::Swp => {
                let x = pop(&mut stack);
                let y = pop(&mut stack);
                stack.push(x);
                stack.push(y);
            }
            Instruction::Jz(d) => {
                let x = pop(&mut stack);
                pc = if x.is_zero() {
                    pc.saturating_add(1).saturating_add(jump_distance(d))
                } else {
                    pc + 1
                };
                continue;
            }
            Instruction::Jb(d) => {
                pc = pc.saturating_sub(jump_distance(d));
                continue;
            }
        }
        pc += 1;
    }
    RunOutcome::Halted { output: stack.pop().unwrap_or_default(), steps }
}

/// Initial stack for an application: `rank(w_1)` ends up on top.
pub fn argument_stack(args: &[LString]) -> Vec<BigUint> {
    args.iter().rev().map(|a| codec::rank(a.bits())).collect()
}

/// Runs an already-parsed sentence.
pub fn run_lstring(w: &LString, fuel: Fuel) -> RunOutcome {
    match w.form() {
        Form::Plain(body) => execute(body, Vec::new(), fuel),
        Form::Application { head, args } => execute(head.program(), argument_stack(args), fuel),
    }
}

/// `U(w)`: parse `w` and run it with the given allowance.
pub fn run_universal(w: &[bool], fuel: Fuel) -> Result<RunOutcome, ParseError> {
    Ok(run_lstring(&codec::parse(w)?, fuel))
}
