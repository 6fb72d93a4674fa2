//! Time-bounded submachines of a small universal stack machine, the Busy
//! Beaver Plus function over them, and exhaustive checks of its
//! sub-incompressibility and relative uncomputability.

pub mod beaver;
pub mod bits;
pub mod codec;
pub mod enumeration;
pub mod error;
pub mod omega;
pub mod program;
pub mod props;
pub mod scan;
pub mod store;
pub mod submachine;
pub mod vm;

pub use bits::Bits;
pub use codec::{compose, lit_program, parse, rank, unrank, Form, LString, LanguageConstants};
pub use error::{Error, Result};
pub use program::{Instruction, Opcode, Program};
pub use submachine::{sub_run, Budget};
pub use vm::{run_universal, Fuel, RunOutcome, VM_ID};
