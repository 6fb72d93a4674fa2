//! Instruction set of the stack machine and its bit-level encoding.
//!
//! Every instruction starts with a 3-bit opcode. `LIT m` is followed by the
//! delta code of `m + 1`; `JZ d` and `JB d` by the delta code of `d >= 1`.
//! The five operand-free instructions are exactly three bits long.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::bits::Bits;
use crate::codec::{self, BitReader};
use crate::error::{DomainError, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Opcode {
    Lit = 0,
    Inc = 1,
    Add = 2,
    Mul = 3,
    Dup = 4,
    Swp = 5,
    Jz = 6,
    Jb = 7,
}

impl Opcode {
    pub const ALL: [Opcode; 8] = [
        Opcode::Lit,
        Opcode::Inc,
        Opcode::Add,
        Opcode::Mul,
        Opcode::Dup,
        Opcode::Swp,
        Opcode::Jz,
        Opcode::Jb,
    ];

    pub fn from_bits3(v: u8) -> Opcode {
        Opcode::ALL[usize::from(v & 7)]
    }

    pub fn bits3(self) -> [bool; 3] {
        let v = self as u8;
        [v & 4 != 0, v & 2 != 0, v & 1 != 0]
    }

    pub fn has_operand(self) -> bool {
        matches!(self, Opcode::Lit | Opcode::Jz | Opcode::Jb)
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Lit => "LIT",
            Opcode::Inc => "INC",
            Opcode::Add => "ADD",
            Opcode::Mul => "MUL",
            Opcode::Dup => "DUP",
            Opcode::Swp => "SWP",
            Opcode::Jz => "JZ",
            Opcode::Jb => "JB",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Instruction {
    Lit(BigUint),
    Inc,
    Add,
    Mul,
    Dup,
    Swp,
    /// Jump forward over `d` instructions when the popped value is zero.
    Jz(BigUint),
    /// Jump back `d` instructions, clamped at the first one.
    Jb(BigUint),
}

impl Instruction {
    pub fn opcode(&self) -> Opcode {
        match self {
            Instruction::Lit(_) => Opcode::Lit,
            Instruction::Inc => Opcode::Inc,
            Instruction::Add => Opcode::Add,
            Instruction::Mul => Opcode::Mul,
            Instruction::Dup => Opcode::Dup,
            Instruction::Swp => Opcode::Swp,
            Instruction::Jz(_) => Opcode::Jz,
            Instruction::Jb(_) => Opcode::Jb,
        }
    }

    pub fn lit(m: u64) -> Self {
        Instruction::Lit(BigUint::from(m))
    }

    pub fn jz(d: u64) -> Self {
        Instruction::Jz(BigUint::from(d))
    }

    pub fn jb(d: u64) -> Self {
        Instruction::Jb(BigUint::from(d))
    }

    pub fn encode_into(&self, out: &mut Bits) -> Result<(), DomainError> {
        for b in self.opcode().bits3() {
            out.push(b);
        }
        match self {
            Instruction::Lit(m) => codec::delta_encode_into(&(m + 1u32), out),
            Instruction::Jz(d) | Instruction::Jb(d) => codec::delta_encode_into(d, out),
            _ => Ok(()),
        }
    }

    pub fn encoded_len(&self) -> usize {
        3 + match self {
            Instruction::Lit(m) => codec::delta_len(&(m + 1u32)),
            Instruction::Jz(d) | Instruction::Jb(d) if !d.is_zero() => codec::delta_len(d),
            _ => 0,
        }
    }

    pub(crate) fn decode(reader: &mut BitReader<'_>) -> Result<Self, ParseError> {
        let op = reader.read_u8(3, "truncated opcode")?;
        Ok(match Opcode::from_bits3(op) {
            Opcode::Lit => Instruction::Lit(reader.read_delta()? - BigUint::one()),
            Opcode::Inc => Instruction::Inc,
            Opcode::Add => Instruction::Add,
            Opcode::Mul => Instruction::Mul,
            Opcode::Dup => Instruction::Dup,
            Opcode::Swp => Instruction::Swp,
            Opcode::Jz => Instruction::Jz(reader.read_delta()?),
            Opcode::Jb => Instruction::Jb(reader.read_delta()?),
        })
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Lit(v) | Instruction::Jz(v) | Instruction::Jb(v) => {
                write!(f, "{} {}", self.opcode().mnemonic(), v)
            }
            _ => f.write_str(self.opcode().mnemonic()),
        }
    }
}

/// Body of a plain program.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Program(pub Vec<Instruction>);

impl Program {
    pub fn new(instructions: Vec<Instruction>) -> Self {
        Program(instructions)
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Encodes just the instruction stream, without the plain-program header.
    pub fn encode_body(&self, out: &mut Bits) -> Result<(), DomainError> {
        self.0.iter().try_for_each(|i| i.encode_into(out))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, ins) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{ins}")?;
        }
        f.write_str("]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn decode_all(bits: &Bits) -> Vec<Instruction> {
        let mut r = BitReader::new(bits);
        let mut out = Vec::new();
        while !r.is_at_end() {
            out.push(Instruction::decode(&mut r).unwrap());
        }
        out
    }

    #[test]
    fn operand_free_instructions_are_three_bits() {
        for ins in [
            Instruction::Inc,
            Instruction::Add,
            Instruction::Mul,
            Instruction::Dup,
            Instruction::Swp,
        ] {
            let mut b = Bits::new();
            ins.encode_into(&mut b).unwrap();
            assert_eq!(b.len(), 3);
            assert_eq!(ins.encoded_len(), 3);
        }
    }

    #[test]
    fn operand_encodings() {
        let mut b = Bits::new();
        Instruction::lit(0).encode_into(&mut b).unwrap();
        assert_eq!(b.to_ascii(), "0001");
        let mut b = Bits::new();
        Instruction::jb(1).encode_into(&mut b).unwrap();
        assert_eq!(b.to_ascii(), "1111");
        let mut b = Bits::new();
        Instruction::lit(5).encode_into(&mut b).unwrap();
        assert_eq!(b.to_ascii(), "00001110");
        assert!(Instruction::jz(0).encode_into(&mut Bits::new()).is_err());
    }

    fn arb_instruction() -> impl Strategy<Value = Instruction> {
        prop_oneof![
            any::<u32>().prop_map(|m| Instruction::lit(u64::from(m))),
            Just(Instruction::Inc),
            Just(Instruction::Add),
            Just(Instruction::Mul),
            Just(Instruction::Dup),
            Just(Instruction::Swp),
            (1u64..1 << 40).prop_map(Instruction::jz),
            (1u64..1 << 40).prop_map(Instruction::jb),
        ]
    }

    proptest! {
        #[test]
        fn stream_round_trip(stream in proptest::collection::vec(arb_instruction(), 0..20)) {
            let mut bits = Bits::new();
            Program(stream.clone()).encode_body(&mut bits).unwrap();
            let total: usize = stream.iter().map(Instruction::encoded_len).sum();
            prop_assert_eq!(bits.len(), total);
            prop_assert_eq!(decode_all(&bits), stream);
        }
    }
}
