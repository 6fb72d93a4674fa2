//! The program language: a binary, self-delimiting grammar with decidable
//! membership and a functionalizing concatenation.
//!
//! ```text
//! LString     := Plain | Application
//! Plain       := '0' delta(n + 1) Instruction^n
//! Application := '1' delta(k) Plain LString^k        (k >= 1)
//! ```
//!
//! Numbers are written with the Elias delta code. Every sentence is
//! uniquely decodable and no sentence is a proper prefix of another.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::bits::Bits;
use crate::error::{DomainError, ParseError};
use crate::program::{Instruction, Program};

/// Witness constants for the three length inequalities the language
/// satisfies: `|P∘w₁∘…∘w_k| <= C·k + |P| + Σ|wᵢ|` and
/// `|lit(N)| <= C' + log₂ N + (1 + ε)·log₂ log₂ N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LanguageConstants {
    pub c: u64,
    pub c_prime: u64,
    pub epsilon: u64,
}

impl LanguageConstants {
    pub const FIXED: LanguageConstants = LanguageConstants { c: 8, c_prime: 16, epsilon: 1 };

    /// Upper bound on `|lit_program(n)|`, in the form
    /// `C' + log₂(N+1) + (1+ε)·log₂(log₂(N+2)+1)`.
    pub fn literal_bound(&self, n: f64) -> f64 {
        self.c_prime as f64 + (n + 1.0).log2() + (1 + self.epsilon) as f64 * ((n + 2.0).log2() + 1.0).log2()
    }

    /// Upper bound on the length of a composition.
    pub fn compose_bound(&self, head_len: usize, arg_lens: &[usize]) -> usize {
        self.c as usize * arg_lens.len() + head_len + arg_lens.iter().sum::<usize>()
    }
}

/// Length of the Elias gamma code of `l >= 1`.
pub(crate) fn gamma_len(l: u64) -> usize {
    2 * (63 - l.leading_zeros() as usize) + 1
}

/// Length of the delta code of `n >= 1`.
pub fn delta_len(n: &BigUint) -> usize {
    let l = n.bits();
    gamma_len(l) + l as usize - 1
}

pub fn delta_len_u64(n: u64) -> usize {
    let l = 64 - u64::from(n.leading_zeros());
    gamma_len(l) + l as usize - 1
}

pub(crate) fn delta_encode_into(n: &BigUint, out: &mut Bits) -> Result<(), DomainError> {
    if n.is_zero() {
        return Err(DomainError::DeltaOfZero);
    }
    let l = n.bits();
    let width = 64 - l.leading_zeros();
    for _ in 1..width {
        out.push(false);
    }
    for i in (0..width).rev() {
        out.push(l >> i & 1 == 1);
    }
    for i in (0..l - 1).rev() {
        out.push(n.bit(i));
    }
    Ok(())
}

/// Elias delta code: the gamma code of the bit length `L` of `n`, followed
/// by the low `L - 1` bits of `n`.
pub fn delta_encode(n: &BigUint) -> Result<Bits, DomainError> {
    let mut out = Bits::new();
    delta_encode_into(n, &mut out)?;
    Ok(out)
}

pub fn delta_encode_u64(n: u64) -> Result<Bits, DomainError> {
    delta_encode(&BigUint::from(n))
}

/// Decodes one delta code from the front of `bits`, returning the value and
/// the number of bits consumed. Trailing bits are ignored.
pub fn delta_decode(bits: &[bool]) -> Result<(BigUint, usize), ParseError> {
    let mut r = BitReader::new(bits);
    let n = r.read_delta()?;
    Ok((n, r.pos()))
}

/// Position of `w` in the length-lexicographic enumeration of all bit
/// strings, starting from zero for the empty string.
pub fn rank(w: &[bool]) -> BigUint {
    if w.len() < 64 {
        let v = w.iter().fold(1u64, |acc, &b| acc << 1 | u64::from(b));
        return BigUint::from(v - 1);
    }
    let mut v = BigUint::zero();
    v.set_bit(w.len() as u64, true);
    for (i, &b) in w.iter().enumerate() {
        if b {
            v.set_bit((w.len() - 1 - i) as u64, true);
        }
    }
    v - 1u32
}

pub fn unrank(k: &BigUint) -> Bits {
    let v = k + 1u32;
    let top = v.bits() - 1;
    Bits::from_vec((0..top).rev().map(|i| v.bit(i)).collect())
}

/// Sequential reader over a bit slice, tracking the offset for error reports.
pub(crate) struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub(crate) fn new(bits: &'a [bool]) -> Self {
        BitReader { bits, pos: 0 }
    }

    pub(crate) fn at(bits: &'a [bool], pos: usize) -> Self {
        BitReader { bits, pos }
    }

    pub(crate) fn pos(&self) -> usize {
        self.pos
    }

    #[cfg(test)]
    pub(crate) fn is_at_end(&self) -> bool {
        self.pos >= self.bits.len()
    }

    pub(crate) fn read_bit(&mut self, what: &'static str) -> Result<bool, ParseError> {
        let b = *self
            .bits
            .get(self.pos)
            .ok_or_else(|| ParseError::truncated(self.pos, what))?;
        self.pos += 1;
        Ok(b)
    }

    pub(crate) fn read_u8(&mut self, width: usize, what: &'static str) -> Result<u8, ParseError> {
        if self.pos + width > self.bits.len() {
            return Err(ParseError::truncated(self.pos, what));
        }
        let v = self.bits[self.pos..self.pos + width]
            .iter()
            .fold(0u8, |acc, &b| acc << 1 | u8::from(b));
        self.pos += width;
        Ok(v)
    }

    pub(crate) fn read_delta(&mut self) -> Result<BigUint, ParseError> {
        let start = self.pos;
        let rest = self.bits.get(self.pos..).unwrap_or(&[]);
        let zeros = rest.iter().take_while(|&&b| !b).count();
        // a length field of 64+ bits cannot be followed by enough payload
        if zeros >= 64 || 2 * zeros + 1 > rest.len() {
            return Err(ParseError::truncated(start, "truncated delta code"));
        }
        let len = rest[zeros..=2 * zeros]
            .iter()
            .fold(0u64, |acc, &b| acc << 1 | u64::from(b));
        self.pos += 2 * zeros + 1;
        let payload = len - 1;
        if payload > (self.bits.len() - self.pos) as u64 {
            return Err(ParseError::truncated(start, "truncated delta code"));
        }
        let payload = payload as usize;
        let digits = &self.bits[self.pos..self.pos + payload];
        self.pos += payload;
        if payload < 64 {
            let v = digits.iter().fold(1u64, |acc, &b| acc << 1 | u64::from(b));
            Ok(BigUint::from(v))
        } else {
            let mut v = BigUint::zero();
            v.set_bit(payload as u64, true);
            for (i, &b) in digits.iter().enumerate() {
                if b {
                    v.set_bit((payload - 1 - i) as u64, true);
                }
            }
            Ok(v)
        }
    }
}

/// The decomposition of a sentence of the language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Form {
    Plain(Program),
    Application { head: Box<LString>, args: Vec<LString> },
}

/// A valid sentence together with its parse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LString {
    bits: Bits,
    form: Form,
}

impl LString {
    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    pub fn into_bits(self) -> Bits {
        self.bits
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_plain(&self) -> bool {
        matches!(self.form, Form::Plain(_))
    }

    /// Body of a plain program, or of the head of an application.
    pub fn program(&self) -> &Program {
        match &self.form {
            Form::Plain(p) => p,
            Form::Application { head, .. } => head.program(),
        }
    }

    /// Encodes a plain program.
    pub fn plain(program: Program) -> Result<LString, DomainError> {
        let mut bits = Bits::new();
        bits.push(false);
        delta_encode_into(&BigUint::from(program.len() + 1), &mut bits)?;
        program.encode_body(&mut bits)?;
        Ok(LString { bits, form: Form::Plain(program) })
    }

    /// Re-derives the bit string from the parse tree.
    pub fn encode(&self) -> Result<Bits, DomainError> {
        match &self.form {
            Form::Plain(p) => Ok(LString::plain(p.clone())?.bits),
            Form::Application { head, args } => {
                let mut bits = Bits::new();
                bits.push(true);
                delta_encode_into(&BigUint::from(args.len()), &mut bits)?;
                bits.extend_from_slice(&head.encode()?);
                for a in args {
                    bits.extend_from_slice(&a.encode()?);
                }
                Ok(bits)
            }
        }
    }

    /// Multi-line parse tree, used by the `decode` command.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        self.pretty_into(&mut out, 0);
        out
    }

    fn pretty_into(&self, out: &mut String, depth: usize) {
        let pad = "  ".repeat(depth);
        match &self.form {
            Form::Plain(p) => {
                out.push_str(&format!("{pad}plain ({} bits, {} instructions)\n", self.len(), p.len()));
                for (i, ins) in p.instructions().iter().enumerate() {
                    out.push_str(&format!("{pad}  {i:>3}: {ins}\n"));
                }
            }
            Form::Application { head, args } => {
                out.push_str(&format!("{pad}application ({} bits, k = {})\n", self.len(), args.len()));
                out.push_str(&format!("{pad}  head:\n"));
                head.pretty_into(out, depth + 2);
                for (i, a) in args.iter().enumerate() {
                    out.push_str(&format!("{pad}  arg {} (rank {}): {}\n", i + 1, rank(a.bits()), a.bits()));
                    a.pretty_into(out, depth + 2);
                }
            }
        }
    }
}

impl fmt::Display for LString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bits)
    }
}

fn parse_plain_at(bits: &[bool], start: usize) -> Result<(Program, usize), ParseError> {
    let mut r = BitReader::at(bits, start);
    if r.read_bit("empty input")? {
        return Err(ParseError::malformed(start, "expected plain program tag"));
    }
    let count = r.read_delta()? - BigUint::one();
    // every instruction takes at least 3 bits, so larger counts are truncated
    let max_fit = (bits.len() - r.pos()) / 3;
    let count = match count.to_usize() {
        Some(c) if c <= max_fit => c,
        _ => return Err(ParseError::truncated(bits.len(), "instruction stream shorter than its count")),
    };
    let mut body = Vec::with_capacity(count);
    for _ in 0..count {
        body.push(Instruction::decode(&mut r)?);
    }
    Ok((Program(body), r.pos()))
}

fn parse_at(bits: &[bool], start: usize) -> Result<(LString, usize), ParseError> {
    let tag = *bits
        .get(start)
        .ok_or_else(|| ParseError::truncated(start, "empty input"))?;
    if !tag {
        let (program, end) = parse_plain_at(bits, start)?;
        let form = Form::Plain(program);
        return Ok((LString { bits: Bits::from_slice(&bits[start..end]), form }, end));
    }
    let mut r = BitReader::at(bits, start + 1);
    let k = r.read_delta()?;
    let head_start = r.pos();
    if bits.get(head_start) == Some(&true) {
        return Err(ParseError::malformed(head_start, "application head must be a plain program"));
    }
    let (head, mut pos) = parse_at(bits, head_start)?;
    // every sentence takes at least 2 bits
    let k = match k.to_usize() {
        Some(k) if k <= (bits.len() - pos) / 2 => k,
        _ => return Err(ParseError::truncated(bits.len(), "fewer arguments than declared")),
    };
    let mut args = Vec::with_capacity(k);
    for _ in 0..k {
        let (arg, end) = parse_at(bits, pos)?;
        args.push(arg);
        pos = end;
    }
    let form = Form::Application { head: Box::new(head), args };
    Ok((LString { bits: Bits::from_slice(&bits[start..pos]), form }, pos))
}

/// Decides membership in the language and returns the decomposition.
/// The whole input must be consumed.
pub fn parse(bits: &[bool]) -> Result<LString, ParseError> {
    let (s, end) = parse_at(bits, 0)?;
    if end != bits.len() {
        return Err(ParseError::leftover(end));
    }
    Ok(s)
}

pub fn is_valid(bits: &[bool]) -> bool {
    parse(bits).is_ok()
}

/// Functionalizing concatenation `P∘w₁∘…∘w_k`.
pub fn compose(head: &LString, args: &[LString]) -> Result<LString, DomainError> {
    if args.is_empty() {
        return Err(DomainError::NoArguments);
    }
    if !head.is_plain() {
        return Err(DomainError::HeadNotPlain);
    }
    let mut bits = Bits::new();
    bits.push(true);
    delta_encode_into(&BigUint::from(args.len()), &mut bits)?;
    bits.extend_from_slice(head.bits());
    for a in args {
        bits.extend_from_slice(a.bits());
    }
    let form = Form::Application { head: Box::new(head.clone()), args: args.to_vec() };
    Ok(LString { bits, form })
}

/// The program `[LIT n]`, the language's name for the number `n`.
pub fn lit_program(n: &BigUint) -> LString {
    LString::plain(Program(vec![Instruction::Lit(n.clone())])).expect("LIT operands are always encodable")
}

pub fn lit_program_u64(n: u64) -> LString {
    lit_program(&BigUint::from(n))
}
