//! Reference model of the language and machine, written directly against
//! the bit-level grammar and instruction semantics. It shares no code with
//! the library and favours obviousness over speed.

#![allow(dead_code)]

use num_bigint::BigUint;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefIns {
    Lit(BigUint),
    Inc,
    Add,
    Mul,
    Dup,
    Swp,
    Jz(BigUint),
    Jb(BigUint),
}

#[derive(Debug, Clone)]
pub enum RefSentence {
    Plain(Vec<RefIns>),
    App(Vec<RefIns>, Vec<Vec<bool>>),
}

struct Cursor<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl Cursor<'_> {
    fn bit(&mut self) -> Option<bool> {
        let b = *self.bits.get(self.pos)?;
        self.pos += 1;
        Some(b)
    }

    fn uint(&mut self, width: usize) -> Option<BigUint> {
        let mut v = BigUint::from(0u32);
        for _ in 0..width {
            v = v * 2u32 + u32::from(self.bit()?);
        }
        Some(v)
    }

    // Elias delta: gamma-coded bit length, then the value without its
    // leading one
    fn delta(&mut self) -> Option<BigUint> {
        let mut zeros = 0;
        while !self.bit()? {
            zeros += 1;
        }
        let rest = self.uint(zeros)?;
        let len = (BigUint::from(1u32) << zeros) + rest;
        let len: usize = len.try_into().ok()?;
        if len > 4096 {
            return None;
        }
        let tail = self.uint(len - 1)?;
        Some((BigUint::from(1u32) << (len - 1)) + tail)
    }

    fn plain(&mut self) -> Option<Vec<RefIns>> {
        if self.bit()? {
            return None;
        }
        let n: usize = (self.delta()? - 1u32).try_into().ok()?;
        if n > self.bits.len() {
            return None;
        }
        let mut body = Vec::new();
        for _ in 0..n {
            let op: u32 = self.uint(3)?.try_into().unwrap();
            body.push(match op {
                0 => RefIns::Lit(self.delta()? - 1u32),
                1 => RefIns::Inc,
                2 => RefIns::Add,
                3 => RefIns::Mul,
                4 => RefIns::Dup,
                5 => RefIns::Swp,
                6 => RefIns::Jz(self.delta()?),
                _ => RefIns::Jb(self.delta()?),
            });
        }
        Some(body)
    }

    fn sentence(&mut self) -> Option<RefSentence> {
        let start = self.pos;
        if !self.bit()? {
            self.pos = start;
            return Some(RefSentence::Plain(self.plain()?));
        }
        let k: usize = self.delta()?.try_into().ok()?;
        if k > self.bits.len() {
            return None;
        }
        let head = self.plain()?;
        let mut args = Vec::new();
        for _ in 0..k {
            let a = self.pos;
            self.sentence()?;
            args.push(self.bits[a..self.pos].to_vec());
        }
        Some(RefSentence::App(head, args))
    }
}

pub fn ref_parse(bits: &[bool]) -> Option<RefSentence> {
    let mut c = Cursor { bits, pos: 0 };
    let s = c.sentence()?;
    (c.pos == bits.len()).then_some(s)
}

pub fn ref_rank(w: &[bool]) -> BigUint {
    let mut v = BigUint::from(1u32);
    for &b in w {
        v = v * 2u32 + u32::from(b);
    }
    v - 1u32
}

/// `Some((output, steps))` on halting within `fuel`, `None` otherwise.
pub fn ref_execute(body: &[RefIns], mut stack: Vec<BigUint>, fuel: u64) -> Option<(BigUint, u64)> {
    let zero = BigUint::from(0u32);
    let mut pc = 0usize;
    let mut steps = 0u64;
    loop {
        if pc >= body.len() {
            return Some((stack.pop().unwrap_or(zero), steps));
        }
        if steps == fuel {
            return None;
        }
        steps += 1;
        let pop = |s: &mut Vec<BigUint>| s.pop().unwrap_or_default();
        match &body[pc] {
            RefIns::Lit(m) => stack.push(m.clone()),
            RefIns::Inc => {
                let x = pop(&mut stack);
                stack.push(x + 1u32);
            }
            RefIns::Add => {
                let (x, y) = (pop(&mut stack), pop(&mut stack));
                stack.push(x + y);
            }
            RefIns::Mul => {
                let (x, y) = (pop(&mut stack), pop(&mut stack));
                stack.push(x * y);
            }
            RefIns::Dup => {
                let x = pop(&mut stack);
                stack.push(x.clone());
                stack.push(x);
            }
            RefIns::Swp => {
                let (x, y) = (pop(&mut stack), pop(&mut stack));
                stack.push(x);
                stack.push(y);
            }
            RefIns::Jz(d) => {
                let x = pop(&mut stack);
                if x == zero {
                    let d: usize = d.try_into().unwrap_or(usize::MAX / 2);
                    pc = pc.saturating_add(1 + d);
                    continue;
                }
            }
            RefIns::Jb(d) => {
                let d: usize = d.try_into().unwrap_or(usize::MAX);
                pc = pc.saturating_sub(d);
                continue;
            }
        }
        pc += 1;
    }
}

pub fn ref_run(s: &RefSentence, fuel: u64) -> Option<(BigUint, u64)> {
    match s {
        RefSentence::Plain(body) => ref_execute(body, Vec::new(), fuel),
        RefSentence::App(head, args) => {
            let stack = args.iter().rev().map(|a| ref_rank(a)).collect();
            ref_execute(head, stack, fuel)
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum RefBudget {
    Const(u64),
    Linear(u64, u64),
    Poly(u64, u32, u64),
}

impl RefBudget {
    pub fn id(self) -> String {
        match self {
            RefBudget::Const(c) => format!("const:{c}"),
            RefBudget::Linear(a, b) => format!("linear:{a}:{b}"),
            RefBudget::Poly(a, k, b) => format!("poly:{a}:{k}:{b}"),
        }
    }

    pub fn allowance(self, len: usize) -> u64 {
        let n = len as u64;
        match self {
            RefBudget::Const(c) => c,
            RefBudget::Linear(a, b) => a * n + b,
            RefBudget::Poly(a, k, b) => a * n.pow(k) + b,
        }
    }
}

/// 0 on timeout, output + 1 on halting.
pub fn ref_sub_run(w: &[bool], b: RefBudget) -> Option<(BigUint, bool)> {
    let s = ref_parse(w)?;
    Some(match ref_run(&s, b.allowance(w.len())) {
        Some((out, _)) => (out + 1u32, true),
        None => (BigUint::from(0u32), false),
    })
}

/// Every valid string of at most `max_len` bits, length-lex ordered.
pub fn brute_force_valid(max_len: usize) -> Vec<Vec<bool>> {
    let mut out = Vec::new();
    for len in 0..=max_len {
        for x in 0u64..1 << len {
            let w: Vec<bool> = (0..len).rev().map(|i| x >> i & 1 == 1).collect();
            if ref_parse(&w).is_some() {
                out.push(w);
            }
        }
    }
    out
}

pub fn ascii(w: &[bool]) -> String {
    w.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// `(bb, witness)` at size bound `n` from a pre-filtered list.
pub fn ref_bb(valid: &[Vec<bool>], n: usize, b: RefBudget) -> (BigUint, Option<String>) {
    let mut best = BigUint::from(0u32);
    let mut witness = None;
    for w in valid.iter().filter(|w| w.len() <= n) {
        let (v, _) = ref_sub_run(w, b).unwrap();
        if witness.is_none() || v > best {
            best = v;
            witness = Some(ascii(w));
        }
    }
    (best, witness)
}

/// Numerator over `2^n` of the halting weight at size bound `n`.
pub fn ref_omega_numerator(valid: &[Vec<bool>], n: usize, b: RefBudget) -> BigUint {
    let mut num = BigUint::from(0u32);
    for w in valid.iter().filter(|w| w.len() <= n) {
        if ref_sub_run(w, b).unwrap().1 {
            num += BigUint::from(1u32) << (n - w.len());
        }
    }
    num
}
