//! Grammar-directed enumeration of every valid sentence up to a length
//! bound, split into prefix shards for parallel evaluation.
//!
//! A counting table over the grammar tells the walker which lengths each
//! nonterminal can fill, so it only descends into branches that complete.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::bits::Bits;
use crate::codec::{self, delta_len_u64, gamma_len};

/// Counts of grammar derivations by exact bit length.
#[derive(Debug, Clone)]
pub struct Grammar {
    max_len: usize,
    plain: Vec<BigUint>,
    app: Vec<BigUint>,
    lstring: Vec<BigUint>,
    ok: Feasible,
}

#[derive(Debug, Clone)]
struct Feasible {
    instr: Vec<bool>,
    stream: Vec<Vec<bool>>,
    plain: Vec<bool>,
    app: Vec<bool>,
    lstring: Vec<bool>,
    seq: Vec<Vec<bool>>,
}

fn nonzero(v: &[BigUint]) -> Vec<bool> {
    v.iter().map(|x| !x.is_zero()).collect()
}

impl Grammar {
    #[allow(clippy::needless_range_loop)]
    pub fn new(max_len: usize) -> Grammar {
        let size = max_len + 1;
        let zeros = || vec![BigUint::zero(); size];

        // delta[l]: naturals v >= 1 whose delta code is l bits
        let mut delta = zeros();
        for l in 1..=size as u64 {
            let len = gamma_len(l) + l as usize - 1;
            if len < size {
                delta[len] += BigUint::from(1u32) << (l - 1);
            }
        }

        let mut instr = zeros();
        if size > 3 {
            instr[3] += 5u32;
        }
        for t in 4..size {
            instr[t] += &delta[t - 3] * 3u32;
        }

        // stream[n][t]: sequences of n instructions totalling t bits
        let max_instr = max_len / 3;
        let mut stream = vec![zeros(); max_instr + 1];
        stream[0][0] = BigUint::from(1u32);
        for n in 1..=max_instr {
            for t in 0..size {
                let mut acc = BigUint::zero();
                for it in 3..=t {
                    if !instr[it].is_zero() && !stream[n - 1][t - it].is_zero() {
                        acc += &instr[it] * &stream[n - 1][t - it];
                    }
                }
                stream[n][t] = acc;
            }
        }

        let mut plain = zeros();
        for (l, slot) in plain.iter_mut().enumerate() {
            for (n, by_len) in stream.iter().enumerate() {
                let header = 1 + delta_len_u64(n as u64 + 1);
                if header <= l {
                    *slot += &by_len[l - header];
                }
            }
        }

        // seq[k][t]: k-tuples of sentences totalling t bits
        let max_args = max_len / 2;
        let mut seq = vec![zeros(); max_args + 1];
        seq[0][0] = BigUint::from(1u32);
        let mut app = zeros();
        let mut lstring = zeros();
        for l in 0..size {
            let mut acc = BigUint::zero();
            for k in 1..=max_args {
                let header = 1 + delta_len_u64(k as u64);
                if header + 2 + 2 * k > l {
                    break;
                }
                for h in 2..=l - header {
                    let rest = l - header - h;
                    if !plain[h].is_zero() && !seq[k][rest].is_zero() {
                        acc += &plain[h] * &seq[k][rest];
                    }
                }
            }
            app[l] = acc;
            lstring[l] = &plain[l] + &app[l];
            // seq[k][l] only needs sentences of length <= l, all known now
            for k in 1..=max_args {
                let mut acc = BigUint::zero();
                for first in 2..=l {
                    if !lstring[first].is_zero() && !seq[k - 1][l - first].is_zero() {
                        acc += &lstring[first] * &seq[k - 1][l - first];
                    }
                }
                seq[k][l] = acc;
            }
        }

        let ok = Feasible {
            instr: nonzero(&instr),
            stream: stream.iter().map(|v| nonzero(v)).collect(),
            plain: nonzero(&plain),
            app: nonzero(&app),
            lstring: nonzero(&lstring),
            seq: seq.iter().map(|v| nonzero(v)).collect(),
        };
        Grammar { max_len, plain, app, lstring, ok }
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Number of valid sentences of exactly `len` bits.
    pub fn count_exact(&self, len: usize) -> BigUint {
        self.lstring.get(len).cloned().unwrap_or_default()
    }

    /// Number of valid sentences of at most `max_len` bits.
    pub fn count_upto(&self, max_len: usize) -> BigUint {
        self.lstring[..=max_len.min(self.max_len)].iter().sum()
    }

    pub fn count_plain(&self, len: usize) -> BigUint {
        self.plain.get(len).cloned().unwrap_or_default()
    }

    pub fn count_application(&self, len: usize) -> BigUint {
        self.app.get(len).cloned().unwrap_or_default()
    }

    /// Visits every valid sentence of exactly `len` bits that starts with
    /// `prefix`. Visit order is unspecified.
    pub fn visit_exact(&self, len: usize, prefix: &[bool], f: &mut dyn FnMut(&[bool])) {
        if len > self.max_len || len < prefix.len() || !self.ok.lstring[len] {
            return;
        }
        let mut w = Walker { g: self, prefix, buf: Vec::with_capacity(len) };
        w.lstring(len, &mut |w: &mut Walker<'_>| f(&w.buf));
    }

    /// Visits every valid sentence in a shard.
    pub fn visit_shard(&self, shard: &EnumerationShard, f: &mut dyn FnMut(&[bool])) {
        for len in 0..=shard.max_len.min(self.max_len) {
            self.visit_exact(len, &shard.prefix, f);
        }
    }
}

type Cont<'k, 'g> = &'k mut dyn FnMut(&mut Walker<'g>);

struct Walker<'g> {
    g: &'g Grammar,
    prefix: &'g [bool],
    buf: Vec<bool>,
}

impl<'g> Walker<'g> {
    /// Appends bits, returning false as soon as one contradicts the prefix.
    /// The caller restores the buffer length either way.
    fn push(&mut self, bits: &[bool]) -> bool {
        for &b in bits {
            let pos = self.buf.len();
            if pos < self.prefix.len() && self.prefix[pos] != b {
                return false;
            }
            self.buf.push(b);
        }
        true
    }

    fn with_bits(&mut self, bits: &[bool], k: Cont<'_, 'g>) {
        let mark = self.buf.len();
        if self.push(bits) {
            k(self);
        }
        self.buf.truncate(mark);
    }

    fn lstring(&mut self, len: usize, k: Cont<'_, 'g>) {
        if self.g.ok.plain[len] {
            self.plain(len, k);
        }
        if self.g.ok.app[len] {
            self.application(len, k);
        }
    }

    fn plain(&mut self, len: usize, k: Cont<'_, 'g>) {
        let mark = self.buf.len();
        if self.push(&[false]) {
            for n in 0..self.g.ok.stream.len() {
                let header = 1 + delta_len_u64(n as u64 + 1);
                if header > len {
                    break;
                }
                let rest = len - header;
                if !self.g.ok.stream[n][rest] {
                    continue;
                }
                let code = codec::delta_encode_u64(n as u64 + 1).expect("n + 1 >= 1");
                self.with_bits(&code, &mut |w: &mut Walker<'g>| w.stream(n, rest, k));
            }
        }
        self.buf.truncate(mark);
    }

    fn stream(&mut self, n: usize, rest: usize, k: Cont<'_, 'g>) {
        if n == 0 {
            if rest == 0 {
                k(self);
            }
            return;
        }
        for t in 3..=rest {
            if self.g.ok.instr[t] && self.g.ok.stream[n - 1][rest - t] {
                self.instruction(t, &mut |w: &mut Walker<'g>| w.stream(n - 1, rest - t, k));
            }
        }
    }

    fn instruction(&mut self, t: usize, k: Cont<'_, 'g>) {
        const PLAIN_OPS: [[bool; 3]; 5] = [
            [false, false, true],
            [false, true, false],
            [false, true, true],
            [true, false, false],
            [true, false, true],
        ];
        const OPERAND_OPS: [[bool; 3]; 3] = [[false, false, false], [true, true, false], [true, true, true]];
        if t == 3 {
            for op in PLAIN_OPS {
                self.with_bits(&op, k);
            }
        } else {
            for op in OPERAND_OPS {
                self.with_bits(&op, &mut |w: &mut Walker<'g>| w.any_delta(t - 3, k));
            }
        }
    }

    /// Every delta code of exactly `len` bits.
    fn any_delta(&mut self, len: usize, k: Cont<'_, 'g>) {
        for l in 1..=len as u64 + 1 {
            if gamma_len(l) + l as usize - 1 != len {
                continue;
            }
            let width = 64 - l.leading_zeros() as usize;
            let mut gamma = vec![false; width - 1];
            gamma.extend((0..width).rev().map(|i| l >> i & 1 == 1));
            self.with_bits(&gamma, &mut |w: &mut Walker<'g>| w.free_bits(l as usize - 1, k));
        }
    }

    fn free_bits(&mut self, count: usize, k: Cont<'_, 'g>) {
        if count == 0 {
            k(self);
            return;
        }
        for b in [false, true] {
            self.with_bits(&[b], &mut |w: &mut Walker<'g>| w.free_bits(count - 1, k));
        }
    }

    fn application(&mut self, len: usize, k: Cont<'_, 'g>) {
        let mark = self.buf.len();
        if self.push(&[true]) {
            for args in 1..self.g.ok.seq.len() {
                let header = 1 + delta_len_u64(args as u64);
                if header + 2 + 2 * args > len {
                    break;
                }
                let code = codec::delta_encode_u64(args as u64).expect("k >= 1");
                for h in 2..=len - header {
                    let rest = len - header - h;
                    if self.g.ok.plain[h] && self.g.ok.seq[args][rest] {
                        self.with_bits(&code, &mut |w: &mut Walker<'g>| {
                            w.plain(h, &mut |w: &mut Walker<'g>| w.sequence(args, rest, k))
                        });
                    }
                }
            }
        }
        self.buf.truncate(mark);
    }

    fn sequence(&mut self, count: usize, rest: usize, k: Cont<'_, 'g>) {
        if count == 0 {
            if rest == 0 {
                k(self);
            }
            return;
        }
        for first in 2..=rest {
            if self.g.ok.lstring[first] && self.g.ok.seq[count - 1][rest - first] {
                self.lstring(first, &mut |w: &mut Walker<'g>| w.sequence(count - 1, rest - first, k));
            }
        }
    }
}

/// All sentences of at most `max_len` bits that start with `prefix`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EnumerationShard {
    pub max_len: usize,
    pub prefix: Bits,
}

/// A disjoint cover of the enumeration: every length-`depth` prefix, plus
/// one shard per valid sentence shorter than `depth`. Shorter sentences
/// have no valid extensions, so the cover never emits anything twice.
pub fn shard_cover(grammar: &Grammar, max_len: usize, depth: usize) -> Vec<EnumerationShard> {
    let depth = depth.min(max_len);
    let mut shards = Vec::new();
    for len in 0..depth {
        grammar.visit_exact(len, &[], &mut |w| {
            shards.push(EnumerationShard { max_len, prefix: Bits::from_slice(w) })
        });
    }
    shards.sort_by(|a, b| a.prefix.cmp(&b.prefix));
    for p in 0u64..1 << depth {
        let prefix = (0..depth).rev().map(|i| p >> i & 1 == 1).collect();
        shards.push(EnumerationShard { max_len, prefix: Bits::from_vec(prefix) });
    }
    shards
}

/// Every valid sentence of at most `max_len` bits, length-lex ordered.
pub fn enumerate_lstrings(max_len: usize) -> Vec<Bits> {
    let g = Grammar::new(max_len);
    let mut out = Vec::new();
    for len in 0..=max_len {
        let start = out.len();
        g.visit_exact(len, &[], &mut |w| out.push(Bits::from_slice(w)));
        out[start..].sort();
    }
    out
}

pub fn count_valid(max_len: usize) -> BigUint {
    Grammar::new(max_len).count_upto(max_len)
}
