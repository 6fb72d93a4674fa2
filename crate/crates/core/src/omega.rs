//! Exact lower approximations of the time-limited halting probability
//! `Ω_{P_T} = Σ 2^-|w|` over sentences that halt within their budget.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::Error;
use crate::scan::{scan, Scan, ScanOptions};
use crate::submachine::Budget;

/// `numerator / 2^log2_denominator`, always in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct DyadicRational {
    numerator: BigUint,
    log2_denominator: u64,
}

impl DyadicRational {
    pub fn zero() -> Self {
        DyadicRational::default()
    }

    pub fn one() -> Self {
        DyadicRational { numerator: BigUint::one(), log2_denominator: 0 }
    }

    pub fn new(numerator: BigUint, log2_denominator: u64) -> Self {
        let mut r = DyadicRational { numerator, log2_denominator };
        r.normalize();
        r
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u64) -> Self {
        DyadicRational { numerator: BigUint::one(), log2_denominator: k }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn log2_denominator(&self) -> u64 {
        self.log2_denominator
    }

    fn normalize(&mut self) {
        if self.numerator.is_zero() {
            self.log2_denominator = 0;
            return;
        }
        let tz = self.numerator.trailing_zeros().unwrap_or(0).min(self.log2_denominator);
        self.numerator >>= tz;
        self.log2_denominator -= tz;
    }

    fn aligned(&self, k: u64) -> BigUint {
        &self.numerator << (k - self.log2_denominator)
    }

    /// Decimal expansion truncated to `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.numerator.is_zero() {
            return "0".into();
        }
        // value = numerator * 5^k / 10^k
        let k = self.log2_denominator as usize;
        let scaled = (&self.numerator * BigUint::from(5u32).pow(k as u32)).to_string();
        let (int_part, frac_part) = if scaled.len() > k {
            let split = scaled.len() - k;
            (scaled[..split].to_string(), scaled[split..].to_string())
        } else {
            ("0".to_string(), "0".repeat(k - scaled.len()) + &scaled)
        };
        let lead = if int_part != "0" {
            int_part.len()
        } else {
            frac_part.len() - frac_part.trim_start_matches('0').len()
        };
        let keep = if int_part != "0" { digits.saturating_sub(lead) } else { lead + digits };
        let frac: String = frac_part.chars().take(keep).collect();
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            int_part
        } else {
            format!("{int_part}.{frac}")
        }
    }
}

impl Add for &DyadicRational {
    type Output = DyadicRational;

    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        let k = self.log2_denominator.max(rhs.log2_denominator);
        DyadicRational::new(self.aligned(k) + rhs.aligned(k), k)
    }
}

impl Add for DyadicRational {
    type Output = DyadicRational;

    fn add(self, rhs: DyadicRational) -> DyadicRational {
        &self + &rhs
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let k = self.log2_denominator.max(other.log2_denominator);
        self.aligned(k).cmp(&other.aligned(k))
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.log2_denominator)
    }
}

impl Serialize for DyadicRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OmegaReport {
    pub n: usize,
    pub budget_id: String,
    pub value: DyadicRational,
    pub halted: u64,
    pub timed_out: u64,
}

/// `Σ count_L · 2^-L` over a histogram indexed by length.
pub fn weighted_sum(counts: impl IntoIterator<Item = (usize, u64)>) -> DyadicRational {
    counts
        .into_iter()
        .filter(|&(_, c)| c > 0)
        .map(|(len, c)| DyadicRational::new(BigUint::from(c), len as u64))
        .fold(DyadicRational::zero(), |a, b| a + b)
}

pub fn omega_from_scan(scan: &Scan, n: usize) -> OmegaReport {
    let levels = &scan.levels[..=n];
    OmegaReport {
        n,
        budget_id: scan.budget_id.clone(),
        value: weighted_sum(levels.iter().enumerate().map(|(len, l)| (len, l.halted))),
        halted: levels.iter().map(|l| l.halted).sum(),
        timed_out: levels.iter().map(|l| l.timed_out).sum(),
    }
}

/// Exact lower approximation from every sentence of at most `n` bits.
pub fn omega_lower(n: usize, budget: &Budget, opts: &ScanOptions<'_>) -> Result<OmegaReport, Error> {
    Ok(omega_from_scan(&scan(n, budget, opts)?, n))
}

/// `Σ 2^-|w|` over every valid sentence of at most `n` bits.
pub fn kraft_sum(n: usize) -> DyadicRational {
    let g = crate::enumeration::Grammar::new(n);
    (0..=n)
        .map(|len| DyadicRational::new(g.count_exact(len), len as u64))
        .fold(DyadicRational::zero(), |a, b| a + b)
}
