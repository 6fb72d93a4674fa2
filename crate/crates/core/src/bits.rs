//! Owned bit strings with the two textual renderings used throughout the
//! crate: plain ASCII (`"110101"`) and the compact `len:hex` form
//! (`"6:D4"`), where bits fill hex digits most-significant-bit first and
//! the unused tail of the last digit is zero.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use crate::error::BitsError;

/// A finite bit string. Ordered length-first, then lexicographically.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new() -> Self {
        Bits(Vec::new())
    }

    pub fn from_vec(bits: Vec<bool>) -> Self {
        Bits(bits)
    }

    pub fn from_slice(bits: &[bool]) -> Self {
        Bits(bits.to_vec())
    }

    /// Parses a string made only of ASCII `'0'` and `'1'`.
    pub fn from_ascii(s: &str) -> Result<Self, BitsError> {
        s.bytes()
            .enumerate()
            .map(|(i, c)| match c {
                b'0' => Ok(false),
                b'1' => Ok(true),
                _ => Err(BitsError::BadDigit { index: i, found: c as char }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Bits)
    }

    /// Parses the compact `len:hex` form.
    pub fn from_compact(s: &str) -> Result<Self, BitsError> {
        let (len, hex) = s
            .split_once(':')
            .ok_or_else(|| BitsError::BadCompact(s.to_string()))?;
        let len: usize = len
            .parse()
            .map_err(|_| BitsError::BadCompact(s.to_string()))?;
        if hex.len() != len.div_ceil(4) {
            return Err(BitsError::BadCompact(s.to_string()));
        }
        let mut bits = Vec::with_capacity(len);
        for (i, c) in hex.chars().enumerate() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| BitsError::BadCompact(s.to_string()))?;
            for j in 0..4 {
                let bit = nibble & (8 >> j) != 0;
                if 4 * i + j < len {
                    bits.push(bit);
                } else if bit {
                    // padding must be zero so the compact form is canonical
                    return Err(BitsError::BadCompact(s.to_string()));
                }
            }
        }
        Ok(Bits(bits))
    }

    /// Accepts either rendering, using `':'` to tell them apart.
    pub fn parse_any(s: &str) -> Result<Self, BitsError> {
        if s.contains(':') {
            Self::from_compact(s)
        } else {
            Self::from_ascii(s)
        }
    }

    pub fn to_ascii(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn to_compact(&self) -> String {
        let mut out = format!("{}:", self.0.len());
        for chunk in self.0.chunks(4) {
            let nibble = chunk
                .iter()
                .enumerate()
                .fold(0u32, |acc, (j, &b)| acc | (u32::from(b) << (3 - j)));
            out.push(char::from_digit(nibble, 16).unwrap().to_ascii_uppercase());
        }
        out
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn extend_from_slice(&mut self, bits: &[bool]) {
        self.0.extend_from_slice(bits);
    }

    pub fn into_vec(self) -> Vec<bool> {
        self.0
    }
}

/// Length-then-lexicographic comparison on raw slices.
pub fn length_lex_cmp(a: &[bool], b: &[bool]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl Ord for Bits {
    fn cmp(&self, other: &Self) -> Ordering {
        length_lex_cmp(&self.0, &other.0)
    }
}

impl PartialOrd for Bits {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Deref for Bits {
    type Target = [bool];

    fn deref(&self) -> &[bool] {
        &self.0
    }
}

impl From<&[bool]> for Bits {
    fn from(bits: &[bool]) -> Self {
        Bits::from_slice(bits)
    }
}

impl FromStr for Bits {
    type Err = BitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Bits::parse_any(s)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ascii())
    }
}

impl serde::Serialize for Bits {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_ascii())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits(\"{}\")", self.to_ascii())
    }
}
