//! Finite binary strings.
//!
//! Strings order shorter-first, then lexicographically. That is the canonical
//! output order used everywhere in the crate, so `BTreeSet<BitString>` iterates
//! in canonical order for free.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn empty() -> Self {
        BitString { bits: Vec::new() }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitString { bits }
    }

    /// The string of length `len` spelling `value` in binary, most significant bit first.
    pub fn from_index(value: u64, len: usize) -> Self {
        let bits = (0..len).rev().map(|k| (value >> k) & 1 == 1).collect();
        BitString { bits }
    }

    pub fn zeros(len: usize) -> Self {
        BitString {
            bits: vec![false; len],
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn child(&self, bit: bool) -> BitString {
        let mut bits = Vec::with_capacity(self.bits.len() + 1);
        bits.extend_from_slice(&self.bits);
        bits.push(bit);
        BitString { bits }
    }

    pub fn children(&self) -> [BitString; 2] {
        [self.child(false), self.child(true)]
    }

    pub fn parent(&self) -> Option<BitString> {
        if self.bits.is_empty() {
            None
        } else {
            Some(self.prefix(self.bits.len() - 1))
        }
    }

    /// The initial segment of length `n` (clamped to the string's length).
    pub fn prefix(&self, n: usize) -> BitString {
        BitString {
            bits: self.bits[..n.min(self.bits.len())].to_vec(),
        }
    }

    /// All initial segments, shortest (the empty string) first, ending with `self`.
    pub fn prefixes(&self) -> impl Iterator<Item = BitString> + '_ {
        (0..=self.bits.len()).map(move |n| self.prefix(n))
    }

    /// `self ⊆ other`: self is an initial segment of other (not necessarily proper).
    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.bits.len() <= other.bits.len() && other.bits[..self.bits.len()] == self.bits[..]
    }

    pub fn is_proper_prefix_of(&self, other: &BitString) -> bool {
        self.bits.len() < other.bits.len() && self.is_prefix_of(other)
    }

    pub fn comparable(&self, other: &BitString) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        BitString { bits }
    }

    /// All strings of length exactly `len`, in canonical order.
    pub fn all_of_length(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < 64, "enumeration length {len} too large");
        (0..1u64 << len).map(move |v| BitString::from_index(v, len))
    }

    /// All strings of length at most `max_len`, in canonical order.
    pub fn all_up_to(max_len: usize) -> impl Iterator<Item = BitString> {
        (0..=max_len).flat_map(BitString::all_of_length)
    }

    /// Position in the canonical enumeration `e, 0, 1, 00, 01, ...`.
    pub fn canonical_index(&self) -> usize {
        let mut v = 0usize;
        for &b in &self.bits {
            v = (v << 1) | b as usize;
        }
        (1usize << self.bits.len()) - 1 + v
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bits
            .len()
            .cmp(&other.bits.len())
            .then_with(|| self.bits.cmp(&other.bits))
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits.is_empty() {
            return f.write_str("e");
        }
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "e" {
            return Ok(BitString::empty());
        }
        if s.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "empty token; write `e` for the empty string".into(),
            });
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse {
                    line: 0,
                    msg: format!("invalid bit {other:?} in {s:?}"),
                }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString::from_bits)
    }
}

/// Shorthand for tests and examples: `bs("010")`, `bs("e")`.
pub fn bs(s: &str) -> BitString {
    s.parse().expect("valid bit string literal")
}
