//! Finite binary strings, sets of them, and the dyadic intervals they name.

mod interval;
mod stream;
mod word_set;

pub use interval::{Dyadic, DyadicInterval, IntervalSet};
pub use stream::BitStream;
pub use word_set::{ws, WordSet};

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A binary string of at most [`BitString::MAX_LEN`] bits.
///
/// The bits are held right-aligned in a `u64`, first bit most significant, so
/// `"011"` is stored as `len = 3, bits = 0b011`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    len: u8,
    bits: u64,
}

impl BitString {
    pub const MAX_LEN: usize = 64;

    /// The empty string λ.
    pub const EMPTY: BitString = BitString { len: 0, bits: 0 };

    /// Builds a string from the low `len` bits of `value`.
    pub fn new(value: u64, len: usize) -> Result<Self> {
        if len > Self::MAX_LEN {
            return Err(Error::Capacity { len, max: Self::MAX_LEN });
        }
        Ok(BitString { len: len as u8, bits: value & mask(len) })
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if bits.len() > Self::MAX_LEN {
            return Err(Error::Capacity { len: bits.len(), max: Self::MAX_LEN });
        }
        let value = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        Ok(BitString { len: bits.len() as u8, bits: value })
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The string read as an unsigned binary number.
    pub fn value(&self) -> u64 {
        self.bits
    }

    /// Bit `i`, counting from the front.
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len(), "bit index {i} out of range for length {}", self.len);
        (self.bits >> (self.len() - 1 - i)) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |i| self.bit(i))
    }

    /// Concatenation `self ⊕ other`.
    pub fn append(&self, other: &BitString) -> Result<BitString> {
        let len = self.len() + other.len();
        if len > Self::MAX_LEN {
            return Err(Error::Capacity { len, max: Self::MAX_LEN });
        }
        Ok(BitString { len: len as u8, bits: shl(self.bits, other.len()) | other.bits })
    }

    pub fn push(&self, bit: bool) -> Result<BitString> {
        self.append(&BitString { len: 1, bits: bit as u64 })
    }

    /// Removes `prefix` from the front of `self`.
    pub fn strip_prefix(&self, prefix: &BitString) -> Result<BitString> {
        if !prefix.is_prefix_of(self) {
            return Err(Error::Domain(format!("'{prefix}' is not a prefix of '{self}'")));
        }
        let len = self.len() - prefix.len();
        Ok(BitString { len: len as u8, bits: self.bits & mask(len) })
    }

    /// The first `len` bits.
    pub fn prefix(&self, len: usize) -> BitString {
        assert!(len <= self.len());
        BitString { len: len as u8, bits: shr(self.bits, self.len() - len) }
    }

    /// Complements every bit.
    pub fn flip(&self) -> BitString {
        BitString { len: self.len, bits: !self.bits & mask(self.len()) }
    }

    /// `self ⪯ other`: equal or a proper prefix.
    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.len <= other.len && shr(other.bits, other.len() - self.len()) == self.bits
    }

    /// One is a prefix of the other.
    pub fn comparable(&self, other: &BitString) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// The dyadic interval `[0.y1y2…yL, 0.y1y2…yL + 2^-L)`.
    pub fn interval(&self) -> DyadicInterval {
        let lo = Dyadic::new(self.bits as u128, self.len() as u32);
        let hi = Dyadic::new(self.bits as u128 + 1, self.len() as u32);
        DyadicInterval::new(lo, hi)
    }

    /// All strings of exactly `len` bits in increasing numeric order.
    pub fn all_of_len(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < Self::MAX_LEN);
        (0..1u64 << len).map(move |v| BitString { len: len as u8, bits: v })
    }
}

fn mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

fn shl(x: u64, n: usize) -> u64 {
    if n >= 64 {
        0
    } else {
        x << n
    }
}

fn shr(x: u64, n: usize) -> u64 {
    if n >= 64 {
        0
    } else {
        x >> n
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        let common = self.len.min(other.len) as usize;
        let a = shr(self.bits, self.len() - common);
        let b = shr(other.bits, other.len() - common);
        a.cmp(&b).then(self.len.cmp(&other.len))
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("-");
        }
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "'{}'", if self.is_empty() { "λ".to_string() } else { self.to_string() })
    }
}

impl FromStr for BitString {
    type Err = Error;

    /// Accepts `0`/`1` characters; `-`, `λ` and the empty string denote λ.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "-" || s == "λ" {
            return Ok(BitString::EMPTY);
        }
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Domain(format!("invalid bit character {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        BitString::from_bits(&bits)
    }
}

/// Shorthand for tests and examples: panics on malformed input.
pub fn bs(s: &str) -> BitString {
    s.parse().expect("valid bit string literal")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_display() {
        assert_eq!(bs("0110").to_string(), "0110");
        assert_eq!(bs("-"), BitString::EMPTY);
        assert_eq!(BitString::EMPTY.to_string(), "-");
        assert!("01a".parse::<BitString>().is_err());
    }

    #[test]
    fn append_and_strip() {
        assert_eq!(bs("01").append(&bs("10")).unwrap(), bs("0110"));
        assert_eq!(bs("0110").strip_prefix(&bs("01")).unwrap(), bs("10"));
        assert!(bs("0110").strip_prefix(&bs("1")).is_err());
        assert_eq!(BitString::EMPTY.append(&BitString::EMPTY).unwrap(), BitString::EMPTY);
    }

    #[test]
    fn append_overflow_is_capacity_error() {
        let long = BitString::new(u64::MAX, 64).unwrap();
        assert!(matches!(long.push(true), Err(Error::Capacity { len: 65, .. })));
        assert!(BitString::new(0, 65).is_err());
        let half = BitString::new(0b1, 32).unwrap();
        assert_eq!(half.append(&half).unwrap().len(), 64);
    }

    #[test]
    fn prefix_relations() {
        assert!(BitString::EMPTY.is_prefix_of(&bs("101")));
        assert!(bs("10").is_prefix_of(&bs("101")));
        assert!(!bs("11").is_prefix_of(&bs("101")));
        assert!(bs("101").comparable(&bs("10")));
        assert!(!bs("100").comparable(&bs("101")));
    }

    #[test]
    fn flip_complements() {
        assert_eq!(bs("0110").flip(), bs("1001"));
        assert_eq!(BitString::EMPTY.flip(), BitString::EMPTY);
    }

    #[test]
    fn ordering_is_lexicographic() {
        let mut v = vec![bs("1"), bs("01"), bs("0"), bs("-"), bs("00"), bs("011")];
        v.sort();
        let s: Vec<String> = v.iter().map(|b| b.to_string()).collect();
        assert_eq!(s, ["-", "0", "00", "01", "011", "1"]);
    }

    #[test]
    fn interval_of_string() {
        let i = bs("01").interval();
        assert_eq!(i.lo(), Dyadic::new(1, 2));
        assert_eq!(i.hi(), Dyadic::new(1, 1));
        let full = BitString::EMPTY.interval();
        assert_eq!(full.lo(), Dyadic::ZERO);
        assert_eq!(full.hi(), Dyadic::ONE);
    }

    fn arb_bits(max: usize) -> impl Strategy<Value = BitString> {
        prop::collection::vec(any::<bool>(), 0..=max).prop_map(|v| BitString::from_bits(&v).unwrap())
    }

    proptest! {
        #[test]
        fn append_then_strip_roundtrips(a in arb_bits(30), b in arb_bits(30)) {
            let ab = a.append(&b).unwrap();
            prop_assert_eq!(ab.len(), a.len() + b.len());
            prop_assert!(a.is_prefix_of(&ab));
            prop_assert_eq!(ab.strip_prefix(&a).unwrap(), b);
        }

        #[test]
        fn flip_is_involution(a in arb_bits(64)) {
            prop_assert_eq!(a.flip().flip(), a);
            prop_assert_eq!(a.to_string().parse::<BitString>().unwrap(), a);
        }

        #[test]
        fn prefix_iff_interval_containment(a in arb_bits(12), b in arb_bits(12)) {
            prop_assert_eq!(a.is_prefix_of(&b), a.interval().contains(&b.interval()));
            prop_assert_eq!(!a.comparable(&b), a.interval().is_disjoint(&b.interval()));
        }
    }
}
