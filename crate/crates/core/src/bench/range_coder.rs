//! Static-model range coder with 32-bit registers.
//!
//! The encoder keeps `low` in a 64-bit word so a carry out of bit 31 can be
//! detected and pushed back into the bytes already written. Frequencies are
//! scaled to a total of `2^16`.

use crate::error::{Error, Result};
use crate::source::SourceDistribution;

const TOTAL_BITS: u32 = 16;
pub const TOTAL: u32 = 1 << TOTAL_BITS;
const TOP: u64 = 1 << 24;
const MASK: u64 = 0xFFFF_FFFF;

/// Integer frequencies summing to [`TOTAL`], each at least 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyTable {
    freq: Vec<u32>,
    cum: Vec<u32>,
}

impl FrequencyTable {
    pub fn new(source: &SourceDistribution) -> Result<Self> {
        let m = source.len();
        if m > TOTAL as usize / 2 {
            return Err(Error::TooLarge(format!("{m} symbols do not fit a {TOTAL_BITS}-bit frequency table")));
        }
        let mut freq: Vec<u32> =
            source.probs().iter().map(|p| ((p * TOTAL as f64).round() as u32).max(1)).collect();
        // Put the rounding error on the largest entry, which stays well above 1.
        let sum: i64 = freq.iter().map(|&f| f as i64).sum();
        let big = (0..m).max_by_key(|&i| (freq[i], std::cmp::Reverse(i))).expect("non-empty");
        freq[big] = (freq[big] as i64 + TOTAL as i64 - sum) as u32;
        let mut cum = Vec::with_capacity(m + 1);
        cum.push(0);
        for f in &freq {
            cum.push(cum.last().expect("non-empty") + f);
        }
        Ok(FrequencyTable { freq, cum })
    }

    pub fn freq(&self, s: usize) -> u32 {
        self.freq[s]
    }

    pub fn len(&self) -> usize {
        self.freq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freq.is_empty()
    }

    fn symbol_at(&self, v: u32) -> usize {
        self.cum.partition_point(|&c| c <= v) - 1
    }
}

pub fn range_encode(table: &FrequencyTable, symbols: &[usize]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(symbols.len() / 2 + 8);
    let (mut low, mut range) = (0u64, MASK);
    for &s in symbols {
        if s >= table.len() {
            return Err(Error::UnknownSymbol { symbol: s, alphabet: table.len() });
        }
        let r = range >> TOTAL_BITS;
        low += r * table.cum[s] as u64;
        range = r * table.freq[s] as u64;
        if low > MASK {
            carry(&mut out);
            low &= MASK;
        }
        while range < TOP {
            out.push((low >> 24) as u8);
            low = (low << 8) & MASK;
            range <<= 8;
        }
    }
    for shift in [24, 16, 8, 0] {
        out.push((low >> shift) as u8);
    }
    Ok(out)
}

fn carry(out: &mut [u8]) {
    for b in out.iter_mut().rev() {
        *b = b.wrapping_add(1);
        if *b != 0 {
            return;
        }
    }
}

pub fn range_decode(table: &FrequencyTable, bytes: &[u8], count: usize) -> Result<Vec<usize>> {
    let mut pos = 0;
    let mut next = |decoded: usize| -> Result<u64> {
        let b = bytes.get(pos).copied().ok_or_else(|| Error::Decode {
            pos: pos * 8,
            decoded,
            reason: "range-coded stream is truncated".into(),
        })?;
        pos += 1;
        Ok(b as u64)
    };
    let mut code = 0u64;
    for _ in 0..4 {
        code = (code << 8) | next(0)?;
    }
    let mut range = MASK;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let r = range >> TOTAL_BITS;
        let v = code / r;
        if v >= TOTAL as u64 {
            return Err(Error::Decode { pos: 0, decoded: i, reason: "range-coded stream is corrupt".into() });
        }
        let s = table.symbol_at(v as u32);
        code -= r * table.cum[s] as u64;
        range = r * table.freq[s] as u64;
        if code >= range {
            return Err(Error::Decode { pos: 0, decoded: i, reason: "range-coded stream is corrupt".into() });
        }
        while range < TOP {
            code = ((code << 8) & MASK) | next(i + 1)?;
            range <<= 8;
        }
        out.push(s);
    }
    Ok(out)
}
