use std::fmt;

use super::BitString;
use crate::error::{Error, Result};

/// A growable bit sequence packed MSB-first into bytes.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct BitStream {
    bytes: Vec<u8>,
    len: usize,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    /// Takes the first `len` bits of `bytes`.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if len > bytes.len() * 8 {
            return Err(Error::Domain(format!(
                "bit length {len} exceeds the {} bits available",
                bytes.len() * 8
            )));
        }
        let mut bytes = bytes[..len.div_ceil(8)].to_vec();
        if len % 8 != 0 {
            let last = bytes.len() - 1;
            bytes[last] &= 0xFF << (8 - len % 8);
        }
        Ok(BitStream { bytes, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The packed bytes; unused trailing bits are zero.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % 8 == 0 {
            self.bytes.push(0);
        }
        if bit {
            let last = self.bytes.len() - 1;
            self.bytes[last] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    pub fn extend(&mut self, word: &BitString) {
        for b in word.iter() {
            self.push(b);
        }
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        (i < self.len).then(|| self.bytes[i / 8] & (0x80 >> (i % 8)) != 0)
    }

    /// Does `word` occur at `pos`? Positions past the end read as zero when
    /// `pad` is set and as a mismatch otherwise.
    pub fn matches_at(&self, pos: usize, word: &BitString, pad: bool) -> bool {
        word.iter().enumerate().all(|(i, b)| match self.get(pos + i) {
            Some(x) => x == b,
            None => pad && !b,
        })
    }

    /// Does `word` fit entirely inside the stream at `pos`?
    pub fn available(&self, pos: usize, word: &BitString) -> bool {
        pos + word.len() <= self.len
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i).unwrap())
    }
}

impl From<&BitString> for BitStream {
    fn from(w: &BitString) -> Self {
        let mut s = BitStream::new();
        s.extend(w);
        s
    }
}

impl std::str::FromStr for BitStream {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = BitStream::new();
        for c in s.trim().chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                '-' | 'λ' if out.is_empty() => {}
                other => return Err(Error::Domain(format!("invalid bit character {other:?}"))),
            }
        }
        Ok(out)
    }
}

impl fmt::Display for BitStream {
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

impl fmt::Debug for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitStream({self})")
    }
}
