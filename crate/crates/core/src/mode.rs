//! Modes: the sets of strings a code tree's expansions must exactly cover,
//! the basic and continuous families, and their canonical orderings.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::bits::{BitString, Dyadic, DyadicInterval, WordSet};
use crate::error::{Error, Result};

/// Largest delay for which the full basic family is enumerated.
pub const MAX_BASIC_N: usize = 4;
/// Largest delay for which continuous modes are enumerated.
pub const MAX_CONTINUOUS_N: usize = 8;

/// A basic mode of an `n`-bit-delay code: a reduced, prefix-free set of
/// strings of length at most `n` that is either `{λ}` or has members starting
/// with both `0` and `1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode {
    words: WordSet,
    n: usize,
}

impl Mode {
    pub fn new(words: WordSet, n: usize) -> Result<Self> {
        check_basic(&words, n)?;
        Ok(Mode { words, n })
    }

    /// The mode `{λ}`.
    pub fn lambda(n: usize) -> Self {
        Mode { words: WordSet::lambda(), n }
    }

    /// `f_red(('0' ⊕ lower) ∪ ('1' ⊕ upper))` for non-empty subsets of the
    /// `(n-1)`-bit strings.
    pub fn from_halves(lower: &WordSet, upper: &WordSet, n: usize) -> Result<Self> {
        if n == 0 || lower.is_empty() || upper.is_empty() {
            return Err(Error::InvalidMode("both halves of a basic mode must be non-empty".into()));
        }
        if lower.iter().chain(upper.iter()).any(|w| w.len() != n - 1) {
            return Err(Error::InvalidMode(format!("halves must hold {}-bit strings", n - 1)));
        }
        let words = lower
            .prepend(&BitString::EMPTY.push(false)?)?
            .union(&upper.prepend(&BitString::EMPTY.push(true)?)?)
            .reduce();
        Mode::new(words, n)
    }

    pub fn words(&self) -> &WordSet {
        &self.words
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_lambda(&self) -> bool {
        self.words.len() == 1 && self.words.contains(&BitString::EMPTY)
    }

    /// The `n`-bit strings covered by the mode.
    pub fn leaves(&self) -> WordSet {
        self.words.extend_to(self.n).expect("mode members fit in n bits")
    }

    pub fn leaf_count(&self) -> usize {
        self.words.iter().map(|w| 1usize << (self.n - w.len())).sum()
    }

    pub fn flip(&self) -> Mode {
        Mode { words: self.words.flip(), n: self.n }
    }

    /// The shortest member; used as the terminating query when encoding stops.
    pub fn termination_word(&self) -> BitString {
        self.words.shortest().expect("modes are non-empty")
    }

    pub fn continuous_id(&self) -> Option<ContinuousModeId> {
        id_of_mode(self)
    }
}

fn check_basic(words: &WordSet, n: usize) -> Result<()> {
    if words.is_empty() {
        return Err(Error::InvalidMode("a mode cannot be empty".into()));
    }
    if let Some(w) = words.iter().find(|w| w.len() > n) {
        return Err(Error::InvalidMode(format!("'{w}' is longer than the delay bound {n}")));
    }
    if !words.is_prefix_free() {
        return Err(Error::InvalidMode(format!("{{{words}}} is not prefix-free")));
    }
    if words.reduce() != *words {
        return Err(Error::InvalidMode(format!("{{{words}}} is not reduced")));
    }
    let is_lambda = words.len() == 1 && words.contains(&BitString::EMPTY);
    if !is_lambda && words.common_prefix()?.len() > 0 {
        return Err(Error::InvalidMode(format!("{{{words}}} members share a first bit")));
    }
    Ok(())
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.words)
    }
}

impl fmt::Debug for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mode{{{}}}", self.words)
    }
}

/// Every basic mode for delay `n`, in canonical order (`{λ}` first).
pub fn enumerate_basic_modes(n: usize) -> Result<Vec<Mode>> {
    if n == 0 || n > MAX_BASIC_N {
        return Err(Error::TooLarge(format!(
            "basic mode enumeration supports 1 <= N <= {MAX_BASIC_N}, got {n}"
        )));
    }
    let half: Vec<BitString> = BitString::all_of_len(n - 1).collect();
    let subsets = |mask: u64| -> WordSet {
        half.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, w)| *w).collect()
    };
    let count = 1u64 << half.len();
    let mut out = Vec::with_capacity(((count - 1) * (count - 1)) as usize);
    for a in 1..count {
        let lower = subsets(a);
        for b in 1..count {
            out.push(Mode::from_halves(&lower, &subsets(b), n)?);
        }
    }
    out.sort();
    Ok(out)
}

/// A continuous mode `(k1, k2)`: its leaves form one contiguous run, cut
/// `k1` leaves short at the left end and `k2` at the right end.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct ContinuousModeId {
    pub k1: u32,
    pub k2: u32,
}

impl ContinuousModeId {
    pub const ZERO: ContinuousModeId = ContinuousModeId { k1: 0, k2: 0 };

    pub fn new(k1: u32, k2: u32) -> Self {
        ContinuousModeId { k1, k2 }
    }

    pub fn flip(&self) -> Self {
        ContinuousModeId { k1: self.k2, k2: self.k1 }
    }

    /// Position in the canonical `(k1, k2)` ordering for delay `n`.
    pub fn index(&self, n: usize) -> usize {
        (self.k1 as usize) * half(n) + self.k2 as usize
    }

    pub fn from_index(index: usize, n: usize) -> Self {
        ContinuousModeId { k1: (index / half(n)) as u32, k2: (index % half(n)) as u32 }
    }

    pub fn is_valid(&self, n: usize) -> bool {
        n >= 1 && (self.k1 as usize) < half(n) && (self.k2 as usize) < half(n)
    }

    /// `[k1 / 2^n, 1 - k2 / 2^n)`.
    pub fn interval(&self, n: usize) -> DyadicInterval {
        let full = 1u128 << n;
        DyadicInterval::new(
            Dyadic::new(self.k1 as u128, n as u32),
            Dyadic::new(full - self.k2 as u128, n as u32),
        )
    }

    /// Number of `n`-bit leaves in the mode, `2^n - k1 - k2`.
    pub fn leaf_count(&self, n: usize) -> usize {
        (1usize << n) - self.k1 as usize - self.k2 as usize
    }
}

fn half(n: usize) -> usize {
    1usize << (n - 1)
}

impl fmt::Display for ContinuousModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k1, self.k2)
    }
}

impl FromStr for ContinuousModeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut parts = inner.split(',').map(|p| p.trim().parse::<u32>());
        match (parts.next(), parts.next(), parts.next()) {
            (Some(Ok(k1)), Some(Ok(k2)), None) => Ok(ContinuousModeId { k1, k2 }),
            _ => Err(Error::Domain(format!("invalid continuous mode id {s:?}"))),
        }
    }
}

/// All continuous modes for delay `n`, ordered by `(k1, k2)`.
pub fn enumerate_continuous_modes(n: usize) -> Result<Vec<ContinuousModeId>> {
    if n == 0 || n > MAX_CONTINUOUS_N {
        return Err(Error::TooLarge(format!(
            "continuous mode enumeration supports 1 <= N <= {MAX_CONTINUOUS_N}, got {n}"
        )));
    }
    Ok((0..half(n) * half(n)).map(|i| ContinuousModeId::from_index(i, n)).collect())
}

/// The basic mode with continuous id `id`.
///
/// The `0`-side leaf `0y` is numbered by `y` read in binary and kept when its
/// number is at least `k1`; the `1`-side leaf `1y` is numbered by the
/// complement of `y` and kept when its number is at least `k2`.
pub fn mode_from_id(id: ContinuousModeId, n: usize) -> Result<Mode> {
    if !id.is_valid(n) {
        return Err(Error::InvalidMode(format!("{id} is not a continuous mode for N={n}")));
    }
    let h = half(n) as u64;
    let mut leaves = WordSet::new();
    for y in BitString::all_of_len(n - 1) {
        if y.value() >= id.k1 as u64 {
            leaves.insert(BitString::EMPTY.push(false)?.append(&y)?);
        }
        if h - 1 - y.value() >= id.k2 as u64 {
            leaves.insert(BitString::EMPTY.push(true)?.append(&y)?);
        }
    }
    Mode::new(leaves.reduce(), n)
}

/// The continuous id of `mode`, or `None` if its leaves are not contiguous.
pub fn id_of_mode(mode: &Mode) -> Option<ContinuousModeId> {
    let n = mode.n() as u32;
    let single = mode.words().intervals().as_single()?;
    let k1 = single.lo().scaled(n)?;
    let k2 = (1u128 << n) - single.hi().scaled(n)?;
    Some(ContinuousModeId { k1: k1 as u32, k2: k2 as u32 })
}

pub fn flip_mode(mode: &Mode) -> Mode {
    mode.flip()
}

/// Which set of modes a forest may draw its trees from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// All continuous modes for the delay.
    Continuous,
    /// `(0,0)` and `(2^i, 0)`: the AIFV-m family.
    AifvM,
    /// Every basic mode.
    Basic,
}

/// An ordered list of modes with lookup by word set and flip partner.
///
/// Index 0 is always `{λ}`.
#[derive(Clone, Debug)]
pub struct ModeFamily {
    kind: FamilyKind,
    n: usize,
    modes: Vec<Mode>,
    ids: Vec<Option<ContinuousModeId>>,
    index: HashMap<WordSet, usize>,
    flips: Vec<Option<usize>>,
}

impl ModeFamily {
    pub fn continuous(n: usize) -> Result<Self> {
        let ids = enumerate_continuous_modes(n)?;
        Self::from_modes(FamilyKind::Continuous, n, ids.iter().map(|&id| mode_from_id(id, n)).collect::<Result<_>>()?)
    }

    /// The AIFV-m family for `m >= 1`, as an `m`-bit-delay family.
    pub fn aifv_m(m: usize) -> Result<Self> {
        let mut ids = vec![ContinuousModeId::ZERO];
        for i in 0..m.saturating_sub(1) {
            ids.push(ContinuousModeId::new(1 << i, 0));
        }
        let modes = ids.iter().map(|&id| mode_from_id(id, m)).collect::<Result<_>>()?;
        Self::from_modes(FamilyKind::AifvM, m, modes)
    }

    pub fn basic(n: usize) -> Result<Self> {
        Self::from_modes(FamilyKind::Basic, n, enumerate_basic_modes(n)?)
    }

    fn from_modes(kind: FamilyKind, n: usize, mut modes: Vec<Mode>) -> Result<Self> {
        if kind != FamilyKind::Basic {
            modes.sort_by_key(|m| id_of_mode(m).expect("continuous family"));
        } else {
            modes.sort();
        }
        if !modes.first().is_some_and(Mode::is_lambda) {
            return Err(Error::InvalidMode("a mode family must contain {λ}".into()));
        }
        let index: HashMap<WordSet, usize> =
            modes.iter().enumerate().map(|(i, m)| (m.words().clone(), i)).collect();
        let flips = modes.iter().map(|m| index.get(m.flip().words()).copied()).collect();
        let ids = modes.iter().map(id_of_mode).collect();
        Ok(ModeFamily { kind, n, modes, ids, index, flips })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn mode(&self, i: usize) -> &Mode {
        &self.modes[i]
    }

    pub fn continuous_id(&self, i: usize) -> Option<ContinuousModeId> {
        self.ids[i]
    }

    pub fn index_of(&self, words: &WordSet) -> Option<usize> {
        self.index.get(words).copied()
    }

    pub fn index_of_id(&self, id: ContinuousModeId) -> Option<usize> {
        self.ids.iter().position(|x| *x == Some(id))
    }

    /// Index of the flipped mode, if the family contains it.
    pub fn flip_index(&self, i: usize) -> Option<usize> {
        self.flips[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::{bs, ws};

    fn leaf_count_oracle(n: usize) -> usize {
        // Independent count: distinct reduced forms over all ordered pairs of non-empty halves.
        let half: Vec<BitString> = BitString::all_of_len(n - 1).collect();
        let mut seen = std::collections::BTreeSet::new();
        for a in 1u32..(1 << half.len()) {
            for b in 1u32..(1 << half.len()) {
                let mut all = WordSet::new();
                for (i, w) in half.iter().enumerate() {
                    if a >> i & 1 == 1 {
                        all.insert(bs("0").append(w).unwrap());
                    }
                    if b >> i & 1 == 1 {
                        all.insert(bs("1").append(w).unwrap());
                    }
                }
                seen.insert(all.reduce());
            }
        }
        seen.len()
    }

    #[test]
    fn basic_mode_counts() {
        assert_eq!(enumerate_basic_modes(1).unwrap().len(), 1);
        assert_eq!(enumerate_basic_modes(2).unwrap().len(), 9);
        assert_eq!(enumerate_basic_modes(3).unwrap().len(), 225);
        for n in 1..=3 {
            assert_eq!(enumerate_basic_modes(n).unwrap().len(), leaf_count_oracle(n));
        }
        assert!(matches!(enumerate_basic_modes(5), Err(Error::TooLarge(_))));
    }

    #[test]
    fn basic_modes_start_with_lambda_and_are_distinct() {
        let modes = enumerate_basic_modes(3).unwrap();
        assert!(modes[0].is_lambda());
        let set: std::collections::BTreeSet<_> = modes.iter().collect();
        assert_eq!(set.len(), modes.len());
    }

    #[test]
    fn continuous_counts_and_examples() {
        assert_eq!(enumerate_continuous_modes(2).unwrap().len(), 4);
        assert_eq!(enumerate_continuous_modes(3).unwrap().len(), 16);
        assert!(mode_from_id(ContinuousModeId::ZERO, 3).unwrap().is_lambda());
        assert_eq!(mode_from_id(ContinuousModeId::new(1, 0), 2).unwrap().words(), &ws("01,1"));
        let m = mode_from_id(ContinuousModeId::new(2, 1), 3).unwrap();
        assert_eq!(m.words(), &ws("01,10,110"));
        let i = ContinuousModeId::new(2, 1).interval(3);
        assert_eq!((i.lo(), i.hi()), (Dyadic::new(1, 2), Dyadic::new(7, 3)));
        assert_eq!(m.words().intervals().as_single(), Some(i));
    }

    #[test]
    fn id_roundtrip_and_non_continuous() {
        for n in 1..=4 {
            for id in enumerate_continuous_modes(n).unwrap() {
                let m = mode_from_id(id, n).unwrap();
                assert_eq!(id_of_mode(&m), Some(id));
                assert_eq!(m.leaf_count(), id.leaf_count(n));
            }
        }
        let m = Mode::new(ws("00,11"), 2).unwrap();
        assert_eq!(id_of_mode(&m), None);
    }

    #[test]
    fn continuous_count_matches_basic_filter() {
        for n in 1..=3 {
            let c = enumerate_basic_modes(n).unwrap().iter().filter(|m| id_of_mode(m).is_some()).count();
            assert_eq!(c, enumerate_continuous_modes(n).unwrap().len());
        }
    }

    #[test]
    fn flip_swaps_ids() {
        let m = mode_from_id(ContinuousModeId::new(2, 1), 3).unwrap();
        assert_eq!(id_of_mode(&flip_mode(&m)), Some(ContinuousModeId::new(1, 2)));
    }

    #[test]
    fn rejects_non_basic_sets() {
        assert!(Mode::new(ws("0,1"), 2).is_err());
        assert!(Mode::new(ws("00,01"), 2).is_err());
        assert!(Mode::new(ws("0,01,1"), 2).is_err());
        assert!(Mode::new(ws("000,1"), 2).is_err());
        assert!(Mode::new(ws("0"), 2).is_err());
        assert!(Mode::new(ws("-"), 2).is_ok());
    }

    #[test]
    fn id_text_form() {
        let id: ContinuousModeId = "(2,1)".parse().unwrap();
        assert_eq!(id, ContinuousModeId::new(2, 1));
        assert_eq!(id.to_string(), "(2,1)");
        assert_eq!(mode_from_id(ContinuousModeId::new(1, 0), 2).unwrap().to_string(), "01,1");
    }

    #[test]
    fn families() {
        let c = ModeFamily::continuous(3).unwrap();
        assert_eq!(c.len(), 16);
        for i in 0..c.len() {
            let id = c.continuous_id(i).unwrap();
            assert_eq!(id.index(3), i);
            assert_eq!(c.flip_index(i), Some(id.flip().index(3)));
        }
        let a = ModeFamily::aifv_m(3).unwrap();
        let ids: Vec<_> = (0..a.len()).map(|i| a.continuous_id(i).unwrap()).collect();
        assert_eq!(ids, [ContinuousModeId::new(0, 0), ContinuousModeId::new(1, 0), ContinuousModeId::new(2, 0)]);
        assert_eq!(a.flip_index(1), None);
        let b = ModeFamily::basic(2).unwrap();
        assert_eq!(b.len(), 9);
        assert!(b.mode(0).is_lambda());
    }
}
