use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::{BitString, DyadicInterval, IntervalSet};
use crate::error::{Error, Result};

/// A finite set of binary strings in lexicographic order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct WordSet {
    words: BTreeSet<BitString>,
}

impl WordSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// The set `{λ}`.
    pub fn lambda() -> Self {
        Self::from_iter([BitString::EMPTY])
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, w: &BitString) -> bool {
        self.words.contains(w)
    }

    pub fn insert(&mut self, w: BitString) -> bool {
        self.words.insert(w)
    }

    pub fn iter(&self) -> impl Iterator<Item = &BitString> + '_ {
        self.words.iter()
    }

    pub fn to_vec(&self) -> Vec<BitString> {
        self.words.iter().copied().collect()
    }

    pub fn max_len(&self) -> usize {
        self.words.iter().map(|w| w.len()).max().unwrap_or(0)
    }

    /// The shortest member, ties broken towards the lexicographically smallest.
    pub fn shortest(&self) -> Option<BitString> {
        self.words.iter().copied().min_by_key(|w| (w.len(), *w))
    }

    pub fn union(&self, other: &WordSet) -> WordSet {
        WordSet { words: self.words.union(&other.words).copied().collect() }
    }

    /// No member is a proper prefix of another.
    pub fn is_prefix_free(&self) -> bool {
        // In lexicographic order a prefix sorts immediately before some extension of it.
        let v = self.to_vec();
        v.windows(2).all(|p| !p[0].is_prefix_of(&p[1]))
    }

    /// `w ⊕ W`.
    pub fn prepend(&self, w: &BitString) -> Result<WordSet> {
        self.words.iter().map(|x| w.append(x)).collect()
    }

    /// `w ⊘ W`: strips `w` from every member.
    pub fn strip_prefix(&self, w: &BitString) -> Result<WordSet> {
        self.words.iter().map(|x| x.strip_prefix(w)).collect()
    }

    pub fn flip(&self) -> WordSet {
        self.words.iter().map(|w| w.flip()).collect()
    }

    /// Longest common prefix of all members.
    pub fn common_prefix(&self) -> Result<BitString> {
        let (first, last) = match (self.words.first(), self.words.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::Domain("common prefix of an empty set".into())),
        };
        // The first and last members in lexicographic order bound every other member.
        let mut n = 0;
        while n < first.len() && n < last.len() && first.bit(n) == last.bit(n) {
            n += 1;
        }
        Ok(first.prefix(n))
    }

    /// Every prefix of a member that is "full": each of its extensions is
    /// comparable with some member. Only strings of length at most
    /// `depth_bound` are returned.
    pub fn full(&self, depth_bound: usize) -> WordSet {
        let v = self.to_vec();
        let mut out = WordSet::new();
        if !v.is_empty() {
            full_nodes(BitString::EMPTY, &v, false, depth_bound, &mut out);
        }
        out
    }

    /// The minimal elements of [`WordSet::full`]: the unique prefix-free set of
    /// topmost full nodes.
    pub fn reduce(&self) -> WordSet {
        let v = self.to_vec();
        let mut out = WordSet::new();
        if !v.is_empty() {
            reduce_nodes(BitString::EMPTY, &v, &mut out);
        }
        out
    }

    /// All `n`-bit strings that extend some member. Members longer than `n` are an error.
    pub fn extend_to(&self, n: usize) -> Result<WordSet> {
        let mut out = WordSet::new();
        for w in &self.words {
            if w.len() > n {
                return Err(Error::Domain(format!("'{w}' is longer than {n} bits")));
            }
            for tail in BitString::all_of_len(n - w.len()) {
                out.insert(w.append(&tail)?);
            }
        }
        Ok(out)
    }

    pub fn intervals(&self) -> IntervalSet {
        IntervalSet::from_intervals(self.words.iter().map(BitString::interval))
    }

    pub fn interval_list(&self) -> Vec<DyadicInterval> {
        self.words.iter().map(BitString::interval).collect()
    }
}

/// Splits members sharing `prefix` into (is prefix itself a member, 0-branch, 1-branch).
fn split<'a>(prefix: &BitString, members: &'a [BitString]) -> (bool, &'a [BitString], &'a [BitString]) {
    let (is_member, rest) = match members.first() {
        Some(w) if w == prefix => (true, &members[1..]),
        _ => (false, members),
    };
    let at = rest.partition_point(|w| !w.bit(prefix.len()));
    (is_member, &rest[..at], &rest[at..])
}

/// `covered` records that some ancestor of `prefix` is itself a member.
fn full_nodes(prefix: BitString, members: &[BitString], covered: bool, bound: usize, out: &mut WordSet) -> bool {
    let (is_member, zeros, ones) = split(&prefix, members);
    let mut child_full = [false, false];
    for (bit, sub) in [(false, zeros), (true, ones)] {
        if !sub.is_empty() {
            let child = prefix.push(bit).expect("child of a member prefix fits");
            child_full[bit as usize] = full_nodes(child, sub, covered || is_member, bound, out);
        }
    }
    let full = covered || is_member || (child_full[0] && child_full[1]);
    if full && prefix.len() <= bound {
        out.insert(prefix);
    }
    full
}

fn reduce_nodes(prefix: BitString, members: &[BitString], out: &mut WordSet) -> bool {
    let (is_member, zeros, ones) = split(&prefix, members);
    let mut below = WordSet::new();
    let mut child_full = [false, false];
    if !is_member {
        for (bit, sub) in [(false, zeros), (true, ones)] {
            if !sub.is_empty() {
                let child = prefix.push(bit).expect("child of a member prefix fits");
                child_full[bit as usize] = reduce_nodes(child, sub, &mut below);
            }
        }
    }
    let full = is_member || (child_full[0] && child_full[1]);
    if full {
        out.insert(prefix);
    } else {
        out.words.extend(below.words);
    }
    full
}

impl FromIterator<BitString> for WordSet {
    fn from_iter<I: IntoIterator<Item = BitString>>(iter: I) -> Self {
        WordSet { words: iter.into_iter().collect() }
    }
}

impl<'a> FromIterator<&'a BitString> for WordSet {
    fn from_iter<I: IntoIterator<Item = &'a BitString>>(iter: I) -> Self {
        WordSet { words: iter.into_iter().copied().collect() }
    }
}

impl fmt::Display for WordSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.words.iter().map(|w| w.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl fmt::Debug for WordSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl FromStr for WordSet {
    type Err = Error;

    /// Comma-separated members, e.g. `01,1`; `-` is λ.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('{').trim_end_matches('}');
        if s.is_empty() {
            return Ok(WordSet::new());
        }
        s.split(',').map(|p| p.trim().trim_matches('\'').parse::<BitString>()).collect()
    }
}

/// Shorthand for tests and examples: panics on malformed input.
pub fn ws(s: &str) -> WordSet {
    s.parse().expect("valid word set literal")
}
