//! Huffman and extended Huffman baselines.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::forest::{CodeForest, CodeTree, TreeEntry};
use crate::mode::Mode;
use crate::source::SourceDistribution;

/// Largest block alphabet `M^n` accepted by [`extended_huffman`].
pub const MAX_BLOCK_ALPHABET: usize = 1_000_000;

/// Total-ordered heap key: weight, then creation order (later first).
#[derive(PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

/// Optimal prefix-code lengths. Ties merge the latest-created nodes first,
/// so the result is deterministic.
pub fn huffman_lengths(probs: &[f64]) -> Vec<usize> {
    let n = probs.len();
    if n == 1 {
        return vec![1];
    }
    let mut parent = vec![usize::MAX; 2 * n - 1];
    let mut heap: BinaryHeap<Reverse<Key>> = probs.iter().enumerate().map(|(i, &p)| Reverse(Key(p, i))).collect();
    let mut next = n;
    while heap.len() > 1 {
        let Reverse(Key(pa, a)) = heap.pop().expect("two nodes");
        let Reverse(Key(pb, b)) = heap.pop().expect("two nodes");
        parent[a] = next;
        parent[b] = next;
        heap.push(Reverse(Key(pa + pb, next)));
        next += 1;
    }
    (0..n)
        .map(|i| {
            let (mut d, mut v) = (0, i);
            while parent[v] != usize::MAX {
                v = parent[v];
                d += 1;
            }
            d
        })
        .collect()
}

/// Canonical codewords for the given lengths (shorter first, then by index).
pub fn canonical_codewords(lengths: &[usize]) -> Result<Vec<BitString>> {
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by_key(|&i| (lengths[i], i));
    let mut out = vec![BitString::EMPTY; lengths.len()];
    let (mut code, mut len) = (0u64, 0usize);
    for (rank, &i) in order.iter().enumerate() {
        if rank > 0 {
            code += 1;
        }
        code <<= lengths[i] - len;
        len = lengths[i];
        out[i] = BitString::new(code, len)?;
    }
    Ok(out)
}

/// The Huffman code as a one-tree forest with mode `{λ}`.
pub fn huffman(source: &SourceDistribution) -> Result<CodeForest> {
    let words = canonical_codewords(&huffman_lengths(source.probs()))?;
    let entries = words.into_iter().map(|codeword| TreeEntry { codeword, link: 0 }).collect();
    CodeForest::new(1, source.len(), vec![CodeTree::new(entries, Mode::lambda(1))])
}

pub fn huffman_expected_length(source: &SourceDistribution) -> f64 {
    huffman_lengths(source.probs()).iter().zip(source.probs()).map(|(&l, p)| l as f64 * p).sum()
}

/// Huffman code over blocks of `n` symbols. Only lengths are kept: block
/// codewords of very skewed sources can exceed 64 bits.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedHuffman {
    pub block: usize,
    pub alphabet: usize,
    /// Indexed by `Σ a_i M^(n-1-i)`.
    pub lengths: Vec<usize>,
    /// Plain Huffman lengths, used for a trailing partial block.
    pub tail_lengths: Vec<usize>,
    pub per_symbol: f64,
}

impl ExtendedHuffman {
    /// Encoded length of a sequence in bits.
    pub fn encoded_bits(&self, symbols: &[usize]) -> usize {
        let mut chunks = symbols.chunks_exact(self.block);
        let mut bits: usize = chunks
            .by_ref()
            .map(|c| self.lengths[c.iter().fold(0, |acc, &a| acc * self.alphabet + a)])
            .sum();
        bits += chunks.remainder().iter().map(|&a| self.tail_lengths[a]).sum::<usize>();
        bits
    }

    /// Number of codewords held.
    pub fn codebook_size(&self) -> usize {
        self.lengths.len()
    }
}

pub fn extended_huffman(source: &SourceDistribution, n: usize) -> Result<ExtendedHuffman> {
    if n == 0 {
        return Err(Error::Domain("block length must be at least 1".into()));
    }
    let m = source.len();
    let size = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(m).filter(|&s| s <= MAX_BLOCK_ALPHABET));
    let size = size.ok_or_else(|| Error::TooLarge(format!("{m}^{n} blocks exceed {MAX_BLOCK_ALPHABET}")))?;
    let mut probs = vec![1.0; size];
    for (idx, p) in probs.iter_mut().enumerate() {
        let mut r = idx;
        for _ in 0..n {
            *p *= source.p(r % m);
            r /= m;
        }
    }
    let lengths = huffman_lengths(&probs);
    let per_symbol = lengths.iter().zip(&probs).map(|(&l, p)| l as f64 * p).sum::<f64>() / n as f64;
    Ok(ExtendedHuffman { block: n, alphabet: m, lengths, tail_lengths: huffman_lengths(source.probs()), per_symbol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::{encode, validate};
    use proptest::prelude::*;

    /// Exhaustive minimum of `Σ p l` over Kraft-feasible length vectors.
    fn best_lengths_oracle(probs: &[f64]) -> f64 {
        fn go(probs: &[f64], i: usize, kraft: f64, acc: f64, best: &mut f64) {
            if i == probs.len() {
                if kraft <= 1.0 + 1e-12 {
                    *best = best.min(acc);
                }
                return;
            }
            for l in 1..=probs.len() {
                go(probs, i + 1, kraft + 0.5f64.powi(l as i32), acc + probs[i] * l as f64, best);
            }
        }
        let mut best = f64::INFINITY;
        go(probs, 0, 0.0, 0.0, &mut best);
        best
    }

    #[test]
    fn examples() {
        let s = SourceDistribution::new(vec![0.5, 0.25, 0.25]).unwrap();
        assert_eq!(huffman_lengths(s.probs()), vec![1, 2, 2]);
        assert_eq!(huffman_expected_length(&s), 1.5);
        assert_eq!(huffman_lengths(&[0.9, 0.1]), vec![1, 1]);
        let s = SourceDistribution::new(vec![0.5625, 0.1875, 0.1875, 0.0625]).unwrap();
        assert_eq!(huffman_lengths(s.probs()), vec![1, 2, 3, 3]);
        assert!((huffman_expected_length(&s) - 1.6875).abs() < 1e-15);
    }

    #[test]
    fn forest_form() {
        let s = SourceDistribution::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let f = huffman(&s).unwrap();
        validate(&f).unwrap();
        assert_eq!(f.delay_bound(), 0);
        assert_eq!(encode(&f, &[0, 3]).unwrap().len(), 1 + 3);
    }

    #[test]
    fn extended() {
        let s = SourceDistribution::binary(0.75).unwrap();
        assert!((extended_huffman(&s, 2).unwrap().per_symbol - 0.84375).abs() < 1e-15);
        assert_eq!(extended_huffman(&s, 1).unwrap().per_symbol, huffman_expected_length(&s));
        let u = SourceDistribution::binary(0.5).unwrap();
        for n in 1..6 {
            assert!((extended_huffman(&u, n).unwrap().per_symbol - 1.0).abs() < 1e-12);
        }
        assert!(matches!(extended_huffman(&s, 21), Err(Error::TooLarge(_))));
        let e = extended_huffman(&s, 2).unwrap();
        assert_eq!(e.encoded_bits(&[0, 0, 1]), e.lengths[0] + e.tail_lengths[1]);
    }

    #[test]
    fn extended_improves_along_divisor_chains() {
        for (_, s) in crate::source::binary_grid() {
            let rate = |n| extended_huffman(&s, n).unwrap().per_symbol;
            let r: Vec<f64> = (1..=8).map(rate).collect();
            for a in 1..=8 {
                assert!(r[a - 1] >= s.entropy() - 1e-12);
                for b in (2 * a..=8).step_by(a) {
                    assert!(r[b - 1] <= r[a - 1] + 1e-12, "{s:?} n={a} -> {b}");
                }
            }
        }
    }

    #[test]
    fn extended_is_not_monotone_in_general() {
        let s = SourceDistribution::binary(0.64).unwrap();
        let r5 = extended_huffman(&s, 5).unwrap().per_symbol;
        let r8 = extended_huffman(&s, 8).unwrap().per_symbol;
        assert!((r5 - 0.94636898304).abs() < 1e-10);
        assert!(r8 > r5);
    }

    proptest! {
        #[test]
        fn matches_oracle(w in prop::collection::vec(0.01f64..1.0, 2..6)) {
            let s = SourceDistribution::from_weights(&w).unwrap();
            let h = huffman_expected_length(&s);
            prop_assert!((h - best_lengths_oracle(s.probs())).abs() < 1e-12);
            let words = canonical_codewords(&huffman_lengths(s.probs())).unwrap();
            for (i, a) in words.iter().enumerate() {
                for (j, b) in words.iter().enumerate() {
                    prop_assert!(i == j || !a.is_prefix_of(b));
                }
            }
        }
    }
}
