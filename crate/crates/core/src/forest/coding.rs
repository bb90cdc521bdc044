use super::CodeForest;
use crate::bits::BitStream;
use crate::error::{Error, Result};

/// Encodes `symbols` starting in tree 0 and closes the stream with the
/// shortest member of the final tree's mode, so the decoder's last lookahead
/// is always satisfied.
pub fn encode(forest: &CodeForest, symbols: &[usize]) -> Result<BitStream> {
    let mut out = BitStream::new();
    let mut k = 0;
    for &s in symbols {
        if s >= forest.alphabet_size() {
            return Err(Error::UnknownSymbol { symbol: s, alphabet: forest.alphabet_size() });
        }
        let e = forest.tree(k).entries[s];
        out.extend(&e.codeword);
        k = e.link;
    }
    out.extend(&forest.tree(k).mode.termination_word());
    Ok(out)
}

/// Decodes exactly `count` symbols.
///
/// In tree `k` a symbol `a` is accepted when its codeword occurs at the
/// current position and some member of the linked tree's mode occurs right
/// after it; the mode member is only looked at, not consumed. Lookahead bits
/// beyond the end of the stream read as zero for the last symbol only.
pub fn decode(forest: &CodeForest, bits: &BitStream, count: usize) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(count);
    let mut pos = 0;
    let mut k = 0;
    while out.len() < count {
        let last = out.len() + 1 == count;
        let tree = forest.tree(k);
        let mut found = None;
        for (a, e) in tree.entries.iter().enumerate() {
            if !bits.matches_at(pos, &e.codeword, false) {
                continue;
            }
            let after = pos + e.codeword.len();
            let query = forest.tree(e.link).mode.words();
            if !query.iter().any(|q| bits.matches_at(after, q, last)) {
                continue;
            }
            if let Some(prev) = found {
                return Err(Error::Decode {
                    pos,
                    decoded: out.len(),
                    reason: format!("symbols {prev} and {a} both match in tree {k}; the forest violates Rule 1a"),
                });
            }
            found = Some(a);
        }
        let a = found.ok_or_else(|| Error::Decode {
            pos,
            decoded: out.len(),
            reason: format!("no codeword of tree {k} matches; stream is corrupt or truncated"),
        })?;
        let e = tree.entries[a];
        pos += e.codeword.len();
        k = e.link;
        out.push(a);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::samples::sample_forest;
    use proptest::prelude::*;

    #[test]
    fn encodes_sample_sequences() {
        let f = sample_forest();
        assert_eq!(encode(&f, &[0, 2, 1, 0]).unwrap().to_string(), "1010110");
        assert_eq!(encode(&f, &[0]).unwrap().to_string(), "10");
        assert!(encode(&f, &[]).unwrap().is_empty());
        assert!(matches!(encode(&f, &[3]), Err(Error::UnknownSymbol { symbol: 3, .. })));
    }

    #[test]
    fn decodes_sample_sequence() {
        let f = sample_forest();
        let bits: BitStream = "1010110".parse().unwrap();
        assert_eq!(decode(&f, &bits, 4).unwrap(), vec![0, 2, 1, 0]);
        assert_eq!(decode(&f, &BitStream::new(), 0).unwrap(), Vec::<usize>::new());
    }

    #[test]
    fn corrupted_termination_is_detected() {
        let f = sample_forest();
        let bits: BitStream = "1010111".parse().unwrap();
        match decode(&f, &bits, 4) {
            Err(_) => {}
            Ok(v) => assert_ne!(v, vec![0, 2, 1, 0]),
        }
    }

    #[test]
    fn truncated_stream_fails() {
        let f = sample_forest();
        let bits: BitStream = "101".parse().unwrap();
        assert!(matches!(decode(&f, &bits, 4), Err(Error::Decode { .. })));
    }

    #[test]
    fn final_lookahead_pads_with_zeros() {
        let f = sample_forest();
        // "a" alone needs the query 10 or 011 after λ; the stream "1" pads to "10".
        let bits: BitStream = "1".parse().unwrap();
        assert_eq!(decode(&f, &bits, 1).unwrap(), vec![0]);
    }

    proptest! {
        #[test]
        fn sample_roundtrip(seq in prop::collection::vec(0usize..3, 0..200), tail in prop::collection::vec(any::<bool>(), 0..16)) {
            let f = sample_forest();
            let mut bits = encode(&f, &seq).unwrap();
            for b in tail {
                bits.push(b);
            }
            prop_assert_eq!(decode(&f, &bits, seq.len()).unwrap(), seq);
        }
    }
}
