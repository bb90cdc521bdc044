//! Exhaustive tree search for binary sources.
//!
//! A full tree for a two-symbol source is fixed by how it splits the mode's
//! `N`-bit leaves between the two symbols: each symbol's codeword is the
//! common prefix of its share and its link is the reduced remainder.

use crate::bits::WordSet;
use crate::error::{Error, Result};
use crate::forest::TreeEntry;
use crate::mode::{Mode, ModeFamily};

/// Largest leaf set the enumeration accepts (`2^16` partitions).
const MAX_LEAVES: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct BinaryTree {
    /// Links are family indices.
    pub entries: Vec<TreeEntry>,
    pub objective: f64,
    pub candidates: usize,
}

/// Best tree for `mode` over all ordered splits of its leaves. Splits whose
/// linked mode is not in `family` are skipped; the first best split in
/// increasing bit-mask order wins ties.
pub fn brute_force_binary(mode: &Mode, probs: &[f64], family: &ModeFamily, costs: &[f64]) -> Result<BinaryTree> {
    if probs.len() != 2 {
        return Err(Error::Domain(format!("binary search needs 2 symbols, got {}", probs.len())));
    }
    if mode.n() != family.n() || costs.len() != family.len() {
        return Err(Error::Domain("mode, family and cost table disagree".into()));
    }
    let leaves = mode.leaves().to_vec();
    if leaves.len() > MAX_LEAVES {
        return Err(Error::TooLarge(format!("{} leaves exceed the limit of {MAX_LEAVES}", leaves.len())));
    }
    let side = |set: &WordSet| -> Result<Option<(TreeEntry, f64)>> {
        let cw = set.common_prefix()?;
        let rest = set.strip_prefix(&cw)?.reduce();
        Ok(family.index_of(&rest).map(|link| (TreeEntry { codeword: cw, link }, cw.len() as f64 + costs[link])))
    };
    let mut best: Option<BinaryTree> = None;
    let count = 1u32 << leaves.len();
    for mask in 1..count - 1 {
        let (mut w0, mut w1) = (WordSet::new(), WordSet::new());
        for (i, leaf) in leaves.iter().enumerate() {
            if mask >> i & 1 == 1 {
                w0.insert(*leaf);
            } else {
                w1.insert(*leaf);
            }
        }
        let (Some((e0, c0)), Some((e1, c1))) = (side(&w0)?, side(&w1)?) else {
            continue;
        };
        let objective = probs[0] * c0 + probs[1] * c1;
        if best.as_ref().is_none_or(|b| objective < b.objective) {
            best = Some(BinaryTree { entries: vec![e0, e1], objective, candidates: 0 });
        }
    }
    let mut best = best.ok_or_else(|| Error::Infeasible(format!("no split of {{{mode}}} links inside the family")))?;
    best.candidates = (count - 2) as usize;
    Ok(best)
}
