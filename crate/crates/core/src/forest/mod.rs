//! Code trees and code forests: structure, rule checking and transforms.

mod codebook;
mod coding;
pub mod samples;

pub use codebook::{parse_codebook, read_codebook, write_codebook};
pub use coding::{decode, encode};
pub use samples::sample_forest;

use std::fmt::Write as _;

use crate::bits::{BitString, WordSet};
use crate::error::{Error, Result};
use crate::mode::Mode;

/// Codeword and outgoing link of one symbol in one tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TreeEntry {
    pub codeword: BitString,
    pub link: usize,
}

/// One code tree: a codeword and link per source symbol, plus its mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CodeTree {
    pub entries: Vec<TreeEntry>,
    pub mode: Mode,
}

impl CodeTree {
    pub fn new(entries: Vec<TreeEntry>, mode: Mode) -> Self {
        CodeTree { entries, mode }
    }

    pub fn codeword(&self, symbol: usize) -> BitString {
        self.entries[symbol].codeword
    }

    pub fn link(&self, symbol: usize) -> usize {
        self.entries[symbol].link
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Expected codeword length `Σ p(a) |cw(a)|`.
    pub fn expected_length(&self, probs: &[f64]) -> f64 {
        self.entries.iter().zip(probs).map(|(e, p)| p * e.codeword.len() as f64).sum()
    }
}

/// Flips every codeword and the mode, and renumbers links through `remap`.
pub fn flip_tree(tree: &CodeTree, remap: &[usize]) -> CodeTree {
    CodeTree {
        entries: tree
            .entries
            .iter()
            .map(|e| TreeEntry { codeword: e.codeword.flip(), link: remap[e.link] })
            .collect(),
        mode: tree.mode.flip(),
    }
}

/// An `N`-bit-delay code forest over an alphabet of `M` symbols.
///
/// Encoding starts in tree 0, whose mode is `{λ}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CodeForest {
    n: usize,
    m: usize,
    trees: Vec<CodeTree>,
}

impl CodeForest {
    /// Checks the structural invariants: at least one tree, tree 0 has mode
    /// `{λ}`, every tree has `m` entries and every link points at a tree.
    pub fn new(n: usize, m: usize, trees: Vec<CodeTree>) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::InvalidForest("a forest needs at least one tree".into()));
        }
        if m < 2 {
            return Err(Error::InvalidForest(format!("alphabet size must be at least 2, got {m}")));
        }
        if !trees[0].mode.is_lambda() {
            return Err(Error::InvalidForest(format!("tree 0 has mode {{{}}} instead of {{λ}}", trees[0].mode)));
        }
        for (k, t) in trees.iter().enumerate() {
            if t.entries.len() != m {
                return Err(Error::InvalidForest(format!("tree {k} has {} entries, expected {m}", t.entries.len())));
            }
            if t.mode.n() != n {
                return Err(Error::InvalidForest(format!("tree {k} mode is for delay {}, forest is {n}", t.mode.n())));
            }
            for (a, e) in t.entries.iter().enumerate() {
                if e.link >= trees.len() {
                    return Err(Error::DanglingLink { tree: k, symbol: a, link: e.link });
                }
            }
        }
        Ok(CodeForest { n, m, trees })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn trees(&self) -> &[CodeTree] {
        &self.trees
    }

    pub fn tree(&self, k: usize) -> &CodeTree {
        &self.trees[k]
    }

    /// `cw_k(a) ⊕ Mode_{link_k(a)}`.
    pub fn expand(&self, k: usize, a: usize) -> Result<WordSet> {
        let e = self.trees[k].entries[a];
        self.trees[e.link].mode.words().prepend(&e.codeword)
    }

    /// Expansions of every symbol of tree `k`, in symbol order.
    pub fn expansions(&self, k: usize) -> Result<Vec<WordSet>> {
        (0..self.m).map(|a| self.expand(k, a)).collect()
    }

    /// Union of the expansions of tree `k`.
    pub fn expands(&self, k: usize) -> Result<WordSet> {
        Ok(self.expansions(k)?.iter().fold(WordSet::new(), |acc, w| acc.union(w)))
    }

    /// Trees reachable from tree 0 along links, in increasing index order.
    pub fn reachable(&self) -> Vec<usize> {
        let mut seen = vec![false; self.trees.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(k) = stack.pop() {
            for e in &self.trees[k].entries {
                if !seen[e.link] {
                    seen[e.link] = true;
                    stack.push(e.link);
                }
            }
        }
        (0..self.trees.len()).filter(|&k| seen[k]).collect()
    }

    /// Keeps only the listed trees, which must be closed under links and
    /// start with tree 0, renumbering them in the given order.
    pub fn restrict(&self, keep: &[usize]) -> Result<CodeForest> {
        let mut remap = vec![usize::MAX; self.trees.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let trees = keep
            .iter()
            .map(|&k| {
                let t = &self.trees[k];
                let entries = t
                    .entries
                    .iter()
                    .enumerate()
                    .map(|(a, e)| match remap[e.link] {
                        usize::MAX => Err(Error::DanglingLink { tree: k, symbol: a, link: e.link }),
                        link => Ok(TreeEntry { codeword: e.codeword, link }),
                    })
                    .collect::<Result<_>>()?;
                Ok(CodeTree { entries, mode: t.mode.clone() })
            })
            .collect::<Result<_>>()?;
        CodeForest::new(self.n, self.m, trees)
    }

    /// Longest mode member over the trees reachable from tree 0: the number
    /// of bits the decoder must look past a codeword.
    pub fn delay_bound(&self) -> usize {
        self.reachable().iter().map(|&k| self.trees[k].mode.words().max_len()).max().unwrap_or(0)
    }
}

/// Outcome of the prefix and cover rules for one tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeRuleReport {
    /// Expansions of distinct symbols are prefix-free (string form).
    pub prefix_free: bool,
    /// Every expanded codeword has a prefix in the tree's mode (string form).
    pub covered: bool,
    /// The mode is a basic mode.
    pub basic_mode: bool,
    /// Expanded intervals are pairwise disjoint (interval form).
    pub disjoint_intervals: bool,
    /// Expanded intervals lie inside the mode's intervals (interval form).
    pub contained_intervals: bool,
    pub violations: Vec<String>,
}

impl TreeRuleReport {
    pub fn ok(&self) -> bool {
        self.prefix_free && self.covered && self.basic_mode
    }

    /// The string and interval forms of the rules agree.
    pub fn forms_agree(&self) -> bool {
        self.prefix_free == self.disjoint_intervals && self.covered == self.contained_intervals
    }
}

/// Checks Rule 1 (1a prefix-free expansions, 1b cover by the mode, 1c basic
/// mode) in both string and interval form for every tree.
pub fn validate_rule1(forest: &CodeForest) -> Result<Vec<TreeRuleReport>> {
    (0..forest.len()).map(|k| check_tree(forest, k)).collect()
}

fn check_tree(forest: &CodeForest, k: usize) -> Result<TreeRuleReport> {
    let mode = &forest.tree(k).mode;
    let mut violations = Vec::new();

    let mut all: Vec<(BitString, usize)> = Vec::new();
    for (a, set) in forest.expansions(k)?.into_iter().enumerate() {
        all.extend(set.iter().map(|w| (*w, a)));
    }
    all.sort();
    // After sorting, any prefix relation shows up between neighbours.
    let mut prefix_free = true;
    for p in all.windows(2) {
        if p[0].0.is_prefix_of(&p[1].0) {
            prefix_free = false;
            violations.push(format!(
                "Rule 1a: expansions not prefix-free in tree {k}: '{}' ≺ '{}' (symbols {} and {})",
                p[0].0, p[1].0, p[0].1, p[1].1
            ));
        }
    }

    let mut covered = true;
    for (w, a) in &all {
        if !mode.words().iter().any(|q| q.is_prefix_of(w)) {
            covered = false;
            violations.push(format!(
                "Rule 1b: expansion '{w}' of symbol {a} in tree {k} has no prefix in mode {{{mode}}}"
            ));
        }
    }

    let basic_mode = match Mode::new(mode.words().clone(), forest.n()) {
        Ok(_) => true,
        Err(e) => {
            violations.push(format!("Rule 1c: tree {k}: {e}"));
            false
        }
    };

    let mut intervals: Vec<_> = all.iter().map(|(w, _)| w.interval()).collect();
    intervals.sort();
    let disjoint_intervals = intervals.windows(2).all(|p| p[0].hi() <= p[1].lo());
    let mode_cover = mode.words().intervals();
    let contained_intervals = intervals.iter().all(|i| mode_cover.contains(i));

    Ok(TreeRuleReport { prefix_free, covered, basic_mode, disjoint_intervals, contained_intervals, violations })
}

/// Trees whose mode differs from the reduction of their expansions, plus a
/// check that tree 0 has mode `{λ}`. Returns one message per violation.
pub fn validate_full(forest: &CodeForest) -> Result<Vec<String>> {
    let mut out = Vec::new();
    if !forest.tree(0).mode.is_lambda() {
        out.push(format!("Rule 2: tree 0 has mode {{{}}}, expected {{λ}}", forest.tree(0).mode));
    }
    for k in 0..forest.len() {
        let red = forest.expands(k)?.reduce();
        if &red != forest.tree(k).mode.words() {
            out.push(format!(
                "Rule 2: tree {k} mode {{{}}} differs from reduced expansions {{{red}}}",
                forest.tree(k).mode
            ));
        }
    }
    Ok(out)
}

/// Runs every rule and fails with the first violation.
pub fn validate(forest: &CodeForest) -> Result<()> {
    for r in validate_rule1(forest)? {
        if let Some(v) = r.violations.first() {
            return Err(Error::InvalidForest(v.clone()));
        }
    }
    if let Some(v) = validate_full(forest)?.first() {
        return Err(Error::InvalidForest(v.clone()));
    }
    Ok(())
}

/// Human-readable listing of a forest.
pub fn describe(forest: &CodeForest) -> String {
    let mut s = String::new();
    for (k, t) in forest.trees().iter().enumerate() {
        let _ = writeln!(s, "T{k} mode {{{}}}", t.mode);
        for (a, e) in t.entries.iter().enumerate() {
            let _ = writeln!(s, "  a{a}: {} -> T{}", e.codeword, e.link);
        }
    }
    s
}
