//! Small hand-built forests used in examples and tests.

use super::{CodeForest, CodeTree, TreeEntry};
use crate::bits::{bs, ws};
use crate::mode::Mode;

fn tree(mode: &str, entries: &[(&str, usize)]) -> CodeTree {
    CodeTree::new(
        entries.iter().map(|&(w, link)| TreeEntry { codeword: bs(w), link }).collect(),
        Mode::new(ws(mode), 3).expect("sample modes are basic"),
    )
}

/// A five-tree, three-symbol forest with a 3-bit decoding delay.
///
/// ```text
/// T0 {λ}        a: λ   -> T1   b: 0  -> T2   c: 11  -> T0
/// T1 {011,10}   a: 10  -> T3   b: 011 -> T0  c: 101 -> T4
/// T2 {0,10}     a: 0   -> T3   b: 10 -> T0   c: 01  -> T4
/// T3 {0,100}    a: 00  -> T0   b: 01 -> T0   c: 100 -> T0
/// T4 {01,1}     a: 1   -> T4   b: 01 -> T0   c: 100 -> T0
/// ```
pub fn sample_forest() -> CodeForest {
    let trees = vec![
        tree("-", &[("-", 1), ("0", 2), ("11", 0)]),
        tree("011,10", &[("10", 3), ("011", 0), ("101", 4)]),
        tree("0,10", &[("0", 3), ("10", 0), ("01", 4)]),
        tree("0,100", &[("00", 0), ("01", 0), ("100", 0)]),
        tree("01,1", &[("1", 4), ("01", 0), ("100", 0)]),
    ];
    CodeForest::new(3, 3, trees).expect("sample forest is well formed")
}
