//! Plain-text codebook format.
//!
//! ```text
//! AIFV1 N=<N> M=<M> K=<K>
//! TREE <k> MODE <w1,w2,...>
//! SYM <m> CODE <bits|-> LINK <k'>      (M lines per tree)
//! ```
//!
//! `-` stands for the empty string. Blank lines and lines starting with `#`
//! are ignored.

use std::fmt::Write as _;

use super::{validate, CodeForest, CodeTree, TreeEntry};
use crate::bits::{BitString, WordSet};
use crate::error::{Error, Result};
use crate::mode::Mode;

pub fn write_codebook(forest: &CodeForest) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "AIFV1 N={} M={} K={}", forest.n(), forest.alphabet_size(), forest.len());
    for (k, t) in forest.trees().iter().enumerate() {
        let _ = writeln!(s, "TREE {k} MODE {}", t.mode);
        for (a, e) in t.entries.iter().enumerate() {
            let _ = writeln!(s, "SYM {a} CODE {} LINK {}", e.codeword, e.link);
        }
    }
    s
}

/// Parses a codebook and checks every rule; rule violations are reported by name.
pub fn read_codebook(text: &str) -> Result<CodeForest> {
    let forest = parse_codebook(text)?;
    validate(&forest)?;
    Ok(forest)
}

/// Parses a codebook, checking only its structure and that every mode is basic.
pub fn parse_codebook(text: &str) -> Result<CodeForest> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (ln, header) = lines.next().ok_or_else(|| Error::parse(1, "empty codebook"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "AIFV1" {
        return Err(Error::parse(ln, "expected header 'AIFV1 N=<N> M=<M> K=<K>'"));
    }
    let n = keyed(ln, fields[1], "N")?;
    let m = keyed(ln, fields[2], "M")?;
    let count = keyed(ln, fields[3], "K")?;

    let mut trees = Vec::with_capacity(count);
    for k in 0..count {
        let (ln, line) = lines.next().ok_or_else(|| Error::parse(ln, format!("missing TREE {k}")))?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 || f[0] != "TREE" || f[2] != "MODE" {
            return Err(Error::parse(ln, "expected 'TREE <k> MODE <words>'"));
        }
        if number(ln, f[1])? != k {
            return Err(Error::parse(ln, format!("trees must appear in order; expected TREE {k}")));
        }
        let words: WordSet = f[3].parse().map_err(|e| Error::parse(ln, format!("{e}")))?;
        if words.max_len() > n {
            return Err(Error::parse(ln, format!("mode member longer than N={n}")));
        }
        let mode = Mode::new(words, n).map_err(|e| Error::InvalidForest(format!("Rule 1c: tree {k}: {e}")))?;
        let mut entries = Vec::with_capacity(m);
        for a in 0..m {
            let (ln, line) = lines.next().ok_or_else(|| Error::parse(ln, format!("missing SYM {a} of tree {k}")))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 6 || f[0] != "SYM" || f[2] != "CODE" || f[4] != "LINK" {
                return Err(Error::parse(ln, "expected 'SYM <m> CODE <bits> LINK <k>'"));
            }
            if number(ln, f[1])? != a {
                return Err(Error::parse(ln, format!("symbols must appear in order; expected SYM {a}")));
            }
            let codeword: BitString = f[3].parse().map_err(|e| Error::parse(ln, format!("{e}")))?;
            entries.push(TreeEntry { codeword, link: number(ln, f[5])? });
        }
        trees.push(CodeTree::new(entries, mode));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::parse(ln, "trailing content after the last tree"));
    }
    CodeForest::new(n, m, trees)
}

fn keyed(line: usize, field: &str, key: &str) -> Result<usize> {
    field
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| Error::parse(line, format!("expected {key}=<value>, got {field:?}")))
        .and_then(|v| number(line, v))
}

fn number(line: usize, s: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::parse(line, format!("expected a number, got {s:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::samples::sample_forest;

    #[test]
    fn roundtrip() {
        let f = sample_forest();
        let text = write_codebook(&f);
        assert!(text.starts_with("AIFV1 N=3 M=3 K=5\nTREE 0 MODE -\nSYM 0 CODE - LINK 1\n"));
        assert_eq!(read_codebook(&text).unwrap(), f);
    }

    #[test]
    fn rejects_rule_violations_by_name() {
        let text = write_codebook(&sample_forest()).replace("SYM 2 CODE 11 LINK 0", "SYM 2 CODE 1 LINK 0");
        let err = read_codebook(&text).unwrap_err().to_string();
        assert!(err.contains("Rule 1a"), "{err}");
    }

    #[test]
    fn rejects_malformed_text() {
        assert!(matches!(read_codebook(""), Err(Error::Parse { .. })));
        assert!(matches!(read_codebook("AIFV2 N=1 M=2 K=1"), Err(Error::Parse { line: 1, .. })));
        let text = write_codebook(&sample_forest()).replace("LINK 4", "LINK x");
        assert!(matches!(read_codebook(&text), Err(Error::Parse { .. })));
        let text = write_codebook(&sample_forest()).replace("LINK 4", "LINK 7");
        assert!(matches!(read_codebook(&text), Err(Error::DanglingLink { .. })));
        let text = write_codebook(&sample_forest()).replace("MODE 0,100", "MODE 0,1000");
        assert!(read_codebook(&text).is_err());
    }
}
