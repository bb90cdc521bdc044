//! Memoryless source distributions.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance on `Σ p = 1`.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// A probability vector over symbols `0..M`, every entry strictly positive.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceDistribution {
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl SourceDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidDistribution(format!("need at least 2 symbols, got {}", probs.len())));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::InvalidDistribution(format!("p[{i}] = {p} is not strictly positive")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {sum}, not 1")));
        }
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(SourceDistribution { probs, cdf })
    }

    /// Normalises non-negative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidDistribution("weights must have a positive finite sum".into()));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    /// `(p0, 1 - p0)`.
    pub fn binary(p0: f64) -> Result<Self> {
        Self::new(vec![p0, 1.0 - p0])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn p(&self, a: usize) -> f64 {
        self.probs[a]
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        -self.probs.iter().map(|p| p * p.log2()).sum::<f64>()
    }

    /// Draws one symbol by inversion of the cumulative distribution.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let i = self.cdf.partition_point(|&c| c <= u);
        i.min(self.probs.len() - 1)
    }

    /// Reads lines `a<m> <probability>`; symbols may appear in any order but
    /// must cover `0..M` exactly once. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (sym, prob) = match (it.next(), it.next(), it.next()) {
                (Some(s), Some(p), None) => (s, p),
                _ => return Err(Error::parse(i + 1, "expected 'a<m> <probability>'")),
            };
            let m = sym
                .strip_prefix('a')
                .and_then(|d| d.parse::<usize>().ok())
                .ok_or_else(|| Error::parse(i + 1, format!("bad symbol name {sym:?}")))?;
            let p = prob.parse::<f64>().map_err(|_| Error::parse(i + 1, format!("bad probability {prob:?}")))?;
            entries.push((m, p));
        }
        entries.sort_by_key(|e| e.0);
        for (i, (m, _)) in entries.iter().enumerate() {
            if *m != i {
                return Err(Error::InvalidDistribution(format!("symbols must be a0..a{} without gaps or repeats", entries.len().saturating_sub(1))));
            }
        }
        Self::new(entries.into_iter().map(|e| e.1).collect())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (m, p) in self.probs.iter().enumerate() {
            let _ = writeln!(s, "a{m} {p}");
        }
        s
    }
}

/// The binary sources `p0 = 0.51, 0.52, …, 0.99`.
pub fn binary_grid() -> Vec<(String, SourceDistribution)> {
    (51..=99)
        .map(|i| {
            let p0 = i as f64 / 100.0;
            (format!("p0={p0:.2}"), SourceDistribution::binary(p0).expect("grid point is valid"))
        })
        .collect()
}

/// Sources over `m` symbols with `p(a_i) ∝ (i+1)^k`, `k = 0, 1, 2`.
pub fn polynomial_sources(m: usize) -> Result<Vec<(String, SourceDistribution)>> {
    if m < 2 {
        return Err(Error::Domain(format!("a source needs at least two symbols, got {m}")));
    }
    (0..3)
        .map(|k| {
            let w: Vec<f64> = (1..=m).map(|i| (i as f64).powi(k)).collect();
            Ok((format!("P{k}"), SourceDistribution::from_weights(&w)?))
        })
        .collect()
}

/// `L / H - 1`.
pub fn relative_redundancy(length: f64, entropy: f64) -> Result<f64> {
    if !(entropy > 0.0) {
        return Err(Error::Domain(format!("redundancy needs positive entropy, got {entropy}")));
    }
    Ok(length / entropy - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validation() {
        assert!(SourceDistribution::new(vec![1.0]).is_err());
        assert!(SourceDistribution::new(vec![0.5, 0.5, 0.0]).is_err());
        assert!(SourceDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(SourceDistribution::new(vec![0.5, f64::NAN]).is_err());
        assert!(SourceDistribution::new(vec![0.25; 4]).is_ok());
    }

    #[test]
    fn entropies() {
        assert!((SourceDistribution::binary(0.75).unwrap().entropy() - 0.811278).abs() < 1e-6);
        let h: Vec<f64> = polynomial_sources(5).unwrap().iter().map(|(_, s)| s.entropy()).collect();
        assert!((h[0] - 2.3219).abs() < 5e-5);
        assert!((h[1] - 2.1493).abs() < 5e-5);
        assert!((h[2] - 1.8427).abs() < 5e-5);
        assert!(polynomial_sources(1).is_err());
        assert_eq!(polynomial_sources(3).unwrap()[1].1.probs(), &[1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0]);
        assert!((relative_redundancy(0.84375, 0.811278).unwrap() - 0.0400257).abs() < 1e-7);
        assert!(relative_redundancy(1.0, 0.0).is_err());
    }

    #[test]
    fn grid_shape() {
        let g = binary_grid();
        assert_eq!(g.len(), 49);
        assert_eq!(g[0].0, "p0=0.51");
        assert!((g[48].1.p(0) - 0.99).abs() < 1e-15);
    }

    #[test]
    fn parse_roundtrip() {
        let s = SourceDistribution::parse("a1 0.25\n# comment\na0 0.75\n").unwrap();
        assert_eq!(s.probs(), &[0.75, 0.25]);
        assert_eq!(SourceDistribution::parse(&s.to_text()).unwrap(), s);
        assert!(SourceDistribution::parse("a0 0.5\na2 0.5\n").is_err());
        assert!(matches!(SourceDistribution::parse("a0 x\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn sampling_frequencies() {
        let s = SourceDistribution::new(vec![0.5, 0.3, 0.2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[s.sample(&mut rng)] += 1;
        }
        for (c, p) in counts.iter().zip(s.probs()) {
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            assert!((*c as f64 / n as f64 - p).abs() < 5.0 * sd);
        }
    }
}
