//! Theoretical and simulated redundancy tables.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::range_coder::{range_encode, FrequencyTable};
use crate::builder::{construct, construct_aifvm, BuildConfig};
use crate::error::Result;
use crate::forest::{encode, CodeForest};
use crate::huffman::{extended_huffman, huffman, huffman_expected_length, ExtendedHuffman};
use crate::source::{relative_redundancy, SourceDistribution};

pub const CSV_HEADER: &str =
    "source,coder,N_or_m,codebook_size,seq_len,trials,seed,mean_bits_per_sym,entropy,rel_redundancy";

/// Name of the generator behind every simulated sequence.
pub const GENERATOR: &str = "ChaCha8Rng";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coder {
    Huffman,
    /// Huffman over blocks of this many symbols.
    ExtendedHuffman(usize),
    /// `N`-bit-delay AIFV code over continuous modes.
    Aifv(usize),
    /// AIFV-m code.
    AifvM(usize),
    Range,
}

impl Coder {
    pub fn id(&self) -> &'static str {
        match self {
            Coder::Huffman => "huffman",
            Coder::ExtendedHuffman(_) => "ext_huffman",
            Coder::Aifv(_) => "aifv",
            Coder::AifvM(_) => "aifv_m",
            Coder::Range => "range",
        }
    }

    /// The `N_or_m` column: delay, AIFV-m order or block length.
    pub fn parameter(&self) -> usize {
        match *self {
            Coder::Huffman | Coder::Range => 1,
            Coder::ExtendedHuffman(n) | Coder::Aifv(n) | Coder::AifvM(n) => n,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub source: String,
    pub coder: Coder,
    pub codebook_size: usize,
    /// Present for simulated rows only.
    pub seq_len: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub mean_bits_per_sym: f64,
    pub entropy: f64,
    pub rel_redundancy: f64,
}

/// Renders rows under [`CSV_HEADER`], after one `#` line per comment.
pub fn rows_to_csv(comments: &[String], rows: &[ExperimentRow]) -> String {
    let mut s = String::new();
    for c in comments {
        let _ = writeln!(s, "# {c}");
    }
    s.push_str(CSV_HEADER);
    s.push('\n');
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{:.12},{:.12},{:.12}",
            r.source,
            r.coder.id(),
            r.coder.parameter(),
            r.codebook_size,
            opt(r.seq_len.map(|v| v.to_string())),
            opt(r.trials.map(|v| v.to_string())),
            opt(r.seed.map(|v| v.to_string())),
            r.mean_bits_per_sym,
            r.entropy,
            r.rel_redundancy
        );
    }
    s
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub sources: Vec<(String, SourceDistribution)>,
    pub coders: Vec<Coder>,
    /// Settings shared by every AIFV build; `n` and the family are overridden.
    pub build: BuildConfig,
}

/// A coder ready to run on one source.
enum Prepared {
    Forest(CodeForest, usize),
    Blocks(ExtendedHuffman),
    Range(FrequencyTable),
}

fn prepare(source: &SourceDistribution, coder: Coder, build: &BuildConfig) -> Result<(Prepared, f64)> {
    Ok(match coder {
        Coder::Huffman => (Prepared::Forest(huffman(source)?, source.len()), huffman_expected_length(source)),
        Coder::ExtendedHuffman(n) => {
            let e = extended_huffman(source, n)?;
            let l = e.per_symbol;
            (Prepared::Blocks(e), l)
        }
        Coder::Aifv(n) => {
            let (f, r) = construct(source, &BuildConfig { n, ..build.clone() })?;
            (Prepared::Forest(f, r.codebook_size), r.expected_length)
        }
        Coder::AifvM(m) => {
            let (f, r) = construct_aifvm(source, m, build)?;
            (Prepared::Forest(f, r.codebook_size), r.expected_length)
        }
        Coder::Range => (Prepared::Range(FrequencyTable::new(source)?), f64::NAN),
    })
}

impl Prepared {
    fn codebook_size(&self, m: usize) -> usize {
        match self {
            Prepared::Forest(_, size) => *size,
            Prepared::Blocks(e) => e.codebook_size(),
            Prepared::Range(_) => m,
        }
    }

    fn bits(&self, symbols: &[usize]) -> Result<usize> {
        Ok(match self {
            Prepared::Forest(f, _) => encode(f, symbols)?.len(),
            Prepared::Blocks(e) => e.encoded_bits(symbols),
            Prepared::Range(t) => range_encode(t, symbols)?.len() * 8,
        })
    }
}

/// Expected lengths from stationary distributions; no sampling. Range-coder
/// entries are skipped since they have no closed-form expectation.
pub fn run_theoretical(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    let mut rows = Vec::new();
    for (name, source) in &cfg.sources {
        let h = source.entropy();
        for &coder in cfg.coders.iter().filter(|c| **c != Coder::Range) {
            let (prepared, length) = prepare(source, coder, &cfg.build)?;
            rows.push(ExperimentRow {
                source: name.clone(),
                coder,
                codebook_size: prepared.codebook_size(source.len()),
                seq_len: None,
                trials: None,
                seed: None,
                mean_bits_per_sym: length,
                entropy: h,
                rel_redundancy: relative_redundancy(length, h)?,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug)]
pub struct SimulationConfig {
    pub experiment: ExperimentConfig,
    pub seq_lens: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

/// The symbols of one trial: generator seeded with `seed + trial`.
pub fn trial_sequence(source: &SourceDistribution, len: usize, seed: u64, trial: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64));
    (0..len).map(|_| source.sample(&mut rng)).collect()
}

/// Average encoded bits per symbol over independent trials. Each trial's
/// sequence is shared by all coders, and AIFV lengths include the
/// termination word.
pub fn run_simulation(cfg: &SimulationConfig) -> Result<Vec<ExperimentRow>> {
    let mut rows = Vec::new();
    for (name, source) in &cfg.experiment.sources {
        let h = source.entropy();
        let prepared: Vec<(Coder, Prepared)> = cfg
            .experiment
            .coders
            .iter()
            .map(|&c| Ok((c, prepare(source, c, &cfg.experiment.build)?.0)))
            .collect::<Result<_>>()?;
        for &len in &cfg.seq_lens {
            let per_trial: Vec<Vec<usize>> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let seq = trial_sequence(source, len, cfg.seed, t);
                    prepared.iter().map(|(_, p)| p.bits(&seq)).collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            for (i, (coder, p)) in prepared.iter().enumerate() {
                let total: usize = per_trial.iter().map(|b| b[i]).sum();
                let mean = total as f64 / (cfg.trials.max(1) * len.max(1)) as f64;
                rows.push(ExperimentRow {
                    source: name.clone(),
                    coder: *coder,
                    codebook_size: p.codebook_size(source.len()),
                    seq_len: Some(len),
                    trials: Some(cfg.trials),
                    seed: Some(cfg.seed),
                    mean_bits_per_sym: mean,
                    entropy: h,
                    rel_redundancy: relative_redundancy(mean, h)?,
                });
            }
        }
    }
    Ok(rows)
}

/// The comment line recording the generator and seed.
pub fn seed_comment(seed: u64) -> String {
    format!("generator={GENERATOR} seed={seed}")
}
