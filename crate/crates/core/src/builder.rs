//! Iterative forest construction.
//!
//! Each round solves every mode's tree against the current link costs, forms
//! the forest's Markov chain, and updates the costs from the chain's block
//! structure. The loop stops once a round leaves every cost unchanged.

use std::fmt::Write as _;

use log::{debug, info, warn};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forest::{flip_tree, validate, CodeForest, CodeTree, TreeEntry};
use crate::markov::{
    block_costs_stable, block_decompose, cost_update_general, f_optimality_converged, forest_expected_length,
    max_abs_diff, trace_csv, transition_matrix, tree_lengths, TraceRow, DEFAULT_TOLERANCE,
};
use crate::mode::{FamilyKind, ModeFamily};
use crate::optimizer::{
    brute_force_binary, default_depth, initial_costs, link_cost_table, solve_tree, SearchOptions, TreeProblem,
    DEFAULT_NODE_BUDGET,
};
use crate::source::SourceDistribution;

pub const DEFAULT_MAX_ITERATIONS: usize = 200;
/// Link cost given to every mode but `{λ}` by [`InitRule::HuffmanFloor`].
pub const HUFFMAN_FLOOR_COST: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Integer program over continuous modes.
    Ilp,
    /// Exhaustive leaf partitions; binary sources only.
    Brute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitRule {
    /// `N - log2(leaf count)`.
    Formula,
    /// Large costs everywhere but `{λ}`, so the first round gives Huffman.
    HuffmanFloor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BuildConfig {
    pub n: usize,
    pub family: FamilyKind,
    pub backend: Backend,
    /// Maximum codeword length; defaults to `3·⌈log2 M⌉ + N`.
    pub max_depth: Option<usize>,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub init: InitRule,
    pub node_budget: u64,
    /// Solve one tree per pair of mirror-image modes and flip it for the other.
    pub cosmos: bool,
}

impl BuildConfig {
    pub fn new(n: usize) -> Self {
        BuildConfig {
            n,
            family: FamilyKind::Continuous,
            backend: Backend::Ilp,
            max_depth: None,
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            init: InitRule::Formula,
            node_budget: DEFAULT_NODE_BUDGET,
            cosmos: true,
        }
    }

    fn check(&self, m: usize) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Domain(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.n == 0 {
            return Err(Error::Domain("delay N must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Domain("at least one iteration is needed".into()));
        }
        match self.backend {
            Backend::Brute if m != 2 => {
                Err(Error::Domain(format!("the brute-force backend needs a binary source, got {m} symbols")))
            }
            Backend::Ilp if self.family == FamilyKind::Basic => {
                Err(Error::Domain("the full basic-mode family needs the brute-force backend".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Whether global optimality over every `N`-bit-delay code was checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GCheck {
    /// The family was not the full basic-mode family.
    NotApplicable,
    Passed,
    Failed,
}

impl std::fmt::Display for GCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GCheck::NotApplicable => "n/a",
            GCheck::Passed => "true",
            GCheck::Failed => "false",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimalityReport {
    /// A round left every cost unchanged before the iteration limit.
    pub converged: bool,
    /// The worst absorbing block's costs were stable in the last round.
    pub e_optimal: bool,
    /// Every cost was stable in the last round.
    pub f_optimal: bool,
    pub g_checked: GCheck,
    pub iterations: usize,
    pub tolerance: f64,
    /// Expected length of each absorbing block in the last round.
    pub block_lengths: Vec<f64>,
    /// Absorbing block holding the `{λ}` tree, if that tree is not transient.
    pub selected_block: Option<usize>,
    /// Largest absorbing-block length per round.
    pub max_block_trace: Vec<f64>,
    pub trace: Vec<TraceRow>,
    /// Final link cost of every family mode.
    pub costs: Vec<f64>,
    pub final_cost_change: f64,
    /// Long-run length of the emitted forest, started in tree 0.
    pub expected_length: f64,
    pub codebook_size: usize,
    /// Rounds in which some tree could not reach `{λ}`.
    pub reducible_rounds: usize,
}

impl OptimalityReport {
    /// The `key=value` sidecar written next to a codebook.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:.17}")).collect::<Vec<_>>().join(",");
        let _ = writeln!(s, "tolerance={:e}", self.tolerance);
        let _ = writeln!(s, "iterations={}", self.iterations);
        let _ = writeln!(s, "converged={}", self.converged);
        let _ = writeln!(s, "e_optimal={}", self.e_optimal);
        let _ = writeln!(s, "f_optimal={}", self.f_optimal);
        let _ = writeln!(s, "g_checked={}", self.g_checked);
        let _ = writeln!(s, "expected_length={:.17}", self.expected_length);
        let _ = writeln!(s, "codebook_size={}", self.codebook_size);
        let _ = writeln!(
            s,
            "selected_block={}",
            self.selected_block.map_or_else(|| "transient".to_string(), |b| b.to_string())
        );
        let _ = writeln!(s, "block_lengths={}", join(&self.block_lengths));
        let _ = writeln!(s, "max_block_trace={}", join(&self.max_block_trace));
        let _ = writeln!(s, "final_cost_change={:e}", self.final_cost_change);
        let _ = writeln!(s, "reducible_rounds={}", self.reducible_rounds);
        s
    }

    pub fn trace_csv(&self) -> String {
        trace_csv(&self.trace)
    }
}

/// Symbol-codeword pairs, counting a tree and its mirror image once.
pub fn codebook_size(forest: &CodeForest) -> usize {
    let trees = forest.trees();
    let distinct = (0..trees.len())
        .filter(|&k| {
            let flipped = trees[k].mode.flip();
            !trees[..k].iter().any(|t| t.mode == flipped)
        })
        .count();
    distinct * forest.alphabet_size()
}

fn family_for(cfg: &BuildConfig) -> Result<ModeFamily> {
    match cfg.family {
        FamilyKind::Continuous => ModeFamily::continuous(cfg.n),
        FamilyKind::AifvM => ModeFamily::aifv_m(cfg.n),
        FamilyKind::Basic => ModeFamily::basic(cfg.n),
    }
}

fn initial(family: &ModeFamily, rule: InitRule) -> Vec<f64> {
    match rule {
        InitRule::Formula => initial_costs(family),
        InitRule::HuffmanFloor => (0..family.len()).map(|i| if i == 0 { 0.0 } else { HUFFMAN_FLOOR_COST }).collect(),
    }
}

struct Solver<'a> {
    family: &'a ModeFamily,
    cfg: &'a BuildConfig,
    probs: &'a [f64],
    depth: usize,
    /// Family index of each continuous index.
    family_index: Vec<Option<usize>>,
    /// Trees solved directly; the rest are mirror images.
    representatives: Vec<usize>,
    flip_remap: Option<Vec<usize>>,
}

impl<'a> Solver<'a> {
    fn new(family: &'a ModeFamily, cfg: &'a BuildConfig, probs: &'a [f64]) -> Self {
        let n = family.n();
        let h = 1usize << (n - 1);
        let family_index = (0..h * h)
            .map(|i| family.index_of_id(crate::mode::ContinuousModeId::from_index(i, n)))
            .collect();
        let flip_remap: Option<Vec<usize>> = (0..family.len()).map(|i| family.flip_index(i)).collect();
        let representatives = (0..family.len())
            .filter(|&i| !cfg.cosmos || flip_remap.is_none() || family.flip_index(i).is_none_or(|f| i <= f))
            .collect();
        let depth = cfg.max_depth.unwrap_or_else(|| default_depth(probs.len(), n));
        Solver { family, cfg, probs, depth, family_index, representatives, flip_remap }
    }

    fn solve_one(&self, i: usize, costs: &[f64], table: &[Option<f64>]) -> Result<Vec<TreeEntry>> {
        let mode = self.family.mode(i);
        match self.cfg.backend {
            Backend::Brute => Ok(brute_force_binary(mode, self.probs, self.family, costs)?.entries),
            Backend::Ilp => {
                let target = self.family.continuous_id(i).expect("ILP families are continuous");
                let problem = TreeProblem {
                    n: self.family.n(),
                    target,
                    probs: self.probs.to_vec(),
                    link_costs: table.to_vec(),
                    depth: self.depth,
                    aifvm: self.family.kind() == FamilyKind::AifvM,
                };
                let opts = SearchOptions { node_budget: self.cfg.node_budget, upper_bound: None };
                let (entries, _) = solve_tree(&problem, &opts)?;
                entries
                    .into_iter()
                    .map(|e| {
                        let link = self.family_index[e.link]
                            .ok_or_else(|| Error::Numerical(format!("solver linked outside the family ({})", e.link)))?;
                        Ok(TreeEntry { codeword: e.codeword, link })
                    })
                    .collect()
            }
        }
    }

    /// One optimal tree per family mode, in family order.
    fn solve_all(&self, costs: &[f64]) -> Result<Vec<CodeTree>> {
        let table = match self.cfg.backend {
            Backend::Ilp => link_cost_table(self.family, costs)?,
            Backend::Brute => Vec::new(),
        };
        let solved: Vec<Vec<TreeEntry>> =
            self.representatives.par_iter().map(|&i| self.solve_one(i, costs, &table)).collect::<Result<_>>()?;
        let mut trees: Vec<Option<CodeTree>> = vec![None; self.family.len()];
        for (&i, entries) in self.representatives.iter().zip(solved) {
            trees[i] = Some(CodeTree::new(entries, self.family.mode(i).clone()));
        }
        for i in 0..trees.len() {
            if trees[i].is_none() {
                let f = self.family.flip_index(i).expect("unsolved modes have a mirror");
                let remap = self.flip_remap.as_ref().expect("mirror reuse needs a closed family");
                let t = flip_tree(trees[f].as_ref().expect("representative solved"), remap);
                trees[i] = Some(t);
            }
        }
        Ok(trees.into_iter().map(|t| t.expect("every tree built")).collect())
    }
}

/// Builds a forest for `source` and reports on its optimality.
///
/// Returns the trees reachable from the `{λ}` tree, which comes first. If
/// the iteration limit is reached the last forest is returned with
/// `converged = false`.
pub fn construct(source: &SourceDistribution, cfg: &BuildConfig) -> Result<(CodeForest, OptimalityReport)> {
    let m = source.len();
    cfg.check(m)?;
    let family = family_for(cfg)?;
    let solver = Solver::new(&family, cfg, source.probs());
    let mut costs = initial(&family, cfg.init);
    let mut trace = Vec::new();
    let mut max_block_trace = Vec::new();
    let mut reducible_rounds = 0;
    let mut last = None;

    for iteration in 1..=cfg.max_iterations {
        let trees = solver.solve_all(&costs)?;
        let forest = CodeForest::new(cfg.n, m, trees)?;
        let p = transition_matrix(&forest, source)?;
        let lengths = tree_lengths(&forest, source)?;
        let blocks = block_decompose(&p);
        if blocks.absorbing != 1 || blocks.block_of[0] != 0 {
            reducible_rounds += 1;
            debug!("round {iteration}: some tree cannot reach the {{λ}} tree; using the block-wise update");
        }
        let update = cost_update_general(&lengths, &p, &blocks)?;
        let change = max_abs_diff(&update.costs, &costs);
        for (j, &l) in update.block_lengths.iter().enumerate() {
            trace.push(TraceRow { iteration, block: j, block_length: l, max_cost_change: change });
        }
        max_block_trace.push(update.block_lengths[update.worst_block]);
        let e_stop =
            block_costs_stable(&update.costs, &costs, &blocks.blocks[update.worst_block], cfg.tolerance);
        let f_stop = f_optimality_converged(&update.costs, &costs, cfg.tolerance);
        debug!("round {iteration}: worst block length {:.17}, max cost change {change:e}", max_block_trace[iteration - 1]);
        costs = update.costs.clone();
        let done = f_stop;
        last = Some((forest, blocks, update, e_stop, f_stop, change, iteration));
        if done {
            break;
        }
    }

    let (forest, blocks, update, e_stop, f_stop, change, iterations) = last.expect("at least one round");
    if !f_stop {
        warn!("no fixed point after {iterations} rounds (last cost change {change:e})");
    }
    let keep = forest.reachable();
    let emitted = forest.restrict(&keep)?;
    validate(&emitted)?;
    let selected_block = Some(blocks.block_of[0]).filter(|&b| b < blocks.absorbing);
    if let Some(b) = selected_block {
        let best = update.block_lengths.iter().copied().fold(f64::INFINITY, f64::min);
        if update.block_lengths[b] > best + cfg.tolerance {
            warn!("the {{λ}} block ({:.17}) is not the shortest absorbing block ({best:.17})", update.block_lengths[b]);
        }
    }
    let expected_length = forest_expected_length(&emitted, source)?;
    let g_checked = match (cfg.family, f_stop) {
        (FamilyKind::Basic, true) => GCheck::Passed,
        (FamilyKind::Basic, false) => GCheck::Failed,
        _ => GCheck::NotApplicable,
    };
    info!("built {} trees in {iterations} rounds, expected length {expected_length:.17}", emitted.len());
    let report = OptimalityReport {
        converged: f_stop,
        e_optimal: e_stop,
        f_optimal: f_stop,
        g_checked,
        iterations,
        tolerance: cfg.tolerance,
        block_lengths: update.block_lengths,
        selected_block,
        max_block_trace,
        trace,
        costs,
        final_cost_change: change,
        expected_length,
        codebook_size: codebook_size(&emitted),
        reducible_rounds,
    };
    Ok((emitted, report))
}

/// The AIFV-m special case: delay `m`, links only to `(0,0)` and `(2^i,0)`.
pub fn construct_aifvm(source: &SourceDistribution, m: usize, cfg: &BuildConfig) -> Result<(CodeForest, OptimalityReport)> {
    let cfg = BuildConfig { n: m, family: FamilyKind::AifvM, backend: Backend::Ilp, ..cfg.clone() };
    construct(source, &cfg)
}

/// Builds over every basic mode with the exhaustive backend; a fixed point
/// there is optimal among all `N`-bit-delay codes.
pub fn check_g_optimality_binary(
    source: &SourceDistribution,
    n: usize,
    cfg: &BuildConfig,
) -> Result<(CodeForest, OptimalityReport)> {
    if source.len() != 2 {
        return Err(Error::Domain(format!("the global check needs a binary source, got {} symbols", source.len())));
    }
    if n > 3 {
        return Err(Error::TooLarge(format!("the global check supports N <= 3, got {n}")));
    }
    let cfg = BuildConfig { n, family: FamilyKind::Basic, backend: Backend::Brute, ..cfg.clone() };
    construct(source, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::{decode, encode};
    use crate::huffman::huffman_expected_length;

    fn bin(p: f64) -> SourceDistribution {
        SourceDistribution::binary(p).unwrap()
    }

    #[test]
    fn delay_one_is_huffman() {
        for s in [bin(0.9), SourceDistribution::new(vec![0.5, 0.3, 0.2]).unwrap()] {
            let (f, r) = construct(&s, &BuildConfig::new(1)).unwrap();
            assert_eq!(f.len(), 1);
            assert!(r.f_optimal && r.e_optimal && r.converged);
            assert_eq!(r.iterations, 1);
            assert!((r.expected_length - huffman_expected_length(&s)).abs() < 1e-15);
            assert_eq!(r.g_checked, GCheck::NotApplicable);
        }
    }

    #[test]
    fn two_bit_delay_matches_aifv2() {
        let s = bin(0.9);
        let (f, r) = construct(&s, &BuildConfig::new(2)).unwrap();
        let (_, ra) = construct_aifvm(&s, 2, &BuildConfig::new(2)).unwrap();
        assert!(r.f_optimal && ra.f_optimal);
        assert!((r.expected_length - ra.expected_length).abs() < 1e-12);
        assert!(r.expected_length < 1.0);
        assert!(f.delay_bound() <= 2);
        let msg = [0, 0, 1, 0, 0, 0, 1, 1, 0];
        assert_eq!(decode(&f, &encode(&f, &msg).unwrap(), msg.len()).unwrap(), msg);
    }

    #[test]
    fn aifvm_one_is_huffman_and_restriction_costs() {
        let s = bin(0.9);
        let (f, _) = construct_aifvm(&s, 1, &BuildConfig::new(1)).unwrap();
        assert_eq!(f.len(), 1);
        let (_, r3) = construct(&s, &BuildConfig::new(3)).unwrap();
        let (_, a3) = construct_aifvm(&s, 3, &BuildConfig::new(3)).unwrap();
        assert!(a3.expected_length >= r3.expected_length - 1e-12);
    }

    #[test]
    fn huffman_floor_init() {
        let s = SourceDistribution::new(vec![0.6, 0.25, 0.15]).unwrap();
        let cfg = BuildConfig { init: InitRule::HuffmanFloor, ..BuildConfig::new(2) };
        let (_, r) = construct(&s, &cfg).unwrap();
        assert!((r.max_block_trace[0] - huffman_expected_length(&s)).abs() < 1e-12);
        assert!(r.expected_length <= huffman_expected_length(&s) + 1e-12);
        let (_, rf) = construct(&s, &BuildConfig::new(2)).unwrap();
        assert!((r.expected_length - rf.expected_length).abs() < 1e-12);
    }

    #[test]
    fn mirror_reuse_is_sound() {
        for p in [0.6, 0.75, 0.93] {
            let s = bin(p);
            let (_, a) = construct(&s, &BuildConfig::new(3)).unwrap();
            let (_, b) = construct(&s, &BuildConfig { cosmos: false, ..BuildConfig::new(3) }).unwrap();
            assert!((a.expected_length - b.expected_length).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_binary_is_one_bit() {
        let (_, r) = check_g_optimality_binary(&bin(0.5), 2, &BuildConfig::new(2)).unwrap();
        assert_eq!(r.g_checked, GCheck::Passed);
        assert!((r.expected_length - 1.0).abs() < 1e-15);
    }

    #[test]
    fn global_check_matches_continuous() {
        let s = bin(0.75);
        let (f, g) = check_g_optimality_binary(&s, 2, &BuildConfig::new(2)).unwrap();
        let (_, c) = construct(&s, &BuildConfig::new(2)).unwrap();
        assert_eq!(g.g_checked, GCheck::Passed);
        assert!((g.expected_length - c.expected_length).abs() < 1e-12);
        for k in 0..f.len() {
            assert!(f.expands(k).unwrap().max_len() <= 2);
        }
    }

    #[test]
    fn config_errors() {
        let s3 = SourceDistribution::new(vec![0.5, 0.3, 0.2]).unwrap();
        let brute = BuildConfig { backend: Backend::Brute, ..BuildConfig::new(2) };
        assert!(matches!(construct(&s3, &brute), Err(Error::Domain(_))));
        let basic = BuildConfig { family: FamilyKind::Basic, ..BuildConfig::new(2) };
        assert!(matches!(construct(&bin(0.7), &basic), Err(Error::Domain(_))));
        assert!(construct(&bin(0.7), &BuildConfig { tolerance: 0.0, ..BuildConfig::new(2) }).is_err());
        assert!(check_g_optimality_binary(&s3, 2, &BuildConfig::new(2)).is_err());
    }

    #[test]
    fn report_text_and_determinism() {
        let s = SourceDistribution::new(vec![0.7, 0.2, 0.1]).unwrap();
        let (f1, r1) = construct(&s, &BuildConfig::new(2)).unwrap();
        let (f2, r2) = construct(&s, &BuildConfig::new(2)).unwrap();
        assert_eq!(f1, f2);
        assert_eq!(r1.to_text(), r2.to_text());
        assert_eq!(r1.trace_csv(), r2.trace_csv());
        assert!(r1.to_text().contains("f_optimal=true"));
        assert!(r1.trace_csv().starts_with("iter,block,Lbar_j,max_dC\n"));
    }

    #[test]
    fn codebook_size_folds_mirrors() {
        let s = bin(0.8);
        let (f, r) = construct(&s, &BuildConfig::new(1)).unwrap();
        assert_eq!(codebook_size(&f), 2);
        assert_eq!(r.codebook_size, 2);
    }
}
