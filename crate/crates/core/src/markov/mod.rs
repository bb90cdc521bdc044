//! The tree-to-tree Markov chain of a forest: transition matrix, block
//! structure, stationary distributions and the cost-update rules.

mod scc;

pub use scc::strongly_connected_components;

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::forest::CodeForest;
use crate::source::SourceDistribution;

/// Pivots smaller than this make a system singular.
pub const PIVOT_THRESHOLD: f64 = 1e-12;
/// Default tolerance for cost convergence.
pub const DEFAULT_TOLERANCE: f64 = 1e-14;
/// Rows of a transition matrix must sum to one within this.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// A row-stochastic `K × K` matrix; entry `(k, k')` is the probability that
/// tree `k` hands over to tree `k'`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    m: DMatrix<f64>,
}

impl TransitionMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        if k == 0 || rows.iter().any(|r| r.len() != k) {
            return Err(Error::Numerical("transition matrix must be square and non-empty".into()));
        }
        let m = DMatrix::from_fn(k, k, |i, j| rows[i][j]);
        Self::from_matrix(m)
    }

    fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        for i in 0..m.nrows() {
            let row = m.row(i);
            if row.iter().any(|&x| !(0.0..=1.0 + ROW_SUM_TOLERANCE).contains(&x)) {
                return Err(Error::Numerical(format!("row {i} has an entry outside [0, 1]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::Numerical(format!("row {i} sums to {s}")));
            }
        }
        Ok(TransitionMatrix { m })
    }

    pub fn len(&self) -> usize {
        self.m.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.m.nrows() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Successors of `i` with non-zero probability.
    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&j| self.m[(i, j)] > 0.0)
    }
}

/// `Q(k, k') = Σ p(a)` over the symbols of tree `k` that link to `k'`.
pub fn transition_matrix(forest: &CodeForest, source: &SourceDistribution) -> Result<TransitionMatrix> {
    check_alphabet(forest, source)?;
    let k = forest.len();
    let mut m = DMatrix::zeros(k, k);
    for (i, t) in forest.trees().iter().enumerate() {
        for (e, p) in t.entries.iter().zip(source.probs()) {
            m[(i, e.link)] += p;
        }
    }
    TransitionMatrix::from_matrix(m)
}

/// Expected codeword length of each tree.
pub fn tree_lengths(forest: &CodeForest, source: &SourceDistribution) -> Result<Vec<f64>> {
    check_alphabet(forest, source)?;
    Ok(forest.trees().iter().map(|t| t.expected_length(source.probs())).collect())
}

fn check_alphabet(forest: &CodeForest, source: &SourceDistribution) -> Result<()> {
    if forest.alphabet_size() != source.len() {
        return Err(Error::InvalidDistribution(format!(
            "distribution has {} symbols, forest has {}",
            source.len(),
            forest.alphabet_size()
        )));
    }
    Ok(())
}

/// Strongly connected components of the chain ordered so that every
/// transition goes to the same or an earlier block.
///
/// The first `absorbing` blocks have no transitions out. Within each group
/// blocks are ordered by their smallest tree index, and each block lists its
/// trees in increasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockDecomposition {
    pub blocks: Vec<Vec<usize>>,
    pub absorbing: usize,
    pub block_of: Vec<usize>,
}

impl BlockDecomposition {
    pub fn is_irreducible(&self) -> bool {
        self.blocks.len() == 1
    }
}

pub fn block_decompose(p: &TransitionMatrix) -> BlockDecomposition {
    let k = p.len();
    let adj: Vec<Vec<usize>> = (0..k).map(|i| p.successors(i).collect()).collect();
    let mut comps = strongly_connected_components(&adj);
    for c in &mut comps {
        c.sort_unstable();
    }
    let mut comp_of = vec![0; k];
    for (c, members) in comps.iter().enumerate() {
        for &i in members {
            comp_of[i] = c;
        }
    }
    let succ: Vec<Vec<usize>> = comps
        .iter()
        .enumerate()
        .map(|(c, members)| {
            let mut s: Vec<usize> =
                members.iter().flat_map(|&i| adj[i].iter().map(|&j| comp_of[j])).filter(|&d| d != c).collect();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();

    let mut order: Vec<usize> = Vec::with_capacity(comps.len());
    let mut placed = vec![false; comps.len()];
    let mut absorbing: Vec<usize> = (0..comps.len()).filter(|&c| succ[c].is_empty()).collect();
    absorbing.sort_by_key(|&c| comps[c][0]);
    for &c in &absorbing {
        placed[c] = true;
        order.push(c);
    }
    while order.len() < comps.len() {
        let next = (0..comps.len())
            .filter(|&c| !placed[c] && succ[c].iter().all(|&d| placed[d]))
            .min_by_key(|&c| comps[c][0])
            .expect("the component graph is acyclic");
        placed[next] = true;
        order.push(next);
    }

    let blocks: Vec<Vec<usize>> = order.iter().map(|&c| comps[c].clone()).collect();
    let mut block_of = vec![0; k];
    for (b, members) in blocks.iter().enumerate() {
        for &i in members {
            block_of[i] = b;
        }
    }
    BlockDecomposition { blocks, absorbing: absorbing.len(), block_of }
}

/// Solves `a x = b` by LU with partial pivoting.
pub(crate) fn solve(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    let lu = a.lu();
    let u = lu.u();
    if let Some(i) = (0..u.nrows()).find(|&i| u[(i, i)].abs() < PIVOT_THRESHOLD) {
        return Err(Error::Numerical(format!("singular system: pivot {i} is {:e}", u[(i, i)])));
    }
    lu.solve(&b).ok_or_else(|| Error::Numerical("LU solve failed".into()))
}

/// Stationary distribution of each absorbing block, embedded in a length-K vector.
pub fn stationary(p: &TransitionMatrix, blocks: &BlockDecomposition) -> Result<Vec<Vec<f64>>> {
    (0..blocks.absorbing).map(|j| block_stationary(p, &blocks.blocks[j])).collect()
}

fn block_stationary(p: &TransitionMatrix, block: &[usize]) -> Result<Vec<f64>> {
    let n = block.len();
    // Rows of (Q - I)^T with the first balance equation replaced by Σπ = 1.
    let mut a = DMatrix::from_fn(n, n, |r, c| p.get(block[c], block[r]) - if r == c { 1.0 } else { 0.0 });
    a.row_mut(0).fill(1.0);
    let mut b = DVector::zeros(n);
    b[0] = 1.0;
    let x = solve(a, b)?;
    let mut out = vec![0.0; p.len()];
    for (i, &k) in block.iter().enumerate() {
        out[k] = x[i];
    }
    Ok(out)
}

/// `Σ_k π_k L_k`.
pub fn expected_length(lengths: &[f64], pi: &[f64]) -> f64 {
    lengths.iter().zip(pi).map(|(l, p)| l * p).sum()
}

/// Cost update for an irreducible chain: `C_0 = 0` and the rest solve
/// `(Q_rest - I) C_rest = L̄·1 - L_rest`.
pub fn cost_update_simple(lengths: &[f64], p: &TransitionMatrix, lbar: f64) -> Result<Vec<f64>> {
    let k = p.len();
    let mut c = vec![0.0; k];
    if k == 1 {
        return Ok(c);
    }
    let rest: Vec<usize> = (1..k).collect();
    let x = solve_costs(lengths, p, &rest, lbar, &c)?;
    for (i, &r) in rest.iter().enumerate() {
        c[r] = x[i];
    }
    Ok(c)
}

/// Solves `(Q_SS - I) x = L̄·1 - L_S - Σ_{k ∉ S} Q_{S,k} C_k` for the states `S`.
fn solve_costs(lengths: &[f64], p: &TransitionMatrix, states: &[usize], lbar: f64, known: &[f64]) -> Result<DVector<f64>> {
    let n = states.len();
    let a = DMatrix::from_fn(n, n, |r, c| p.get(states[r], states[c]) - if r == c { 1.0 } else { 0.0 });
    let b = DVector::from_fn(n, |r, _| {
        let s = states[r];
        let outside: f64 = (0..p.len()).filter(|k| !states.contains(k)).map(|k| p.get(s, k) * known[k]).sum();
        lbar - lengths[s] - outside
    });
    solve(a, b)
}

/// Result of the general cost update.
#[derive(Clone, Debug, PartialEq)]
pub struct CostUpdate {
    pub costs: Vec<f64>,
    /// Expected length of each absorbing block.
    pub block_lengths: Vec<f64>,
    /// The absorbing block with the largest expected length (first on ties).
    pub worst_block: usize,
    pub stationary: Vec<Vec<f64>>,
}

/// Cost update valid for any chain.
///
/// Each absorbing block pins its first tree to zero and is solved against
/// its own expected length; every other block is solved, in order, against
/// the largest absorbing-block length using the costs already fixed for the
/// blocks it leads into.
pub fn cost_update_general(lengths: &[f64], p: &TransitionMatrix, blocks: &BlockDecomposition) -> Result<CostUpdate> {
    let pis = stationary(p, blocks)?;
    let block_lengths: Vec<f64> = pis.iter().map(|pi| expected_length(lengths, pi)).collect();
    let worst_block = (0..block_lengths.len())
        .fold(0, |best, j| if block_lengths[j] > block_lengths[best] { j } else { best });
    let worst = block_lengths[worst_block];

    let mut costs = vec![0.0; p.len()];
    for (j, block) in blocks.blocks.iter().enumerate() {
        let (states, lbar): (&[usize], f64) =
            if j < blocks.absorbing { (&block[1..], block_lengths[j]) } else { (&block[..], worst) };
        if states.is_empty() {
            continue;
        }
        let x = solve_costs(lengths, p, states, lbar, &costs)?;
        for (i, &s) in states.iter().enumerate() {
            costs[s] = x[i];
        }
    }
    Ok(CostUpdate { costs, block_lengths, worst_block, stationary: pis })
}

/// `max |C_new - C_old| <= tol`.
pub fn f_optimality_converged(new: &[f64], old: &[f64], tol: f64) -> bool {
    max_abs_diff(new, old) <= tol
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// The stopping test on the worst absorbing block: its new costs equal its
/// old costs shifted so the block's first tree is zero.
pub fn block_costs_stable(new: &[f64], old: &[f64], block: &[usize], tol: f64) -> bool {
    let base = old[block[0]];
    block.iter().all(|&k| (new[k] - (old[k] - base)).abs() <= tol)
}

/// Long-run average codeword length when encoding starts in tree `start`,
/// averaging the absorbing-block lengths by absorption probability.
pub fn long_run_length(lengths: &[f64], p: &TransitionMatrix, blocks: &BlockDecomposition, start: usize) -> Result<f64> {
    let update = cost_update_general(lengths, p, blocks)?;
    let b0 = blocks.block_of[start];
    if b0 < blocks.absorbing {
        return Ok(update.block_lengths[b0]);
    }
    let transient: Vec<usize> = blocks.blocks[blocks.absorbing..].iter().flatten().copied().collect();
    let n = transient.len();
    let a = DMatrix::from_fn(n, n, |r, c| if r == c { 1.0 } else { 0.0 } - p.get(transient[r], transient[c]));
    let lu = a.lu();
    let row = transient.iter().position(|&k| k == start).expect("start is transient");
    let mut total = 0.0;
    for (j, lbar) in update.block_lengths.iter().enumerate() {
        let b = DVector::from_fn(n, |r, _| blocks.blocks[j].iter().map(|&k| p.get(transient[r], k)).sum());
        let h = lu.solve(&b).ok_or_else(|| Error::Numerical("absorption system is singular".into()))?;
        total += h[row] * lbar;
    }
    Ok(total)
}

/// Long-run average codeword length of a forest started in tree 0.
pub fn forest_expected_length(forest: &CodeForest, source: &SourceDistribution) -> Result<f64> {
    let p = transition_matrix(forest, source)?;
    let l = tree_lengths(forest, source)?;
    long_run_length(&l, &p, &block_decompose(&p), 0)
}

/// One row of the iteration trace.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub block: usize,
    pub block_length: f64,
    pub max_cost_change: f64,
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut s = String::from("iter,block,Lbar_j,max_dC\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{:.17},{:.6e}", r.iteration, r.block, r.block_length, r.max_cost_change);
    }
    s
}
