//! Exact branch-and-bound for the tree program.
//!
//! A feasible assignment chains the symbols left to right so that their
//! intervals tile the target mode's interval. The search follows that chain:
//! at each step it picks the next symbol (`v`), its depth (`t`) and its link
//! (`u`); the codeword bits (`w`, `w̄`) and trims (`k`) then follow from the
//! current position. Positions are integers in units of `2^-(D+N)`.
//!
//! The lower bound at a node is the Lagrangian relaxation of "the remaining
//! intervals sum to the remaining length", which for a zero multiplier is the
//! sum of per-symbol minimum costs.

use std::f64::consts::LN_2;

use super::model::{layout_objective, Placement, TreeProblem};
use crate::error::{Error, Result};
use crate::mode::ContinuousModeId;

/// Default cap on explored nodes.
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;
/// Objective differences below this count as ties; the earlier find wins.
pub const TIE_TOLERANCE: f64 = 1e-12;
/// Allowance for rounding in the floating-point lower bound.
const BOUND_SLACK: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions {
    pub node_budget: u64,
    /// Objective of a known feasible tree; only used to prune.
    pub upper_bound: Option<f64>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { node_budget: DEFAULT_NODE_BUDGET, upper_bound: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    /// Placements in left-to-right order.
    pub layout: Vec<Placement>,
    pub objective: f64,
    pub nodes: u64,
}

struct Search<'a> {
    p: &'a TreeProblem,
    d: usize,
    n: usize,
    half: u32,
    end: u64,
    /// Link cost by continuous index, `NaN` when forbidden.
    cost: Vec<f64>,
    /// For each symbol, an earlier symbol with the same probability.
    twin: Vec<Option<usize>>,
    /// Relaxed options `(cost, length)` shared by all symbols.
    options: Vec<(f64, f64)>,
    min_len: u64,
    path: Vec<Placement>,
    best: Option<(f64, Vec<Placement>)>,
    upper: f64,
    nodes: u64,
    budget: u64,
}

/// Finds a minimum-objective layout, or reports infeasibility.
pub fn branch_and_bound(p: &TreeProblem, opts: &SearchOptions) -> Result<SearchResult> {
    p.validate()?;
    let (n, d) = (p.n, p.depth);
    let half = 1u32 << (n - 1);
    let full = 1u64 << (d + n);
    let start = p.target.k1 as u64 * (1 << d);
    let end = full - p.target.k2 as u64 * (1 << d);

    let cost: Vec<f64> = (0..(half * half) as usize)
        .map(|i| {
            let id = ContinuousModeId::from_index(i, n);
            if p.allowed(id) {
                p.link_cost(id)
            } else {
                f64::NAN
            }
        })
        .collect();
    // Cheapest link for each total trim k1 + k2.
    let mut by_trim = vec![f64::INFINITY; 2 * half as usize - 1];
    for (i, c) in cost.iter().enumerate() {
        if !c.is_nan() {
            let id = ContinuousModeId::from_index(i, n);
            let s = (id.k1 + id.k2) as usize;
            by_trim[s] = by_trim[s].min(*c);
        }
    }
    let mut options = Vec::new();
    let mut min_len = u64::MAX;
    for depth in 0..=d {
        for (s, c) in by_trim.iter().enumerate() {
            if c.is_finite() {
                let len = (1u64 << (d - depth)) * ((1u64 << n) - s as u64);
                min_len = min_len.min(len);
                options.push((depth as f64 + c, len as f64));
            }
        }
    }
    if options.is_empty() {
        return Err(Error::Infeasible("no link is allowed".into()));
    }
    let twin = (0..p.m()).map(|s| (0..s).rev().find(|&t| p.probs[t] == p.probs[s])).collect();

    let mut search = Search {
        p,
        d,
        n,
        half,
        end,
        cost,
        twin,
        options,
        min_len,
        path: Vec::with_capacity(p.m()),
        best: None,
        upper: opts.upper_bound.unwrap_or(f64::INFINITY),
        nodes: 0,
        budget: opts.node_budget,
    };
    if p.m() > 63 {
        return Err(Error::TooLarge("alphabets above 63 symbols are not supported by the tree search".into()));
    }
    let all = (1u64 << p.m()) - 1;
    search.dfs(start, all, 0.0)?;
    match search.best {
        Some((_, layout)) => {
            let objective = layout_objective(p, &layout);
            Ok(SearchResult { layout, objective, nodes: search.nodes })
        }
        None => Err(Error::Infeasible(format!(
            "no tree with depth <= {} tiles mode {} for {} symbols",
            p.depth,
            p.target,
            p.m()
        ))),
    }
}

impl Search<'_> {
    fn dfs(&mut self, x: u64, mask: u64, partial: f64) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::NodeBudget { budget: self.budget });
        }
        if mask == 0 {
            if x == self.end && self.best.as_ref().is_none_or(|(v, _)| partial < v - TIE_TOLERANCE) {
                self.best = Some((partial, self.path.clone()));
            }
            return Ok(());
        }
        let remaining = self.end - x;
        if remaining < self.min_len * mask.count_ones() as u64 {
            return Ok(());
        }
        let bound = partial + self.lower_bound(mask, remaining as f64) - BOUND_SLACK;
        if bound > self.upper {
            return Ok(());
        }
        if let Some((v, _)) = &self.best {
            if bound >= v - TIE_TOLERANCE {
                return Ok(());
            }
        }

        let (d, n) = (self.d, self.n);
        for s in 0..self.p.m() {
            if mask >> s & 1 == 0 || self.twin[s].is_some_and(|t| mask >> t & 1 == 1) {
                continue;
            }
            let rest = mask & !(1 << s);
            let ps = self.p.probs[s];
            for depth in 0..=d {
                let unit = 1u64 << (d - depth);
                if x % unit != 0 {
                    continue;
                }
                let q = x / unit;
                let k1 = (q & ((1 << n) - 1)) as u32;
                if k1 >= self.half {
                    continue;
                }
                let code = q >> n;
                for k2 in 0..self.half {
                    let c = self.cost[ContinuousModeId::new(k1, k2).index(n)];
                    if c.is_nan() {
                        continue;
                    }
                    let y = (code + 1) * (unit << n) - k2 as u64 * unit;
                    if y > self.end || (rest == 0 && y != self.end) {
                        continue;
                    }
                    self.path.push(Placement { symbol: s, depth, code, k1, k2 });
                    let r = self.dfs(y, rest, partial + ps * (depth as f64 + c));
                    self.path.pop();
                    r?;
                }
            }
        }
        Ok(())
    }

    /// `max_λ Σ_s min_o (p_s c_o - λ ℓ_o) + λ R` over a few multipliers
    /// around the value that balances lengths in proportion to probability.
    fn lower_bound(&self, mask: u64, remaining: f64) -> f64 {
        let ptot: f64 = (0..self.p.m()).filter(|s| mask >> s & 1 == 1).map(|s| self.p.probs[s]).sum();
        let lambda0 = -ptot / (remaining * LN_2);
        let mut best = f64::NEG_INFINITY;
        for f in [0.0, 0.5, 1.0, 2.0] {
            let lambda = f * lambda0;
            let mut v = lambda * remaining;
            for s in (0..self.p.m()).filter(|s| mask >> s & 1 == 1) {
                let ps = self.p.probs[s];
                v += self.options.iter().map(|&(c, l)| ps * c - lambda * l).fold(f64::INFINITY, f64::min);
            }
            best = best.max(v);
        }
        best
    }
}
