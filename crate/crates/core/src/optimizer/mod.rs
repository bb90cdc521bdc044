//! Optimal single code trees for given link costs.

pub mod brute;
pub mod model;
pub mod search;

pub use brute::{brute_force_binary, BinaryTree};
pub use model::{build_ilp, entries_from_layout, layout_objective, IlpModel, Placement, TreeProblem, VariableCounts};
pub use search::{branch_and_bound, SearchOptions, SearchResult, DEFAULT_NODE_BUDGET, TIE_TOLERANCE};

use crate::error::{Error, Result};
use crate::forest::TreeEntry;
use crate::mode::{ContinuousModeId, ModeFamily};

/// `3·⌈log2 M⌉ + N`.
pub fn default_depth(m: usize, n: usize) -> usize {
    3 * (usize::BITS - (m.max(1) - 1).leading_zeros()) as usize + n
}

/// `N - log2(number of N-bit leaves)`; zero for `{λ}`.
pub fn formula_cost(leaf_count: usize, n: usize) -> f64 {
    n as f64 - (leaf_count as f64).log2()
}

/// Initial costs for every mode of a family.
pub fn initial_costs(family: &ModeFamily) -> Vec<f64> {
    family.modes().iter().map(|m| formula_cost(m.leaf_count(), family.n())).collect()
}

/// A feasible solution of a tree program.
#[derive(Clone, Debug, PartialEq)]
pub struct IlpSolution {
    pub assignment: Vec<i64>,
    pub layout: Vec<Placement>,
    pub objective: f64,
    pub nodes: u64,
}

/// Solves the program exactly and checks the answer against every row.
pub fn solve_ilp(model: &IlpModel, opts: &SearchOptions) -> Result<IlpSolution> {
    let p = &model.problem;
    let mut opts = opts.clone();
    if let Some(f) = fallback_layout(p) {
        let v = layout_objective(p, &f);
        opts.upper_bound = Some(opts.upper_bound.map_or(v, |u| u.min(v)));
    }
    let found = branch_and_bound(p, &opts)?;
    let assignment = model.assignment(&found.layout);
    let bad = model.violations(&assignment);
    if !bad.is_empty() {
        return Err(Error::Numerical(format!("search produced an assignment violating {bad:?}")));
    }
    Ok(IlpSolution { objective: model.objective_value(&assignment), assignment, layout: found.layout, nodes: found.nodes })
}

/// Tree entries encoded by a solution; links are continuous-mode indices.
pub fn decode_solution(model: &IlpModel, sol: &IlpSolution) -> Result<Vec<TreeEntry>> {
    Ok(model
        .decode(&sol.assignment)?
        .into_iter()
        .map(|(codeword, id)| TreeEntry { codeword, link: id.index(model.problem.n) })
        .collect())
}

/// Builds, solves and decodes in one step.
pub fn solve_tree(problem: &TreeProblem, opts: &SearchOptions) -> Result<(Vec<TreeEntry>, IlpSolution)> {
    let model = build_ilp(problem)?;
    let sol = solve_ilp(&model, opts)?;
    Ok((decode_solution(&model, &sol)?, sol))
}

/// A simple feasible tree: repeatedly split the shallowest piece of the
/// mode's interval at the midpoint of its dyadic cell until there is one
/// piece per symbol, then give shallow pieces to likely symbols.
///
/// Returns `None` if a piece would exceed the depth bound or need a
/// forbidden link.
pub fn fallback_layout(p: &TreeProblem) -> Option<Vec<Placement>> {
    let n = p.n;
    let half = 1u32 << (n - 1);
    let mut pieces = vec![(0usize, 0u64, p.target.k1, p.target.k2)];
    while pieces.len() < p.m() {
        let i = (0..pieces.len()).min_by_key(|&i| pieces[i].0)?;
        let (d, c, a, b) = pieces[i];
        let left = trimmed_cell(d + 1, 2 * c, 2 * a, half, n, false);
        let right = trimmed_cell(d + 1, 2 * c + 1, 2 * b, half, n, true);
        pieces.splice(i..=i, [left, right]);
    }
    if pieces.iter().any(|&(d, _, a, b)| d > p.depth || !p.allowed(ContinuousModeId::new(a, b))) {
        return None;
    }
    let mut by_depth: Vec<usize> = (0..pieces.len()).collect();
    by_depth.sort_by_key(|&i| pieces[i].0);
    let mut by_prob: Vec<usize> = (0..p.m()).collect();
    by_prob.sort_by(|&x, &y| p.probs[y].total_cmp(&p.probs[x]).then(x.cmp(&y)));
    let mut symbol_of = vec![0; pieces.len()];
    for (pi, s) in by_depth.into_iter().zip(by_prob) {
        symbol_of[pi] = s;
    }
    Some(
        pieces
            .iter()
            .zip(symbol_of)
            .map(|(&(depth, code, k1, k2), symbol)| Placement { symbol, depth, code, k1, k2 })
            .collect(),
    )
}

/// The piece of cell `c` (depth `d`) that starts `t` units of `2^-(d+N)` in
/// (`from_right` = false) or ends `t` units early (`from_right` = true). When
/// `t` is too large for one trim, the piece moves into the sub-cell that
/// hugs the far end of the cell.
fn trimmed_cell(d: usize, c: u64, t: u32, half: u32, n: usize, from_right: bool) -> (usize, u64, u32, u32) {
    let (mut d, mut c, mut t) = (d, c, t as u64);
    let full = 1u64 << n;
    while t >= half as u64 {
        // The piece lies inside the half of the cell away from the trimmed end.
        d += 1;
        c = 2 * c + if from_right { 0 } else { 1 };
        t = 2 * t - full;
    }
    if from_right {
        (d, c, 0, t as u32)
    } else {
        (d, c, t as u32, 0)
    }
}

/// Expands a cost vector over a continuous or AIFV-m family into the
/// per-continuous-index table used by [`TreeProblem`].
pub fn link_cost_table(family: &ModeFamily, costs: &[f64]) -> Result<Vec<Option<f64>>> {
    let n = family.n();
    let h = 1usize << (n - 1);
    let mut table = vec![None; h * h];
    for (i, c) in costs.iter().enumerate() {
        let id = family
            .continuous_id(i)
            .ok_or_else(|| Error::Domain(format!("mode {} of the family is not continuous", family.mode(i))))?;
        table[id.index(n)] = Some(*c);
    }
    Ok(table)
}
