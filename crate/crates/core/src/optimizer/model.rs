//! The integer program for one code tree with a continuous mode.
//!
//! Every constraint is stored with integer coefficients: rows involving
//! interval endpoints are multiplied by `2^(D+N)`, which makes all their
//! dyadic coefficients integral.

use std::fmt::Write as _;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::forest::TreeEntry;
use crate::mode::ContinuousModeId;

/// Input data for one tree problem.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeProblem {
    /// Delay `N`.
    pub n: usize,
    /// Mode of the tree being built.
    pub target: ContinuousModeId,
    pub probs: Vec<f64>,
    /// Cost of linking to each continuous mode, indexed by
    /// [`ContinuousModeId::index`]; `None` forbids the link.
    pub link_costs: Vec<Option<f64>>,
    /// Maximum codeword length `D`.
    pub depth: usize,
    /// Restrict links to `(0,0)` and `(2^i, 0)`.
    pub aifvm: bool,
}

impl TreeProblem {
    pub fn m(&self) -> usize {
        self.probs.len()
    }

    pub fn half(&self) -> usize {
        1 << (self.n - 1)
    }

    /// Is a link to `id` permitted?
    pub fn allowed(&self, id: ContinuousModeId) -> bool {
        id.is_valid(self.n)
            && self.link_costs[id.index(self.n)].is_some()
            && (!self.aifvm || (id.k2 == 0 && (id.k1 == 0 || id.k1.is_power_of_two())))
    }

    pub fn link_cost(&self, id: ContinuousModeId) -> f64 {
        self.link_costs[id.index(self.n)].expect("link is allowed")
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("delay N must be at least 1".into()));
        }
        if self.m() < 2 {
            return Err(Error::Domain("a tree needs at least two symbols".into()));
        }
        if !self.target.is_valid(self.n) {
            return Err(Error::Domain(format!("{} is not a continuous mode for N={}", self.target, self.n)));
        }
        if self.link_costs.len() != self.half() * self.half() {
            return Err(Error::Domain("link cost table has the wrong size".into()));
        }
        if self.depth + self.n > 60 {
            return Err(Error::TooLarge(format!("D + N = {} exceeds 60", self.depth + self.n)));
        }
        if (1u128 << self.depth) < self.m() as u128 {
            return Err(Error::Infeasible(format!("depth {} cannot hold {} codewords", self.depth, self.m())));
        }
        Ok(())
    }
}

/// A symbol's place in a tree: codeword `code` of length `depth` (as a
/// binary number) and a link to continuous mode `(k1, k2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Placement {
    pub symbol: usize,
    pub depth: usize,
    pub code: u64,
    pub k1: u32,
    pub k2: u32,
}

impl Placement {
    pub fn codeword(&self) -> BitString {
        BitString::new(self.code, self.depth).expect("depth fits")
    }

    pub fn link(&self) -> ContinuousModeId {
        ContinuousModeId::new(self.k1, self.k2)
    }

    /// Interval `[lo, hi)` in units of `2^-(D+N)`.
    pub fn span(&self, depth_bound: usize, n: usize) -> (u64, u64) {
        let unit = 1u64 << (depth_bound - self.depth);
        let cell = 1u64 << (depth_bound + n - self.depth);
        (self.code * cell + self.k1 as u64 * unit, (self.code + 1) * cell - self.k2 as u64 * unit)
    }
}

/// Objective value of a list of placements.
pub fn layout_objective(problem: &TreeProblem, layout: &[Placement]) -> f64 {
    layout.iter().map(|pl| problem.probs[pl.symbol] * (pl.depth as f64 + problem.link_cost(pl.link()))).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub upper: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub label: String,
    pub terms: Vec<(usize, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

/// Offsets of each variable group.
#[derive(Clone, Debug, PartialEq)]
struct Layout {
    m: usize,
    d: usize,
    h: usize,
    t: usize,
    u: usize,
    v: usize,
    vl: usize,
    vr: usize,
    w: usize,
    wb: usize,
    k: usize,
    total: usize,
}

impl Layout {
    fn new(m: usize, d: usize, h: usize) -> Self {
        let t = 0;
        let u = t + m * (d + 1);
        let v = u + m * h * h;
        let vl = v + m * (m - 1);
        let vr = vl + m;
        let w = vr + m;
        let wb = w + m * d;
        let k = wb + m * d;
        let total = k + 2 * m * (d + 1);
        Layout { m, d, h, t, u, v, vl, vr, w, wb, k, total }
    }
    fn t(&self, m: usize, d: usize) -> usize {
        self.t + m * (self.d + 1) + d
    }
    fn u(&self, m: usize, k1: usize, k2: usize) -> usize {
        self.u + m * self.h * self.h + k1 * self.h + k2
    }
    /// `v(m, m')`: symbol `m'` immediately follows `m`.
    fn v(&self, m: usize, next: usize) -> usize {
        debug_assert_ne!(m, next);
        self.v + m * (self.m - 1) + if next < m { next } else { next - 1 }
    }
    fn vl(&self, m: usize) -> usize {
        self.vl + m
    }
    fn vr(&self, m: usize) -> usize {
        self.vr + m
    }
    fn w(&self, m: usize, i: usize) -> usize {
        self.w + m * self.d + i
    }
    fn wb(&self, m: usize, i: usize) -> usize {
        self.wb + m * self.d + i
    }
    /// `j = 0` holds the left trim `k1`, `j = 1` the right trim `k2`.
    fn k(&self, j: usize, m: usize, d: usize) -> usize {
        self.k + (j * self.m + m) * (self.d + 1) + d
    }
}

/// Per-group variable counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VariableCounts {
    pub t: usize,
    pub u: usize,
    pub v_pairs: usize,
    pub v_left: usize,
    pub v_right: usize,
    pub w: usize,
    pub k: usize,
}

/// The explicit integer program for one tree.
#[derive(Clone, Debug, PartialEq)]
pub struct IlpModel {
    pub problem: TreeProblem,
    pub variables: Vec<Variable>,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    layout: Layout,
}

/// Builds every variable and constraint of the tree program.
pub fn build_ilp(problem: &TreeProblem) -> Result<IlpModel> {
    problem.validate()?;
    let (m, d, n, h) = (problem.m(), problem.depth, problem.n, problem.half());
    let lay = Layout::new(m, d, h);
    let scale: i64 = 1 << (d + n);
    let mut vars = vec![Variable { name: String::new(), upper: 1 }; lay.total];
    let mut obj = vec![0.0; lay.total];

    for s in 0..m {
        for dd in 0..=d {
            vars[lay.t(s, dd)].name = format!("t_{s}_{dd}");
            obj[lay.t(s, dd)] = problem.probs[s] * dd as f64;
            for j in 0..2 {
                let x = lay.k(j, s, dd);
                vars[x] = Variable { name: format!("k{}_{s}_{dd}", j + 1), upper: h as i64 - 1 };
            }
        }
        for k1 in 0..h {
            for k2 in 0..h {
                let id = ContinuousModeId::new(k1 as u32, k2 as u32);
                let x = lay.u(s, k1, k2);
                vars[x].name = format!("u_{s}_{k1}_{k2}");
                if problem.link_costs[id.index(n)].is_some() {
                    obj[x] = problem.probs[s] * problem.link_cost(id);
                } else {
                    vars[x].upper = 0;
                }
            }
        }
        for next in (0..m).filter(|&x| x != s) {
            vars[lay.v(s, next)].name = format!("v_{s}_{next}");
        }
        vars[lay.vl(s)].name = format!("vL_{s}");
        vars[lay.vr(s)].name = format!("vR_{s}");
        for i in 0..d {
            vars[lay.w(s, i)].name = format!("w_{s}_{i}");
            vars[lay.wb(s, i)].name = format!("wb_{s}_{i}");
        }
    }

    let mut rows = Vec::new();
    let mut row = |label: String, terms: Vec<(usize, i64)>, sense: Sense, rhs: i64| {
        rows.push(Constraint { label, terms, sense, rhs });
    };
    // Coefficient of bit i of a codeword, and of a trim at depth dd, at scale 2^(D+N).
    let bitw = |i: usize| 1i64 << (d + n - i - 1);
    let trimw = |dd: usize| 1i64 << (d - dd);
    let k1_big = problem.target.k1 as i64 * (1 << d);
    let k2_big = problem.target.k2 as i64 * (1 << d);

    for s in 0..m {
        for i in 0..d {
            row(format!("cw_consis1_{s}_{i}"), vec![(lay.w(s, i), 1), (lay.wb(s, i), 1)], Sense::Le, 1);
        }
        for i in 0..d.saturating_sub(1) {
            row(
                format!("cw_consis2_{s}_{i}"),
                vec![(lay.w(s, i + 1), 1), (lay.wb(s, i + 1), 1), (lay.w(s, i), -1), (lay.wb(s, i), -1)],
                Sense::Le,
                0,
            );
        }
    }
    for s in 0..m {
        row(format!("pick_t_{s}"), (0..=d).map(|dd| (lay.t(s, dd), 1)).collect(), Sense::Eq, 1);
        let u_terms = (0..h).flat_map(|a| (0..h).map(move |b| (a, b))).map(|(a, b)| (lay.u(s, a, b), 1)).collect();
        row(format!("pick_u_{s}"), u_terms, Sense::Eq, 1);
    }
    row("pick_vL".into(), (0..m).map(|s| (lay.vl(s), 1)).collect(), Sense::Eq, 1);
    row("pick_vR".into(), (0..m).map(|s| (lay.vr(s), 1)).collect(), Sense::Eq, 1);
    for s in 0..m {
        let mut pred: Vec<(usize, i64)> = (0..m).filter(|&x| x != s).map(|x| (lay.v(x, s), 1)).collect();
        pred.push((lay.vl(s), 1));
        row(format!("pick_pred_{s}"), pred, Sense::Eq, 1);
        let mut succ: Vec<(usize, i64)> = (0..m).filter(|&x| x != s).map(|x| (lay.v(s, x), 1)).collect();
        succ.push((lay.vr(s), 1));
        row(format!("pick_succ_{s}"), succ, Sense::Eq, 1);
    }
    for s in 0..m {
        let mut terms: Vec<(usize, i64)> = (0..d).flat_map(|i| [(lay.w(s, i), 1), (lay.wb(s, i), 1)]).collect();
        terms.extend((1..=d).map(|dd| (lay.t(s, dd), -(dd as i64))));
        row(format!("d_consis1_{s}"), terms, Sense::Eq, 0);
        for j in 0..2 {
            for dd in 0..=d {
                row(
                    format!("d_consis2_{}_{s}_{dd}", j + 1),
                    vec![(lay.k(j, s, dd), 1), (lay.t(s, dd), -(h as i64 - 1))],
                    Sense::Le,
                    0,
                );
            }
            let mut terms: Vec<(usize, i64)> = Vec::new();
            for a in 0..h {
                for b in 0..h {
                    let kv = if j == 0 { a } else { b } as i64;
                    if kv != 0 {
                        terms.push((lay.u(s, a, b), kv));
                    }
                }
            }
            terms.extend((0..=d).map(|dd| (lay.k(j, s, dd), -1)));
            row(format!("d_consis3_{}_{s}", j + 1), terms, Sense::Eq, 0);
        }
    }

    // Upper end of s (as 1 - hi_s) and lower end of s, at scale 2^(D+N).
    let upper_gap = |s: usize| -> Vec<(usize, i64)> {
        let mut t: Vec<(usize, i64)> = (0..d).map(|i| (lay.wb(s, i), bitw(i))).collect();
        t.extend((0..=d).map(|dd| (lay.k(1, s, dd), trimw(dd))));
        t
    };
    let lower_end = |s: usize| -> Vec<(usize, i64)> {
        let mut t: Vec<(usize, i64)> = (0..d).map(|i| (lay.w(s, i), bitw(i))).collect();
        t.extend((0..=d).map(|dd| (lay.k(0, s, dd), trimw(dd))));
        t
    };
    let neg = |t: Vec<(usize, i64)>| -> Vec<(usize, i64)> { t.into_iter().map(|(x, c)| (x, -c)).collect() };

    for s in 0..m {
        for next in (0..m).filter(|&x| x != s) {
            let mut lo = neg(upper_gap(s));
            lo.extend(neg(lower_end(next)));
            lo.push((lay.v(s, next), scale));
            row(format!("color1_{s}_{next}"), lo, Sense::Le, 0);
            let mut hi = upper_gap(s);
            hi.extend(lower_end(next));
            hi.push((lay.v(s, next), scale));
            row(format!("color1_sub_{s}_{next}"), hi, Sense::Le, 2 * scale);
        }
        let mut t = neg(lower_end(s));
        t.push((lay.vl(s), scale));
        row(format!("color2L_{s}"), t, Sense::Le, scale - k1_big);
        let mut t = neg(upper_gap(s));
        t.push((lay.vr(s), scale));
        row(format!("color2R_{s}"), t, Sense::Le, scale - k2_big);
        let mut t = lower_end(s);
        t.push((lay.vl(s), scale));
        row(format!("color2L_sub_{s}"), t, Sense::Le, scale + k1_big);
        let mut t = upper_gap(s);
        t.push((lay.vr(s), scale));
        row(format!("color2R_sub_{s}"), t, Sense::Le, scale + k2_big);
    }

    if problem.aifvm {
        for s in 0..m {
            let mut terms = vec![(lay.u(s, 0, 0), 1)];
            terms.extend((0..n.saturating_sub(1)).map(|i| (lay.u(s, 1 << i, 0), 1)));
            row(format!("aifvm_{s}"), terms, Sense::Eq, 1);
        }
    }

    Ok(IlpModel { problem: problem.clone(), variables: vars, objective: obj, constraints: rows, layout: lay })
}

impl IlpModel {
    pub fn counts(&self) -> VariableCounts {
        let l = &self.layout;
        VariableCounts {
            t: l.m * (l.d + 1),
            u: l.m * l.h * l.h,
            v_pairs: l.m * (l.m - 1),
            v_left: l.m,
            v_right: l.m,
            w: 2 * l.m * l.d,
            k: 2 * l.m * (l.d + 1),
        }
    }

    pub fn row(&self, label: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.label == label)
    }

    pub fn objective_value(&self, x: &[i64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * *v as f64).sum()
    }

    /// Labels of the bounds and rows that `x` violates.
    pub fn violations(&self, x: &[i64]) -> Vec<String> {
        let mut out = Vec::new();
        if x.len() != self.variables.len() {
            out.push(format!("assignment has {} values, model has {} variables", x.len(), self.variables.len()));
            return out;
        }
        for (v, &val) in self.variables.iter().zip(x) {
            if val < 0 || val > v.upper {
                out.push(format!("bound {}", v.name));
            }
        }
        for c in &self.constraints {
            let lhs: i128 = c.terms.iter().map(|&(i, a)| a as i128 * x[i] as i128).sum();
            let ok = match c.sense {
                Sense::Le => lhs <= c.rhs as i128,
                Sense::Eq => lhs == c.rhs as i128,
            };
            if !ok {
                out.push(c.label.clone());
            }
        }
        out
    }

    pub fn is_feasible(&self, x: &[i64]) -> bool {
        self.violations(x).is_empty()
    }

    /// Sets the variables that describe `layout`, listed in left-to-right order.
    pub fn assignment(&self, layout: &[Placement]) -> Vec<i64> {
        let l = &self.layout;
        let mut x = vec![0i64; l.total];
        for (pos, pl) in layout.iter().enumerate() {
            let s = pl.symbol;
            x[l.t(s, pl.depth)] = 1;
            x[l.u(s, pl.k1 as usize, pl.k2 as usize)] = 1;
            x[l.k(0, s, pl.depth)] = pl.k1 as i64;
            x[l.k(1, s, pl.depth)] = pl.k2 as i64;
            for i in 0..pl.depth {
                let bit = (pl.code >> (pl.depth - 1 - i)) & 1 == 1;
                x[if bit { l.w(s, i) } else { l.wb(s, i) }] = 1;
            }
            if pos == 0 {
                x[l.vl(s)] = 1;
            }
            match layout.get(pos + 1) {
                Some(next) => x[l.v(s, next.symbol)] = 1,
                None => x[l.vr(s)] = 1,
            }
        }
        x
    }

    /// Reads each symbol's codeword and link back out of a feasible assignment.
    pub fn decode(&self, x: &[i64]) -> Result<Vec<(BitString, ContinuousModeId)>> {
        let bad = self.violations(x);
        if let Some(first) = bad.first() {
            return Err(Error::Infeasible(format!("assignment violates {first} ({} violations)", bad.len())));
        }
        let l = &self.layout;
        (0..l.m)
            .map(|s| {
                let depth = (0..=l.d).find(|&dd| x[l.t(s, dd)] == 1).expect("exactly one depth");
                let bits: Vec<bool> = (0..depth).map(|i| x[l.w(s, i)] == 1).collect();
                let (k1, k2) = (0..l.h)
                    .flat_map(|a| (0..l.h).map(move |b| (a, b)))
                    .find(|&(a, b)| x[l.u(s, a, b)] == 1)
                    .expect("exactly one link");
                Ok((BitString::from_bits(&bits)?, ContinuousModeId::new(k1 as u32, k2 as u32)))
            })
            .collect()
    }

    /// The model in CPLEX LP text format, for use with external solvers.
    pub fn to_lp(&self) -> String {
        let p = &self.problem;
        let mut s = String::new();
        let _ = writeln!(s, "\\ code tree model: N={} M={} D={} mode={}", p.n, p.m(), p.depth, p.target);
        let _ = writeln!(s, "\\ interval rows are scaled by 2^{}", p.depth + p.n);
        s.push_str("Minimize\n obj:");
        for (i, c) in self.objective.iter().enumerate() {
            if *c != 0.0 {
                let _ = write!(s, " + {c:e} {}", self.variables[i].name);
            }
        }
        s.push_str("\nSubject To\n");
        for c in &self.constraints {
            let _ = write!(s, " {}:", c.label);
            for &(i, a) in &c.terms {
                let _ = write!(s, " {} {} {}", if a < 0 { '-' } else { '+' }, a.abs(), self.variables[i].name);
            }
            let _ = writeln!(s, " {} {}", if c.sense == Sense::Le { "<=" } else { "=" }, c.rhs);
        }
        s.push_str("Bounds\n");
        for v in self.variables.iter().filter(|v| v.upper != 1) {
            let _ = writeln!(s, " 0 <= {} <= {}", v.name, v.upper);
        }
        s.push_str("Binaries\n");
        for v in self.variables.iter().filter(|v| v.upper == 1) {
            let _ = writeln!(s, " {}", v.name);
        }
        s.push_str("Generals\n");
        for v in self.variables.iter().filter(|v| v.upper != 1) {
            let _ = writeln!(s, " {}", v.name);
        }
        s.push_str("End\n");
        s
    }
}

/// Converts solved placements into tree entries whose links are continuous-mode indices.
pub fn entries_from_layout(problem: &TreeProblem, layout: &[Placement]) -> Vec<TreeEntry> {
    let mut entries = vec![TreeEntry { codeword: BitString::EMPTY, link: 0 }; problem.m()];
    for pl in layout {
        entries[pl.symbol] = TreeEntry { codeword: pl.codeword(), link: pl.link().index(problem.n) };
    }
    entries
}
