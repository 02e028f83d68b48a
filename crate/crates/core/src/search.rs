//! Bounded-width proof search over the full clause lattice, and the
//! dag-like bounded-width resolution closure used for comparison.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use num_traits::Signed;
use thiserror::Error;

use crate::clause::{Clause, CnfFormula, Literal};
use crate::flow::{verify_flow, FlowAssignment};
use crate::graph::{ClauseInterner, InferenceId, ProofGraph, RuleKind};
use crate::lp::{self, int, LinearProgram};

pub const DEFAULT_GUARD_ROWS: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("width {width} is below the widest hypothesis or goal ({needed})")]
    WidthTooSmall { width: usize, needed: usize },
    #[error("lattice needs {rows} constraints, over the guard of {limit}")]
    Guard { rows: usize, limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Refuse when the full lattice program would exceed this many
    /// constraints (balance rows plus flow bounds).
    pub guard_rows: usize,
    /// Try the lattice restricted to hypothesis variable clusters first.
    pub staged: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            guard_rows: DEFAULT_GUARD_ROWS,
            staged: true,
        }
    }
}

/// Dimensions of the programs solved.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub num_variables: u32,
    pub clauses: usize,
    pub inferences: usize,
    pub rows: usize,
    /// Which lattice produced the answer: `"cluster"`, `"full"` or `"trivial"`.
    pub stage: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub proof: Option<(ProofGraph, FlowAssignment)>,
    pub stats: SearchStats,
}

/// Number of non-tautological clauses of width at most `w` over `n`
/// variables, plus `n` elementary tautologies when `w ≥ 2`.
pub fn lattice_size(n: u32, w: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for k in 0..=w.min(n as usize) {
        total += binom << k;
        binom = binom * (n as u128 - k as u128) / (k as u128 + 1);
    }
    if w >= 2 {
        total += n as u128;
    }
    total
}

/// Estimated constraint count of the full lattice program.
pub fn estimated_rows(n: u32, w: usize) -> u128 {
    let clauses = lattice_size(n, w);
    let narrow = lattice_size(n, w.saturating_sub(1)) - if w >= 3 { n as u128 } else { 0 };
    // Each narrow clause has at most n free variables, one cut and one split each.
    clauses + narrow * 2 * n as u128 + if w >= 2 { n as u128 } else { 0 }
}

struct Lattice {
    clauses: Vec<Clause>,
    index: HashMap<Clause, usize>,
    rules: Vec<(RuleKind, Vec<usize>, Vec<usize>)>,
}

impl Lattice {
    fn insert(&mut self, c: Clause) -> usize {
        if let Some(&i) = self.index.get(&c) {
            return i;
        }
        self.clauses.push(c.clone());
        self.index.insert(c, self.clauses.len() - 1);
        self.clauses.len() - 1
    }

    /// Clauses of width ≤ `w` over every listed variable set, with their
    /// cuts, splits and axioms.
    fn build(var_sets: &[Vec<u32>], w: usize, extra: &[Clause]) -> Lattice {
        let mut lat = Lattice {
            clauses: Vec::new(),
            index: HashMap::new(),
            rules: Vec::new(),
        };
        for vars in var_sets {
            for c in clauses_over(vars, w) {
                lat.insert(c);
            }
            if w >= 2 {
                for &v in vars {
                    lat.insert(Clause::tautology(v));
                }
            }
        }
        for c in extra {
            lat.insert(c.clone());
        }
        let mut seen: HashSet<(RuleKind, usize)> = HashSet::new();
        for i in 0..lat.clauses.len() {
            let c = lat.clauses[i].clone();
            if c.is_tautology() {
                if c.width() == 2 {
                    let v = c.literals()[0].var();
                    lat.rules.push((RuleKind::Axiom(v), vec![], vec![i]));
                }
                continue;
            }
            if c.width() >= w {
                continue;
            }
            for vars in var_sets {
                if !c.vars().iter().all(|v| vars.contains(v)) {
                    continue;
                }
                for &x in vars {
                    if c.mentions(x) || !seen.insert((RuleKind::Cut(x), i)) {
                        continue;
                    }
                    let a = lat.index[&c.with(Literal::pos(x))];
                    let b = lat.index[&c.with(Literal::neg(x))];
                    lat.rules.push((RuleKind::Cut(x), vec![a, b], vec![i]));
                    lat.rules.push((RuleKind::Split(x), vec![i], vec![a, b]));
                }
            }
        }
        lat
    }

    fn rows(&self) -> usize {
        self.clauses.len() + self.rules.len()
    }

    /// Solves the balance program with nonnegative flows; returns the
    /// positive-flow subgraph.
    fn solve(&self, hyps: &HashSet<Clause>, goal: &Clause) -> Option<(ProofGraph, FlowAssignment)> {
        let goal_idx = self.index[goal];
        let mut producers = vec![Vec::new(); self.clauses.len()];
        let mut consumers = vec![Vec::new(); self.clauses.len()];
        for (w, (_, ins, outs)) in self.rules.iter().enumerate() {
            for &u in outs {
                producers[u].push(w);
            }
            for &u in ins {
                consumers[u].push(w);
            }
        }
        let mut lp = LinearProgram::new(self.rules.len());
        for (u, c) in self.clauses.iter().enumerate() {
            if u != goal_idx && hyps.contains(c) {
                continue;
            }
            let terms = producers[u]
                .iter()
                .map(|&w| (w, int(1)))
                .chain(consumers[u].iter().map(|&w| (w, int(-1))));
            lp.add_ge(terms, if u == goal_idx { int(1) } else { int(0) });
        }
        for w in 0..self.rules.len() {
            lp.add_ge([(w, int(1))], int(0));
        }
        let point = lp::feasible(&lp)?;
        let mut full = ProofGraph::new();
        for c in &self.clauses {
            full.add_formula(c.clone());
        }
        for (kind, ins, outs) in &self.rules {
            full.add_inference(
                *kind,
                ins.iter().map(|&u| crate::graph::FormulaId(u)).collect(),
                outs.iter().map(|&u| crate::graph::FormulaId(u)).collect(),
            );
        }
        full.set_goal(Some(crate::graph::FormulaId(goal_idx)));
        let keep: Vec<InferenceId> = (0..self.rules.len())
            .filter(|&w| point[w].is_positive())
            .map(InferenceId)
            .collect();
        let (mut graph, _) = full.restrict(&keep);
        graph.mark_hypotheses_by_clause(hyps.iter());
        let flow = FlowAssignment::new(keep.iter().map(|w| point[w.0].clone()).collect());
        Some((graph, flow))
    }
}

/// All non-tautological clauses over `vars` with at most `w` literals.
fn clauses_over(vars: &[u32], w: usize) -> Vec<Clause> {
    let mut out = vec![Clause::empty()];
    let mut frontier = vec![(Clause::empty(), 0usize)];
    for _ in 0..w {
        let mut next = Vec::new();
        for (c, start) in &frontier {
            for (i, &v) in vars.iter().enumerate().skip(*start) {
                for lit in [Literal::pos(v), Literal::neg(v)] {
                    let d = c.with(lit);
                    out.push(d.clone());
                    next.push((d, i + 1));
                }
            }
        }
        frontier = next;
    }
    out
}

/// Hypothesis (and goal) variable sets, merged while the union of two
/// intersecting sets stays within `w` variables.
fn clusters(hyps: &CnfFormula, goal: &Clause, w: usize) -> Vec<Vec<u32>> {
    let mut sets: Vec<BTreeSet<u32>> = hyps
        .clauses()
        .iter()
        .chain([goal])
        .map(|c| c.vars().into_iter().collect())
        .filter(|s: &BTreeSet<u32>| !s.is_empty())
        .collect();
    let mut merged = true;
    while merged {
        merged = false;
        'outer: for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                if sets[i].intersection(&sets[j]).next().is_some() {
                    let union: BTreeSet<u32> = sets[i].union(&sets[j]).copied().collect();
                    if union.len() <= w {
                        sets[i] = union;
                        sets.swap_remove(j);
                        merged = true;
                        break 'outer;
                    }
                }
            }
        }
    }
    let mut out: Vec<Vec<u32>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
    out.sort();
    out.dedup();
    // Drop sets contained in others.
    let all = out.clone();
    out.retain(|s| !all.iter().any(|t| t != s && s.iter().all(|v| t.contains(v))));
    out
}

/// Proof of a hypothesis goal: a second goal vertex fed from the hypothesis
/// vertex by an idempotent split (or split then cut for the empty clause).
fn trivial_proof(goal: &Clause, hyps: &CnfFormula) -> (ProofGraph, FlowAssignment) {
    let mut b = ClauseInterner::new();
    let source = b.vertex(goal);
    let fresh;
    let mut flows = vec![int(1)];
    if let Some(&lit) = goal.literals().first() {
        fresh = b.graph_mut().add_formula(goal.clone());
        b.graph_mut()
            .add_inference(RuleKind::Split(lit.var()), vec![source], vec![fresh]);
    } else {
        b.split(goal, 1);
        fresh = b.graph_mut().add_formula(goal.clone());
        let pos = b.vertex(&Clause::from_iter([Literal::pos(1)]));
        let neg = b.vertex(&Clause::from_iter([Literal::neg(1)]));
        b.graph_mut()
            .add_inference(RuleKind::Cut(1), vec![pos, neg], vec![fresh]);
        flows.push(int(1));
    }
    let mut g = b.into_graph();
    g.mark_hypotheses_by_clause(hyps.clauses());
    g.set_goal(Some(fresh));
    (g, FlowAssignment::new(flows))
}

/// Searches for a witnessed proof of `goal` from `hypotheses` whose clauses
/// all have width at most `width`.
pub fn circular_search(
    hypotheses: &CnfFormula,
    goal: &Clause,
    width: usize,
    options: SearchOptions,
) -> Result<SearchOutcome, SearchError> {
    let needed = hypotheses.max_width().max(goal.width());
    if width < needed {
        return Err(SearchError::WidthTooSmall { width, needed });
    }
    let n = hypotheses.num_variables().max(goal.max_var());
    let estimate = estimated_rows(n, width);
    if estimate > options.guard_rows as u128 {
        return Err(SearchError::Guard {
            rows: estimate.min(usize::MAX as u128) as usize,
            limit: options.guard_rows,
        });
    }
    let hyps: HashSet<Clause> = hypotheses.clauses().iter().cloned().collect();
    let mut stats = SearchStats {
        num_variables: n,
        ..SearchStats::default()
    };
    if hyps.contains(goal) {
        stats.stage = "trivial";
        return Ok(SearchOutcome {
            proof: Some(trivial_proof(goal, hypotheses)),
            stats,
        });
    }
    let extra: Vec<Clause> = hypotheses.clauses().iter().chain([goal]).cloned().collect();
    let mut stages: Vec<(&'static str, Vec<Vec<u32>>)> = Vec::new();
    let all_vars: Vec<u32> = (1..=n).collect();
    if options.staged {
        let cl = clusters(hypotheses, goal, width);
        if cl.len() > 1 || cl.first().is_some_and(|c| c.len() < all_vars.len()) {
            stages.push(("cluster", cl));
        }
    }
    stages.push(("full", vec![all_vars]));
    for (name, sets) in stages {
        let lat = Lattice::build(&sets, width, &extra);
        stats.clauses = lat.clauses.len();
        stats.inferences = lat.rules.len();
        stats.rows = lat.rows();
        stats.stage = name;
        if let Some((graph, flow)) = lat.solve(&hyps, goal) {
            debug_assert!(verify_flow(&graph, &flow, graph.goal().expect("goal set")).unwrap_or(false));
            return Ok(SearchOutcome {
                proof: Some((graph, flow)),
                stats,
            });
        }
    }
    Ok(SearchOutcome { proof: None, stats })
}

/// Minimal clauses derivable from `hypotheses` by resolution and weakening
/// with every derived clause of width at most `width`. A clause is derivable
/// iff some member of the returned antichain is a subset of it.
pub fn daglike_width_saturate(hypotheses: &CnfFormula, width: usize) -> BTreeSet<Clause> {
    let mut set: HashSet<Clause> = HashSet::new();
    let mut by_literal: HashMap<Literal, Vec<Clause>> = HashMap::new();
    let mut queue: VecDeque<Clause> = VecDeque::new();
    let subsumed = |set: &HashSet<Clause>, c: &Clause| -> bool { has_subset_in(set, c, false) };
    for h in hypotheses.clauses() {
        if h.is_tautology() || subsumed(&set, h) {
            continue;
        }
        set.insert(h.clone());
        queue.push_back(h.clone());
    }
    while let Some(c) = queue.pop_front() {
        if has_subset_in(&set, &c, true) {
            continue;
        }
        if c.is_empty() {
            break;
        }
        for &lit in c.literals() {
            let partners = by_literal.get(&lit.complement()).cloned().unwrap_or_default();
            for d in partners {
                let r = c.without(lit).union(&d.without(lit.complement()));
                if r.width() > width || r.is_tautology() || subsumed(&set, &r) {
                    continue;
                }
                set.insert(r.clone());
                queue.push_back(r);
            }
        }
        for &lit in c.literals() {
            by_literal.entry(lit).or_default().push(c.clone());
        }
    }
    let all = set.clone();
    set.into_iter()
        .filter(|c| !has_subset_in(&all, c, true))
        .collect()
}

/// Whether `set` holds a subset of `c` (a proper one when `proper`).
fn has_subset_in(set: &HashSet<Clause>, c: &Clause, proper: bool) -> bool {
    let lits = c.literals();
    if lits.len() > 16 {
        return set
            .iter()
            .any(|d| d.subsumes(c) && (!proper || d.width() < c.width()));
    }
    let full = (1u32 << lits.len()) - 1;
    (0..=full).any(|mask| {
        if proper && mask == full {
            return false;
        }
        let sub: Clause = (0..lits.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| lits[i])
            .collect();
        set.contains(&sub)
    })
}
