//! Graph pigeonhole formulas, their constant-width circular refutations, and
//! seeded random witnessed proofs for fuzzing.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::clause::{Clause, CnfFormula, Literal};
use crate::flow::{verify_flow, FlowAssignment};
use crate::graph::{ClauseInterner, ProofGraph, RuleKind};
use crate::lp::{int, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("edge ({0}, {1}) is outside a {2}x{3} bipartite graph")]
    EdgeOutOfRange(u32, u32, u32, u32),
    #[error("left vertex {0} has no neighbours")]
    IsolatedPigeon(u32),
    #[error("need more pigeons than holes, got {0} and {1}")]
    NotOverfull(u32, u32),
    #[error("cannot build a bipartite graph: {0}")]
    Shape(String),
}

/// Bipartite graph with left side `1..=left` (pigeons) and right side
/// `1..=right` (holes).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BipartiteGraph {
    left: u32,
    right: u32,
    edges: BTreeSet<(u32, u32)>,
}

impl BipartiteGraph {
    pub fn new<I>(left: u32, right: u32, edges: I) -> Result<Self, GeneratorError>
    where
        I: IntoIterator<Item = (u32, u32)>,
    {
        let edges: BTreeSet<(u32, u32)> = edges.into_iter().collect();
        if let Some(&(u, v)) = edges
            .iter()
            .find(|&&(u, v)| u == 0 || v == 0 || u > left || v > right)
        {
            return Err(GeneratorError::EdgeOutOfRange(u, v, left, right));
        }
        Ok(Self { left, right, edges })
    }

    pub fn complete(left: u32, right: u32) -> Self {
        let edges = (1..=left)
            .flat_map(|u| (1..=right).map(move |v| (u, v)))
            .collect();
        Self { left, right, edges }
    }

    /// Right vertex `v` is joined to left vertices `v, v+1, …, v+d-1`
    /// modulo `left`. Every degree is at most `d`.
    pub fn circulant(left: u32, right: u32, d: u32) -> Result<Self, GeneratorError> {
        if d == 0 || d > left {
            return Err(GeneratorError::Shape(format!(
                "degree {d} with {left} left vertices"
            )));
        }
        let edges = (0..right).flat_map(|v| (0..d).map(move |k| ((v + k) % left + 1, v + 1)));
        Self::new(left, right, edges)
    }

    /// Seeded random graph in which every right vertex has degree `d` and
    /// every left vertex has degree between 1 and `d`.
    pub fn random_bounded(left: u32, right: u32, d: u32, seed: u64) -> Result<Self, GeneratorError> {
        if d == 0 || d > left || right > left || right * d < left {
            return Err(GeneratorError::Shape(format!(
                "{left} pigeons, {right} holes, hole degree {d}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        'attempt: for _ in 0..10_000 {
            // Each pigeon gets one guaranteed slot, the rest are spread so no
            // pigeon exceeds d.
            let mut slots: Vec<u32> = (1..=left).collect();
            let mut extra: Vec<u32> = (1..=left)
                .flat_map(|u| std::iter::repeat_n(u, d as usize - 1))
                .collect();
            extra.shuffle(&mut rng);
            slots.extend(extra.into_iter().take((right * d - left) as usize));
            slots.shuffle(&mut rng);
            let mut edges = BTreeSet::new();
            for (k, chunk) in slots.chunks(d as usize).enumerate() {
                for &u in chunk {
                    if !edges.insert((u, k as u32 + 1)) {
                        continue 'attempt;
                    }
                }
            }
            return Self::new(left, right, edges);
        }
        Err(GeneratorError::Shape("no simple graph found".into()))
    }

    pub fn left_size(&self) -> u32 {
        self.left
    }

    pub fn right_size(&self) -> u32 {
        self.right
    }

    pub fn edges(&self) -> &BTreeSet<(u32, u32)> {
        &self.edges
    }

    pub fn left_neighbours(&self, u: u32) -> Vec<u32> {
        self.edges
            .range((u, 0)..=(u, u32::MAX))
            .map(|&(_, v)| v)
            .collect()
    }

    pub fn right_neighbours(&self, v: u32) -> Vec<u32> {
        self.edges
            .iter()
            .filter(|&&(_, w)| w == v)
            .map(|&(u, _)| u)
            .collect()
    }

    pub fn max_degree(&self) -> usize {
        let mut deg: HashMap<(bool, u32), usize> = HashMap::new();
        for &(u, v) in &self.edges {
            *deg.entry((true, u)).or_default() += 1;
            *deg.entry((false, v)).or_default() += 1;
        }
        deg.values().copied().max().unwrap_or(0)
    }

    /// Variable of edge `(u, v)`: its 1-based rank in lexicographic order.
    pub fn variable(&self, u: u32, v: u32) -> Option<u32> {
        if !self.edges.contains(&(u, v)) {
            return None;
        }
        Some(self.edges.range(..(u, v)).count() as u32 + 1)
    }

    /// `(variable, u, v)` for every edge.
    pub fn variable_map(&self) -> Vec<(u32, u32, u32)> {
        self.edges
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| (i as u32 + 1, u, v))
            .collect()
    }
}

fn edge_vars(g: &BipartiteGraph) -> BTreeMap<(u32, u32), u32> {
    g.variable_map()
        .into_iter()
        .map(|(x, u, v)| ((u, v), x))
        .collect()
}

/// Pigeon clauses for every left vertex in order, then hole clauses for
/// every right vertex and pair of its neighbours.
pub fn gen_php(g: &BipartiteGraph) -> Result<CnfFormula, GeneratorError> {
    let vars = edge_vars(g);
    let mut clauses = Vec::new();
    for u in 1..=g.left {
        let nbrs = g.left_neighbours(u);
        if nbrs.is_empty() {
            return Err(GeneratorError::IsolatedPigeon(u));
        }
        clauses.push(nbrs.iter().map(|&v| Literal::pos(vars[&(u, v)])).collect());
    }
    for v in 1..=g.right {
        let nbrs = g.right_neighbours(v);
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                clauses.push(Clause::from_iter([
                    Literal::neg(vars[&(a, v)]),
                    Literal::neg(vars[&(b, v)]),
                ]));
            }
        }
    }
    Ok(CnfFormula::new(vars.len() as u32, clauses).expect("edge variables are in range"))
}

/// Inference step recorded by clause labels, before vertices are merged.
#[derive(Debug, Clone)]
struct Step {
    kind: RuleKind,
    inputs: Vec<Clause>,
    outputs: Vec<Clause>,
    flow: Rational,
}

impl Step {
    fn prefixed(&self, lit: Literal) -> Step {
        Step {
            kind: self.kind,
            inputs: self.inputs.iter().map(|c| c.with(lit)).collect(),
            outputs: self.outputs.iter().map(|c| c.with(lit)).collect(),
            flow: self.flow.clone(),
        }
    }
}

fn split(side: &Clause, lit: Literal) -> Step {
    Step {
        kind: RuleKind::Split(lit.var()),
        inputs: vec![side.clone()],
        outputs: vec![side.with(lit)],
        flow: int(1),
    }
}

fn split_both(side: &Clause, var: u32) -> Step {
    Step {
        kind: RuleKind::Split(var),
        inputs: vec![side.clone()],
        outputs: vec![side.with(Literal::pos(var)), side.with(Literal::neg(var))],
        flow: int(1),
    }
}

fn cut(side: &Clause, var: u32) -> Step {
    Step {
        kind: RuleKind::Cut(var),
        inputs: vec![side.with(Literal::pos(var)), side.with(Literal::neg(var))],
        outputs: vec![side.clone()],
        flow: int(1),
    }
}

fn clause_balances(steps: &[Step]) -> BTreeMap<Clause, Rational> {
    let mut b: BTreeMap<Clause, Rational> = BTreeMap::new();
    for s in steps {
        for c in &s.outputs {
            *b.entry(c.clone()).or_insert_with(|| int(0)) += &s.flow;
        }
        for c in &s.inputs {
            *b.entry(c.clone()).or_insert_with(|| int(0)) -= &s.flow;
        }
    }
    b
}

/// Pigeon piece: the empty clause with balance +1 from the pigeon clause and
/// the negated edge literals of `u`.
fn pigeon_piece(xs: &[u32]) -> Vec<Step> {
    let mut steps = Vec::new();
    for j in (1..=xs.len()).rev() {
        let prefix: Clause = xs[..j - 1].iter().map(|&x| Literal::pos(x)).collect();
        let not_xj = Clause::from_iter([Literal::neg(xs[j - 1])]);
        let mut current = not_xj.clone();
        for &x in &xs[..j - 1] {
            steps.push(split(&current, Literal::pos(x)));
            current = current.with(Literal::pos(x));
        }
        steps.push(cut(&prefix, xs[j - 1]));
    }
    steps
}

/// Hole piece: the empty clause with balance −1 and every negated edge
/// literal of `v` with balance +1, from the hole clauses.
fn hole_piece(xs: &[u32]) -> Vec<Step> {
    let mut steps = vec![split_both(&Clause::empty(), xs[0])];
    for i in 1..xs.len() {
        let x = Literal::pos(xs[i]);
        let holes: Vec<(Clause, Rational)> = clause_balances(&steps)
            .into_iter()
            .filter(|(c, b)| b.is_negative() && !c.is_empty())
            .collect();
        let mut next: Vec<Step> = steps.iter().map(|s| s.prefixed(x)).collect();
        // Prefixed hole clauses would be illegal sources; weaken the
        // originals into them.
        for (h, b) in holes {
            let mut s = split(&h, x);
            s.flow = -b;
            next.push(s);
        }
        for &prev in &xs[..i] {
            next.push(cut(&Clause::from_iter([Literal::neg(prev)]), xs[i]));
        }
        next.push(split_both(&Clause::empty(), xs[i]));
        steps = next;
    }
    steps
}

/// Circular refutation of `G`-PHP of width at most the maximum degree,
/// with flow 1 on the pieces and formula-vertices merged by clause.
pub fn php_refutation(g: &BipartiteGraph) -> Result<(ProofGraph, FlowAssignment), GeneratorError> {
    if g.left <= g.right {
        return Err(GeneratorError::NotOverfull(g.left, g.right));
    }
    let cnf = gen_php(g)?;
    let vars = edge_vars(g);
    let mut steps = Vec::new();
    for u in 1..=g.left {
        let xs: Vec<u32> = g.left_neighbours(u).iter().map(|&v| vars[&(u, v)]).collect();
        steps.extend(pigeon_piece(&xs));
    }
    for v in 1..=g.right {
        let xs: Vec<u32> = g.right_neighbours(v).iter().map(|&u| vars[&(u, v)]).collect();
        if !xs.is_empty() {
            steps.extend(hole_piece(&xs));
        }
    }
    let mut b = ClauseInterner::new();
    let goal = b.vertex(&Clause::empty());
    let mut flows = Vec::with_capacity(steps.len());
    for s in steps {
        let inputs = s.inputs.iter().map(|c| b.vertex(c)).collect();
        let outputs = s.outputs.iter().map(|c| b.vertex(c)).collect();
        b.graph_mut().add_inference(s.kind, inputs, outputs);
        flows.push(s.flow);
    }
    let mut graph = b.into_graph();
    graph.mark_hypotheses_by_clause(cnf.clauses());
    graph.set_goal(Some(goal));
    let flow = FlowAssignment::new(flows);
    debug_assert!(verify_flow(&graph, &flow, goal).unwrap_or(false));
    Ok((graph, flow))
}

/// Maximum clause width produced by [`random_circular_proof`].
pub const RANDOM_MAX_WIDTH: usize = 4;

struct RandomBuilder {
    rng: ChaCha8Rng,
    vars: u32,
    budget: usize,
    b: ClauseInterner,
    flows: Vec<Rational>,
    goal: Clause,
    hypotheses: BTreeSet<Clause>,
}

impl RandomBuilder {
    fn add(&mut self, kind: RuleKind, inputs: &[Clause], outputs: &[Clause], flow: &Rational) {
        let ins = inputs.iter().map(|c| self.b.vertex(c)).collect();
        let outs = outputs.iter().map(|c| self.b.vertex(c)).collect();
        self.b.graph_mut().add_inference(kind, ins, outs);
        self.flows.push(flow.clone());
        self.budget = self.budget.saturating_sub(1);
    }

    fn random_clause(&mut self, max_width: usize) -> Clause {
        let width = self.rng.gen_range(0..=max_width.min(self.vars as usize));
        let mut vars: Vec<u32> = (1..=self.vars).collect();
        vars.shuffle(&mut self.rng);
        vars[..width]
            .iter()
            .map(|&v| Literal::new(v, self.rng.gen_bool(0.5)).expect("variable is positive"))
            .collect()
    }

    fn prove(&mut self, c: Clause, demand: Rational, depth: usize) {
        let is_goal = c == self.goal;
        if !is_goal && (self.budget == 0 || (depth > 0 && self.rng.gen_bool(0.25))) {
            self.hypotheses.insert(c);
            return;
        }
        let free: Vec<u32> = (1..=self.vars).filter(|&v| !c.mentions(v)).collect();
        let can_cut = c.width() < RANDOM_MAX_WIDTH && !free.is_empty();
        if c.width() > 0 && (!can_cut || self.rng.gen_bool(0.3)) {
            let lit = *c.literals().choose(&mut self.rng).expect("nonempty clause");
            let side = c.without(lit);
            if self.rng.gen_bool(0.3) {
                let other = side.with(lit.complement());
                self.add(
                    RuleKind::Split(lit.var()),
                    std::slice::from_ref(&side),
                    &[c, other],
                    &demand,
                );
            } else {
                self.add(
                    RuleKind::Split(lit.var()),
                    std::slice::from_ref(&side),
                    &[c],
                    &demand,
                );
            }
            self.prove(side, demand, depth + 1);
        } else if can_cut {
            let x = *free.choose(&mut self.rng).expect("free variable");
            let a = c.with(Literal::pos(x));
            let b = c.with(Literal::neg(x));
            self.add(RuleKind::Cut(x), &[a.clone(), b.clone()], &[c], &demand);
            self.prove(a, demand.clone(), depth + 1);
            self.prove(b, demand, depth + 1);
        } else {
            self.hypotheses.insert(c);
        }
    }

    /// Split-then-cut loop through `c`, or a self-looping degenerate cut fed
    /// by a weakened axiom. Both leave every balance unchanged.
    fn decorate(&mut self) {
        let formulas: Vec<Clause> = self.b.graph().formulas().to_vec();
        let Some(c) = formulas.choose(&mut self.rng).cloned() else {
            return;
        };
        let flow = [int(1), int(2), ratio(1, 2), ratio(2, 3)]
            .choose(&mut self.rng)
            .cloned()
            .expect("nonempty");
        if c.width() >= RANDOM_MAX_WIDTH || c.is_tautology() {
            return;
        }
        let free: Vec<u32> = (1..=self.vars).filter(|&v| !c.mentions(v)).collect();
        if self.rng.gen_bool(0.6) && !free.is_empty() {
            let x = *free.choose(&mut self.rng).expect("free variable");
            let (a, b) = (c.with(Literal::pos(x)), c.with(Literal::neg(x)));
            self.add(
                RuleKind::Split(x),
                std::slice::from_ref(&c),
                &[a.clone(), b.clone()],
                &flow,
            );
            self.add(RuleKind::Cut(x), &[a, b], &[c], &flow);
        } else if let Some(&lit) = c.literals().choose(&mut self.rng) {
            let taut = Clause::tautology(lit.var());
            let wide = c.with(lit.complement());
            self.add(
                RuleKind::Axiom(lit.var()),
                &[],
                std::slice::from_ref(&taut),
                &flow,
            );
            let mut current = taut;
            for &l in c.literals() {
                if !current.contains(l) {
                    self.add(
                        RuleKind::Split(l.var()),
                        &[current.clone()],
                        &[current.with(l)],
                        &flow,
                    );
                    current = current.with(l);
                }
            }
            debug_assert_eq!(current, wide);
            let (pos, neg) = (c.with(Literal::pos(lit.var())), c.with(Literal::neg(lit.var())));
            self.add(RuleKind::Cut(lit.var()), &[pos, neg], &[c], &flow);
        }
    }
}

/// Seeded random witnessed proof with at most [`RANDOM_MAX_WIDTH`]-literal
/// clauses: a derivation built top-down from a random goal, formula-vertices
/// merged by clause, then decorated with balance-neutral cycles. Budget 1
/// gives a lone axiom.
pub fn random_circular_proof(seed: u64, num_vars: u32, budget: usize) -> (ProofGraph, FlowAssignment) {
    let vars = num_vars.max(1);
    if budget <= 1 {
        let mut b = ClauseInterner::new();
        b.axiom(1);
        let mut g = b.into_graph();
        g.set_goal(Some(crate::graph::FormulaId(0)));
        return (g, FlowAssignment::uniform(1, int(1)));
    }
    let mut r = RandomBuilder {
        rng: ChaCha8Rng::seed_from_u64(seed),
        vars,
        budget,
        b: ClauseInterner::new(),
        flows: Vec::new(),
        goal: Clause::empty(),
        hypotheses: BTreeSet::new(),
    };
    r.goal = r.random_clause(2);
    let goal = r.b.vertex(&r.goal.clone());
    let demand = [int(1), int(2), int(3)]
        .choose(&mut r.rng)
        .cloned()
        .expect("nonempty");
    let main = budget - budget / 4;
    r.budget = main;
    r.prove(r.goal.clone(), demand, 0);
    r.budget = budget.saturating_sub(r.flows.len());
    while r.budget > 0 {
        let before = r.budget;
        r.decorate();
        if r.budget == before && r.rng.gen_bool(0.2) {
            break;
        }
    }
    let RandomBuilder {
        b, flows, hypotheses, ..
    } = r;
    let mut graph = b.into_graph();
    graph.mark_hypotheses_by_clause(&hypotheses);
    graph.set_goal(Some(goal));
    let flow = FlowAssignment::new(flows);
    debug_assert!(verify_flow(&graph, &flow, goal).unwrap_or(false));
    (graph, flow)
}
