//! Compact proof graphs: formula-vertices labelled by clauses and
//! inference-vertices labelled by axiom, symmetric cut or split instances.
//!
//! Backedges are already contracted, so the graph may contain cycles. Vertex
//! ids are positions in the graph's vertex lists.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::clause::{Clause, Literal};
use crate::flow::FlowAssignment;
use crate::lp::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormulaId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InferenceId(pub usize);

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

impl fmt::Display for InferenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "i{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("{0} refers to missing formula-vertex {1}")]
    DanglingFormula(InferenceId, FormulaId),
    #[error("hypothesis mark on missing formula-vertex {0}")]
    DanglingHypothesis(FormulaId),
    #[error("goal mark on missing formula-vertex {0}")]
    DanglingGoal(FormulaId),
    #[error("flow assigns {found} values but the graph has {expected} inference-vertices")]
    IncompleteFlow { expected: usize, found: usize },
    #[error("missing formula-vertex {0}")]
    NoSuchFormula(FormulaId),
}

/// The rule at an inference-vertex and its principal variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    /// `x ∨ ¬x` from nothing.
    Axiom(u32),
    /// `C` from `C ∨ x` and `C ∨ ¬x`.
    Cut(u32),
    /// `C ∨ x` and/or `C ∨ ¬x` from `C`.
    Split(u32),
}

impl RuleKind {
    pub fn principal(self) -> u32 {
        match self {
            RuleKind::Axiom(v) | RuleKind::Cut(v) | RuleKind::Split(v) => v,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Axiom(_) => "ax",
            RuleKind::Cut(_) => "cut",
            RuleKind::Split(_) => "split",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceVertex {
    pub kind: RuleKind,
    pub inputs: Vec<FormulaId>,
    pub outputs: Vec<FormulaId>,
}

/// A rule-template mismatch at one inference-vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub vertex: InferenceId,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.vertex, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProofGraph {
    formulas: Vec<Clause>,
    inferences: Vec<InferenceVertex>,
    hypotheses: BTreeSet<FormulaId>,
    goal: Option<FormulaId>,
}

impl ProofGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_formula(&mut self, clause: Clause) -> FormulaId {
        self.formulas.push(clause);
        FormulaId(self.formulas.len() - 1)
    }

    pub fn add_inference(
        &mut self,
        kind: RuleKind,
        inputs: Vec<FormulaId>,
        outputs: Vec<FormulaId>,
    ) -> InferenceId {
        self.inferences.push(InferenceVertex {
            kind,
            inputs,
            outputs,
        });
        InferenceId(self.inferences.len() - 1)
    }

    pub fn mark_hypothesis(&mut self, id: FormulaId) {
        self.hypotheses.insert(id);
    }

    pub fn clear_hypotheses(&mut self) {
        self.hypotheses.clear();
    }

    pub fn set_goal(&mut self, id: Option<FormulaId>) {
        self.goal = id;
    }

    pub fn formulas(&self) -> &[Clause] {
        &self.formulas
    }

    pub fn inferences(&self) -> &[InferenceVertex] {
        &self.inferences
    }

    pub fn clause(&self, id: FormulaId) -> &Clause {
        &self.formulas[id.0]
    }

    pub fn inference(&self, id: InferenceId) -> &InferenceVertex {
        &self.inferences[id.0]
    }

    pub fn formula_ids(&self) -> impl Iterator<Item = FormulaId> {
        (0..self.formulas.len()).map(FormulaId)
    }

    pub fn inference_ids(&self) -> impl Iterator<Item = InferenceId> {
        (0..self.inferences.len()).map(InferenceId)
    }

    pub fn num_formulas(&self) -> usize {
        self.formulas.len()
    }

    pub fn num_inferences(&self) -> usize {
        self.inferences.len()
    }

    pub fn hypothesis_ids(&self) -> &BTreeSet<FormulaId> {
        &self.hypotheses
    }

    pub fn goal(&self) -> Option<FormulaId> {
        self.goal
    }

    /// Number of vertices, formula- and inference-.
    pub fn length(&self) -> usize {
        self.formulas.len() + self.inferences.len()
    }

    /// Largest clause width over all formula-vertices.
    pub fn width(&self) -> usize {
        self.formulas.iter().map(Clause::width).max().unwrap_or(0)
    }

    /// Sum of clause sizes (literal counts) over formula-vertices.
    pub fn size(&self) -> usize {
        self.formulas.iter().map(Clause::width).sum()
    }

    /// The set of hypothesis clauses (labels of hypothesis-marked vertices).
    pub fn hypothesis_clauses(&self) -> BTreeSet<Clause> {
        self.hypotheses.iter().map(|&h| self.clause(h).clone()).collect()
    }

    /// Per formula-vertex: is its clause a hypothesis clause. Multiplicity does
    /// not matter; any vertex carrying a hypothesis clause may be a source.
    pub fn hypothesis_mask(&self) -> Vec<bool> {
        let clauses: HashSet<&Clause> = self.hypotheses.iter().map(|&h| self.clause(h)).collect();
        self.formulas.iter().map(|c| clauses.contains(c)).collect()
    }

    /// Replaces the hypothesis marks with every vertex whose clause is in
    /// `clauses`.
    pub fn mark_hypotheses_by_clause<'a, I>(&mut self, clauses: I)
    where
        I: IntoIterator<Item = &'a Clause>,
    {
        let set: HashSet<&Clause> = clauses.into_iter().collect();
        self.hypotheses = self
            .formula_ids()
            .filter(|&u| set.contains(self.clause(u)))
            .collect();
    }

    /// Formula-vertices labelled by `clause`, in id order.
    pub fn vertices_with_clause(&self, clause: &Clause) -> Vec<FormulaId> {
        self.formula_ids().filter(|&u| self.clause(u) == clause).collect()
    }

    /// Ids in range for every edge and mark.
    pub fn check_structure(&self) -> Result<(), GraphError> {
        let n = self.formulas.len();
        for (i, w) in self.inferences.iter().enumerate() {
            if let Some(&bad) = w.inputs.iter().chain(&w.outputs).find(|u| u.0 >= n) {
                return Err(GraphError::DanglingFormula(InferenceId(i), bad));
            }
        }
        if let Some(&bad) = self.hypotheses.iter().find(|u| u.0 >= n) {
            return Err(GraphError::DanglingHypothesis(bad));
        }
        if let Some(g) = self.goal.filter(|g| g.0 >= n) {
            return Err(GraphError::DanglingGoal(g));
        }
        Ok(())
    }

    /// Checks every inference-vertex against its rule template, matching
    /// clauses after normalization.
    pub fn validate_rules(&self) -> Result<Vec<Violation>, GraphError> {
        self.check_structure()?;
        let mut violations = Vec::new();
        for id in self.inference_ids() {
            if let Some(message) = self.rule_mismatch(id) {
                violations.push(Violation { vertex: id, message });
            }
        }
        Ok(violations)
    }

    fn rule_mismatch(&self, id: InferenceId) -> Option<String> {
        let w = self.inference(id);
        let var = w.kind.principal();
        if var == 0 {
            return Some("principal variable must be >= 1".into());
        }
        let (x, nx) = (Literal::pos(var), Literal::neg(var));
        let ins: Vec<&Clause> = w.inputs.iter().map(|&u| self.clause(u)).collect();
        let outs: Vec<&Clause> = w.outputs.iter().map(|&u| self.clause(u)).collect();
        match w.kind {
            RuleKind::Axiom(_) => {
                if !ins.is_empty() || outs.len() != 1 {
                    return Some(format!(
                        "axiom needs 0 antecedents and 1 consequent, has {} and {}",
                        ins.len(),
                        outs.len()
                    ));
                }
                if *outs[0] != Clause::tautology(var) {
                    return Some(format!(
                        "axiom on x{var} must derive x{var} ∨ ¬x{var}, not {}",
                        outs[0]
                    ));
                }
            }
            RuleKind::Cut(_) => {
                if ins.len() != 2 || outs.len() != 1 {
                    return Some(format!(
                        "cut needs 2 antecedents and 1 consequent, has {} and {}",
                        ins.len(),
                        outs.len()
                    ));
                }
                let side = outs[0];
                let mut expected = [side.with(x), side.with(nx)];
                let mut found = [ins[0].clone(), ins[1].clone()];
                expected.sort();
                found.sort();
                if expected != found {
                    return Some(format!(
                        "cut on x{var} deriving {side} needs antecedents {} and {}, found {} and {}",
                        expected[0], expected[1], found[0], found[1]
                    ));
                }
            }
            RuleKind::Split(_) => {
                if ins.len() != 1 || outs.is_empty() || outs.len() > 2 {
                    return Some(format!(
                        "split needs 1 antecedent and 1 or 2 consequents, has {} and {}",
                        ins.len(),
                        outs.len()
                    ));
                }
                let side = ins[0];
                let allowed = [side.with(x), side.with(nx)];
                for out in &outs {
                    if !allowed.contains(out) {
                        return Some(format!("split of {side} on x{var} cannot derive {out}"));
                    }
                }
                if outs.len() == 2 && outs[0] == outs[1] {
                    return Some("split consequents must be distinct".into());
                }
            }
        }
        None
    }

    /// `B(u)`: inflow minus outflow.
    pub fn balance(&self, flow: &FlowAssignment, u: FormulaId) -> Result<Rational, GraphError> {
        if u.0 >= self.formulas.len() {
            return Err(GraphError::NoSuchFormula(u));
        }
        Ok(self.balances(flow)?.swap_remove(u.0))
    }

    /// Balances of all formula-vertices, indexed by id.
    pub fn balances(&self, flow: &FlowAssignment) -> Result<Vec<Rational>, GraphError> {
        self.check_flow_len(flow)?;
        let mut b = vec![Rational::zero(); self.formulas.len()];
        for (w, f) in self.inferences.iter().zip(flow.values()) {
            for u in &w.outputs {
                b[u.0] += f;
            }
            for u in &w.inputs {
                b[u.0] -= f;
            }
        }
        Ok(b)
    }

    pub(crate) fn check_flow_len(&self, flow: &FlowAssignment) -> Result<(), GraphError> {
        if flow.len() != self.inferences.len() {
            return Err(GraphError::IncompleteFlow {
                expected: self.inferences.len(),
                found: flow.len(),
            });
        }
        Ok(())
    }

    /// `(sources, sinks)`: vertices of negative and positive balance.
    pub fn sources_and_sinks(
        &self,
        flow: &FlowAssignment,
    ) -> Result<(BTreeSet<FormulaId>, BTreeSet<FormulaId>), GraphError> {
        let b = self.balances(flow)?;
        let mut sources = BTreeSet::new();
        let mut sinks = BTreeSet::new();
        for (i, bal) in b.iter().enumerate() {
            if bal.is_negative() {
                sources.insert(FormulaId(i));
            } else if bal.is_positive() {
                sinks.insert(FormulaId(i));
            }
        }
        Ok((sources, sinks))
    }

    /// Per formula-vertex lists of producing and consuming inference-vertices.
    pub fn adjacency(&self) -> (Vec<Vec<InferenceId>>, Vec<Vec<InferenceId>>) {
        let mut producers = vec![Vec::new(); self.formulas.len()];
        let mut consumers = vec![Vec::new(); self.formulas.len()];
        for (i, w) in self.inferences.iter().enumerate() {
            for u in &w.outputs {
                producers[u.0].push(InferenceId(i));
            }
            for u in &w.inputs {
                consumers[u.0].push(InferenceId(i));
            }
        }
        (producers, consumers)
    }

    /// True iff the bipartite graph has no directed cycle.
    pub fn is_acyclic(&self) -> bool {
        // Kahn's algorithm on the bipartite graph: formula-vertices first.
        let nf = self.formulas.len();
        let (producers, consumers) = self.adjacency();
        let mut indeg: Vec<usize> = producers.iter().map(Vec::len).collect();
        indeg.extend(self.inferences.iter().map(|w| w.inputs.len()));
        let mut stack: Vec<usize> = (0..indeg.len()).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            if v < nf {
                for w in &consumers[v] {
                    let k = nf + w.0;
                    indeg[k] -= 1;
                    if indeg[k] == 0 {
                        stack.push(k);
                    }
                }
            } else {
                for u in &self.inferences[v - nf].outputs {
                    indeg[u.0] -= 1;
                    if indeg[u.0] == 0 {
                        stack.push(u.0);
                    }
                }
            }
        }
        seen == indeg.len()
    }

    /// Keeps the listed inference-vertices and the formula-vertices they touch
    /// (plus the goal), renumbering both. Returns the new graph and, for each
    /// kept inference-vertex, its old id.
    pub fn restrict(&self, keep: &[InferenceId]) -> (ProofGraph, Vec<InferenceId>) {
        let mut remap: HashMap<FormulaId, FormulaId> = HashMap::new();
        let mut out = ProofGraph::new();
        let mut map = |g: &mut ProofGraph, u: FormulaId| {
            *remap
                .entry(u)
                .or_insert_with(|| g.add_formula(self.clause(u).clone()))
        };
        if let Some(goal) = self.goal {
            let g = map(&mut out, goal);
            out.goal = Some(g);
        }
        for &w in keep {
            let v = self.inference(w);
            let inputs = v.inputs.iter().map(|&u| map(&mut out, u)).collect();
            let outputs = v.outputs.iter().map(|&u| map(&mut out, u)).collect();
            out.add_inference(v.kind, inputs, outputs);
        }
        for h in &self.hypotheses {
            if let Some(&n) = remap.get(h) {
                out.hypotheses.insert(n);
            }
        }
        (out, keep.to_vec())
    }

    /// Graphviz rendering: boxes for formula-vertices, circles for
    /// inference-vertices, flows as edge and vertex labels when given.
    pub fn export_dot(&self, flow: Option<&FlowAssignment>) -> String {
        let balances = flow.and_then(|f| self.balances(f).ok());
        let mut s = String::from("digraph proof {\n");
        if !self.formulas.is_empty() || !self.inferences.is_empty() {
            s.push_str("  rankdir=LR;\n");
        }
        for u in self.formula_ids() {
            let mut label = escape(&self.clause(u).to_string());
            if let Some(b) = &balances {
                let _ = write!(label, "\\nB={}", b[u.0]);
            }
            let mut style = String::new();
            if self.hypotheses.contains(&u) {
                style.push_str(", style=filled, fillcolor=lightgrey");
            }
            if self.goal == Some(u) {
                style.push_str(", peripheries=2");
            }
            let _ = writeln!(s, "  {u} [shape=box, label=\"{label}\"{style}];");
        }
        for w in self.inference_ids() {
            let v = self.inference(w);
            let mut label = format!("{} x{}", v.kind.name(), v.kind.principal());
            if let Some(f) = flow.and_then(|f| f.get(w)) {
                let _ = write!(label, "\\n{f}");
            }
            let _ = writeln!(s, "  {w} [shape=circle, label=\"{label}\"];");
        }
        for w in self.inference_ids() {
            let v = self.inference(w);
            for u in &v.inputs {
                let _ = writeln!(s, "  {u} -> {w};");
            }
            for u in &v.outputs {
                let _ = writeln!(s, "  {w} -> {u};");
            }
        }
        s.push_str("}\n");
        s
    }
}

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Builds graphs with one formula-vertex per distinct clause.
#[derive(Debug, Default)]
pub struct ClauseInterner {
    graph: ProofGraph,
    index: HashMap<Clause, FormulaId>,
}

impl ClauseInterner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, clause: &Clause) -> FormulaId {
        if let Some(&id) = self.index.get(clause) {
            return id;
        }
        let id = self.graph.add_formula(clause.clone());
        self.index.insert(clause.clone(), id);
        id
    }

    pub fn lookup(&self, clause: &Clause) -> Option<FormulaId> {
        self.index.get(clause).copied()
    }

    pub fn graph(&self) -> &ProofGraph {
        &self.graph
    }

    pub fn graph_mut(&mut self) -> &mut ProofGraph {
        &mut self.graph
    }

    pub fn axiom(&mut self, var: u32) -> InferenceId {
        let out = self.vertex(&Clause::tautology(var));
        self.graph.add_inference(RuleKind::Axiom(var), vec![], vec![out])
    }

    /// Cut on `var` deriving `side` from `side ∨ x` and `side ∨ ¬x`.
    pub fn cut(&mut self, side: &Clause, var: u32) -> InferenceId {
        let a = self.vertex(&side.with(Literal::pos(var)));
        let b = self.vertex(&side.with(Literal::neg(var)));
        let c = self.vertex(side);
        self.graph.add_inference(RuleKind::Cut(var), vec![a, b], vec![c])
    }

    /// Split of `side` on `var` keeping only the consequent `side ∨ lit`.
    pub fn weaken(&mut self, side: &Clause, lit: Literal) -> InferenceId {
        let a = self.vertex(side);
        let b = self.vertex(&side.with(lit));
        self.graph
            .add_inference(RuleKind::Split(lit.var()), vec![a], vec![b])
    }

    /// Split of `side` on `var` with both consequents.
    pub fn split(&mut self, side: &Clause, var: u32) -> InferenceId {
        let a = self.vertex(side);
        let b = self.vertex(&side.with(Literal::pos(var)));
        let c = self.vertex(&side.with(Literal::neg(var)));
        self.graph
            .add_inference(RuleKind::Split(var), vec![a], vec![b, c])
    }

    /// Chain of single-consequent splits adding the literals of `extra` to
    /// `start` one at a time. Returns the chain's inference-vertices.
    pub fn weakening_chain(&mut self, start: &Clause, extra: &Clause) -> Vec<InferenceId> {
        let mut current = start.clone();
        let mut chain = Vec::new();
        for &lit in extra.literals() {
            if current.contains(lit) {
                continue;
            }
            chain.push(self.weaken(&current, lit));
            current = current.with(lit);
        }
        chain
    }

    pub fn into_graph(self) -> ProofGraph {
        self.graph
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::int;

    fn c(lits: &[i64]) -> Clause {
        Clause::from_dimacs(lits).unwrap()
    }

    /// The unsound pre-proof: an axiom feeding two self-looping cuts that
    /// derive x and ¬x, which are then cut to the empty clause.
    pub(crate) fn circular_unsound() -> ProofGraph {
        let mut g = ProofGraph::new();
        let taut = g.add_formula(c(&[1, -1]));
        let x = g.add_formula(c(&[1]));
        let nx = g.add_formula(c(&[-1]));
        let empty = g.add_formula(c(&[]));
        g.add_inference(RuleKind::Axiom(1), vec![], vec![taut]);
        g.add_inference(RuleKind::Cut(1), vec![x, taut], vec![x]);
        g.add_inference(RuleKind::Cut(1), vec![taut, nx], vec![nx]);
        g.add_inference(RuleKind::Cut(1), vec![x, nx], vec![empty]);
        g.set_goal(Some(empty));
        g
    }

    #[test]
    fn cut_shapes() {
        let mut g = ProofGraph::new();
        let a = g.add_formula(c(&[1, 2]));
        let b = g.add_formula(c(&[1, -2]));
        let out = g.add_formula(c(&[1]));
        g.add_inference(RuleKind::Cut(2), vec![a, b], vec![out]);
        assert!(g.validate_rules().unwrap().is_empty());

        let mut bad = ProofGraph::new();
        let a = bad.add_formula(c(&[1, 2]));
        let b = bad.add_formula(c(&[3, -2]));
        let out = bad.add_formula(c(&[1, 3]));
        bad.add_inference(RuleKind::Cut(2), vec![a, b], vec![out]);
        let v = bad.validate_rules().unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].vertex, InferenceId(0));
    }

    #[test]
    fn split_with_idempotent_collapse() {
        let mut g = ProofGraph::new();
        let a = g.add_formula(c(&[1]));
        let b = g.add_formula(c(&[1]));
        let t = g.add_formula(c(&[1, -1]));
        g.add_inference(RuleKind::Split(1), vec![a], vec![b, t]);
        assert!(g.validate_rules().unwrap().is_empty());
    }

    #[test]
    fn split_rejects_foreign_consequent_and_duplicates() {
        let mut g = ProofGraph::new();
        let a = g.add_formula(c(&[1]));
        let b = g.add_formula(c(&[1, 3]));
        let d = g.add_formula(c(&[1, 2]));
        g.add_inference(RuleKind::Split(2), vec![a], vec![b]);
        g.add_inference(RuleKind::Split(2), vec![a], vec![d, d]);
        assert_eq!(g.validate_rules().unwrap().len(), 2);
    }

    #[test]
    fn axiom_template() {
        let mut g = ProofGraph::new();
        let t = g.add_formula(c(&[2, -2]));
        let wrong = g.add_formula(c(&[1, -1]));
        g.add_inference(RuleKind::Axiom(2), vec![], vec![t]);
        g.add_inference(RuleKind::Axiom(2), vec![], vec![wrong]);
        let v = g.validate_rules().unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].vertex, InferenceId(1));
    }

    #[test]
    fn dangling_ids_are_structural_errors() {
        let mut g = ProofGraph::new();
        let a = g.add_formula(c(&[1]));
        g.add_inference(RuleKind::Split(2), vec![a], vec![FormulaId(7)]);
        assert_eq!(
            g.validate_rules(),
            Err(GraphError::DanglingFormula(InferenceId(0), FormulaId(7)))
        );
    }

    #[test]
    fn balance_examples() {
        let mut g = ProofGraph::new();
        let t = g.add_formula(c(&[1, -1]));
        g.add_inference(RuleKind::Axiom(1), vec![], vec![t]);
        assert_eq!(g.balance(&FlowAssignment::uniform(1, int(1)), t).unwrap(), int(1));

        let g = circular_unsound();
        assert!(g.validate_rules().unwrap().is_empty());
        let ones = FlowAssignment::uniform(4, int(1));
        assert_eq!(g.balance(&ones, FormulaId(1)).unwrap(), int(-1));
        assert_eq!(g.balance(&ones, FormulaId(2)).unwrap(), int(-1));

        let mut p = ProofGraph::new();
        let a = p.add_formula(c(&[]));
        let b = p.add_formula(c(&[1]));
        let d = p.add_formula(c(&[1, 2]));
        p.add_inference(RuleKind::Split(1), vec![a], vec![b]);
        p.add_inference(RuleKind::Split(2), vec![b], vec![d]);
        let f = FlowAssignment::new(vec![int(3), int(3)]);
        assert_eq!(p.balance(&f, b).unwrap(), int(0));
        assert!(matches!(
            p.balance(&FlowAssignment::new(vec![int(1)]), b),
            Err(GraphError::IncompleteFlow { .. })
        ));
    }

    #[test]
    fn sources_and_sinks_of_single_cut() {
        let mut g = ClauseInterner::new();
        g.cut(&Clause::empty(), 1);
        let g = g.into_graph();
        let (src, snk) = g.sources_and_sinks(&FlowAssignment::uniform(1, int(1))).unwrap();
        let x = g.vertices_with_clause(&c(&[1]))[0];
        let nx = g.vertices_with_clause(&c(&[-1]))[0];
        let e = g.vertices_with_clause(&c(&[]))[0];
        assert_eq!(src, [x, nx].into_iter().collect());
        assert_eq!(snk, [e].into_iter().collect());

        let mut lonely = ProofGraph::new();
        lonely.add_formula(c(&[1]));
        let (src, snk) = lonely.sources_and_sinks(&FlowAssignment::new(vec![])).unwrap();
        assert!(src.is_empty() && snk.is_empty());
    }

    #[test]
    fn dot_export_shapes() {
        assert_eq!(ProofGraph::new().export_dot(None), "digraph proof {\n}\n");
        let g = circular_unsound();
        let dot = g.export_dot(Some(&FlowAssignment::uniform(4, int(1))));
        assert_eq!(dot.matches("shape=box").count(), 4);
        assert_eq!(dot.matches("shape=circle").count(), 4);
        assert_eq!(dot.matches(" -> ").count(), 10);
    }

    #[test]
    fn acyclicity() {
        assert!(!circular_unsound().is_acyclic());
        let mut g = ClauseInterner::new();
        g.cut(&Clause::empty(), 1);
        assert!(g.graph().is_acyclic());
    }
}
