//! Flow assignments on proof graphs: witness search through the balance
//! program, exact re-verification, integral rescaling, the falsified-source
//! tracer and dual (Farkas) certificates for the semantic inequalities.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::clause::{Assignment, Clause, LogicError};
use crate::graph::{FormulaId, GraphError, InferenceId, ProofGraph, RuleKind, Violation};
use crate::lp::{self, int, LinearProgram, Outcome, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FlowAssignment {
    flows: Vec<Rational>,
}

impl FlowAssignment {
    pub fn new(flows: Vec<Rational>) -> Self {
        Self { flows }
    }

    pub fn uniform(len: usize, value: Rational) -> Self {
        Self {
            flows: vec![value; len],
        }
    }

    pub fn values(&self) -> &[Rational] {
        &self.flows
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.flows
    }

    pub fn len(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    pub fn get(&self, w: InferenceId) -> Option<&Rational> {
        self.flows.get(w.0)
    }

    pub fn set(&mut self, w: InferenceId, value: Rational) {
        self.flows[w.0] = value;
    }

    pub fn push(&mut self, value: Rational) {
        self.flows.push(value);
    }

    pub fn total(&self) -> Rational {
        self.flows.iter().fold(Rational::zero(), |acc, f| acc + f)
    }

    pub fn all_positive(&self) -> bool {
        self.flows.iter().all(Signed::is_positive)
    }

    pub fn is_integral(&self) -> bool {
        self.flows.iter().all(|f| f.is_integer())
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        Self {
            flows: self.flows.iter().map(|f| f * factor).collect(),
        }
    }

    /// Total bits of all numerators and denominators.
    pub fn bit_size(&self) -> u64 {
        self.flows
            .iter()
            .map(|f| f.numer().bits() + f.denom().bits())
            .sum()
    }

    /// Smallest positive multiple with integer entries sharing no common factor.
    pub fn primitive_integral(&self) -> Self {
        let lcm = self.flows.iter().fold(BigInt::one(), |acc, f| acc.lcm(f.denom()));
        let ints: Vec<BigInt> = self
            .flows
            .iter()
            .map(|f| f.numer() * (&lcm / f.denom()))
            .collect();
        let gcd = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
        let gcd = if gcd.is_zero() { BigInt::one() } else { gcd };
        Self {
            flows: ints
                .into_iter()
                .map(|v| Rational::from_integer(v / &gcd))
                .collect(),
        }
    }
}

impl fmt::Display for FlowAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.flows.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("graph has {} rule violation(s), first: {}", .0.len(), .0[0])]
    InvalidRules(Vec<Violation>),
    #[error("graph has no goal vertex")]
    NoGoal,
    #[error("no formula-vertex carries the goal clause {0}")]
    GoalNotPresent(Clause),
    #[error("flow does not witness a proof of the goal")]
    NotWitness,
    #[error("flow is not integral")]
    NotIntegral,
    #[error("{0} is not a sink")]
    NotSink(FormulaId),
    #[error("assignment satisfies the clause at {0}")]
    NotFalsified(FormulaId),
    #[error("balance program solver returned an invalid point")]
    Solver,
}

/// Result of witness search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub witnessed: bool,
    pub goal: Option<FormulaId>,
    pub flow: Option<FlowAssignment>,
    /// Exact balances under `flow`, indexed by formula-vertex; empty when
    /// no flow was found.
    pub balances: Vec<Rational>,
    /// Farkas multipliers for the balance program of the last candidate goal
    /// when no witness exists.
    pub infeasibility: Option<Vec<Rational>>,
    /// Rows and columns of the last balance program solved.
    pub program_rows: usize,
    pub program_cols: usize,
}

fn require_valid(graph: &ProofGraph) -> Result<(), FlowError> {
    let violations = graph.validate_rules()?;
    if violations.is_empty() {
        Ok(())
    } else {
        Err(FlowError::InvalidRules(violations))
    }
}

/// The balance program for `goal`: goal balance ≥ 1, balance ≥ 0 on every
/// other vertex whose clause is not a hypothesis, and `Y_w ≥ 1`. Variable `w`
/// is the flow of inference-vertex `w`.
pub fn balance_program(graph: &ProofGraph, goal: FormulaId) -> LinearProgram {
    let mut lp = LinearProgram::new(graph.num_inferences());
    let (producers, consumers) = graph.adjacency();
    let hyp = graph.hypothesis_mask();
    for u in graph.formula_ids() {
        if u != goal && hyp[u.0] {
            continue;
        }
        let terms = balance_terms(&producers[u.0], &consumers[u.0]);
        let rhs = if u == goal { int(1) } else { int(0) };
        lp.add_ge(terms, rhs);
    }
    for w in 0..graph.num_inferences() {
        lp.add_ge([(w, int(1))], int(1));
    }
    lp
}

fn balance_terms(producers: &[InferenceId], consumers: &[InferenceId]) -> Vec<(usize, Rational)> {
    producers
        .iter()
        .map(|w| (w.0, int(1)))
        .chain(consumers.iter().map(|w| (w.0, int(-1))))
        .collect()
}

/// Searches for a witnessing flow for the graph's designated goal.
pub fn find_witness(graph: &ProofGraph) -> Result<CheckReport, FlowError> {
    let goal = graph.goal().ok_or(FlowError::NoGoal)?;
    require_valid(graph)?;
    witness_for(graph, goal)
}

/// Tries every vertex labelled by `goal` in id order and reports the first
/// success, or the last failure.
pub fn find_witness_for_clause(graph: &ProofGraph, goal: &Clause) -> Result<CheckReport, FlowError> {
    require_valid(graph)?;
    let candidates = graph.vertices_with_clause(goal);
    let mut last = None;
    for u in candidates {
        let report = witness_for(graph, u)?;
        if report.witnessed {
            return Ok(report);
        }
        last = Some(report);
    }
    last.ok_or_else(|| FlowError::GoalNotPresent(goal.clone()))
}

fn witness_for(graph: &ProofGraph, goal: FormulaId) -> Result<CheckReport, FlowError> {
    let lp = balance_program(graph, goal);
    let (rows, cols) = (lp.constraints().len(), lp.num_vars());
    match lp::solve(&lp) {
        Outcome::Feasible(point) => {
            let flow = FlowAssignment::new(point);
            if !verify_flow(graph, &flow, goal)? {
                return Err(FlowError::Solver);
            }
            let balances = graph.balances(&flow)?;
            Ok(CheckReport {
                witnessed: true,
                goal: Some(goal),
                flow: Some(flow),
                balances,
                infeasibility: None,
                program_rows: rows,
                program_cols: cols,
            })
        }
        Outcome::Infeasible(cert) => Ok(CheckReport {
            witnessed: false,
            goal: Some(goal),
            flow: None,
            balances: Vec::new(),
            infeasibility: Some(cert),
            program_rows: rows,
            program_cols: cols,
        }),
    }
}

/// Pure arithmetic check: all flows positive, every source carries a
/// hypothesis clause, and the goal has positive balance.
pub fn verify_flow(graph: &ProofGraph, flow: &FlowAssignment, goal: FormulaId) -> Result<bool, FlowError> {
    graph.check_structure()?;
    let balances = graph.balances(flow)?;
    if goal.0 >= graph.num_formulas() {
        return Err(GraphError::NoSuchFormula(goal).into());
    }
    if !flow.all_positive() {
        return Ok(false);
    }
    let hyp = graph.hypothesis_mask();
    let sources_ok = balances.iter().zip(&hyp).all(|(b, &h)| !b.is_negative() || h);
    Ok(sources_ok && balances[goal.0].is_positive())
}

fn require_witness(graph: &ProofGraph, flow: &FlowAssignment, goal: FormulaId) -> Result<(), FlowError> {
    if verify_flow(graph, flow, goal)? {
        Ok(())
    } else {
        Err(FlowError::NotWitness)
    }
}

/// `ℓ!` for `ℓ` = number of vertices.
pub fn factorial_bound(graph: &ProofGraph) -> BigInt {
    (1..=graph.length() as u64).fold(BigInt::one(), |acc, k| acc * k)
}

/// Integral flow with the same sources and sinks. Clears denominators of the
/// given flow; if that exceeds `ℓ!`, re-solves the sign-pattern program and
/// clears its basic solution instead.
pub fn integralize(
    graph: &ProofGraph,
    flow: &FlowAssignment,
    goal: FormulaId,
) -> Result<FlowAssignment, FlowError> {
    require_witness(graph, flow, goal)?;
    let direct = flow.primitive_integral();
    let bound = Rational::from_integer(factorial_bound(graph));
    if direct.values().iter().all(|f| f <= &bound) {
        return Ok(direct);
    }
    let balances = graph.balances(flow)?;
    let lp = sign_pattern_program(graph, &balances);
    let point = lp::feasible(&lp).ok_or(FlowError::Solver)?;
    Ok(FlowAssignment::new(point).primitive_integral())
}

/// Program fixing the sign of every balance: sinks ≥ 1, sources ≤ −1,
/// zero-balance vertices = 0, `Y_w ≥ 1`.
pub fn sign_pattern_program(graph: &ProofGraph, balances: &[Rational]) -> LinearProgram {
    let mut lp = LinearProgram::new(graph.num_inferences());
    let (producers, consumers) = graph.adjacency();
    for (u, b) in balances.iter().enumerate() {
        let terms = balance_terms(&producers[u], &consumers[u]);
        let negated: Vec<_> = terms.iter().map(|(w, c)| (*w, -c)).collect();
        if b.is_positive() {
            lp.add_ge(terms, int(1));
        } else if b.is_negative() {
            lp.add_ge(negated, int(1));
        } else {
            lp.add_ge(terms, int(0));
            lp.add_ge(negated, int(0));
        }
    }
    for w in 0..graph.num_inferences() {
        lp.add_ge([(w, int(1))], int(1));
    }
    lp
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub source: FormulaId,
    pub iterations: usize,
}

/// Walks back from a falsified sink to a falsified source by repeatedly
/// stepping to a falsified antecedent and discharging `δ = min(B(s), F(r))`
/// from the working flow.
pub fn trace_falsified_source(
    graph: &ProofGraph,
    flow: &FlowAssignment,
    sink: FormulaId,
    alpha: &Assignment,
) -> Result<Trace, FlowError> {
    graph.check_structure()?;
    if !flow.is_integral() {
        return Err(FlowError::NotIntegral);
    }
    let mut balances = graph.balances(flow)?;
    if sink.0 >= balances.len() {
        return Err(GraphError::NoSuchFormula(sink).into());
    }
    if !balances[sink.0].is_positive() {
        return Err(FlowError::NotSink(sink));
    }
    if graph.clause(sink).evaluate(alpha)? {
        return Err(FlowError::NotFalsified(sink));
    }
    let (producers, _) = graph.adjacency();
    let mut work = flow.values().to_vec();
    let mut s = sink;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let r = *producers[s.0]
            .iter()
            .find(|w| work[w.0].is_positive())
            .expect("positive balance implies a producing vertex with positive flow");
        let rule = graph.inference(r);
        let mut u = None;
        for &a in &rule.inputs {
            if !graph.clause(a).evaluate(alpha)? {
                u = Some(a);
                break;
            }
        }
        let u = u.expect("a sound rule with a falsified consequent has a falsified antecedent");
        if balances[u.0].is_negative() {
            return Ok(Trace {
                source: u,
                iterations,
            });
        }
        let delta = (&balances[s.0]).min(&work[r.0]).clone();
        work[r.0] -= &delta;
        for v in &rule.outputs {
            balances[v.0] -= &delta;
        }
        for v in &rule.inputs {
            balances[v.0] += &delta;
        }
        s = u;
    }
}

/// Which semantic inequality a formula-vertex multiplier applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemanticRow {
    /// `-Z_u ≥ 0` for the goal.
    Goal,
    /// `Z_u - 1 ≥ 0` for hypothesis vertices.
    Hypothesis,
    /// `1 - Z_u ≥ 0` for every vertex.
    Bound,
}

/// Multipliers over the semantic inequalities: one per formula-vertex (with
/// the row it applies to) and one per inference-vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualCertificate {
    pub formula: Vec<(SemanticRow, Rational)>,
    pub inference: Vec<Rational>,
}

/// Builds `b_u` and `c_w = F(w)/B(goal)` from a witnessing flow.
pub fn dual_certificate(
    graph: &ProofGraph,
    flow: &FlowAssignment,
    goal: FormulaId,
) -> Result<DualCertificate, FlowError> {
    require_witness(graph, flow, goal)?;
    let balances = graph.balances(flow)?;
    let beta = balances[goal.0].clone();
    let formula = balances
        .iter()
        .enumerate()
        .map(|(u, b)| {
            if u == goal.0 {
                (SemanticRow::Goal, int(1))
            } else if b.is_negative() {
                (SemanticRow::Hypothesis, -b / &beta)
            } else {
                (SemanticRow::Bound, b / &beta)
            }
        })
        .collect();
    let inference = flow.values().iter().map(|f| f / &beta).collect();
    Ok(DualCertificate { formula, inference })
}

/// The combined linear form `Σ coeff·Z_u + constant` (read as `… ≥ 0`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Combination {
    pub coefficients: Vec<Rational>,
    pub constant: Rational,
}

impl Combination {
    /// All `Z` coefficients vanish and the constant is `-1`: `0 ≥ 1`.
    pub fn is_contradiction(&self) -> bool {
        self.coefficients.iter().all(Zero::is_zero) && self.constant == int(-1)
    }
}

/// Expands the positive combination of semantic inequalities symbolically.
pub fn combine(graph: &ProofGraph, cert: &DualCertificate) -> Option<Combination> {
    if cert.formula.len() != graph.num_formulas() || cert.inference.len() != graph.num_inferences() {
        return None;
    }
    let mut coefficients = vec![Rational::zero(); graph.num_formulas()];
    let mut constant = Rational::zero();
    for (w, c) in graph.inferences().iter().zip(&cert.inference) {
        for u in &w.outputs {
            coefficients[u.0] += c;
        }
        for u in &w.inputs {
            coefficients[u.0] -= c;
        }
        constant += c * int(w.inputs.len() as i64 - w.outputs.len() as i64);
    }
    for (u, (row, b)) in cert.formula.iter().enumerate() {
        match row {
            SemanticRow::Goal => coefficients[u] -= b,
            SemanticRow::Hypothesis => {
                coefficients[u] += b;
                constant -= b;
            }
            SemanticRow::Bound => {
                coefficients[u] -= b;
                constant += b;
            }
        }
    }
    Some(Combination {
        coefficients,
        constant,
    })
}

/// Nonnegative multipliers, rows that exist for their vertex, and a
/// combination equal to `0 ≥ 1`.
pub fn verify_dual_certificate(graph: &ProofGraph, goal: FormulaId, cert: &DualCertificate) -> bool {
    let hyp = graph.hypothesis_mask();
    let rows_ok = cert.formula.iter().enumerate().all(|(u, (row, b))| {
        !b.is_negative()
            && match row {
                SemanticRow::Goal => u == goal.0,
                SemanticRow::Hypothesis => hyp[u],
                SemanticRow::Bound => true,
            }
    });
    rows_ok
        && cert.inference.iter().all(|c| !c.is_negative())
        && combine(graph, cert).is_some_and(|c| c.is_contradiction())
}

/// Row layout of [`semantic_program`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticRows {
    pub inference: Vec<usize>,
    pub goal: usize,
    pub hypothesis: Vec<Option<usize>>,
    pub bound: Vec<usize>,
}

/// The semantic inequalities as a linear program over `Z_u`: one row per
/// inference rule, goal false, hypotheses true, `Z_u ≤ 1`.
pub fn semantic_program(graph: &ProofGraph, goal: FormulaId) -> (LinearProgram, SemanticRows) {
    let mut lp = LinearProgram::new(graph.num_formulas());
    let mut inference = Vec::new();
    for w in graph.inferences() {
        let terms: Vec<_> = w
            .outputs
            .iter()
            .map(|u| (u.0, int(1)))
            .chain(w.inputs.iter().map(|u| (u.0, int(-1))))
            .collect();
        let rhs = int(w.outputs.len() as i64 - w.inputs.len() as i64);
        inference.push(lp.add_ge(terms, rhs));
    }
    let goal_row = lp.add_ge([(goal.0, int(-1))], int(0));
    let hyp = graph.hypothesis_mask();
    let hypothesis = hyp
        .iter()
        .enumerate()
        .map(|(u, &h)| h.then(|| lp.add_ge([(u, int(1))], int(1))))
        .collect();
    let bound = (0..graph.num_formulas())
        .map(|u| lp.add_ge([(u, int(-1))], int(-1)))
        .collect();
    (
        lp,
        SemanticRows {
            inference,
            goal: goal_row,
            hypothesis,
            bound,
        },
    )
}

/// Maps a certificate onto the row multipliers of [`semantic_program`].
pub fn certificate_multipliers(
    rows: &SemanticRows,
    num_rows: usize,
    cert: &DualCertificate,
) -> Option<Vec<Rational>> {
    let mut lambda = vec![Rational::zero(); num_rows];
    for (row, c) in rows.inference.iter().zip(&cert.inference) {
        lambda[*row] += c;
    }
    for (u, (kind, b)) in cert.formula.iter().enumerate() {
        let row = match kind {
            SemanticRow::Goal => rows.goal,
            SemanticRow::Hypothesis => rows.hypothesis.get(u).copied().flatten()?,
            SemanticRow::Bound => rows.bound[u],
        };
        lambda[row] += b;
    }
    Some(lambda)
}

/// Variables occurring in any clause of the graph.
pub fn graph_variables(graph: &ProofGraph) -> BTreeSet<u32> {
    let mut vars: BTreeSet<u32> = graph.formulas().iter().flat_map(Clause::vars).collect();
    vars.extend(graph.inferences().iter().map(|w| match w.kind {
        RuleKind::Axiom(v) | RuleKind::Cut(v) | RuleKind::Split(v) => v,
    }));
    vars
}
