//! Translations between flow-witnessed proof graphs and Sherali-Adams proofs.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::clause::{Clause, Literal};
use crate::flow::{verify_flow, FlowAssignment, FlowError};
use crate::graph::{ClauseInterner, FormulaId, ProofGraph, RuleKind};
use crate::lp::{int, Rational};
use crate::sa::{
    check_sa, falsifier, gadget_terms, multilinearize, product_encoding, Gadget, Monomial, Polynomial,
    RefPolynomial, SaError, SaProof, SaTerm, Twin,
};

/// Collects terms, merging those with equal monomial and reference.
#[derive(Debug, Default)]
struct TermSink {
    terms: BTreeMap<(Monomial, RefPolynomial), Rational>,
}

impl TermSink {
    fn push(&mut self, coefficient: Rational, monomial: Monomial, reference: RefPolynomial) {
        *self
            .terms
            .entry((monomial, reference))
            .or_insert_with(Rational::zero) += coefficient;
    }

    fn extend(&mut self, scale: &Rational, terms: Vec<SaTerm>) {
        for t in terms {
            self.push(&t.coefficient * scale, t.monomial, t.reference);
        }
    }

    /// Adds `scale · p` using only `One` terms and weakened axiom
    /// decompositions; negative monomials must be tautological.
    fn extend_polynomial(&mut self, scale: &Rational, p: &Polynomial) -> Result<(), SaError> {
        for (m, c) in p.terms() {
            let coef = c * scale;
            if coef.is_positive() {
                self.push(coef, m.clone(), RefPolynomial::One);
                continue;
            }
            let v = m
                .tautological_var()
                .ok_or_else(|| SaError::Inconsistent(format!("negative non-tautological monomial {m}")))?;
            let rest = m.without(v as Twin).without(-(v as Twin));
            let abs = -coef;
            self.push(
                abs.clone(),
                &rest * &Monomial::var(v as Twin),
                RefPolynomial::OneMinusXMinusXbar(v),
            );
            self.push(abs, rest, RefPolynomial::XsqMinusX(v));
        }
        Ok(())
    }

    fn into_terms(self) -> Vec<SaTerm> {
        self.terms
            .into_iter()
            .filter(|(_, c)| c.is_positive())
            .map(|((m, r), c)| SaTerm::new(c, m, r))
            .collect()
    }
}

/// Builds the Sherali-Adams proof of `T(goal)` from a witnessed graph:
/// `F(w)/B(s)·P_w` for every inference-vertex and `-B(u)/B(s)·T(u)` for every
/// other formula-vertex, each expanded into gadget terms.
pub fn circular_to_sa(graph: &ProofGraph, flow: &FlowAssignment) -> Result<SaProof, SaError> {
    let goal = graph.goal().ok_or(FlowError::NoGoal)?;
    if !verify_flow(graph, flow, goal)? {
        return Err(FlowError::NotWitness.into());
    }
    let violations = graph.validate_rules()?;
    if !violations.is_empty() {
        return Err(FlowError::InvalidRules(violations).into());
    }
    let hypotheses: Vec<Clause> = graph.hypothesis_clauses().into_iter().collect();
    let goal_clause = graph.clause(goal).clone();
    for c in hypotheses.iter().chain([&goal_clause]) {
        if c.is_tautology() {
            return Err(SaError::Tautological(c.clone()));
        }
    }
    let balances = graph.balances(flow)?;
    let beta = balances[goal.0].clone();
    let mut sink = TermSink::default();

    for (w, f) in graph.inferences().iter().zip(flow.values()) {
        let coef = f / &beta;
        let clause = |u: FormulaId| graph.clause(u);
        match w.kind {
            RuleKind::Axiom(x) => sink.extend(&coef, gadget_terms(Gadget::Axiom, &Clause::empty(), x)?),
            RuleKind::Cut(x) if gadget_side(clause(w.outputs[0]), x) => {
                sink.extend(&coef, gadget_terms(Gadget::Cut, clause(w.outputs[0]), x)?);
            }
            RuleKind::Split(x) if gadget_side(clause(w.inputs[0]), x) => {
                let side = clause(w.inputs[0]);
                sink.extend(&coef, gadget_terms(Gadget::Split, side, x)?);
                if w.outputs.len() == 1 {
                    // The suppressed consequent contributes -T(side ∨ ¬lit).
                    let kept = clause(w.outputs[0]);
                    let lit = if kept.contains(Literal::pos(x)) {
                        Literal::pos(x)
                    } else {
                        Literal::neg(x)
                    };
                    let m = &Monomial::of_clause(side) * &Monomial::var(falsifier(lit.complement()));
                    sink.push(coef.clone(), m, RefPolynomial::One);
                }
            }
            RuleKind::Cut(_) | RuleKind::Split(_) => {
                let mut p = Polynomial::zero();
                for u in &w.outputs {
                    p = &p + &product_encoding(clause(*u));
                }
                for u in &w.inputs {
                    p = &p - &product_encoding(clause(*u));
                }
                sink.extend_polynomial(&coef, &p)?;
            }
        }
    }

    for (u, b) in balances.iter().enumerate() {
        if u == goal.0 || b.is_zero() {
            continue;
        }
        let clause = graph.clause(FormulaId(u));
        let coef = b / &beta;
        if b.is_negative() {
            let i = hypotheses
                .iter()
                .position(|h| h == clause)
                .expect("verified sources carry hypothesis clauses");
            sink.push(-coef, Monomial::one(), RefPolynomial::Hypothesis(i + 1));
        } else {
            sink.push(coef, Monomial::of_clause(clause), RefPolynomial::One);
        }
    }

    let num_variables = graph
        .formulas()
        .iter()
        .map(Clause::max_var)
        .chain(graph.inferences().iter().map(|w| w.kind.principal()))
        .max()
        .unwrap_or(0);
    Ok(SaProof {
        num_variables,
        hypotheses,
        goal: goal_clause,
        terms: sink.into_terms(),
    })
}

/// Side clauses the cut and split gadgets accept; other rules are expanded
/// directly.
fn gadget_side(side: &Clause, x: u32) -> bool {
    !side.mentions(x) && !side.is_tautology()
}

/// Reference polynomials allowed in a normalized proof.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormalRef {
    Hypothesis(usize),
    /// `-X_i X̄_i`.
    NegXXbar(u32),
    OneMinusXMinusXbar(u32),
    XPlusXbarMinusOne(u32),
    One,
}

impl NormalRef {
    pub fn polynomial(self, hypotheses: &[Clause]) -> Option<Polynomial> {
        match self {
            NormalRef::Hypothesis(i) => RefPolynomial::Hypothesis(i).polynomial(hypotheses),
            NormalRef::NegXXbar(v) => {
                let x = v as Twin;
                Some(Polynomial::term(
                    int(-1),
                    Monomial::from_powers([(x, 1), (-x, 1)]),
                ))
            }
            NormalRef::OneMinusXMinusXbar(v) => RefPolynomial::OneMinusXMinusXbar(v).polynomial(hypotheses),
            NormalRef::XPlusXbarMinusOne(v) => RefPolynomial::XPlusXbarMinusOne(v).polynomial(hypotheses),
            NormalRef::One => Some(Polynomial::constant(int(1))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NormalizedTerm {
    pub coefficient: Rational,
    pub monomial: Monomial,
    pub reference: NormalRef,
}

/// A proof whose terms are multilinear and use only [`NormalRef`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedProof {
    pub num_variables: u32,
    pub hypotheses: Vec<Clause>,
    pub goal: Clause,
    pub terms: Vec<NormalizedTerm>,
}

impl NormalizedProof {
    pub fn sum(&self) -> Option<Polynomial> {
        let mut sum = Polynomial::zero();
        for t in &self.terms {
            let p = t.reference.polynomial(&self.hypotheses)?;
            sum = &sum + &p.mul_monomial(&t.monomial).scale(&t.coefficient);
        }
        Some(sum)
    }

    /// Exact identity with `T(goal)` and every product multilinear.
    pub fn is_valid(&self) -> bool {
        let multilinear = self.terms.iter().all(|t| {
            t.coefficient.is_positive()
                && t.reference
                    .polynomial(&self.hypotheses)
                    .map(|p| {
                        p.mul_monomial(&t.monomial)
                            .terms()
                            .all(|(m, _)| m.is_multilinear())
                    })
                    .unwrap_or(false)
        });
        multilinear && self.sum() == Some(product_encoding(&self.goal))
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .filter_map(|t| {
                let p = t.reference.polynomial(&self.hypotheses)?;
                Some(p.mul_monomial(&t.monomial).degree())
            })
            .max()
            .unwrap_or(0)
    }

    /// Re-expresses `-X X̄` through the basic polynomials, giving an ordinary
    /// proof that passes [`check_sa`].
    pub fn to_sa_proof(&self) -> SaProof {
        let mut terms = Vec::new();
        for t in &self.terms {
            let a = t.coefficient.clone();
            let m = t.monomial.clone();
            match t.reference {
                NormalRef::Hypothesis(i) => terms.push(SaTerm::new(a, m, RefPolynomial::Hypothesis(i))),
                NormalRef::NegXXbar(v) => {
                    let x = &m * &Monomial::var(v as Twin);
                    terms.push(SaTerm::new(a.clone(), x, RefPolynomial::OneMinusXMinusXbar(v)));
                    terms.push(SaTerm::new(a, m, RefPolynomial::XsqMinusX(v)));
                }
                NormalRef::OneMinusXMinusXbar(v) => {
                    terms.push(SaTerm::new(a, m, RefPolynomial::OneMinusXMinusXbar(v)))
                }
                NormalRef::XPlusXbarMinusOne(v) => {
                    terms.push(SaTerm::new(a, m, RefPolynomial::XPlusXbarMinusOne(v)))
                }
                NormalRef::One => terms.push(SaTerm::new(a, m, RefPolynomial::One)),
            }
        }
        SaProof {
            num_variables: self.num_variables,
            hypotheses: self.hypotheses.clone(),
            goal: self.goal.clone(),
            terms,
        }
    }
}

/// Normal form of a single term; `None` when the term vanishes on 0-1 points.
pub fn normalize_term(term: &SaTerm, hypotheses: &[Clause]) -> Option<(Monomial, NormalRef)> {
    let m = multilinearize(&term.monomial);
    let out = match term.reference {
        RefPolynomial::Hypothesis(i) => {
            let own = Monomial::of_clause(hypotheses.get(i.checked_sub(1)?)?);
            let q = own.powers().fold(m, |q, (t, _)| q.without_all(t));
            (q, NormalRef::Hypothesis(i))
        }
        RefPolynomial::OneMinusXMinusXbar(v) => {
            let x = v as Twin;
            match (m.contains(x), m.contains(-x)) {
                (false, false) => (m, NormalRef::OneMinusXMinusXbar(v)),
                (true, false) => (m.without(x), NormalRef::NegXXbar(v)),
                (false, true) => (m.without(-x), NormalRef::NegXXbar(v)),
                (true, true) => (m.without(x).without(-x), NormalRef::NegXXbar(v)),
            }
        }
        RefPolynomial::XPlusXbarMinusOne(v) => {
            let x = v as Twin;
            match (m.contains(x), m.contains(-x)) {
                (false, false) => (m, NormalRef::XPlusXbarMinusOne(v)),
                (true, false) => (&m * &Monomial::var(-x), NormalRef::One),
                (false, true) => (&m * &Monomial::var(x), NormalRef::One),
                (true, true) => (m, NormalRef::One),
            }
        }
        RefPolynomial::One => (m, NormalRef::One),
        RefPolynomial::XsqMinusX(_) | RefPolynomial::XMinusXsq(_) => return None,
    };
    Some(out)
}

/// Converts a checked proof into normal form, merging equal terms.
pub fn normalize_sa(proof: &SaProof) -> Result<NormalizedProof, SaError> {
    if !check_sa(proof)?.valid {
        return Err(SaError::DoesNotCheck);
    }
    let mut merged: BTreeMap<(Monomial, NormalRef), Rational> = BTreeMap::new();
    for t in &proof.terms {
        if let Some(key) = normalize_term(t, &proof.hypotheses) {
            *merged.entry(key).or_insert_with(Rational::zero) += &t.coefficient;
        }
    }
    let normalized = NormalizedProof {
        num_variables: proof.num_variables,
        hypotheses: proof.hypotheses.clone(),
        goal: proof.goal.clone(),
        terms: merged
            .into_iter()
            .map(|((monomial, reference), coefficient)| NormalizedTerm {
                coefficient,
                monomial,
                reference,
            })
            .collect(),
    };
    if !normalized.is_valid() {
        return Err(SaError::Inconsistent("normal form is not an identity".into()));
    }
    Ok(normalized)
}

/// Builds a witnessed proof graph from a checked Sherali-Adams proof: split
/// chains for hypothesis terms, axiom plus split chains for `-X X̄` terms,
/// a split of `C_j` for `1 - X - X̄` terms and a cut into `C_j` for
/// `X + X̄ - 1` terms, all with flow equal to the term's coefficient.
pub fn sa_to_circular(proof: &SaProof) -> Result<(ProofGraph, FlowAssignment), SaError> {
    for c in proof.hypotheses.iter().chain([&proof.goal]) {
        if c.is_tautology() {
            return Err(SaError::Tautological(c.clone()));
        }
    }
    let normalized = normalize_sa(proof)?;
    let mut b = ClauseInterner::new();
    let mut flows: Vec<Rational> = Vec::new();
    for t in &normalized.terms {
        let a = &t.coefficient;
        let c = t.monomial.to_clause();
        match t.reference {
            NormalRef::Hypothesis(i) => {
                let h = &normalized.hypotheses[i - 1];
                b.vertex(h);
                b.weakening_chain(h, &c);
            }
            NormalRef::NegXXbar(v) => {
                b.axiom(v);
                b.weakening_chain(&Clause::tautology(v), &c);
            }
            NormalRef::OneMinusXMinusXbar(v) => {
                b.split(&c, v);
            }
            NormalRef::XPlusXbarMinusOne(v) => {
                b.cut(&c, v);
            }
            NormalRef::One => {}
        }
        flows.resize(b.graph().num_inferences(), a.clone());
    }

    let goal_clause = normalized.goal.clone();
    let hyp_set: Vec<Clause> = normalized.hypotheses.clone();
    let goal_is_hyp = hyp_set.contains(&goal_clause);
    let mut goal = b.vertex(&goal_clause);
    let mut graph_flow = FlowAssignment::new(flows);
    b.graph_mut().mark_hypotheses_by_clause(&hyp_set);
    let beta = b.graph().balance(&graph_flow, goal)?;

    if !beta.is_positive() {
        if !goal_is_hyp {
            return Err(SaError::Inconsistent(format!(
                "goal balance {beta} is not positive"
            )));
        }
        goal = pad_goal(&mut b, &mut graph_flow, &goal_clause, goal);
        b.graph_mut().mark_hypotheses_by_clause(&hyp_set);
    } else if beta < Rational::one() {
        graph_flow = graph_flow.scaled(&beta.recip());
    }

    let mut graph = b.into_graph();
    graph.set_goal(Some(goal));
    if !verify_flow(&graph, &graph_flow, goal)? {
        return Err(SaError::Inconsistent(
            "constructed flow does not witness the goal".into(),
        ));
    }
    Ok((graph, graph_flow))
}

/// Gives a hypothesis goal positive balance through a fresh goal vertex.
fn pad_goal(
    b: &mut ClauseInterner,
    flow: &mut FlowAssignment,
    goal_clause: &Clause,
    old: FormulaId,
) -> FormulaId {
    let graph = b.graph_mut();
    let fresh = graph.add_formula(goal_clause.clone());
    if let Some(&lit) = goal_clause.literals().first() {
        // Idempotent split: A ∨ lit = A.
        graph.add_inference(RuleKind::Split(lit.var()), vec![old], vec![fresh]);
        flow.push(int(1));
    } else {
        let v = 1;
        b.split(goal_clause, v);
        let pos = b.vertex(&Clause::from_iter([Literal::pos(v)]));
        let neg = b.vertex(&Clause::from_iter([Literal::neg(v)]));
        b.graph_mut()
            .add_inference(RuleKind::Cut(v), vec![pos, neg], vec![fresh]);
        flow.push(int(1));
        flow.push(int(1));
    }
    fresh
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::find_witness;
    use crate::lp::ratio;

    fn c(lits: &[i64]) -> Clause {
        Clause::from_dimacs(lits).unwrap()
    }

    fn single_cut_refutation() -> (ProofGraph, FlowAssignment) {
        let mut b = ClauseInterner::new();
        b.cut(&Clause::empty(), 1);
        let mut g = b.into_graph();
        g.mark_hypotheses_by_clause(&[c(&[1]), c(&[-1])]);
        let goal = g.vertices_with_clause(&c(&[]))[0];
        g.set_goal(Some(goal));
        (g, FlowAssignment::uniform(1, int(1)))
    }

    #[test]
    fn single_cut_to_sa() {
        let (g, f) = single_cut_refutation();
        let sa = circular_to_sa(&g, &f).unwrap();
        let check = check_sa(&sa).unwrap();
        assert!(check.valid);
        assert_eq!(check.degree, 1);
        assert!(check.monomial_size <= 3 * g.length());
    }

    #[test]
    fn tautological_side_clause_is_expanded_directly() {
        let mut b = ClauseInterner::new();
        b.cut(&Clause::empty(), 2);
        b.axiom(1);
        b.split(&c(&[1, -1]), 2);
        let mut g = b.into_graph();
        g.mark_hypotheses_by_clause(&[c(&[2]), c(&[-2])]);
        g.set_goal(Some(g.vertices_with_clause(&c(&[]))[0]));
        let f = FlowAssignment::uniform(3, int(1));
        let sa = circular_to_sa(&g, &f).unwrap();
        let check = check_sa(&sa).unwrap();
        assert!(check.valid);
        assert_eq!(check.degree as usize, g.width());
    }

    #[test]
    fn single_cut_round_trip() {
        let (g, f) = single_cut_refutation();
        let sa = circular_to_sa(&g, &f).unwrap();
        let (g2, f2) = sa_to_circular(&sa).unwrap();
        assert!(verify_flow(&g2, &f2, g2.goal().unwrap()).unwrap());
        assert!(find_witness(&g2).unwrap().witnessed);
        assert_eq!(g2.width(), 1);
    }

    #[test]
    fn normalization_cases() {
        let hyps = [c(&[1])];
        let t = |m: Monomial, r| SaTerm::new(int(1), m, r);
        let x1 = Monomial::var(1);
        let both = Monomial::from_powers([(1, 1), (-1, 1)]);
        assert_eq!(
            normalize_term(&t(x1.clone(), RefPolynomial::OneMinusXMinusXbar(1)), &hyps),
            Some((Monomial::one(), NormalRef::NegXXbar(1)))
        );
        assert_eq!(
            normalize_term(&t(both.clone(), RefPolynomial::XPlusXbarMinusOne(1)), &hyps),
            Some((both.clone(), NormalRef::One))
        );
        assert_eq!(
            normalize_term(&t(Monomial::power(1, 2), RefPolynomial::XsqMinusX(1)), &hyps),
            None
        );
        assert_eq!(
            normalize_term(&t(both, RefPolynomial::OneMinusXMinusXbar(1)), &hyps),
            Some((Monomial::one(), NormalRef::NegXXbar(1)))
        );
        assert_eq!(
            normalize_term(&t(x1, RefPolynomial::XPlusXbarMinusOne(1)), &hyps),
            Some((Monomial::from_powers([(1, 1), (-1, 1)]), NormalRef::One))
        );
        // Only the twins of the hypothesis's own monomial are absorbed.
        let q = Monomial::from_powers([(-1, 2), (1, 1), (2, 1)]);
        assert_eq!(
            normalize_term(&t(q, RefPolynomial::Hypothesis(1)), &hyps),
            Some((Monomial::from_powers([(1, 1), (2, 1)]), NormalRef::Hypothesis(1)))
        );
    }

    #[test]
    fn normal_terms_agree_on_cube_points() {
        let hyps = [c(&[1, -2])];
        let refs = [
            RefPolynomial::Hypothesis(1),
            RefPolynomial::OneMinusXMinusXbar(1),
            RefPolynomial::XPlusXbarMinusOne(1),
            RefPolynomial::XsqMinusX(2),
            RefPolynomial::XMinusXsq(1),
            RefPolynomial::One,
        ];
        let monos = [
            Monomial::one(),
            Monomial::var(1),
            Monomial::from_powers([(-1, 3)]),
            Monomial::from_powers([(1, 1), (-1, 2), (2, 1)]),
            Monomial::from_powers([(-2, 1), (2, 2)]),
        ];
        for r in refs {
            for m in &monos {
                let term = SaTerm::new(ratio(3, 2), m.clone(), r);
                let original = term.expand(&hyps).unwrap();
                let normal = match normalize_term(&term, &hyps) {
                    Some((q, p)) => p
                        .polynomial(&hyps)
                        .unwrap()
                        .mul_monomial(&q)
                        .scale(&term.coefficient),
                    None => Polynomial::zero(),
                };
                assert!(normal.terms().all(|(m, _)| m.is_multilinear()));
                for bits in 0..16u32 {
                    let x = [bits & 1 != 0, bits & 2 != 0];
                    let xb = [bits & 4 != 0, bits & 8 != 0];
                    assert_eq!(original.evaluate_twins(&x, &xb), normal.evaluate_twins(&x, &xb));
                }
            }
        }
    }

    #[test]
    fn identity_proof_is_padded() {
        let proof = SaProof {
            num_variables: 1,
            hypotheses: vec![c(&[1])],
            goal: c(&[1]),
            terms: vec![SaTerm::new(int(1), Monomial::one(), RefPolynomial::Hypothesis(1))],
        };
        let (g, f) = sa_to_circular(&proof).unwrap();
        let goal = g.goal().unwrap();
        assert!(verify_flow(&g, &f, goal).unwrap());
        assert_eq!(g.width(), 1);
        assert_eq!(g.num_inferences(), 1);

        let refutation = SaProof {
            num_variables: 1,
            hypotheses: vec![c(&[])],
            goal: c(&[]),
            terms: vec![SaTerm::new(int(2), Monomial::one(), RefPolynomial::Hypothesis(1))],
        };
        assert!(!check_sa(&refutation).unwrap().valid);
        let ok = SaProof {
            terms: vec![SaTerm::new(int(1), Monomial::one(), RefPolynomial::Hypothesis(1))],
            ..refutation
        };
        let (g, f) = sa_to_circular(&ok).unwrap();
        assert!(verify_flow(&g, &f, g.goal().unwrap()).unwrap());
    }

    #[test]
    fn to_sa_proof_checks() {
        let (g, f) = single_cut_refutation();
        let sa = circular_to_sa(&g, &f).unwrap();
        let normal = normalize_sa(&sa).unwrap();
        assert!(normal.is_valid());
        assert!(check_sa(&normal.to_sa_proof()).unwrap().valid);
    }

    #[test]
    fn tautological_hypothesis_rejected() {
        let proof = SaProof {
            num_variables: 1,
            hypotheses: vec![c(&[1, -1])],
            goal: c(&[1]),
            terms: vec![],
        };
        assert!(matches!(sa_to_circular(&proof), Err(SaError::Tautological(_))));
    }
}
