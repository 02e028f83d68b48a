//! Polynomials over twin variables `X_i`, `X̄_i`, Sherali-Adams proofs with
//! the product encoding of clauses, and the four basic gadgets.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::clause::{Assignment, Clause, Literal};
use crate::flow::FlowError;
use crate::graph::GraphError;
use crate::lp::{int, Rational};

/// A twin variable: `+i` is `X_i`, `-i` is `X̄_i`.
pub type Twin = i64;

/// Twin variable whose product encodes falsification of `lit`: `x ↦ X̄`,
/// `¬x ↦ X`.
pub fn falsifier(lit: Literal) -> Twin {
    let v = lit.var() as i64;
    if lit.is_positive() {
        -v
    } else {
        v
    }
}

/// Literal falsified exactly when `twin` is 1.
pub fn literal_of(twin: Twin) -> Literal {
    let v = twin.unsigned_abs() as u32;
    if twin < 0 {
        Literal::pos(v)
    } else {
        Literal::neg(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial {
    exps: BTreeMap<Twin, u32>,
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(twin: Twin) -> Self {
        Self::power(twin, 1)
    }

    pub fn power(twin: Twin, exp: u32) -> Self {
        assert!(twin != 0, "twin variable index must be nonzero");
        let mut exps = BTreeMap::new();
        if exp > 0 {
            exps.insert(twin, exp);
        }
        Self { exps }
    }

    pub fn from_powers<I: IntoIterator<Item = (Twin, u32)>>(powers: I) -> Self {
        powers
            .into_iter()
            .fold(Self::one(), |m, (t, e)| &m * &Self::power(t, e))
    }

    /// Product of the falsifying twins of `clause`'s literals, so that
    /// `T(clause) = -monomial`.
    pub fn of_clause(clause: &Clause) -> Self {
        Self {
            exps: clause.literals().iter().map(|&l| (falsifier(l), 1)).collect(),
        }
    }

    /// The clause `C` with `T(C) = -M(self)`.
    pub fn to_clause(&self) -> Clause {
        self.exps.keys().map(|&t| literal_of(t)).collect()
    }

    pub fn degree(&self) -> u32 {
        self.exps.values().sum()
    }

    pub fn exponent(&self, twin: Twin) -> u32 {
        self.exps.get(&twin).copied().unwrap_or(0)
    }

    pub fn contains(&self, twin: Twin) -> bool {
        self.exps.contains_key(&twin)
    }

    pub fn powers(&self) -> impl Iterator<Item = (Twin, u32)> + '_ {
        self.exps.iter().map(|(&t, &e)| (t, e))
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn is_multilinear(&self) -> bool {
        self.exps.values().all(|&e| e == 1)
    }

    /// Contains both `X_i` and `X̄_i` for some `i`.
    pub fn is_tautological(&self) -> bool {
        self.tautological_var().is_some()
    }

    pub fn tautological_var(&self) -> Option<u32> {
        self.exps
            .keys()
            .find(|&&t| t > 0 && self.exps.contains_key(&-t))
            .map(|&t| t as u32)
    }

    pub fn max_var(&self) -> u32 {
        self.exps
            .keys()
            .map(|t| t.unsigned_abs() as u32)
            .max()
            .unwrap_or(0)
    }

    /// Removes one factor of `twin`, if present.
    pub fn without(&self, twin: Twin) -> Self {
        let mut exps = self.exps.clone();
        if let Some(e) = exps.get_mut(&twin) {
            *e -= 1;
            if *e == 0 {
                exps.remove(&twin);
            }
        }
        Self { exps }
    }

    /// Drops every power of `twin`.
    pub fn without_all(&self, twin: Twin) -> Self {
        let mut exps = self.exps.clone();
        exps.remove(&twin);
        Self { exps }
    }

    /// Value with `X_i = x[i-1]` and `X̄_i = xbar[i-1]`, twins independent.
    pub fn evaluate_twins(&self, x: &[bool], xbar: &[bool]) -> bool {
        self.exps.keys().all(|&t| {
            let i = t.unsigned_abs() as usize - 1;
            if t > 0 {
                x[i]
            } else {
                xbar[i]
            }
        })
    }
}

/// Clamps every exponent to 1.
pub fn multilinearize(m: &Monomial) -> Monomial {
    Monomial {
        exps: m.exps.keys().map(|&t| (t, 1)).collect(),
    }
}

impl Mul for &Monomial {
    type Output = Monomial;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: &Monomial) -> Monomial {
        let mut exps = self.exps.clone();
        for (&t, &e) in &rhs.exps {
            *exps.entry(t).or_insert(0) += e;
        }
        Monomial { exps }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return f.write_str("1");
        }
        for (k, (&t, &e)) in self.exps.iter().enumerate() {
            if k > 0 {
                f.write_str("·")?;
            }
            let name = if t > 0 { "X" } else { "X̄" };
            write!(f, "{name}{}", t.unsigned_abs())?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn var(twin: Twin) -> Self {
        Self::term(int(1), Monomial::var(twin))
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Number of monomials with nonzero coefficient.
    pub fn monomial_size(&self) -> usize {
        self.terms.len()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        Self {
            terms: self.terms.iter().map(|(k, v)| (k * m, v.clone())).collect(),
        }
    }

    /// Multilinearizes every monomial and collects like terms.
    pub fn multilinear(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(multilinearize(m), c.clone());
        }
        out
    }

    /// Value with twins independent.
    pub fn evaluate_twins(&self, x: &[bool], xbar: &[bool]) -> Rational {
        self.terms
            .iter()
            .filter(|(m, _)| m.evaluate_twins(x, xbar))
            .fold(Rational::zero(), |acc, (_, c)| acc + c)
    }

    /// Value at the 0-1 point `X_i = α(i)`, `X̄_i = 1 - α(i)`.
    pub fn evaluate(&self, alpha: &Assignment) -> Rational {
        let x: Vec<bool> = (1..=alpha.num_variables())
            .map(|v| alpha.get(v).unwrap_or(false))
            .collect();
        let xbar: Vec<bool> = x.iter().map(|b| !b).collect();
        self.evaluate_twins(&x, &xbar)
    }

    pub fn max_var(&self) -> u32 {
        self.terms.keys().map(Monomial::max_var).max().unwrap_or(0)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(&int(-1))
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a * b, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{abs}·{m}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SaError {
    #[error("clause {0} is tautological")]
    Tautological(Clause),
    #[error("term {0} has a non-positive coefficient")]
    NonPositiveCoefficient(usize),
    #[error("term {0} refers to hypothesis {1}, but there are {2}")]
    NoSuchHypothesis(usize, usize, usize),
    #[error("term {0} uses variable index 0")]
    ZeroVariable(usize),
    #[error("gadget precondition: {0}")]
    Gadget(String),
    #[error("proof does not check: the terms do not sum to the target")]
    DoesNotCheck,
    #[error("inconsistent translation: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// `T(C) = -∏` of falsifying twins. Defined for tautological clauses too,
/// where the monomial contains `X_i X̄_i`.
pub fn product_encoding(clause: &Clause) -> Polynomial {
    Polynomial::term(int(-1), Monomial::of_clause(clause))
}

/// `T(C)` for a non-tautological clause.
pub fn encode_clause(clause: &Clause) -> Result<Polynomial, SaError> {
    if clause.is_tautology() {
        return Err(SaError::Tautological(clause.clone()));
    }
    Ok(product_encoding(clause))
}

/// Reference polynomials `P_j` a term may multiply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RefPolynomial {
    /// `T(A_i)` for the `i`-th hypothesis, 1-based.
    Hypothesis(usize),
    /// `X_i^2 - X_i`.
    XsqMinusX(u32),
    /// `X_i - X_i^2`.
    XMinusXsq(u32),
    /// `1 - X_i - X̄_i`.
    OneMinusXMinusXbar(u32),
    /// `X_i + X̄_i - 1`.
    XPlusXbarMinusOne(u32),
    One,
}

impl RefPolynomial {
    pub fn variable(self) -> Option<u32> {
        match self {
            RefPolynomial::XsqMinusX(v)
            | RefPolynomial::XMinusXsq(v)
            | RefPolynomial::OneMinusXMinusXbar(v)
            | RefPolynomial::XPlusXbarMinusOne(v) => Some(v),
            RefPolynomial::Hypothesis(_) | RefPolynomial::One => None,
        }
    }

    /// Expansion, with `hypotheses` supplying the clauses for `Hypothesis`.
    pub fn polynomial(self, hypotheses: &[Clause]) -> Option<Polynomial> {
        let p = match self {
            RefPolynomial::Hypothesis(i) => product_encoding(hypotheses.get(i.checked_sub(1)?)?),
            RefPolynomial::XsqMinusX(v) => {
                let x = v as Twin;
                &Polynomial::term(int(1), Monomial::power(x, 2)) - &Polynomial::var(x)
            }
            RefPolynomial::XMinusXsq(v) => {
                let x = v as Twin;
                &Polynomial::var(x) - &Polynomial::term(int(1), Monomial::power(x, 2))
            }
            RefPolynomial::OneMinusXMinusXbar(v) => {
                let x = v as Twin;
                &(&Polynomial::constant(int(1)) - &Polynomial::var(x)) - &Polynomial::var(-x)
            }
            RefPolynomial::XPlusXbarMinusOne(v) => {
                let x = v as Twin;
                &(&Polynomial::var(x) + &Polynomial::var(-x)) - &Polynomial::constant(int(1))
            }
            RefPolynomial::One => Polynomial::constant(int(1)),
        };
        Some(p)
    }
}

impl fmt::Display for RefPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefPolynomial::Hypothesis(i) => write!(f, "T(A{i})"),
            RefPolynomial::XsqMinusX(v) => write!(f, "(X{v}^2 - X{v})"),
            RefPolynomial::XMinusXsq(v) => write!(f, "(X{v} - X{v}^2)"),
            RefPolynomial::OneMinusXMinusXbar(v) => write!(f, "(1 - X{v} - X̄{v})"),
            RefPolynomial::XPlusXbarMinusOne(v) => write!(f, "(X{v} + X̄{v} - 1)"),
            RefPolynomial::One => f.write_str("1"),
        }
    }
}

/// One summand `coefficient · monomial · reference`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SaTerm {
    pub coefficient: Rational,
    pub monomial: Monomial,
    pub reference: RefPolynomial,
}

impl SaTerm {
    pub fn new(coefficient: Rational, monomial: Monomial, reference: RefPolynomial) -> Self {
        Self {
            coefficient,
            monomial,
            reference,
        }
    }

    pub fn expand(&self, hypotheses: &[Clause]) -> Option<Polynomial> {
        Some(
            self.reference
                .polynomial(hypotheses)?
                .mul_monomial(&self.monomial)
                .scale(&self.coefficient),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaProof {
    pub num_variables: u32,
    pub hypotheses: Vec<Clause>,
    pub goal: Clause,
    pub terms: Vec<SaTerm>,
}

/// Outcome of expanding a proof.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaCheck {
    pub valid: bool,
    /// Largest degree of any `Q_j P_j`.
    pub degree: u32,
    /// Sum of the monomial sizes of the `Q_j P_j`.
    pub monomial_size: usize,
    pub sum: Polynomial,
}

/// Expands the terms and compares with `T(goal)` as formal polynomials.
pub fn check_sa(proof: &SaProof) -> Result<SaCheck, SaError> {
    let target = product_encoding(&proof.goal);
    check_sa_target(&proof.terms, &proof.hypotheses, &target)
}

/// As [`check_sa`] against an explicit target polynomial.
pub fn check_sa_target(
    terms: &[SaTerm],
    hypotheses: &[Clause],
    target: &Polynomial,
) -> Result<SaCheck, SaError> {
    let mut sum = Polynomial::zero();
    let mut degree = 0;
    let mut monomial_size = 0;
    for (j, t) in terms.iter().enumerate() {
        if !t.coefficient.is_positive() {
            return Err(SaError::NonPositiveCoefficient(j));
        }
        if t.reference.variable() == Some(0) || t.monomial.contains(0) {
            return Err(SaError::ZeroVariable(j));
        }
        let expanded = t.expand(hypotheses).ok_or(match t.reference {
            RefPolynomial::Hypothesis(i) => SaError::NoSuchHypothesis(j, i, hypotheses.len()),
            _ => SaError::ZeroVariable(j),
        })?;
        degree = degree.max(expanded.degree());
        monomial_size += expanded.monomial_size();
        sum = &sum + &expanded;
    }
    Ok(SaCheck {
        valid: &sum == target,
        degree,
        monomial_size,
        sum,
    })
}

/// The four basic gadget families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gadget {
    /// `T(X ∨ X̄) ≥ 0`.
    Axiom,
    /// `-T(C ∨ X̄) - T(C ∨ X) + T(C) ≥ 0`.
    Cut,
    /// `-T(C) + T(C ∨ X̄) + T(C ∨ X) ≥ 0`.
    Split,
    /// `-T(C) ≥ 0`.
    Weakening,
}

impl Gadget {
    pub const ALL: [Gadget; 4] = [Gadget::Axiom, Gadget::Cut, Gadget::Split, Gadget::Weakening];

    pub fn from_index(kind: u8) -> Option<Self> {
        Self::ALL.get(kind.checked_sub(1)? as usize).copied()
    }

    pub fn index(self) -> u8 {
        match self {
            Gadget::Axiom => 1,
            Gadget::Cut => 2,
            Gadget::Split => 3,
            Gadget::Weakening => 4,
        }
    }
}

fn gadget_preconditions(kind: Gadget, side: &Clause, principal: u32) -> Result<(), SaError> {
    if side.is_tautology() {
        return Err(SaError::Gadget(format!("side clause {side} is tautological")));
    }
    if principal == 0 {
        return Err(SaError::Gadget("principal variable must be >= 1".into()));
    }
    if kind != Gadget::Weakening && side.mentions(principal) {
        return Err(SaError::Gadget(format!(
            "x{principal} occurs in side clause {side}"
        )));
    }
    Ok(())
}

/// Term list proving the gadget's inequality. The axiom family ignores the
/// side clause.
pub fn gadget_terms(kind: Gadget, side: &Clause, principal: u32) -> Result<Vec<SaTerm>, SaError> {
    gadget_preconditions(kind, side, principal)?;
    let x = principal as Twin;
    let m = Monomial::of_clause(side);
    let terms = match kind {
        Gadget::Axiom => vec![
            SaTerm::new(
                int(1),
                Monomial::var(x),
                RefPolynomial::OneMinusXMinusXbar(principal),
            ),
            SaTerm::new(int(1), Monomial::one(), RefPolynomial::XsqMinusX(principal)),
        ],
        Gadget::Cut => vec![SaTerm::new(
            int(1),
            m,
            RefPolynomial::XPlusXbarMinusOne(principal),
        )],
        Gadget::Split => vec![SaTerm::new(
            int(1),
            m,
            RefPolynomial::OneMinusXMinusXbar(principal),
        )],
        Gadget::Weakening => vec![SaTerm::new(int(1), m, RefPolynomial::One)],
    };
    Ok(terms)
}

/// Left-hand side of the gadget's inequality as a polynomial.
pub fn gadget_target(kind: Gadget, side: &Clause, principal: u32) -> Result<Polynomial, SaError> {
    gadget_preconditions(kind, side, principal)?;
    let t = product_encoding;
    let with_pos = side.with(Literal::pos(principal));
    let with_neg = side.with(Literal::neg(principal));
    Ok(match kind {
        Gadget::Axiom => t(&Clause::tautology(principal)),
        Gadget::Cut => &(&t(side) - &t(&with_neg)) - &t(&with_pos),
        Gadget::Split => &(&t(&with_neg) + &t(&with_pos)) - &t(side),
        Gadget::Weakening => -&t(side),
    })
}
