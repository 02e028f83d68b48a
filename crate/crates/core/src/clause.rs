//! Literals, clauses, CNF formulas and truth assignments.
//!
//! Clauses are kept in a canonical form: literals sorted by variable and then
//! polarity (positive first), with duplicates removed. Complementary pairs are
//! retained, so elementary tautologies such as `x ∨ ¬x` are ordinary clauses
//! that can be queried with [`Clause::is_tautology`].

use std::fmt;

use thiserror::Error;

/// Largest variable count the brute-force oracles will enumerate.
pub const ORACLE_VARIABLE_LIMIT: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("malformed literal {0}: variable indices start at 1")]
    MalformedLiteral(i64),
    #[error("assignment does not cover variable {0}")]
    IncompleteAssignment(u32),
    #[error("literal on variable {var} exceeds the declared {num_variables} variables")]
    VariableOutOfRange { var: u32, num_variables: u32 },
    #[error("{0} variables is over the enumeration limit of {ORACLE_VARIABLE_LIMIT}")]
    TooLarge(u32),
}

/// A variable or its negation. Variables are dense positive integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    var: u32,
    negated: bool,
}

impl Literal {
    pub fn new(var: u32, positive: bool) -> Result<Self, LogicError> {
        if var == 0 {
            return Err(LogicError::MalformedLiteral(0));
        }
        Ok(Literal {
            var,
            negated: !positive,
        })
    }

    /// Positive literal. Panics on variable 0.
    pub fn pos(var: u32) -> Self {
        Self::new(var, true).expect("variable index must be >= 1")
    }

    /// Negative literal. Panics on variable 0.
    pub fn neg(var: u32) -> Self {
        Self::new(var, false).expect("variable index must be >= 1")
    }

    /// Parses a signed DIMACS-style integer (`3` is `x3`, `-3` is `¬x3`).
    pub fn from_dimacs(value: i64) -> Result<Self, LogicError> {
        if value == 0 || value.unsigned_abs() > u32::MAX as u64 {
            return Err(LogicError::MalformedLiteral(value));
        }
        Self::new(value.unsigned_abs() as u32, value > 0)
    }

    pub fn to_dimacs(self) -> i64 {
        if self.negated {
            -(self.var as i64)
        } else {
            self.var as i64
        }
    }

    pub fn var(self) -> u32 {
        self.var
    }

    pub fn is_positive(self) -> bool {
        !self.negated
    }

    pub fn complement(self) -> Self {
        Literal {
            var: self.var,
            negated: !self.negated,
        }
    }

    pub fn evaluate(self, alpha: &Assignment) -> Result<bool, LogicError> {
        alpha
            .get(self.var)
            .map(|v| v != self.negated)
            .ok_or(LogicError::IncompleteAssignment(self.var))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "¬x{}", self.var)
        } else {
            write!(f, "x{}", self.var)
        }
    }
}

/// A disjunction of literals in canonical order. The empty clause is the
/// always-false clause `0`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    lits: Vec<Literal>,
}

/// Sorts and deduplicates literals. Complementary pairs are kept.
pub fn normalize_clause<I: IntoIterator<Item = Literal>>(literals: I) -> Clause {
    let mut lits: Vec<Literal> = literals.into_iter().collect();
    lits.sort_unstable();
    lits.dedup();
    Clause { lits }
}

impl Clause {
    pub fn empty() -> Self {
        Clause::default()
    }

    pub fn from_dimacs(values: &[i64]) -> Result<Self, LogicError> {
        let lits = values
            .iter()
            .map(|&v| Literal::from_dimacs(v))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(normalize_clause(lits))
    }

    /// Elementary tautology `x ∨ ¬x`.
    pub fn tautology(var: u32) -> Self {
        normalize_clause([Literal::pos(var), Literal::neg(var)])
    }

    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    pub fn width(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.lits.binary_search(&lit).is_ok()
    }

    pub fn mentions(&self, var: u32) -> bool {
        self.contains(Literal::pos(var)) || self.contains(Literal::neg(var))
    }

    pub fn is_tautology(&self) -> bool {
        self.lits
            .windows(2)
            .any(|w| w[0].var == w[1].var && w[0].negated != w[1].negated)
    }

    pub fn max_var(&self) -> u32 {
        self.lits.last().map_or(0, |l| l.var)
    }

    /// Variables in increasing order, each once.
    pub fn vars(&self) -> Vec<u32> {
        let mut vars: Vec<u32> = self.lits.iter().map(|l| l.var).collect();
        vars.dedup();
        vars
    }

    /// `self ∨ lit`, normalized.
    pub fn with(&self, lit: Literal) -> Clause {
        match self.lits.binary_search(&lit) {
            Ok(_) => self.clone(),
            Err(pos) => {
                let mut lits = self.lits.clone();
                lits.insert(pos, lit);
                Clause { lits }
            }
        }
    }

    pub fn without(&self, lit: Literal) -> Clause {
        Clause {
            lits: self.lits.iter().copied().filter(|&l| l != lit).collect(),
        }
    }

    pub fn union(&self, other: &Clause) -> Clause {
        normalize_clause(self.lits.iter().chain(other.lits.iter()).copied())
    }

    /// True iff every literal of `self` occurs in `other`.
    pub fn subsumes(&self, other: &Clause) -> bool {
        self.lits.iter().all(|&l| other.contains(l))
    }

    pub fn evaluate(&self, alpha: &Assignment) -> Result<bool, LogicError> {
        let mut sat = false;
        for &lit in &self.lits {
            sat |= lit.evaluate(alpha)?;
        }
        Ok(sat)
    }

    pub fn to_dimacs(&self) -> Vec<i64> {
        self.lits.iter().map(|l| l.to_dimacs()).collect()
    }

    /// Bit masks `(positive, negative)` over variables `1..=32`, bit `v-1`.
    pub(crate) fn masks(&self) -> (u32, u32) {
        let mut pos = 0u32;
        let mut neg = 0u32;
        for l in &self.lits {
            let bit = 1u32 << (l.var - 1);
            if l.negated {
                neg |= bit;
            } else {
                pos |= bit;
            }
        }
        (pos, neg)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lits.is_empty() {
            return write!(f, "0");
        }
        for (i, lit) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " ∨ ")?;
            }
            write!(f, "{lit}")?;
        }
        Ok(())
    }
}

impl FromIterator<Literal> for Clause {
    fn from_iter<T: IntoIterator<Item = Literal>>(iter: T) -> Self {
        normalize_clause(iter)
    }
}

/// A CNF formula over variables `1..=num_variables`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CnfFormula {
    num_variables: u32,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_variables: u32, clauses: Vec<Clause>) -> Result<Self, LogicError> {
        for c in &clauses {
            if c.max_var() > num_variables {
                return Err(LogicError::VariableOutOfRange {
                    var: c.max_var(),
                    num_variables,
                });
            }
        }
        Ok(CnfFormula {
            num_variables,
            clauses,
        })
    }

    /// Builds a formula sized to the largest variable mentioned.
    pub fn from_clauses(clauses: Vec<Clause>) -> Self {
        let num_variables = clauses.iter().map(Clause::max_var).max().unwrap_or(0);
        CnfFormula {
            num_variables,
            clauses,
        }
    }

    pub fn num_variables(&self) -> u32 {
        self.num_variables
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn max_width(&self) -> usize {
        self.clauses.iter().map(Clause::width).max().unwrap_or(0)
    }

    pub fn evaluate(&self, alpha: &Assignment) -> Result<bool, LogicError> {
        for c in &self.clauses {
            if !c.evaluate(alpha)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A total 0/1 assignment to variables `1..=len`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    /// Variable `v` takes bit `v-1` of `bits`.
    pub fn from_bits(num_variables: u32, bits: u64) -> Self {
        Assignment {
            values: (0..num_variables).map(|i| bits >> i & 1 == 1).collect(),
        }
    }

    pub fn num_variables(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn get(&self, var: u32) -> Option<bool> {
        if var == 0 {
            return None;
        }
        self.values.get(var as usize - 1).copied()
    }

    pub fn set(&mut self, var: u32, value: bool) {
        self.values[var as usize - 1] = value;
    }
}

/// Decides `hypotheses ⊨ goal` by enumerating every assignment.
pub fn implies_oracle(hypotheses: &CnfFormula, goal: &Clause) -> Result<bool, LogicError> {
    let n = hypotheses.num_variables().max(goal.max_var());
    if n > ORACLE_VARIABLE_LIMIT {
        return Err(LogicError::TooLarge(n));
    }
    let masks: Vec<(u32, u32)> = hypotheses.clauses().iter().map(Clause::masks).collect();
    let (goal_pos, goal_neg) = goal.masks();
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let satisfies = |bits: u32, (pos, neg): (u32, u32)| bits & pos != 0 || !bits & all & neg != 0;
    for bits in 0..=all {
        if masks.iter().all(|&m| satisfies(bits, m)) && !satisfies(bits, (goal_pos, goal_neg)) {
            return Ok(false);
        }
        if bits == all {
            break;
        }
    }
    Ok(true)
}
