//! Exact-rational linear feasibility.
//!
//! Programs are systems of `Σ a_j·x_j ≥ b` rows over free variables. The solver
//! is a phase-1 primal simplex on a sparse-row tableau with Bland's pivoting
//! rule; every quantity is a [`Rational`], nothing is rounded. When the system
//! is infeasible the final reduced costs are read back as Farkas multipliers.
//!
//! Rows mentioning a single variable with a positive coefficient are treated
//! as lower bounds and folded into a shift of that variable, so programs whose
//! variables are all bounded below start the simplex at the bound vector. For
//! flow programs this start is usually already feasible.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub type Rational = num_rational::BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// One `coeffs · x ≥ rhs` row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: BTreeMap<usize, Rational>,
    pub rhs: Rational,
}

impl Constraint {
    fn lhs(&self, point: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .fold(Rational::zero(), |acc, (&j, a)| acc + a * &point[j])
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearProgram {
    num_vars: usize,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Adds `Σ coeff·x_var ≥ rhs` and returns its row index. Repeated
    /// variables are summed and zero coefficients dropped.
    pub fn add_ge<I>(&mut self, terms: I, rhs: Rational) -> usize
    where
        I: IntoIterator<Item = (usize, Rational)>,
    {
        let mut coeffs: BTreeMap<usize, Rational> = BTreeMap::new();
        for (var, a) in terms {
            assert!(var < self.num_vars, "variable {var} out of range");
            *coeffs.entry(var).or_insert_with(Rational::zero) += a;
        }
        coeffs.retain(|_, a| !a.is_zero());
        self.constraints.push(Constraint { coeffs, rhs });
        self.constraints.len() - 1
    }

    /// Exact check that `point` satisfies every row.
    pub fn is_satisfied_by(&self, point: &[Rational]) -> bool {
        point.len() == self.num_vars && self.constraints.iter().all(|c| c.lhs(point) >= c.rhs)
    }

    /// Exact check of a Farkas certificate: nonnegative multipliers whose
    /// combination cancels every variable and leaves `0 ≥ positive`.
    pub fn is_farkas_certificate(&self, multipliers: &[Rational]) -> bool {
        if multipliers.len() != self.constraints.len() || multipliers.iter().any(|m| m.is_negative()) {
            return false;
        }
        let mut combined = vec![Rational::zero(); self.num_vars];
        let mut rhs = Rational::zero();
        for (c, m) in self.constraints.iter().zip(multipliers) {
            if m.is_zero() {
                continue;
            }
            for (&j, a) in &c.coeffs {
                combined[j] += m * a;
            }
            rhs += m * &c.rhs;
        }
        combined.iter().all(Zero::is_zero) && rhs.is_positive()
    }
}

/// Result of a feasibility solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Feasible(Vec<Rational>),
    /// Farkas multipliers, one per constraint row.
    Infeasible(Vec<Rational>),
}

/// A point satisfying every row exactly, or `None`.
pub fn feasible(lp: &LinearProgram) -> Option<Vec<Rational>> {
    match solve(lp) {
        Outcome::Feasible(x) => Some(x),
        Outcome::Infeasible(_) => None,
    }
}

/// Nonnegative multipliers proving infeasibility, or `None` if feasible.
pub fn farkas_certificate(lp: &LinearProgram) -> Option<Vec<Rational>> {
    match solve(lp) {
        Outcome::Feasible(_) => None,
        Outcome::Infeasible(m) => Some(m),
    }
}

pub fn solve(lp: &LinearProgram) -> Outcome {
    let outcome = Tableau::build(lp).map_or_else(Outcome::Infeasible, |t| t.run(lp));
    debug_assert!(match &outcome {
        Outcome::Feasible(x) => lp.is_satisfied_by(x),
        Outcome::Infeasible(m) => lp.is_farkas_certificate(m),
    });
    outcome
}

/// How an original variable maps onto tableau columns.
#[derive(Debug, Clone)]
enum VarMap {
    /// `x = lower + col`, with the row index of the tightest bound row.
    Shifted {
        col: usize,
        lower: Rational,
        row: usize,
        coeff: Rational,
    },
    /// `x = plus - minus`.
    Free { plus: usize, minus: usize },
}

type SparseRow = Vec<(usize, Rational)>;

struct Tableau {
    vars: Vec<VarMap>,
    /// Original row index of each tableau row.
    row_origin: Vec<usize>,
    /// Slack column of each tableau row.
    slack: Vec<usize>,
    rows: Vec<SparseRow>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Phase-1 reduced costs, one per column.
    cost: Vec<Rational>,
    objective: Rational,
    num_cols: usize,
}

fn entry(row: &SparseRow, col: usize) -> Option<&Rational> {
    row.binary_search_by_key(&col, |(c, _)| *c)
        .ok()
        .map(|i| &row[i].1)
}

/// `row - factor * pivot`, both sorted by column.
fn axpy(row: &SparseRow, factor: &Rational, pivot: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot.len() {
        let take_row = j == pivot.len() || (i < row.len() && row[i].0 < pivot[j].0);
        let take_pivot = i == row.len() || (j < pivot.len() && pivot[j].0 < row[i].0);
        if take_row {
            out.push(row[i].clone());
            i += 1;
        } else if take_pivot {
            out.push((pivot[j].0, -(factor * &pivot[j].1)));
            j += 1;
        } else {
            let v = &row[i].1 - factor * &pivot[j].1;
            if !v.is_zero() {
                out.push((row[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

impl Tableau {
    /// Builds the phase-1 tableau, or returns Farkas multipliers directly when
    /// some row reads `0 ≥ b` with `b > 0`.
    fn build(lp: &LinearProgram) -> Result<Tableau, Vec<Rational>> {
        let m = lp.constraints.len();
        // Tightest lower bound per variable from single-variable rows.
        let mut bound: Vec<Option<(Rational, usize, Rational)>> = vec![None; lp.num_vars];
        let mut is_bound_row = vec![false; m];
        for (i, c) in lp.constraints.iter().enumerate() {
            if c.coeffs.is_empty() {
                if c.rhs.is_positive() {
                    let mut cert = vec![Rational::zero(); m];
                    cert[i] = Rational::one();
                    return Err(cert);
                }
                is_bound_row[i] = true;
                continue;
            }
            if c.coeffs.len() == 1 {
                let (&j, a) = c.coeffs.iter().next().unwrap();
                if a.is_positive() {
                    is_bound_row[i] = true;
                    let lower = &c.rhs / a;
                    if bound[j].as_ref().is_none_or(|(l, _, _)| lower > *l) {
                        bound[j] = Some((lower, i, a.clone()));
                    }
                }
            }
        }
        let mut num_cols = 0;
        let vars: Vec<VarMap> = bound
            .into_iter()
            .map(|b| match b {
                Some((lower, row, coeff)) => {
                    num_cols += 1;
                    VarMap::Shifted {
                        col: num_cols - 1,
                        lower,
                        row,
                        coeff,
                    }
                }
                None => {
                    num_cols += 2;
                    VarMap::Free {
                        plus: num_cols - 2,
                        minus: num_cols - 1,
                    }
                }
            })
            .collect();

        let general: Vec<usize> = (0..m).filter(|&i| !is_bound_row[i]).collect();
        let mut slack = Vec::with_capacity(general.len());
        for _ in &general {
            slack.push(num_cols);
            num_cols += 1;
        }
        let mut rows = Vec::with_capacity(general.len());
        let mut rhs = Vec::with_capacity(general.len());
        let mut basis = Vec::with_capacity(general.len());
        let mut needs_artificial = Vec::new();
        for (r, &i) in general.iter().enumerate() {
            let c = &lp.constraints[i];
            let mut b = c.rhs.clone();
            let mut row: SparseRow = Vec::with_capacity(c.coeffs.len() * 2 + 2);
            for (&j, a) in &c.coeffs {
                match &vars[j] {
                    VarMap::Shifted { col, lower, .. } => {
                        b -= a * lower;
                        row.push((*col, a.clone()));
                    }
                    VarMap::Free { plus, minus } => {
                        row.push((*plus, a.clone()));
                        row.push((*minus, -a.clone()));
                    }
                }
            }
            row.push((slack[r], -Rational::one()));
            if b.is_positive() {
                needs_artificial.push(r);
            } else {
                for (_, v) in row.iter_mut() {
                    *v = -v.clone();
                }
                b = -b;
            }
            row.sort_by_key(|(col, _)| *col);
            rows.push(row);
            rhs.push(b);
            basis.push(slack[r]);
        }
        let mut cost = Vec::new();
        let mut objective = Rational::zero();
        let first_artificial = num_cols;
        num_cols += needs_artificial.len();
        cost.resize(num_cols, Rational::zero());
        for (k, &r) in needs_artificial.iter().enumerate() {
            let art = first_artificial + k;
            rows[r].push((art, Rational::one()));
            basis[r] = art;
            cost[art] = Rational::one();
            objective += &rhs[r];
        }
        // Reduced costs d = c - c_B·B⁻¹A with the artificial basis.
        for &r in &needs_artificial {
            for (col, v) in &rows[r] {
                cost[*col] -= v;
            }
        }
        Ok(Tableau {
            vars,
            row_origin: general,
            slack,
            rows,
            rhs,
            basis,
            cost,
            objective,
            num_cols,
        })
    }

    fn run(mut self, lp: &LinearProgram) -> Outcome {
        while self.objective.is_positive() {
            // Bland: lowest-index improving column.
            let Some(enter) = (0..self.num_cols).find(|&j| self.cost[j].is_negative()) else {
                break;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                if let Some(a) = entry(&self.rows[r], enter) {
                    if a.is_positive() {
                        let ratio = &self.rhs[r] / a;
                        let better = match &leave {
                            None => true,
                            Some((best, q)) => {
                                ratio < *q || (ratio == *q && self.basis[r] < self.basis[*best])
                            }
                        };
                        if better {
                            leave = Some((r, ratio));
                        }
                    }
                }
            }
            // Phase 1 is bounded below by zero, so a leaving row exists.
            let (r, _) = leave.expect("phase-1 objective is bounded");
            self.pivot(r, enter);
        }
        if self.objective.is_zero() {
            Outcome::Feasible(self.point())
        } else {
            Outcome::Infeasible(self.farkas(lp))
        }
    }

    fn pivot(&mut self, r: usize, enter: usize) {
        let a = entry(&self.rows[r], enter).unwrap().clone();
        if !a.is_one() {
            for (_, v) in self.rows[r].iter_mut() {
                *v = &*v / &a;
            }
            self.rhs[r] = &self.rhs[r] / &a;
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            if let Some(f) = entry(&self.rows[i], enter).cloned() {
                self.rows[i] = axpy(&self.rows[i], &f, &pivot_row);
                self.rhs[i] = &self.rhs[i] - &f * &pivot_rhs;
            }
        }
        let d = self.cost[enter].clone();
        if !d.is_zero() {
            for (col, v) in &pivot_row {
                self.cost[*col] -= &d * v;
            }
            self.objective += &d * &pivot_rhs;
        }
        self.rows[r] = pivot_row;
        self.basis[r] = enter;
    }

    fn column_values(&self) -> Vec<Rational> {
        let mut values = vec![Rational::zero(); self.num_cols];
        for (r, &col) in self.basis.iter().enumerate() {
            values[col] = self.rhs[r].clone();
        }
        values
    }

    fn point(&self) -> Vec<Rational> {
        let values = self.column_values();
        self.vars
            .iter()
            .map(|v| match v {
                VarMap::Shifted { col, lower, .. } => lower + &values[*col],
                VarMap::Free { plus, minus } => &values[*plus] - &values[*minus],
            })
            .collect()
    }

    /// Row multipliers are the reduced costs of the slack columns; a bound
    /// row's multiplier is the shifted column's reduced cost over its
    /// coefficient.
    fn farkas(&self, lp: &LinearProgram) -> Vec<Rational> {
        let mut cert = vec![Rational::zero(); lp.constraints.len()];
        for (r, &origin) in self.row_origin.iter().enumerate() {
            cert[origin] = self.cost[self.slack[r]].clone();
        }
        for v in &self.vars {
            if let VarMap::Shifted { col, row, coeff, .. } = v {
                cert[*row] = &self.cost[*col] / coeff;
            }
        }
        cert
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(num_vars: usize, rows: &[(&[(usize, i64)], i64)]) -> LinearProgram {
        let mut p = LinearProgram::new(num_vars);
        for (terms, rhs) in rows {
            p.add_ge(terms.iter().map(|&(j, a)| (j, int(a))), int(*rhs));
        }
        p
    }

    #[test]
    fn box_is_feasible_at_basic_point() {
        let p = lp(1, &[(&[(0, 1)], 1), (&[(0, -1)], -2)]);
        assert_eq!(feasible(&p), Some(vec![int(1)]));
        assert_eq!(farkas_certificate(&p), None);
    }

    #[test]
    fn contradictory_bounds_give_unit_multipliers() {
        let p = lp(1, &[(&[(0, 1)], 1), (&[(0, -1)], 0)]);
        assert_eq!(feasible(&p), None);
        let cert = farkas_certificate(&p).unwrap();
        assert!(p.is_farkas_certificate(&cert));
        assert_eq!(cert, vec![int(1), int(1)]);
    }

    #[test]
    fn empty_row_with_positive_rhs() {
        let p = lp(2, &[(&[(0, 1)], 0), (&[], 3)]);
        let cert = farkas_certificate(&p).unwrap();
        assert!(p.is_farkas_certificate(&cert));
    }

    #[test]
    fn free_variables_solve_equalities() {
        // x + y = 3, x - y = 1 as paired inequalities.
        let p = lp(
            2,
            &[
                (&[(0, 1), (1, 1)], 3),
                (&[(0, -1), (1, -1)], -3),
                (&[(0, 1), (1, -1)], 1),
                (&[(0, -1), (1, 1)], -1),
            ],
        );
        assert_eq!(feasible(&p), Some(vec![int(2), int(1)]));
    }

    #[test]
    fn fractional_vertex() {
        // 2x ≥ 1, -2x ≥ -1 pins x = 1/2 with a non-unit bound coefficient.
        let p = lp(1, &[(&[(0, 2)], 1), (&[(0, -2)], -1)]);
        assert_eq!(feasible(&p), Some(vec![ratio(1, 2)]));
        let q = lp(1, &[(&[(0, 2)], 1), (&[(0, -3)], -1)]);
        let cert = farkas_certificate(&q).unwrap();
        assert!(q.is_farkas_certificate(&cert));
    }

    #[test]
    fn infeasible_cycle_of_differences() {
        // x - y ≥ 1, y - z ≥ 1, z - x ≥ 1.
        let p = lp(
            3,
            &[
                (&[(0, 1), (1, -1)], 1),
                (&[(1, 1), (2, -1)], 1),
                (&[(2, 1), (0, -1)], 1),
            ],
        );
        let cert = farkas_certificate(&p).unwrap();
        assert!(p.is_farkas_certificate(&cert));
        assert!(cert.iter().all(|m| m == &cert[0]));
    }
}
