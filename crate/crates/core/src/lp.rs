//! Exact feasibility for small linear and integer programs.
//!
//! All variables are non-negative. Continuous feasibility uses a dense
//! phase-one simplex over [`Rational`] with Bland's rule, so it always
//! terminates and never rounds. Integer feasibility is depth-first branch and
//! bound on top of it.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn holds(&self, x: &[Rational]) -> bool {
        let lhs: Rational = self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

/// `{x >= 0 : rows}` over a fixed number of variables.
#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    vars: usize,
    constraints: Vec<Constraint>,
}

impl LinearSystem {
    pub fn new(vars: usize) -> Self {
        LinearSystem {
            vars,
            constraints: Vec::new(),
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn push(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.vars, "constraint width");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn le(&mut self, coeffs: Vec<Rational>, rhs: Rational) {
        self.push(coeffs, Relation::Le, rhs);
    }

    pub fn eq(&mut self, coeffs: Vec<Rational>, rhs: Rational) {
        self.push(coeffs, Relation::Eq, rhs);
    }

    pub fn ge(&mut self, coeffs: Vec<Rational>, rhs: Rational) {
        self.push(coeffs, Relation::Ge, rhs);
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        x.len() == self.vars && x.iter().all(|v| !v.is_negative()) && self.constraints.iter().all(|c| c.holds(x))
    }

    /// A vertex of the feasible region, or `None` when it is empty.
    pub fn feasible_point(&self) -> Option<Vec<Rational>> {
        Tableau::phase_one(self).solve()
    }

    /// An integral feasible point, exploring at most `node_limit` subproblems.
    pub fn integer_point(&self, node_limit: usize) -> Result<Option<Vec<BigInt>>> {
        let mut stack = vec![self.clone()];
        let mut nodes = 0usize;
        while let Some(node) = stack.pop() {
            nodes += 1;
            if nodes > node_limit {
                return Err(Error::Resource {
                    what: "branch-and-bound nodes",
                    required: nodes as u128,
                    cap: node_limit as u128,
                });
            }
            let Some(x) = node.feasible_point() else {
                continue;
            };
            let Some(j) = x.iter().position(|v| !v.is_integer()) else {
                return Ok(Some(x.into_iter().map(|v| v.to_integer()).collect()));
            };
            let mut unit = vec![Rational::zero(); self.vars];
            unit[j] = Rational::one();
            let mut up = node.clone();
            up.ge(unit.clone(), x[j].ceil());
            let mut down = node;
            down.le(unit, x[j].floor());
            stack.push(up);
            stack.push(down);
        }
        Ok(None)
    }
}

const NONE: usize = usize::MAX;

struct Tableau {
    /// `rows x (cols + 1)`; the last column is the right-hand side.
    rows: Vec<Vec<Rational>>,
    /// Reduced phase-one costs, last entry is minus the objective value.
    cost: Vec<Rational>,
    basis: Vec<usize>,
    structural: usize,
}

impl Tableau {
    fn phase_one(system: &LinearSystem) -> Tableau {
        let k = system.vars;
        let normalized: Vec<(Vec<Rational>, Relation, Rational)> = system
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|a| -a).collect(), flipped, -&c.rhs)
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();

        let slacks = normalized.iter().filter(|r| r.1 != Relation::Eq).count();
        let artificials = normalized.iter().filter(|r| r.1 != Relation::Le).count();
        let cols = k + slacks + artificials;
        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let mut cost = vec![Rational::zero(); cols + 1];
        let (mut next_slack, mut next_art) = (k, k + slacks);
        for (coeffs, relation, rhs) in normalized {
            let mut row = vec![Rational::zero(); cols + 1];
            row[..k].clone_from_slice(&coeffs);
            row[cols] = rhs;
            match relation {
                Relation::Le => {
                    row[next_slack] = Rational::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge | Relation::Eq => {
                    if relation == Relation::Ge {
                        row[next_slack] = -Rational::one();
                        next_slack += 1;
                    }
                    row[next_art] = Rational::one();
                    basis.push(next_art);
                    next_art += 1;
                    // Price out the artificial: cost_j -= row_j for non-basic columns.
                    for (c, a) in cost.iter_mut().zip(&row) {
                        *c -= a;
                    }
                    cost[basis[basis.len() - 1]] = Rational::zero();
                }
            }
            rows.push(row);
        }
        Tableau {
            rows,
            cost,
            basis,
            structural: k,
        }
    }

    fn solve(mut self) -> Option<Vec<Rational>> {
        let cols = self.cost.len() - 1;
        while let Some(enter) = (0..cols).find(|&j| self.cost[j].is_negative()) {
            let mut leave = NONE;
            let mut best: Option<Rational> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[cols] / &row[enter];
                let better = match &best {
                    None => true,
                    Some(b) => ratio < *b || (ratio == *b && self.basis[r] < self.basis[leave]),
                };
                if better {
                    best = Some(ratio);
                    leave = r;
                }
            }
            // Phase one is bounded below by zero, so an entering column always has a pivot row.
            debug_assert_ne!(leave, NONE);
            if leave == NONE {
                return None;
            }
            self.pivot(leave, enter);
        }
        // -cost[cols] is the sum of the artificials.
        if !self.cost[cols].is_zero() {
            return None;
        }
        let mut x = vec![Rational::zero(); self.structural];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.structural {
                x[b] = self.rows[r][cols].clone();
            }
        }
        Some(x)
    }

    fn pivot(&mut self, leave: usize, enter: usize) {
        let inv = Rational::one() / &self.rows[leave][enter];
        for v in self.rows[leave].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = self.rows[leave].clone();
        let eliminate = |target: &mut Vec<Rational>| {
            let factor = target[enter].clone();
            if factor.is_zero() {
                return;
            }
            for (t, p) in target.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *t -= &factor * p;
                }
            }
        };
        for (r, row) in self.rows.iter_mut().enumerate() {
            if r != leave {
                eliminate(row);
            }
        }
        eliminate(&mut self.cost);
        self.basis[leave] = enter;
    }
}
