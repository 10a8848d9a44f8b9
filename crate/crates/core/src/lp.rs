//! Exact linear programming over the rationals.
//!
//! Dense two-phase simplex with Bland's rule, which rules out cycling. All
//! variables are nonnegative. There is no tolerance anywhere: a system is
//! feasible exactly when phase one reaches zero.

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal {
        value: Rational,
        point: Vec<Rational>,
    },
}

impl LpOutcome {
    pub fn optimal(self) -> Option<(Rational, Vec<Rational>)> {
        match self {
            LpOutcome::Optimal { value, point } => Some((value, point)),
            _ => None,
        }
    }
}

/// A system of linear constraints over nonnegative variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    num_vars: usize,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
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

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars, "coefficient count mismatch");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn equal(&mut self, coeffs: Vec<Rational>, rhs: Rational) {
        self.add(coeffs, Relation::Eq, rhs);
    }

    /// Returns a feasible point, or `None` if the system has no solution.
    pub fn feasible(&self) -> Option<Vec<Rational>> {
        let mut t = Tableau::build(self);
        if !t.phase_one() {
            return None;
        }
        Some(t.point(self.num_vars))
    }

    pub fn optimize(&self, objective: &[Rational], sense: Sense) -> LpOutcome {
        assert_eq!(objective.len(), self.num_vars, "objective length mismatch");
        let mut t = Tableau::build(self);
        if !t.phase_one() {
            return LpOutcome::Infeasible;
        }
        let cost: Vec<Rational> = match sense {
            Sense::Minimize => objective.to_vec(),
            Sense::Maximize => objective.iter().map(|c| -c).collect(),
        };
        if !t.phase_two(&cost) {
            return LpOutcome::Unbounded;
        }
        let point = t.point(self.num_vars);
        let value = objective
            .iter()
            .zip(&point)
            .map(|(c, x)| c * x)
            .fold(Rational::zero(), |a, b| a + b);
        LpOutcome::Optimal { value, point }
    }
}

/// Feasibility of `lp` with a witness point.
pub fn lp_feasible(lp: &LinearProgram) -> Option<Vec<Rational>> {
    lp.feasible()
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    // objective row: reduced costs, last entry is minus the objective value
    obj: Vec<Rational>,
    ncols: usize,
    first_artificial: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars;
        let mut normalized: Vec<(Vec<Rational>, Relation, Rational)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let flipped = match c.relation {
                        Relation::Eq => Relation::Eq,
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                    };
                    (c.coeffs.iter().map(|a| -a).collect(), flipped, -&c.rhs)
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();

        let slacks = normalized
            .iter()
            .filter(|(_, r, _)| *r != Relation::Eq)
            .count();
        let artificials = normalized
            .iter()
            .filter(|(_, r, _)| *r != Relation::Le)
            .count();
        let ncols = n + slacks + artificials;
        let first_artificial = n + slacks;

        let m = normalized.len();
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next_slack = n;
        let mut next_art = first_artificial;
        for (coeffs, rel, rhs) in normalized.drain(..) {
            let mut row = coeffs;
            row.resize(ncols + 1, Rational::zero());
            match rel {
                Relation::Le => {
                    row[next_slack] = Rational::from_integer(1.into());
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = Rational::from_integer((-1).into());
                    next_slack += 1;
                    row[next_art] = Rational::from_integer(1.into());
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = Rational::from_integer(1.into());
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            row[ncols] = rhs;
            rows.push(row);
        }

        Self {
            rows,
            basis,
            obj: vec![Rational::zero(); ncols + 1],
            ncols,
            first_artificial,
        }
    }

    fn set_costs(&mut self, cost: &dyn Fn(usize) -> Rational) {
        let mut obj: Vec<Rational> = (0..self.ncols).map(cost).collect();
        obj.push(Rational::zero());
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = cost(b);
            if cb.is_zero() {
                continue;
            }
            for (o, v) in obj.iter_mut().zip(row) {
                if !v.is_zero() {
                    *o -= &cb * v;
                }
            }
        }
        self.obj = obj;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v /= &p;
            }
        }
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut Vec<Rational>| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.basis[r] = c;
    }

    /// Minimises over columns `< allowed`. Returns false when unbounded.
    fn run(&mut self, allowed: usize) -> bool {
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.obj[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[self.ncols] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }

    fn phase_one(&mut self) -> bool {
        let fa = self.first_artificial;
        self.set_costs(&|j| {
            if j >= fa {
                Rational::from_integer(1.into())
            } else {
                Rational::zero()
            }
        });
        self.run(self.ncols);
        if !self.obj[self.ncols].is_zero() {
            return false;
        }
        // drive remaining (zero-level) artificials out of the basis
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] >= fa {
                match (0..fa).find(|&j| !self.rows[r][j].is_zero()) {
                    Some(j) => self.pivot(r, j),
                    None => {
                        // redundant row
                        self.rows.remove(r);
                        self.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        true
    }

    fn phase_two(&mut self, cost: &[Rational]) -> bool {
        let n = cost.len();
        self.set_costs(&|j| {
            if j < n {
                cost[j].clone()
            } else {
                Rational::zero()
            }
        });
        self.run(self.first_artificial)
    }

    fn point(&self, n: usize) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); n];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < n {
                x[b] = row[self.ncols].clone();
            }
        }
        x
    }
}
