//! Dense two-phase simplex with Bland's rule, generic over [`Scalar`].
//!
//! Solves `min cᵀx` subject to `aᵢᵀx (≤ | ≥ | =) bᵢ` and `x ≥ 0`, and reports
//! the dual vector read off the final reduced costs.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint<S> {
    pub coeffs: Vec<S>,
    pub relation: Relation,
    pub rhs: S,
}

/// Minimization problem over nonnegative variables.
#[derive(Clone, Debug)]
pub struct LinearProgram<S> {
    pub objective: Vec<S>,
    pub constraints: Vec<Constraint<S>>,
}

#[derive(Clone, Debug)]
pub struct LpSolution<S> {
    pub x: Vec<S>,
    pub objective: S,
    /// One multiplier per constraint; `bᵀy` equals the optimum.
    pub duals: Vec<S>,
    /// `|cᵀx − bᵀy|`.
    pub duality_gap: S,
    pub pivots: usize,
}

impl<S: Scalar> LinearProgram<S> {
    pub fn new(n_vars: usize) -> Self {
        LinearProgram { objective: vec![S::zero(); n_vars], constraints: Vec::new() }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn push(&mut self, coeffs: Vec<S>, relation: Relation, rhs: S) {
        assert_eq!(coeffs.len(), self.n_vars(), "constraint width must match the variable count");
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn solve(&self) -> Result<LpSolution<S>> {
        Tableau::build(self).run()
    }
}

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    basis: Vec<usize>,
    n_orig: usize,
    n_cols: usize,
    artificial_start: usize,
    /// Column that formed the initial basis for each row.
    initial: Vec<usize>,
    flipped: Vec<bool>,
    cost: Vec<S>,
    pivots: usize,
    tol: S,
    objective: Vec<S>,
    rhs: Vec<S>,
}

impl<S: Scalar> Tableau<S> {
    fn build(lp: &LinearProgram<S>) -> Self {
        let n = lp.n_vars();
        let m = lp.constraints.len();
        let mut flipped = Vec::with_capacity(m);
        let mut norm = Vec::with_capacity(m);
        for c in &lp.constraints {
            if c.rhs < S::zero() {
                let rel = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                let coeffs = c.coeffs.iter().map(|a| S::zero() - a.clone()).collect::<Vec<_>>();
                norm.push((coeffs, rel, S::zero() - c.rhs.clone()));
                flipped.push(true);
            } else {
                norm.push((c.coeffs.clone(), c.relation, c.rhs.clone()));
                flipped.push(false);
            }
        }
        let n_slack = norm.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
        let n_art = norm.iter().filter(|(_, r, _)| *r != Relation::Le).count();
        let artificial_start = n + n_slack;
        let n_cols = artificial_start + n_art;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut next_slack, mut next_art) = (n, artificial_start);
        for (coeffs, rel, rhs) in norm {
            let mut row = coeffs;
            row.resize(n_cols + 1, S::zero());
            match rel {
                Relation::Le => {
                    row[next_slack] = S::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = S::zero() - S::one();
                    next_slack += 1;
                    row[next_art] = S::one();
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = S::one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            row[n_cols] = rhs;
            rows.push(row);
        }
        let tol = S::tolerance();
        let initial = basis.clone();
        let rhs: Vec<S> = lp.constraints.iter().map(|c| c.rhs.clone()).collect();
        Tableau {
            rows,
            basis,
            n_orig: n,
            n_cols,
            artificial_start,
            initial,
            flipped,
            cost: Vec::new(),
            pivots: 0,
            tol,
            objective: lp.objective.clone(),
            rhs,
        }
    }

    /// Reduced costs for the current basis and the cost vector in `self.cost`.
    fn reduced_costs(&self) -> Vec<S> {
        let mut z = self.cost.clone();
        z.push(S::zero());
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = self.cost[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (zj, aj) in z.iter_mut().zip(row) {
                *zj = zj.clone() - cb.clone() * aj.clone();
            }
        }
        z
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col].clone();
        for a in self.rows[r].iter_mut() {
            *a = a.clone() / p.clone();
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (a, pr) in row.iter_mut().zip(&pivot_row) {
                *a = a.clone() - f.clone() * pr.clone();
            }
        }
        self.basis[r] = col;
        self.pivots += 1;
    }

    /// Bland's-rule iterations over columns `< allowed`.
    fn optimize(&mut self, allowed: usize) -> Result<()> {
        let neg_tol = S::zero() - self.tol.clone();
        let max_pivots = 50 * (self.n_cols + self.rows.len() + 10) * (self.rows.len() + 1);
        loop {
            let z = self.reduced_costs();
            let Some(col) = (0..allowed).find(|&j| z[j] < neg_tol && !self.basis.contains(&j)) else {
                return Ok(());
            };
            let mut best: Option<(usize, S)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col] > self.tol {
                    let ratio = row[self.n_cols].clone() / row[col].clone();
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = best else {
                return Err(Error::Numeric("linear program is unbounded".into()));
            };
            self.pivot(r, col);
            if self.pivots > max_pivots {
                return Err(Error::Numeric("simplex exceeded its pivot limit".into()));
            }
        }
    }

    fn run(mut self) -> Result<LpSolution<S>> {
        // Phase 1: drive artificials out.
        self.cost = (0..self.n_cols).map(|j| if j >= self.artificial_start { S::one() } else { S::zero() }).collect();
        self.optimize(self.n_cols)?;
        let infeasibility: S = self
            .rows
            .iter()
            .zip(&self.basis)
            .filter(|(_, &b)| b >= self.artificial_start)
            .fold(S::zero(), |acc, (row, _)| acc + row[self.n_cols].clone());
        let feas_tol = self.tol.clone() * S::of(1e3);
        if infeasibility > feas_tol {
            return Err(Error::Numeric("linear program is infeasible".into()));
        }
        for r in 0..self.rows.len() {
            if self.basis[r] >= self.artificial_start {
                if let Some(col) = (0..self.artificial_start).find(|&j| self.rows[r][j].abs_val() > self.tol) {
                    self.pivot(r, col);
                }
            }
        }
        // Phase 2: artificial columns stay in the tableau but may not enter.
        self.cost = self.objective.clone();
        self.cost.resize(self.n_cols, S::zero());
        self.optimize(self.artificial_start)?;

        let mut x = vec![S::zero(); self.n_orig];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.n_orig {
                x[b] = row[self.n_cols].clone();
            }
        }
        let objective = x.iter().zip(&self.objective).fold(S::zero(), |acc, (xi, ci)| acc + xi.clone() * ci.clone());
        let z = self.reduced_costs();
        let duals: Vec<S> = self
            .initial
            .iter()
            .zip(&self.flipped)
            .map(|(&col, &flip)| {
                let y = S::zero() - z[col].clone();
                if flip {
                    S::zero() - y
                } else {
                    y
                }
            })
            .collect();
        let dual_obj = duals.iter().zip(&self.rhs).fold(S::zero(), |acc, (y, b)| acc + y.clone() * b.clone());
        let duality_gap = (objective.clone() - dual_obj).abs_val();
        Ok(LpSolution { x, objective, duals, duality_gap, pivots: self.pivots })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_traits::FromPrimitive;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn textbook_max() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  →  36 at (2, 6)
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![-3.0f64, -5.0];
        lp.push(vec![1.0, 0.0], Relation::Le, 4.0);
        lp.push(vec![0.0, 2.0], Relation::Le, 12.0);
        lp.push(vec![3.0, 2.0], Relation::Le, 18.0);
        let s = lp.solve().unwrap();
        assert!((s.objective + 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
        assert!(s.duality_gap < 1e-12);
        assert!(s.duals.iter().all(|&y| y <= 1e-12));
    }

    #[test]
    fn equality_and_ge_rows_exact() {
        // min x + 2y + 3z s.t. x + y + z = 1, y + z ≥ 1/2, x - z ≤ 1/3
        let mut lp = LinearProgram::new(3);
        lp.objective = vec![q(1, 1), q(2, 1), q(3, 1)];
        lp.push(vec![q(1, 1), q(1, 1), q(1, 1)], Relation::Eq, q(1, 1));
        lp.push(vec![q(0, 1), q(1, 1), q(1, 1)], Relation::Ge, q(1, 2));
        lp.push(vec![q(1, 1), q(0, 1), q(-1, 1)], Relation::Le, q(1, 3));
        let s = lp.solve().unwrap();
        assert_eq!(s.objective, q(5, 3));
        assert_eq!(s.duality_gap, q(0, 1));
    }

    #[test]
    fn negative_rhs_and_free_shift() {
        // min y s.t. -y ≤ -2 (y ≥ 2)
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![1.0f64];
        lp.push(vec![-1.0], Relation::Le, -2.0);
        let s = lp.solve().unwrap();
        assert_eq!(s.x[0], 2.0);
        assert!((s.duals[0] + 1.0).abs() < 1e-12);
        assert!(s.duality_gap < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![1.0];
        lp.push(vec![1.0], Relation::Le, 1.0);
        lp.push(vec![1.0], Relation::Ge, 2.0);
        assert!(lp.solve().is_err());
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![-1.0];
        lp.push(vec![1.0], Relation::Ge, 0.0);
        assert!(lp.solve().is_err());
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![Rational::from_i64(1).unwrap(), Rational::from_i64(1).unwrap()];
        lp.push(vec![q(1, 1), q(1, 1)], Relation::Eq, q(2, 1));
        lp.push(vec![q(2, 1), q(2, 1)], Relation::Eq, q(4, 1));
        let s = lp.solve().unwrap();
        assert_eq!(s.objective, q(2, 1));
        assert_eq!(s.duality_gap, q(0, 1));
    }
}
