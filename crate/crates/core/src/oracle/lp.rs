//! Dense two-phase tableau simplex over any [`Scalar`].

use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    NonNeg,
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<S> {
    pub coeffs: Vec<(usize, S)>,
    pub relation: Relation,
    pub rhs: S,
}

/// `max c·x` subject to linear constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<S> {
    objective: Vec<S>,
    kinds: Vec<VarKind>,
    constraints: Vec<Constraint<S>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Unbounded => "unbounded",
            LpStatus::Infeasible => "infeasible",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S> {
    pub status: LpStatus,
    /// Present when optimal.
    pub objective: Option<S>,
    /// One value per variable; empty unless optimal.
    pub values: Vec<S>,
    /// Basic columns of the final tableau, in standard-form numbering.
    pub basis: Vec<usize>,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("simplex stopped after {0} pivots")]
    IterationLimit(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("malformed program: {0}")]
    Malformed(String),
}

impl<S: Scalar> Default for LinearProgram<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> LinearProgram<S> {
    pub fn new() -> Self {
        LinearProgram {
            objective: Vec::new(),
            kinds: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add_variable(&mut self, kind: VarKind, cost: S) -> usize {
        self.objective.push(cost);
        self.kinds.push(kind);
        self.objective.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, S)>, relation: Relation, rhs: S) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn num_variables(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &[S] {
        &self.objective
    }

    pub fn kinds(&self) -> &[VarKind] {
        &self.kinds
    }

    pub fn constraints(&self) -> &[Constraint<S>] {
        &self.constraints
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> LinearProgram<T> {
        LinearProgram {
            objective: self.objective.iter().map(&f).collect(),
            kinds: self.kinds.clone(),
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint {
                    coeffs: c.coeffs.iter().map(|(j, a)| (*j, f(a))).collect(),
                    relation: c.relation,
                    rhs: f(&c.rhs),
                })
                .collect(),
        }
    }

    pub fn objective_value(&self, x: &[S]) -> S {
        dot(&self.objective.iter().cloned().enumerate().collect::<Vec<_>>(), x)
    }

    /// First violated constraint or sign restriction, up to `S::tolerance()`.
    pub fn check_feasible(&self, x: &[S]) -> Result<(), String> {
        if x.len() != self.num_variables() {
            return Err(format!("{} values for {} variables", x.len(), self.num_variables()));
        }
        for (j, kind) in self.kinds.iter().enumerate() {
            if *kind == VarKind::NonNeg && x[j].is_negative() {
                return Err(format!("variable {j} = {} is negative", x[j]));
            }
        }
        for (r, c) in self.constraints.iter().enumerate() {
            let lhs = dot(&c.coeffs, x);
            let ok = match c.relation {
                Relation::Le => c.rhs.approx_ge(&lhs),
                Relation::Ge => lhs.approx_ge(&c.rhs),
                Relation::Eq => lhs.approx_eq(&c.rhs),
            };
            if !ok {
                return Err(format!("constraint {r}: lhs {lhs} vs rhs {}", c.rhs));
            }
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<LpSolution<S>, LpError> {
        self.solve_from(&[])
    }

    /// Solves starting from the basis `hint` (standard-form columns, e.g.
    /// from a double-precision solve). The hint is used only when every
    /// constraint is `<=` with a nonnegative right-hand side and only if the
    /// resulting basis is primal feasible; otherwise the solve starts cold.
    pub fn solve_from(&self, hint: &[usize]) -> Result<LpSolution<S>, LpError> {
        self.validate()?;
        let mut t = Tableau::build(self);
        if !hint.is_empty() && t.artificials.is_empty() {
            if t.crash(hint) {
                return t.finish(self);
            }
            t = Tableau::build(self);
        }
        if !t.artificials.is_empty() {
            let phase1: Vec<S> = (0..t.cols)
                .map(|j| if t.is_artificial[j] { -S::one() } else { S::zero() })
                .collect();
            t.set_costs(&phase1);
            if t.run()? == Outcome::Unbounded {
                return Err(LpError::Numerical("phase one reported unbounded".into()));
            }
            if t.objective().is_negative() {
                return Ok(t.status_only(LpStatus::Infeasible));
            }
            t.expel_artificials();
        }
        t.finish(self)
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.num_variables();
        for (r, c) in self.constraints.iter().enumerate() {
            if let Some((j, _)) = c.coeffs.iter().find(|(j, _)| *j >= n) {
                return Err(LpError::Malformed(format!("constraint {r} references variable {j}")));
            }
            if c.coeffs.iter().any(|(_, a)| !a.to_f64().is_finite()) || !c.rhs.to_f64().is_finite() {
                return Err(LpError::Malformed(format!("constraint {r} has a non-finite coefficient")));
            }
        }
        if self.objective.iter().any(|c| !c.to_f64().is_finite()) {
            return Err(LpError::Malformed("non-finite objective coefficient".into()));
        }
        Ok(())
    }
}

fn dot<S: Scalar>(coeffs: &[(usize, S)], x: &[S]) -> S {
    let mut acc = S::zero();
    for (j, a) in coeffs {
        if !a.is_exact_zero() && !x[*j].is_exact_zero() {
            acc = acc + a.clone() * x[*j].clone();
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Optimal,
    Unbounded,
}

/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 50;

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    /// Reduced costs, with `-objective` in the last slot.
    costs: Vec<S>,
    basis: Vec<usize>,
    cols: usize,
    /// Standard-form columns of each variable: `(plus, minus)`.
    var_cols: Vec<(usize, Option<usize>)>,
    is_artificial: Vec<bool>,
    artificials: Vec<usize>,
    pivots: usize,
    clean: S,
}

impl<S: Scalar> Tableau<S> {
    fn build(lp: &LinearProgram<S>) -> Self {
        let mut var_cols = Vec::with_capacity(lp.num_variables());
        let mut cols = 0;
        for kind in &lp.kinds {
            match kind {
                VarKind::NonNeg => {
                    var_cols.push((cols, None));
                    cols += 1;
                }
                VarKind::Free => {
                    var_cols.push((cols, Some(cols + 1)));
                    cols += 2;
                }
            }
        }
        let m = lp.num_constraints();
        let mut rels = Vec::with_capacity(m);
        let mut slack_cols = vec![None; m];
        for (r, c) in lp.constraints.iter().enumerate() {
            let flip = c.rhs < S::zero();
            let rel = match (c.relation, flip) {
                (Relation::Le, false) | (Relation::Ge, true) => Relation::Le,
                (Relation::Ge, false) | (Relation::Le, true) => Relation::Ge,
                (Relation::Eq, _) => Relation::Eq,
            };
            rels.push((rel, flip));
            if rel != Relation::Eq {
                slack_cols[r] = Some(cols);
                cols += 1;
            }
        }
        let mut art_cols = vec![None; m];
        let mut artificials = Vec::new();
        for (r, (rel, _)) in rels.iter().enumerate() {
            if *rel != Relation::Le {
                art_cols[r] = Some(cols);
                artificials.push(cols);
                cols += 1;
            }
        }
        let mut is_artificial = vec![false; cols];
        for &a in &artificials {
            is_artificial[a] = true;
        }
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        for (r, c) in lp.constraints.iter().enumerate() {
            let (rel, flip) = rels[r];
            let sign = |a: &S| if flip { -a.clone() } else { a.clone() };
            let mut row = vec![S::zero(); cols + 1];
            for (j, a) in &c.coeffs {
                let (p, neg) = var_cols[*j];
                row[p] = row[p].clone() + sign(a);
                if let Some(q) = neg {
                    row[q] = row[q].clone() - sign(a);
                }
            }
            row[cols] = sign(&c.rhs);
            match rel {
                Relation::Le => {
                    let s = slack_cols[r].unwrap();
                    row[s] = S::one();
                    basis.push(s);
                }
                Relation::Ge => {
                    row[slack_cols[r].unwrap()] = -S::one();
                    row[art_cols[r].unwrap()] = S::one();
                    basis.push(art_cols[r].unwrap());
                }
                Relation::Eq => {
                    row[art_cols[r].unwrap()] = S::one();
                    basis.push(art_cols[r].unwrap());
                }
            }
            rows.push(row);
        }
        Tableau {
            rows,
            costs: vec![S::zero(); cols + 1],
            basis,
            cols,
            var_cols,
            is_artificial,
            artificials,
            pivots: 0,
            clean: S::tolerance() * S::from_ratio(1, 1000),
        }
    }

    fn set_costs(&mut self, c: &[S]) {
        let mut costs: Vec<S> = c.to_vec();
        costs.push(S::zero());
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = costs[b].clone();
            if cb.is_exact_zero() {
                continue;
            }
            for (j, a) in self.rows[r].iter().enumerate() {
                if !a.is_exact_zero() {
                    costs[j].sub_mul_assign(&cb, a);
                }
            }
        }
        self.costs = costs;
    }

    fn phase2_costs(&self, lp: &LinearProgram<S>) -> Vec<S> {
        let mut c = vec![S::zero(); self.cols];
        for (j, (p, neg)) in self.var_cols.iter().enumerate() {
            c[*p] = lp.objective[j].clone();
            if let Some(q) = neg {
                c[*q] = -lp.objective[j].clone();
            }
        }
        c
    }

    fn objective(&self) -> S {
        -self.costs[self.cols].clone()
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let piv = self.rows[r][e].clone();
        if piv != S::one() {
            for a in self.rows[r].iter_mut() {
                if !a.is_exact_zero() {
                    *a = a.clone() / piv.clone();
                }
            }
        }
        let nz: Vec<usize> = (0..=self.cols)
            .filter(|&j| !self.rows[r][j].is_exact_zero())
            .collect();
        let prow = std::mem::take(&mut self.rows[r]);
        let clean = self.clean.clone();
        let eliminate = |row: &mut Vec<S>| {
            let f = row[e].clone();
            if f.is_exact_zero() {
                return;
            }
            for &j in &nz {
                row[j].sub_mul_assign(&f, &prow[j]);
                if row[j].abs() < clean {
                    row[j] = S::zero();
                }
            }
            row[e] = S::zero();
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.costs);
        self.rows[r] = prow;
        self.basis[r] = e;
        self.pivots += 1;
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let mut best: Option<usize> = None;
        for j in 0..self.cols {
            if self.is_artificial[j] || !self.costs[j].is_positive() {
                continue;
            }
            if bland {
                return Some(j);
            }
            if best.is_none_or(|b| self.costs[j] > self.costs[b]) {
                best = Some(j);
            }
        }
        best
    }

    fn leaving(&self, e: usize, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, S)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            let a = &row[e];
            if !a.is_positive() {
                continue;
            }
            let ratio = row[self.cols].clone() / a.clone();
            let better = match &best {
                None => true,
                Some((b, br)) => {
                    if ratio.definitely_gt(br) {
                        false
                    } else if br.definitely_gt(&ratio) {
                        true
                    } else if bland {
                        self.basis[r] < self.basis[*b]
                    } else {
                        a.abs() > self.rows[*b][e].abs()
                    }
                }
            };
            if better {
                best = Some((r, ratio));
            }
        }
        best.map(|(r, _)| r)
    }

    fn run(&mut self) -> Result<Outcome, LpError> {
        let limit = 50_000 + 200 * (self.rows.len() + self.cols);
        let mut streak = 0;
        let mut last = self.objective();
        loop {
            if self.pivots > limit {
                return Err(LpError::IterationLimit(self.pivots));
            }
            let bland = streak >= DEGENERATE_STREAK;
            let Some(e) = self.entering(bland) else {
                return Ok(Outcome::Optimal);
            };
            let Some(r) = self.leaving(e, bland) else {
                return Ok(Outcome::Unbounded);
            };
            self.pivot(r, e);
            let now = self.objective();
            if now.definitely_gt(&last) {
                streak = 0;
                last = now;
            } else {
                streak += 1;
            }
        }
    }

    /// Pivots hint columns into the basis; true when the result is primal
    /// feasible.
    fn crash(&mut self, hint: &[usize]) -> bool {
        let mut wanted = vec![false; self.cols];
        for &h in hint {
            if h >= self.cols {
                return false;
            }
            wanted[h] = true;
        }
        for &h in hint {
            if self.basis.contains(&h) {
                continue;
            }
            let row = (0..self.rows.len())
                .filter(|&r| !wanted[self.basis[r]] && !self.rows[r][h].is_approx_zero())
                .max_by(|&a, &b| self.rows[a][h].abs().total_cmp(&self.rows[b][h].abs()));
            match row {
                Some(r) => self.pivot(r, h),
                None => return false,
            }
        }
        self.rows.iter().all(|row| !row[self.cols].is_negative())
    }

    /// Moves zero-level artificials out of the basis and drops rows that
    /// turn out redundant.
    fn expel_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.is_artificial[self.basis[r]] {
                let col = (0..self.cols)
                    .filter(|&j| !self.is_artificial[j] && !self.rows[r][j].is_approx_zero())
                    .max_by(|&a, &b| self.rows[r][a].abs().total_cmp(&self.rows[r][b].abs()));
                match col {
                    Some(j) => self.pivot(r, j),
                    None => {
                        self.rows.remove(r);
                        self.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    fn finish(mut self, lp: &LinearProgram<S>) -> Result<LpSolution<S>, LpError> {
        let c = self.phase2_costs(lp);
        self.set_costs(&c);
        if self.run()? == Outcome::Unbounded {
            return Ok(self.status_only(LpStatus::Unbounded));
        }
        let mut col_values = vec![S::zero(); self.cols];
        for (r, &b) in self.basis.iter().enumerate() {
            col_values[b] = self.rows[r][self.cols].clone();
        }
        let values: Vec<S> = self
            .var_cols
            .iter()
            .map(|(p, neg)| match neg {
                Some(q) => col_values[*p].clone() - col_values[*q].clone(),
                None => col_values[*p].clone(),
            })
            .collect();
        if let Err(e) = lp.check_feasible(&values) {
            return Err(LpError::Numerical(e));
        }
        Ok(LpSolution {
            status: LpStatus::Optimal,
            objective: Some(lp.objective_value(&values)),
            values,
            basis: self.basis,
            pivots: self.pivots,
        })
    }

    fn status_only(self, status: LpStatus) -> LpSolution<S> {
        LpSolution {
            status,
            objective: None,
            values: Vec::new(),
            basis: self.basis,
            pivots: self.pivots,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Rational};
    use proptest::prelude::*;

    type R = Rational;

    #[test]
    fn small_maximization() {
        // max 3x + 2y, x + y <= 4, x + 3y <= 6, x <= 3
        let mut lp = LinearProgram::<R>::new();
        let x = lp.add_variable(VarKind::NonNeg, q(3, 1));
        let y = lp.add_variable(VarKind::NonNeg, q(2, 1));
        lp.add_constraint(vec![(x, q(1, 1)), (y, q(1, 1))], Relation::Le, q(4, 1));
        lp.add_constraint(vec![(x, q(1, 1)), (y, q(3, 1))], Relation::Le, q(6, 1));
        lp.add_constraint(vec![(x, q(1, 1))], Relation::Le, q(3, 1));
        let s = lp.solve().unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective, Some(q(11, 1)));
        assert_eq!(s.values, vec![q(3, 1), q(1, 1)]);
    }

    #[test]
    fn equality_ge_and_free_variables() {
        // max -x - y with x free, x + y = 1, x >= -2, y >= 0
        let mut lp = LinearProgram::<R>::new();
        let x = lp.add_variable(VarKind::Free, q(-1, 1));
        let y = lp.add_variable(VarKind::NonNeg, q(-1, 1));
        lp.add_constraint(vec![(x, q(1, 1)), (y, q(1, 1))], Relation::Eq, q(1, 1));
        lp.add_constraint(vec![(x, q(1, 1))], Relation::Ge, q(-2, 1));
        let s = lp.solve().unwrap();
        assert_eq!(s.objective, Some(q(-1, 1)));

        let mut lp = LinearProgram::<R>::new();
        let x = lp.add_variable(VarKind::Free, q(1, 1));
        lp.add_constraint(vec![(x, q(1, 1))], Relation::Le, q(-5, 2));
        assert_eq!(lp.solve().unwrap().values, vec![q(-5, 2)]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::<R>::new();
        let x = lp.add_variable(VarKind::NonNeg, q(1, 1));
        lp.add_constraint(vec![(x, q(1, 1))], Relation::Ge, q(2, 1));
        assert_eq!(lp.solve().unwrap().status, LpStatus::Unbounded);
        lp.add_constraint(vec![(x, q(1, 1))], Relation::Le, q(1, 1));
        assert_eq!(lp.solve().unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = LinearProgram::<R>::new();
        let x = lp.add_variable(VarKind::NonNeg, q(1, 1));
        let y = lp.add_variable(VarKind::NonNeg, q(1, 1));
        for _ in 0..3 {
            lp.add_constraint(vec![(x, q(1, 1)), (y, q(1, 1))], Relation::Eq, q(1, 1));
        }
        assert_eq!(lp.solve().unwrap().objective, Some(q(1, 1)));
    }

    #[test]
    fn empty_program_is_zero() {
        let lp = LinearProgram::<R>::new();
        let s = lp.solve().unwrap();
        assert_eq!((s.status, s.objective), (LpStatus::Optimal, Some(q(0, 1))));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the textbook largest-coefficient rule
        let mut lp = LinearProgram::<R>::new();
        let v: Vec<usize> = [q(3, 4), q(-150, 1), q(1, 50), q(-6, 1)]
            .into_iter()
            .map(|c| lp.add_variable(VarKind::NonNeg, c))
            .collect();
        let rows = [
            [q(1, 4), q(-60, 1), q(-1, 25), q(9, 1)],
            [q(1, 2), q(-90, 1), q(-1, 50), q(3, 1)],
            [q(0, 1), q(0, 1), q(1, 1), q(0, 1)],
        ];
        for (k, row) in rows.into_iter().enumerate() {
            let rhs = if k == 2 { q(1, 1) } else { q(0, 1) };
            lp.add_constraint(v.iter().copied().zip(row).collect(), Relation::Le, rhs);
        }
        assert_eq!(lp.solve().unwrap().objective, Some(q(1, 20)));
    }

    #[test]
    fn warm_start_reuses_a_double_basis() {
        let mut lp = LinearProgram::<R>::new();
        let x = lp.add_variable(VarKind::NonNeg, q(3, 1));
        let y = lp.add_variable(VarKind::NonNeg, q(2, 1));
        lp.add_constraint(vec![(x, q(1, 1)), (y, q(1, 1))], Relation::Le, q(4, 1));
        lp.add_constraint(vec![(x, q(1, 1)), (y, q(3, 1))], Relation::Le, q(6, 1));
        lp.add_constraint(vec![(x, q(1, 1))], Relation::Le, q(3, 1));
        let approx = lp.map(|a| a.to_f64()).solve().unwrap();
        let warm = lp.solve_from(&approx.basis).unwrap();
        assert_eq!(warm.objective, Some(q(11, 1)));
        assert_eq!(warm.pivots, 2);
        let junk = lp.solve_from(&[0, 0, 99]).unwrap();
        assert_eq!(junk.objective, Some(q(11, 1)));
    }

    fn brute_force_2d(c: (i64, i64), rows: &[(i64, i64, i64)]) -> Option<R> {
        // optimum of a bounded 2-variable LP lies at a vertex of the arrangement
        let mut lines: Vec<(R, R, R)> = rows.iter().map(|&(a, b, r)| (q(a, 1), q(b, 1), q(r, 1))).collect();
        lines.push((q(1, 1), q(0, 1), q(0, 1)));
        lines.push((q(0, 1), q(1, 1), q(0, 1)));
        let mut best: Option<R> = None;
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (a1, b1, r1) = lines[i].clone();
                let (a2, b2, r2) = lines[j].clone();
                let det = a1.clone() * b2.clone() - a2.clone() * b1.clone();
                if det == q(0, 1) {
                    continue;
                }
                let x = (r1.clone() * b2 - r2.clone() * b1) / det.clone();
                let y = (a1 * r2 - a2 * r1) / det;
                let ok = x >= q(0, 1)
                    && y >= q(0, 1)
                    && rows.iter().all(|&(a, b, r)| q::<R>(a, 1) * x.clone() + q::<R>(b, 1) * y.clone() <= q(r, 1));
                if ok {
                    let v = q::<R>(c.0, 1) * x + q::<R>(c.1, 1) * y;
                    if best.as_ref().is_none_or(|b| v > *b) {
                        best = Some(v);
                    }
                }
            }
        }
        best
    }

    proptest! {
        #[test]
        fn matches_vertex_enumeration(
            c in (1i64..6, 1i64..6),
            rows in prop::collection::vec((0i64..5, 0i64..5, 0i64..10), 1..5),
        ) {
            // a box keeps the program bounded
            let mut rows = rows;
            rows.push((1, 0, 7));
            rows.push((0, 1, 7));
            let mut lp = LinearProgram::<R>::new();
            let x = lp.add_variable(VarKind::NonNeg, q(c.0, 1));
            let y = lp.add_variable(VarKind::NonNeg, q(c.1, 1));
            for &(a, b, r) in &rows {
                lp.add_constraint(vec![(x, q(a, 1)), (y, q(b, 1))], Relation::Le, q(r, 1));
            }
            let exact = lp.solve().unwrap();
            prop_assert_eq!(exact.objective.clone(), brute_force_2d(c, &rows));
            let double = lp.map(|a| a.to_f64()).solve().unwrap();
            prop_assert!((double.objective.unwrap() - exact.objective.unwrap().to_f64()).abs() < 1e-9);
        }
    }
}
