use serde::Serialize;
use thiserror::Error;

use crate::agents::AgentSet;
use crate::matroid::MatroidError;
use crate::mechanism::{audit_table, AuditViolation, Instance, MechanismError};
use crate::scalar::{sum, Arithmetic, Scalar};

use super::lp::{LinearProgram, LpError, LpStatus, Relation, VarKind};

pub const DEFAULT_VARIABLE_CAP: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub variable_cap: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            variable_cap: DEFAULT_VARIABLE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("revenue LP needs {variables} variables ({profiles} profiles x {sets} feasible sets + payments), cap is {cap}")]
    Size {
        variables: usize,
        profiles: usize,
        sets: usize,
        cap: usize,
    },
    #[error("{source}{hint}")]
    Solver { source: LpError, hint: &'static str },
    #[error("revenue LP reported {0}")]
    Status(LpStatus),
    #[error("witness check failed: {0}")]
    Witness(String),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Matroid(#[from] MatroidError),
}

fn solver_error<S: Scalar>(source: LpError) -> OracleError {
    let hint = match S::ARITHMETIC {
        Arithmetic::Double => "; retry with --arithmetic rational",
        Arithmetic::Rational => "",
    };
    OracleError::Solver { source, hint }
}

/// Sizes of the revenue LP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LpCounts {
    pub profiles: usize,
    /// Profiles sharing `s_-i` with a support profile for some `i`.
    pub retained: usize,
    pub feasible_sets: usize,
    pub variables: usize,
    pub simplex: usize,
    pub ic: usize,
    pub ir: usize,
}

impl LpCounts {
    pub fn constraints(&self) -> usize {
        self.simplex + self.ic + self.ir
    }
}

/// Variable numbering of the revenue LP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpLayout {
    pub retained: Vec<usize>,
    pub sets: Vec<AgentSet>,
    pub agents: usize,
}

impl LpLayout {
    pub fn y(&self, row: usize, set: usize) -> usize {
        row * self.sets.len() + set
    }

    pub fn payment(&self, row: usize, agent: usize) -> usize {
        self.retained.len() * self.sets.len() + row * self.agents + agent
    }
}

/// Randomized allocation and payments over every retained profile: `y`
/// per feasible set, `Σ_S y = 1`, `p_i` free, ex post IC for every
/// `(i, s, s_i')` on slices `s_-i` with positive mass, ex post IR for every
/// `(i, s)`; objective `Σ_s Pr(s) Σ_i p_i(s)`.
#[derive(Debug, Clone)]
pub struct RevenueLp<S> {
    pub lp: LinearProgram<S>,
    pub layout: LpLayout,
    pub counts: LpCounts,
}

/// Which `(agent, profile)` pairs lie on a slice `s_-i` of positive mass.
#[derive(Debug, Clone)]
pub struct SliceMass<S> {
    agents: usize,
    mass: Vec<Vec<S>>,
    strides: Vec<usize>,
    radices: Vec<usize>,
}

impl<S: Scalar> SliceMass<S> {
    pub fn of(inst: &Instance<S>) -> Self {
        let space = inst.space();
        let pmf = inst.dist().pmf();
        let n = inst.agents();
        let mut mass = vec![vec![S::zero(); space.len()]; n];
        for (idx, p) in pmf.iter().enumerate() {
            if p.is_exact_zero() {
                continue;
            }
            for (i, m) in mass.iter_mut().enumerate() {
                let base = space.index_with(idx, i, 0);
                m[base] = m[base].clone() + p.clone();
            }
        }
        SliceMass {
            agents: n,
            mass,
            strides: (0..n).map(|i| space.stride(i)).collect(),
            radices: (0..n).map(|i| space.radix(i)).collect(),
        }
    }

    fn base(&self, agent: usize, profile: usize) -> usize {
        let k = (profile / self.strides[agent]) % self.radices[agent];
        profile - k * self.strides[agent]
    }

    pub fn mass(&self, agent: usize, profile: usize) -> &S {
        &self.mass[agent][self.base(agent, profile)]
    }

    pub fn positive(&self, agent: usize, profile: usize) -> bool {
        *self.mass(agent, profile) > S::zero()
    }

    pub fn retained(&self, profile: usize) -> bool {
        (0..self.agents).any(|i| self.positive(i, profile))
    }
}

fn layout<S: Scalar>(
    inst: &Instance<S>,
    slices: &SliceMass<S>,
    cap: usize,
) -> Result<LpLayout, OracleError> {
    let sets = inst.feasibility().feasible_family()?;
    let retained: Vec<usize> = (0..inst.space().len()).filter(|&p| slices.retained(p)).collect();
    let n = inst.agents();
    let variables = retained.len() * (sets.len() + n);
    if variables > cap {
        return Err(OracleError::Size {
            variables,
            profiles: retained.len(),
            sets: sets.len(),
            cap,
        });
    }
    Ok(LpLayout {
        retained,
        sets,
        agents: n,
    })
}

pub fn build_revenue_lp<S: Scalar>(
    inst: &Instance<S>,
    config: &OracleConfig,
) -> Result<RevenueLp<S>, OracleError> {
    let slices = SliceMass::of(inst);
    let layout = layout(inst, &slices, config.variable_cap)?;
    let space = inst.space();
    let n = inst.agents();
    let nsets = layout.sets.len();
    let mut row_of = vec![usize::MAX; space.len()];
    for (r, &p) in layout.retained.iter().enumerate() {
        row_of[p] = r;
    }

    let mut lp = LinearProgram::new();
    for _ in 0..layout.retained.len() * nsets {
        lp.add_variable(VarKind::NonNeg, S::zero());
    }
    for &p in &layout.retained {
        for _ in 0..n {
            lp.add_variable(VarKind::Free, inst.dist().prob_at(p).clone());
        }
    }

    let alloc_terms = |row: usize, agent: usize, scale: &S| -> Vec<(usize, S)> {
        (0..nsets)
            .filter(|&k| layout.sets[k].contains(agent))
            .map(|k| (layout.y(row, k), scale.clone()))
            .collect()
    };

    for r in 0..layout.retained.len() {
        lp.add_constraint((0..nsets).map(|k| (layout.y(r, k), S::one())).collect(), Relation::Eq, S::one());
    }
    let mut ic = 0;
    for (r, &p) in layout.retained.iter().enumerate() {
        for i in 0..n {
            if !slices.positive(i, p) {
                continue;
            }
            let v = inst.value(p, i);
            let own = space.coordinate(p, i);
            for t in (0..space.radix(i)).filter(|&t| t != own) {
                let d = row_of[space.index_with(p, i, t)];
                let mut coeffs = alloc_terms(r, i, v);
                coeffs.extend(alloc_terms(d, i, &-v.clone()));
                coeffs.push((layout.payment(r, i), -S::one()));
                coeffs.push((layout.payment(d, i), S::one()));
                lp.add_constraint(coeffs, Relation::Ge, S::zero());
                ic += 1;
            }
        }
    }
    for (r, &p) in layout.retained.iter().enumerate() {
        for i in 0..n {
            let mut coeffs = alloc_terms(r, i, inst.value(p, i));
            coeffs.push((layout.payment(r, i), -S::one()));
            lp.add_constraint(coeffs, Relation::Ge, S::zero());
        }
    }
    let counts = LpCounts {
        profiles: space.len(),
        retained: layout.retained.len(),
        feasible_sets: nsets,
        variables: lp.num_variables(),
        simplex: layout.retained.len(),
        ic,
        ir: layout.retained.len() * n,
    };
    Ok(RevenueLp { lp, layout, counts })
}

/// Per-profile part of the optimal mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessRow<S> {
    pub profile: usize,
    pub prob: S,
    /// Probability of each feasible set with positive weight.
    pub allocation: Vec<(AgentSet, S)>,
    /// `x_i(s)`.
    pub alloc: Vec<S>,
    pub payments: Vec<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness<S> {
    pub rows: Vec<WitnessRow<S>>,
}

impl<S: Scalar> Witness<S> {
    pub fn revenue(&self) -> S {
        sum(self
            .rows
            .iter()
            .map(|r| r.prob.clone() * sum(r.payments.iter().cloned())))
    }

    /// Allocation and payment tables over the whole grid; profiles outside
    /// the LP get zeros.
    pub fn tables(&self, inst: &Instance<S>) -> (Vec<Vec<S>>, Vec<Vec<S>>) {
        let n = inst.agents();
        let len = inst.space().len();
        let mut alloc = vec![vec![S::zero(); n]; len];
        let mut pay = vec![vec![S::zero(); n]; len];
        for r in &self.rows {
            alloc[r.profile] = r.alloc.clone();
            pay[r.profile] = r.payments.clone();
        }
        (alloc, pay)
    }

    /// Ex post IC/IR audit of the expected allocations and payments, on the
    /// slices the LP constrains.
    pub fn audit(&self, inst: &Instance<S>) -> Vec<AuditViolation<S>> {
        let slices = SliceMass::of(inst);
        let (alloc, pay) = self.tables(inst);
        audit_table(inst, "oracle-witness", &alloc, &pay, |i, p| slices.positive(i, p))
    }

    /// Values of the revenue LP variables realizing this mechanism.
    pub fn assignment(&self, layout: &LpLayout) -> Vec<S> {
        let nsets = layout.sets.len();
        let mut x = vec![S::zero(); layout.retained.len() * (nsets + layout.agents)];
        for (r, row) in self.rows.iter().enumerate() {
            for (set, y) in &row.allocation {
                let k = layout.sets.binary_search(set).expect("feasible set");
                x[layout.y(r, k)] = y.clone();
            }
            for (i, p) in row.payments.iter().enumerate() {
                x[layout.payment(r, i)] = p.clone();
            }
        }
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    pub reduced_variables: usize,
    pub reduced_constraints: usize,
    pub pivots: usize,
    /// Whether the exact solve started from a double-precision basis.
    pub warm_started: bool,
}

#[derive(Debug, Clone)]
pub struct OracleResult<S> {
    pub optimum: S,
    pub witness: Witness<S>,
    pub counts: LpCounts,
    pub stats: SolveStats,
}

/// The revenue LP with payments eliminated: on each slice of positive mass
/// the optimal payments are the envelope payments
/// `p(t) = v(t)x(t) - Σ_{k<t} (v(k+1) - v(k)) x(k)`, and IC plus IR reduce
/// to monotone `x`. Variables are `y` on nonempty sets; `y_∅` is the slack.
struct ReducedLp<S> {
    lp: LinearProgram<S>,
    /// Nonempty feasible sets, indices into the layout's family.
    sets: Vec<usize>,
}

fn build_reduced<S: Scalar>(inst: &Instance<S>, layout: &LpLayout, slices: &SliceMass<S>) -> ReducedLp<S> {
    let space = inst.space();
    let n = inst.agents();
    let sets: Vec<usize> = (0..layout.sets.len()).filter(|&k| !layout.sets[k].is_empty()).collect();
    let ns = sets.len();
    let mut row_of = vec![usize::MAX; space.len()];
    for (r, &p) in layout.retained.iter().enumerate() {
        row_of[p] = r;
    }
    let mut cost = vec![S::zero(); layout.retained.len() * ns];
    let mut lp = LinearProgram::new();
    let y = |r: usize, k: usize| r * ns + k;
    let x_terms = |r: usize, i: usize, scale: S| -> Vec<(usize, S)> {
        (0..ns)
            .filter(|&k| layout.sets[sets[k]].contains(i))
            .map(|k| (y(r, k), scale.clone()))
            .collect()
    };

    for r in 0..layout.retained.len() {
        lp.add_constraint((0..ns).map(|k| (y(r, k), S::one())).collect(), Relation::Le, S::one());
    }
    for i in 0..n {
        let m = space.radix(i);
        for &p in layout.retained.iter().filter(|&&p| space.coordinate(p, i) == 0) {
            if !slices.positive(i, p) {
                continue;
            }
            let rows: Vec<usize> = (0..m).map(|t| row_of[space.index_with(p, i, t)]).collect();
            let profiles: Vec<usize> = (0..m).map(|t| space.index_with(p, i, t)).collect();
            let probs: Vec<S> = profiles.iter().map(|&d| inst.dist().prob_at(d).clone()).collect();
            let vals: Vec<S> = profiles.iter().map(|&d| inst.value(d, i).clone()).collect();
            let mut above = S::zero();
            for t in (0..m).rev() {
                let mut c = probs[t].clone() * vals[t].clone();
                if t + 1 < m {
                    c = c - (vals[t + 1].clone() - vals[t].clone()) * above.clone();
                }
                above = above + probs[t].clone();
                for (j, _) in x_terms(rows[t], i, S::one()) {
                    cost[j] = cost[j].clone() + c.clone();
                }
            }
            for t in 0..m.saturating_sub(1) {
                let mut coeffs = x_terms(rows[t], i, S::one());
                coeffs.extend(x_terms(rows[t + 1], i, -S::one()));
                lp.add_constraint(coeffs, Relation::Le, S::zero());
            }
        }
    }
    for c in cost {
        lp.add_variable(VarKind::NonNeg, c);
    }
    ReducedLp { lp, sets }
}

/// Envelope payments from a solution of the reduced LP.
fn witness_from<S: Scalar>(
    inst: &Instance<S>,
    layout: &LpLayout,
    slices: &SliceMass<S>,
    reduced: &ReducedLp<S>,
    values: &[S],
) -> Witness<S> {
    let space = inst.space();
    let n = inst.agents();
    let ns = reduced.sets.len();
    let mut row_of = vec![usize::MAX; space.len()];
    for (r, &p) in layout.retained.iter().enumerate() {
        row_of[p] = r;
    }
    let mut rows: Vec<WitnessRow<S>> = layout
        .retained
        .iter()
        .enumerate()
        .map(|(r, &p)| {
            let mut allocation = Vec::new();
            let mut alloc = vec![S::zero(); n];
            let mut total = S::zero();
            for k in 0..ns {
                let w = values[r * ns + k].clone();
                if w.is_exact_zero() {
                    continue;
                }
                let set = layout.sets[reduced.sets[k]];
                for i in set.iter() {
                    alloc[i] = alloc[i].clone() + w.clone();
                }
                total = total + w.clone();
                allocation.push((set, w));
            }
            let rest = S::one() - total;
            if !rest.is_exact_zero() {
                allocation.insert(0, (AgentSet::empty(), rest));
            }
            WitnessRow {
                profile: p,
                prob: inst.dist().prob_at(p).clone(),
                allocation,
                alloc,
                payments: vec![S::zero(); n],
            }
        })
        .collect();
    for (r, &p) in layout.retained.iter().enumerate() {
        for i in 0..n {
            if !slices.positive(i, p) {
                continue;
            }
            let own = space.coordinate(p, i);
            let at = |t: usize| row_of[space.index_with(p, i, t)];
            let v = |t: usize| inst.value(space.index_with(p, i, t), i).clone();
            let mut pay = v(own) * rows[r].alloc[i].clone();
            for k in 0..own {
                pay = pay - (v(k + 1) - v(k)) * rows[at(k)].alloc[i].clone();
            }
            rows[r].payments[i] = pay;
        }
    }
    Witness { rows }
}

pub fn opt_revenue<S: Scalar>(inst: &Instance<S>) -> Result<OracleResult<S>, OracleError> {
    opt_revenue_with(inst, &OracleConfig::default())
}

/// Optimal expected revenue over randomized ex post IC and IR mechanisms,
/// with an optimal mechanism checked against the full revenue LP.
pub fn opt_revenue_with<S: Scalar>(
    inst: &Instance<S>,
    config: &OracleConfig,
) -> Result<OracleResult<S>, OracleError> {
    let full = build_revenue_lp(inst, config)?;
    let slices = SliceMass::of(inst);
    let reduced = build_reduced(inst, &full.layout, &slices);
    let (solution, warm_started) = match S::ARITHMETIC {
        Arithmetic::Double => (reduced.lp.solve().map_err(solver_error::<S>)?, false),
        Arithmetic::Rational => {
            let hint = reduced
                .lp
                .map(|a| a.to_f64())
                .solve()
                .ok()
                .filter(|s| s.status == LpStatus::Optimal)
                .map(|s| s.basis);
            match hint {
                Some(h) => (reduced.lp.solve_from(&h).map_err(solver_error::<S>)?, true),
                None => (reduced.lp.solve().map_err(solver_error::<S>)?, false),
            }
        }
    };
    if solution.status != LpStatus::Optimal {
        return Err(OracleError::Status(solution.status));
    }
    let witness = witness_from(inst, &full.layout, &slices, &reduced, &solution.values);
    let optimum = witness.revenue();
    let reduced_objective = solution.objective.expect("optimal");
    if !optimum.approx_eq(&reduced_objective) {
        return Err(OracleError::Witness(format!(
            "envelope revenue {optimum} differs from the reduced objective {reduced_objective}"
        )));
    }
    verify_witness(&full, &witness)?;
    Ok(OracleResult {
        optimum,
        witness,
        counts: full.counts,
        stats: SolveStats {
            reduced_variables: reduced.lp.num_variables(),
            reduced_constraints: reduced.lp.num_constraints(),
            pivots: solution.pivots,
            warm_started,
        },
    })
}

/// Checks every constraint of the full revenue LP at the witness.
pub fn verify_witness<S: Scalar>(lp: &RevenueLp<S>, witness: &Witness<S>) -> Result<(), OracleError> {
    let x = witness.assignment(&lp.layout);
    lp.lp.check_feasible(&x).map_err(OracleError::Witness)?;
    let objective = lp.lp.objective_value(&x);
    if !objective.approx_eq(&witness.revenue()) {
        return Err(OracleError::Witness(format!(
            "LP objective {objective} differs from the witness revenue {}",
            witness.revenue()
        )));
    }
    Ok(())
}

/// Solves the full revenue LP directly, without eliminating payments.
pub fn solve_full_lp<S: Scalar>(inst: &Instance<S>, config: &OracleConfig) -> Result<S, OracleError> {
    let full = build_revenue_lp(inst, config)?;
    let s = full.lp.solve().map_err(solver_error::<S>)?;
    match s.status {
        LpStatus::Optimal => Ok(s.objective.expect("optimal")),
        other => Err(OracleError::Status(other)),
    }
}
