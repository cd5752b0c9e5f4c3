use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agents::AgentSet;
use crate::bipartite;
use crate::matroid::BasisMode;
use crate::scalar::Scalar;

use super::core::tentative;
use super::reserve::{conditional_monopoly_reserve, ReserveEvent};
use super::{AuctionOutcome, Instance, Mechanism, MechanismError, Threshold};

/// Default limit on profiles x realizations evaluated in exact mode.
pub const DEFAULT_ATOM_CAP: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RevenueMode {
    Exact { atom_cap: usize },
    MonteCarlo { trials: usize, seed: u64 },
}

impl RevenueMode {
    pub fn exact() -> Self {
        RevenueMode::Exact {
            atom_cap: DEFAULT_ATOM_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevenueEstimate<S> {
    /// Exact expectation, or the sample mean in Monte Carlo mode.
    pub value: S,
    pub std_error: Option<f64>,
    /// Profile-realization pairs evaluated.
    pub atoms: usize,
}

/// Expected revenue over the signal distribution and the mechanism's
/// internal randomness.
pub fn expected_revenue<S: Scalar>(
    inst: &Instance<S>,
    mech: &Mechanism<S>,
    mode: RevenueMode,
) -> Result<RevenueEstimate<S>, MechanismError> {
    let bound = mech.bind(inst)?;
    match mode {
        RevenueMode::Exact { atom_cap } => {
            let support = inst.dist().support_indices();
            let realizations = bound.realization_count()?;
            let atoms = support.len().saturating_mul(realizations);
            if atoms > atom_cap {
                return Err(MechanismError::Size(format!(
                    "{} profiles x {realizations} realizations = {atoms} atoms exceeds the cap of {atom_cap}",
                    support.len()
                )));
            }
            let mut total = S::zero();
            for r in bound.realizations()? {
                let mut inner = S::zero();
                for &idx in &support {
                    let rev = bound.outcome(idx, &r)?.revenue();
                    if !rev.is_exact_zero() {
                        inner = inner + inst.dist().prob_at(idx).clone() * rev;
                    }
                }
                total = total + r.weight * inner;
            }
            Ok(RevenueEstimate {
                value: total,
                std_error: None,
                atoms,
            })
        }
        RevenueMode::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(MechanismError::Config("Monte Carlo needs at least one trial".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sampler = inst.dist().sampler();
            let (mut mean, mut m2) = (0.0f64, 0.0f64);
            for k in 0..trials {
                let idx = sampler.sample_index(&mut rng);
                let r = bound.sample_realization(&mut rng);
                let x = bound.outcome(idx, &r)?.revenue().to_f64();
                let delta = x - mean;
                mean += delta / (k + 1) as f64;
                m2 += delta * (x - mean);
            }
            let var = if trials > 1 { m2 / (trials - 1) as f64 } else { 0.0 };
            Ok(RevenueEstimate {
                value: S::parse_literal(&format!("{mean:e}")).unwrap_or_else(|_| S::zero()),
                std_error: Some((var / trials as f64).sqrt()),
                atoms: trials,
            })
        }
    }
}

/// `E[sum_{i in W} R_i + v(W')]`, where `R_i` is the winner-conditioned
/// monopoly revenue and `W'` the best feasible set disjoint from `W`.
pub fn opt_upper_bound<S: Scalar>(inst: &Instance<S>) -> Result<S, MechanismError> {
    inst.require_matroid("the revenue upper bound")?;
    let all = AgentSet::full(inst.agents());
    let mut total = S::zero();
    for idx in inst.dist().support_indices() {
        let w = super::winners(inst, idx, all)?;
        let mut here = S::zero();
        for i in w.iter() {
            let quote = conditional_monopoly_reserve(inst, i, idx, ReserveEvent::WinnerWithin(all))?;
            here = here + quote.revenue.unwrap_or_else(S::zero);
        }
        let rest = inst.feasibility().restriction(all.difference(w));
        let wp = rest.max_weight_basis_within(
            rest.ground(),
            inst.values().row(idx),
            inst.tie_break(),
            BasisMode::Full,
        )?;
        here = here + wp.weight;
        total = total + inst.dist().prob_at(idx).clone() * here;
    }
    Ok(total)
}

/// Value of `W′` (best feasible set disjoint from `W`) against the expected
/// value of `T′ = T \ W`, where `T` is the winner set within a uniform random
/// subsample `Z` of the agents.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsampleComparison<S> {
    pub winners: AgentSet,
    pub disjoint_best: AgentSet,
    pub disjoint_value: S,
    pub expected_new_winners: S,
}

pub fn subsample_comparison<S: Scalar>(
    inst: &Instance<S>,
    profile: usize,
) -> Result<SubsampleComparison<S>, MechanismError> {
    inst.require_matroid("the subsample comparison")?;
    let n = inst.agents();
    if n > 20 {
        return Err(MechanismError::Size(format!("2^{n} subsamples is too many to enumerate")));
    }
    let all = AgentSet::full(n);
    let row = inst.values().row(profile);
    let w = super::winners(inst, profile, all)?;
    let rest = inst.feasibility().restriction(all.difference(w));
    let wp = rest.max_weight_basis_within(rest.ground(), row, inst.tie_break(), BasisMode::Full)?;
    let mut total = S::zero();
    for z in all.subsets() {
        let t = super::winners(inst, profile, z)?;
        for j in t.difference(w).iter() {
            total = total + row[j].clone();
        }
    }
    let count = S::from_int(1i64 << n);
    Ok(SubsampleComparison {
        winners: w,
        disjoint_best: wp.elements,
        disjoint_value: wp.weight,
        expected_new_winners: total / count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditKind {
    IncentiveCompatibility,
    IndividualRationality,
}

impl fmt::Display for AuditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AuditKind::IncentiveCompatibility => "IC",
            AuditKind::IndividualRationality => "IR",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditViolation<S> {
    pub kind: AuditKind,
    pub realization: String,
    pub profile: Vec<usize>,
    pub agent: usize,
    /// Misreported grid index for IC violations.
    pub deviation: Option<usize>,
    /// Utility lost by truthful play (IC) or the negative utility (IR).
    pub gap: S,
}

impl<S: Scalar> fmt::Display for AuditViolation<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] agent {} at {:?}",
            self.kind, self.realization, self.agent, self.profile
        )?;
        if let Some(d) = self.deviation {
            write!(f, " reporting index {d}")?;
        }
        write!(f, ": gap {}", self.gap)
    }
}

/// Ex post IC and IR of per-profile expected allocations and payments.
/// `alloc[idx][i]` and `pay[idx][i]` are indexed by profile; `include(i, idx)`
/// selects the (agent, profile) pairs to audit.
pub fn audit_table<S: Scalar>(
    inst: &Instance<S>,
    label: &str,
    alloc: &[Vec<S>],
    pay: &[Vec<S>],
    include: impl Fn(usize, usize) -> bool,
) -> Vec<AuditViolation<S>> {
    let space = inst.space();
    let mut out = Vec::new();
    for idx in 0..space.len() {
        for i in 0..inst.agents() {
            if !include(i, idx) {
                continue;
            }
            let v = inst.value(idx, i);
            let truthful = v.clone() * alloc[idx][i].clone() - pay[idx][i].clone();
            if truthful.is_negative() {
                out.push(AuditViolation {
                    kind: AuditKind::IndividualRationality,
                    realization: label.to_string(),
                    profile: space.decode(idx),
                    agent: i,
                    deviation: None,
                    gap: -truthful.clone(),
                });
            }
            let own = space.coordinate(idx, i);
            for t in (0..space.radix(i)).filter(|&t| t != own) {
                let dev = space.index_with(idx, i, t);
                let lying = v.clone() * alloc[dev][i].clone() - pay[dev][i].clone();
                if lying.definitely_gt(&truthful) {
                    out.push(AuditViolation {
                        kind: AuditKind::IncentiveCompatibility,
                        realization: label.to_string(),
                        profile: space.decode(idx),
                        agent: i,
                        deviation: Some(t),
                        gap: lying - truthful.clone(),
                    });
                }
            }
        }
    }
    out
}

/// Audits a deterministic outcome rule over every grid profile.
pub fn audit_outcomes<S: Scalar>(
    inst: &Instance<S>,
    label: &str,
    mut outcome: impl FnMut(usize) -> Result<AuctionOutcome<S>, MechanismError>,
) -> Result<Vec<AuditViolation<S>>, MechanismError> {
    let mut alloc = Vec::with_capacity(inst.space().len());
    let mut pay = Vec::with_capacity(inst.space().len());
    for idx in 0..inst.space().len() {
        let o = outcome(idx)?;
        for (i, a) in o.agents.iter().enumerate() {
            if a.alloc.is_exact_zero() && !a.payment.is_exact_zero() {
                return Err(MechanismError::InvariantViolation(format!(
                    "agent {i} pays {} without being served",
                    a.payment
                )));
            }
        }
        alloc.push(o.agents.iter().map(|a| a.alloc.clone()).collect());
        pay.push(o.agents.iter().map(|a| a.payment.clone()).collect());
    }
    Ok(audit_table(inst, label, &alloc, &pay, |_, _| true))
}

/// Ex post IC/IR of `mech` for every realization of its randomness, every
/// grid profile, agent and misreport.
pub fn ic_ir_audit<S: Scalar>(
    inst: &Instance<S>,
    mech: &Mechanism<S>,
) -> Result<Vec<AuditViolation<S>>, MechanismError> {
    let bound = mech.bind(inst)?;
    let mut out = Vec::new();
    for r in bound.realizations()? {
        let label = format!("{} {}", mech.label(), r.label);
        out.extend(audit_outcomes(inst, &label, |idx| bound.outcome(idx, &r))?);
    }
    Ok(out)
}

/// Injective map `f: tp -> w` with `v_j(s_i*, s_-i) <= v_i(s_i*, s_-i)` for
/// `i = f(j)`, where `w` is the winning basis at the profile.
pub fn threshold_matching<S: Scalar>(
    inst: &Instance<S>,
    profile: usize,
    w: AgentSet,
    tp: AgentSet,
) -> Result<BTreeMap<usize, usize>, MechanismError> {
    inst.require_matroid("threshold matching")?;
    let feas = inst.feasibility();
    let all = AgentSet::full(inst.agents());
    if !tp.is_disjoint(w) || !feas.is_independent(tp)? {
        return Err(MechanismError::Config(format!(
            "{tp} must be independent and disjoint from {w}"
        )));
    }
    let t = tentative(inst, profile, all)?;
    if t.winners != w {
        return Err(MechanismError::Config(format!(
            "{w} is not the winning set {} at this profile",
            t.winners
        )));
    }
    let padded = feas.pad_to_basis(tp, w, inst.tie_break())?;
    let left = inst.tie_break().sorted(padded);
    let right = inst.tie_break().sorted(w);
    if left.len() != right.len() {
        return Err(MechanismError::InvariantViolation(format!(
            "padded set {padded} and {w} differ in size"
        )));
    }
    let space = inst.space();
    let at_threshold = |i: usize| -> Result<usize, MechanismError> {
        match &t.thresholds[i] {
            Threshold::At { index, .. } => Ok(space.index_with(profile, i, *index)),
            other => Err(MechanismError::InvariantViolation(format!(
                "winner {i} has threshold {other}"
            ))),
        }
    };
    let mut adjacency = Vec::with_capacity(left.len());
    for &j in &left {
        let mut row = Vec::new();
        for (k, &i) in right.iter().enumerate() {
            let at = at_threshold(i)?;
            if inst.value(at, i).approx_ge(inst.value(at, j)) {
                row.push(k);
            }
        }
        adjacency.push(row);
    }
    let mates = bipartite::maximum_matching(right.len(), &adjacency);
    let mut map = BTreeMap::new();
    for (l, m) in mates.into_iter().enumerate() {
        let r = m.ok_or_else(|| {
            MechanismError::InvariantViolation(format!(
                "no threshold matching: {} is unmatched",
                left[l]
            ))
        })?;
        if tp.contains(left[l]) {
            map.insert(left[l], right[r]);
        }
    }
    Ok(map)
}

/// Thresholds of one agent with and without eager removal.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow<S> {
    pub agent: usize,
    /// Threshold with every agent active.
    pub lazy: Threshold<S>,
    /// Threshold among the agents meeting their reserves.
    pub eager: Threshold<S>,
    pub removed: bool,
}

/// Per-agent thresholds under lazy and eager reserves at one profile.
pub fn threshold_comparison<S: Scalar>(
    inst: &Instance<S>,
    profile: usize,
    reserves: &[S],
) -> Result<Vec<ThresholdRow<S>>, MechanismError> {
    inst.require_private("the eager threshold comparison")?;
    let all = AgentSet::full(inst.agents());
    let surviving: AgentSet = all
        .iter()
        .filter(|&j| inst.value(profile, j).approx_ge(&reserves[j]))
        .collect();
    let lazy = tentative(inst, profile, all)?;
    let eager = tentative(inst, profile, surviving)?;
    Ok((0..inst.agents())
        .map(|i| ThresholdRow {
            agent: i,
            lazy: lazy.thresholds[i].clone(),
            eager: eager.thresholds[i].clone(),
            removed: !surviving.contains(i),
        })
        .collect())
}
