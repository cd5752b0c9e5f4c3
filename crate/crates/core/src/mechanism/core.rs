use crate::agents::AgentSet;
use crate::matroid::BasisMode;
use crate::scalar::Scalar;

use super::reserve::{OthersView, ReservePolicy};
use super::{AgentOutcome, AuctionOutcome, Instance, MechanismError, Threshold};

/// Welfare-maximizing feasible subset of `active` at a profile.
pub fn winners<S: Scalar>(
    inst: &Instance<S>,
    profile: usize,
    active: AgentSet,
) -> Result<AgentSet, MechanismError> {
    Ok(inst
        .feasibility()
        .max_weight_basis_within(active, inst.values().row(profile), inst.tie_break(), BasisMode::Full)?
        .elements)
}

/// Smallest own grid index at which `agent` is in the winning set within
/// `active`, the others' signals fixed.
pub(crate) fn threshold<S: Scalar>(
    inst: &Instance<S>,
    profile: usize,
    active: AgentSet,
    agent: usize,
) -> Result<Threshold<S>, MechanismError> {
    if !active.contains(agent) {
        return Ok(Threshold::Inactive);
    }
    let space = inst.space();
    for t in 0..space.radix(agent) {
        let at = space.index_with(profile, agent, t);
        if winners(inst, at, active)?.contains(agent) {
            return Ok(Threshold::At {
                index: t,
                signal: inst.grid().signal(agent, t).clone(),
                value: inst.value(at, agent).clone(),
            });
        }
    }
    Ok(Threshold::NeverWins)
}

pub(crate) struct Tentative<S> {
    pub winners: AgentSet,
    pub thresholds: Vec<Threshold<S>>,
}

pub(crate) fn tentative<S: Scalar>(
    inst: &Instance<S>,
    profile: usize,
    active: AgentSet,
) -> Result<Tentative<S>, MechanismError> {
    let winners = winners(inst, profile, active)?;
    let thresholds = (0..inst.agents())
        .map(|i| threshold(inst, profile, active, i))
        .collect::<Result<Vec<_>, _>>()?;
    debug_assert!(thresholds.iter().enumerate().all(|(i, t)| {
        let wins_by_threshold = t
            .index()
            .is_some_and(|k| k <= inst.space().coordinate(profile, i));
        wins_by_threshold == winners.contains(i)
    }));
    Ok(Tentative {
        winners,
        thresholds,
    })
}

fn blank<S: Scalar>(thresholds: Vec<Threshold<S>>) -> Vec<AgentOutcome<S>> {
    thresholds
        .into_iter()
        .map(|threshold| AgentOutcome {
            alloc: S::zero(),
            payment: S::zero(),
            threshold,
            reserve: S::zero(),
        })
        .collect()
}

fn threshold_price<S: Scalar>(t: &Threshold<S>) -> Result<S, MechanismError> {
    t.value().cloned().ok_or_else(|| {
        MechanismError::InvariantViolation(format!("a tentative winner has threshold {t}"))
    })
}

/// Serves the welfare-maximizing set within `active` at threshold prices.
pub fn gvcg<S: Scalar>(
    inst: &Instance<S>,
    profile: usize,
    active: AgentSet,
) -> Result<AuctionOutcome<S>, MechanismError> {
    inst.require_gvcg_assumptions()?;
    let t = tentative(inst, profile, active)?;
    let mut agents = blank(t.thresholds);
    for i in t.winners.iter() {
        agents[i].alloc = S::one();
        agents[i].payment = threshold_price(&agents[i].threshold)?;
    }
    Ok(AuctionOutcome {
        agents,
        winners: t.winners,
        served: t.winners,
        admitted: None,
    })
}

/// GVCG with lazy reserves: each tentative winner is offered
/// `max(r_i, p_i)` and buys when the value covers it.
pub fn gvcg_lazy<S: Scalar>(
    inst: &Instance<S>,
    profile: usize,
    active: AgentSet,
    policy: &dyn ReservePolicy<S>,
) -> Result<AuctionOutcome<S>, MechanismError> {
    inst.require_gvcg_assumptions()?;
    let t = tentative(inst, profile, active)?;
    let mut agents = blank(t.thresholds);
    let mut served = AgentSet::empty();
    for i in t.winners.iter() {
        let quote = {
            let view = OthersView::new(inst, profile, i, active, &agents[i].threshold);
            policy.quote(&view)?
        };
        let price = quote.price.clone().max_of(threshold_price(&agents[i].threshold)?);
        agents[i].reserve = quote.price;
        if inst.value(profile, i).approx_ge(&price) {
            agents[i].alloc = S::one();
            agents[i].payment = price;
            served.insert(i);
        }
    }
    Ok(AuctionOutcome {
        agents,
        winners: t.winners,
        served,
        admitted: None,
    })
}

/// VCG with eager reserves: agents below their reserve are dropped before
/// the welfare-maximizing set is chosen. Private values only.
pub fn vcg_eager<S: Scalar>(
    inst: &Instance<S>,
    profile: usize,
    active: AgentSet,
    reserves: &[S],
) -> Result<AuctionOutcome<S>, MechanismError> {
    inst.require_private("vcg-eager")?;
    if reserves.len() != inst.agents() {
        return Err(MechanismError::Config(format!(
            "{} reserves for {} agents",
            reserves.len(),
            inst.agents()
        )));
    }
    let surviving: AgentSet = active
        .iter()
        .filter(|&j| inst.value(profile, j).approx_ge(&reserves[j]))
        .collect();
    let t = tentative(inst, profile, surviving)?;
    let mut agents = blank(t.thresholds);
    for i in active.iter() {
        agents[i].reserve = reserves[i].clone();
    }
    for i in t.winners.iter() {
        agents[i].alloc = S::one();
        agents[i].payment = reserves[i].clone().max_of(threshold_price(&agents[i].threshold)?);
    }
    Ok(AuctionOutcome {
        agents,
        winners: t.winners,
        served: t.winners,
        admitted: None,
    })
}
