use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agents::AgentSet;
use crate::scalar::Scalar;
use crate::stochastic::ScalarDistribution;

use super::core::threshold;
use super::{Instance, MechanismError, Threshold};

/// Which event a conditional reserve conditions on besides `s_-i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conditioning {
    /// `S_-i = s_-i` and `i` being a tentative winner within the active set.
    #[default]
    Winner,
    /// `S_-i = s_-i` only.
    OthersOnly,
}

impl fmt::Display for Conditioning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Conditioning::Winner => "winner",
            Conditioning::OthersOnly => "others-only",
        })
    }
}

impl FromStr for Conditioning {
    type Err = MechanismError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "winner" => Ok(Conditioning::Winner),
            "others-only" => Ok(Conditioning::OthersOnly),
            other => Err(MechanismError::Config(format!("unknown conditioning `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReserveEvent {
    WinnerWithin(AgentSet),
    Unconditioned,
}

/// Departures from the requested conditioning, taken when it has zero mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    /// `P[S_-i = s_-i] = 0`; the marginal of `S_i` was used.
    MarginalSignal,
    /// The winner event had zero mass; the reserve ignores it.
    UnconditionedEvent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReserveQuote<S> {
    pub agent: usize,
    /// Human-readable conditioning description.
    pub event: String,
    pub price: S,
    /// Expected revenue of the price under the stated conditioning.
    pub revenue: Option<S>,
    pub fallbacks: Vec<Fallback>,
}

impl<S: Scalar> ReserveQuote<S> {
    pub fn posted(agent: usize, price: S, event: &str) -> Self {
        ReserveQuote {
            agent,
            event: event.to_string(),
            price,
            revenue: None,
            fallbacks: Vec::new(),
        }
    }
}

/// What a reserve policy may see: everything except the agent's own signal.
pub struct OthersView<'a, S> {
    inst: &'a Instance<S>,
    profile: usize,
    agent: usize,
    active: AgentSet,
    threshold: &'a Threshold<S>,
}

impl<'a, S: Scalar> OthersView<'a, S> {
    pub(crate) fn new(
        inst: &'a Instance<S>,
        profile: usize,
        agent: usize,
        active: AgentSet,
        threshold: &'a Threshold<S>,
    ) -> Self {
        OthersView {
            inst,
            profile,
            agent,
            active,
            threshold,
        }
    }

    pub fn instance(&self) -> &'a Instance<S> {
        self.inst
    }

    pub fn agent(&self) -> usize {
        self.agent
    }

    pub fn active(&self) -> AgentSet {
        self.active
    }

    /// The agent's threshold within the active set (a function of `s_-i`).
    pub fn threshold(&self) -> &Threshold<S> {
        self.threshold
    }

    /// Grid index of agent `j`'s signal. Asking for the agent's own signal
    /// is an audit error.
    pub fn signal(&self, j: usize) -> Result<usize, MechanismError> {
        if j == self.agent {
            return Err(MechanismError::ReserveAudit { agent: j });
        }
        Ok(self.inst.space().coordinate(self.profile, j))
    }

    /// Profile index with the agent's own coordinate zeroed.
    pub fn others_profile(&self) -> usize {
        self.inst.space().index_with(self.profile, self.agent, 0)
    }

    #[doc(hidden)]
    pub fn leak_profile(&self) -> usize {
        self.profile
    }
}

/// A source of reserve prices. Implementations must not read `s_i`.
pub trait ReservePolicy<S: Scalar>: Sync {
    fn quote(&self, view: &OthersView<'_, S>) -> Result<ReserveQuote<S>, MechanismError>;
}

/// Posted reserves that ignore the profile.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedReserves<S>(pub Vec<S>);

impl<S: Scalar> ReservePolicy<S> for FixedReserves<S> {
    fn quote(&self, view: &OthersView<'_, S>) -> Result<ReserveQuote<S>, MechanismError> {
        let i = view.agent();
        let price = self.0.get(i).cloned().ok_or_else(|| {
            MechanismError::Config(format!("no reserve for agent {i}"))
        })?;
        Ok(ReserveQuote::posted(i, price, "fixed"))
    }
}

/// The conditional monopoly reserve of the lookahead auction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConditionalMonopoly {
    pub conditioning: Conditioning,
}

impl<S: Scalar> ReservePolicy<S> for ConditionalMonopoly {
    fn quote(&self, view: &OthersView<'_, S>) -> Result<ReserveQuote<S>, MechanismError> {
        let winner = match self.conditioning {
            Conditioning::Winner => Some(view.threshold()),
            Conditioning::OthersOnly => None,
        };
        conditional_quote(view.instance(), view.agent(), view.others_profile(), winner)
    }
}

/// Charges the agent's own reported value. Reads `s_i`, so it breaks
/// incentive compatibility; it exists to exercise the audit.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, Default)]
pub struct OwnSignalReserve;

impl<S: Scalar> ReservePolicy<S> for OwnSignalReserve {
    fn quote(&self, view: &OthersView<'_, S>) -> Result<ReserveQuote<S>, MechanismError> {
        let price = view.instance().value(view.leak_profile(), view.agent()).clone();
        Ok(ReserveQuote::posted(view.agent(), price, "own value"))
    }
}

/// Optimal posted price for `v_i(S_i, s_-i)` given `S_-i = s_-i`, optionally
/// also given that `i` wins within `active`.
pub fn conditional_monopoly_reserve<S: Scalar>(
    inst: &Instance<S>,
    agent: usize,
    profile: usize,
    event: ReserveEvent,
) -> Result<ReserveQuote<S>, MechanismError> {
    let others = inst.space().index_with(profile, agent, 0);
    match event {
        ReserveEvent::WinnerWithin(active) => {
            let t = threshold(inst, others, active, agent)?;
            conditional_quote(inst, agent, others, Some(&t))
        }
        ReserveEvent::Unconditioned => conditional_quote(inst, agent, others, None),
    }
}

fn conditional_quote<S: Scalar>(
    inst: &Instance<S>,
    agent: usize,
    others: usize,
    winner: Option<&Threshold<S>>,
) -> Result<ReserveQuote<S>, MechanismError> {
    let space = inst.space();
    let mut fallbacks = Vec::new();
    let weights = match inst.dist().conditional_weights(agent, &space.decode(others)) {
        Ok(w) => w,
        Err(e) => {
            log::debug!("agent {agent}: {e}; using the marginal signal distribution");
            fallbacks.push(Fallback::MarginalSignal);
            inst.dist().marginal(agent).to_vec()
        }
    };
    let atoms = weights
        .into_iter()
        .enumerate()
        .map(|(t, w)| (inst.value(space.index_with(others, agent, t), agent).clone(), w))
        .collect();
    let base = ScalarDistribution::new(atoms)?;
    let mut event = String::from("s_-i");
    let dist = match winner {
        None => base,
        Some(Threshold::At { value, .. }) => match base.truncate_above(value) {
            Ok(d) => {
                event.push_str(&format!(", v_i >= {value}"));
                d
            }
            Err(_) => {
                log::debug!("agent {agent}: winner event has zero mass; reserve ignores it");
                fallbacks.push(Fallback::UnconditionedEvent);
                base
            }
        },
        Some(t) => {
            log::debug!("agent {agent}: winner event is empty ({t}); reserve ignores it");
            fallbacks.push(Fallback::UnconditionedEvent);
            base
        }
    };
    let m = dist.monopoly_price();
    Ok(ReserveQuote {
        agent,
        event,
        price: m.price,
        revenue: Some(m.revenue),
        fallbacks,
    })
}

/// Distribution of `v_i(S)` under the joint distribution.
pub fn value_marginal<S: Scalar>(
    inst: &Instance<S>,
    agent: usize,
) -> Result<ScalarDistribution<S>, MechanismError> {
    let atoms = inst
        .dist()
        .support_indices()
        .into_iter()
        .map(|idx| (inst.value(idx, agent).clone(), inst.dist().prob_at(idx).clone()))
        .collect();
    Ok(ScalarDistribution::new(atoms)?)
}

/// Monopoly price of each agent's value distribution in isolation.
pub fn monopoly_reserves<S: Scalar>(inst: &Instance<S>) -> Result<Vec<S>, MechanismError> {
    (0..inst.agents())
        .map(|i| Ok(value_marginal(inst, i)?.monopoly_price().price))
        .collect()
}
