//! The auction family: GVCG thresholds, lazy and eager reserves, the
//! lookahead auction and the randomized-admission variants, plus exact
//! revenue, revenue upper bounds and ex post IC/IR audits.

mod analysis;
mod core;
mod instance;
mod reserve;
mod spec;

pub use self::analysis::{
    audit_outcomes, audit_table, expected_revenue, ic_ir_audit, opt_upper_bound, subsample_comparison,
    threshold_comparison, threshold_matching, AuditKind, AuditViolation, RevenueEstimate, RevenueMode, SubsampleComparison, ThresholdRow,
    DEFAULT_ATOM_CAP,
};
pub use self::core::{gvcg, gvcg_lazy, vcg_eager, winners};
pub use self::instance::Instance;
pub use self::reserve::{
    conditional_monopoly_reserve, monopoly_reserves, value_marginal, Conditioning,
    ConditionalMonopoly, Fallback, FixedReserves, OthersView, OwnSignalReserve, ReserveEvent,
    ReservePolicy, ReserveQuote,
};
pub use self::spec::{BoundMechanism, Mechanism, MechanismId, Realization, ReserveSource};


use std::fmt;

use thiserror::Error;

use crate::agents::AgentSet;
use crate::matroid::MatroidError;
use crate::scalar::{sum, Scalar};
use crate::stochastic::DistributionError;
use crate::valuation::ValuationError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MechanismError {
    #[error("assumption check failed: {0}")]
    Assumption(String),
    #[error("wrong mechanism variant: {0}")]
    WrongVariant(String),
    #[error("reserve for agent {agent} read the agent's own signal")]
    ReserveAudit { agent: usize },
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Matroid(#[from] MatroidError),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
    #[error("{0}")]
    Size(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Critical signal of one agent given the others' signals.
#[derive(Debug, Clone, PartialEq)]
pub enum Threshold<S> {
    /// Smallest grid index at which the agent wins, its signal and
    /// `v_i(s_i*, s_-i)`.
    At { index: usize, signal: S, value: S },
    /// The agent wins at no grid point.
    NeverWins,
    /// The agent was not eligible.
    Inactive,
}

impl<S: Scalar> Threshold<S> {
    pub fn value(&self) -> Option<&S> {
        match self {
            Threshold::At { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn index(&self) -> Option<usize> {
        match self {
            Threshold::At { index, .. } => Some(*index),
            _ => None,
        }
    }
}

impl<S: Scalar> fmt::Display for Threshold<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::At { signal, value, .. } => write!(f, "s*={signal} p={value}"),
            Threshold::NeverWins => f.write_str("never-wins"),
            Threshold::Inactive => f.write_str("inactive"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentOutcome<S> {
    pub alloc: S,
    pub payment: S,
    pub threshold: Threshold<S>,
    pub reserve: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuctionOutcome<S> {
    pub agents: Vec<AgentOutcome<S>>,
    /// Tentative winners `W`.
    pub winners: AgentSet,
    pub served: AgentSet,
    /// Admission set `Z`, when the mechanism samples one.
    pub admitted: Option<AgentSet>,
}

impl<S: Scalar> AuctionOutcome<S> {
    pub fn revenue(&self) -> S {
        sum(self.agents.iter().map(|a| a.payment.clone()))
    }

    /// Total value of the served agents.
    pub fn welfare(&self, inst: &Instance<S>, profile: usize) -> S {
        sum(self.served.iter().map(|i| inst.value(profile, i).clone()))
    }

    pub fn payment(&self, agent: usize) -> &S {
        &self.agents[agent].payment
    }

    pub fn threshold_value(&self, agent: usize) -> Option<&S> {
        self.agents[agent].threshold.value()
    }
}
