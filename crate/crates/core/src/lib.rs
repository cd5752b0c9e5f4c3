//! Generalized-VCG auctions with interdependent values under matroid
//! feasibility, with an exact LP revenue oracle and an experiment harness.

pub mod agents;
pub mod bipartite;
pub mod matroid;
pub mod scalar;
pub mod stochastic;
pub mod valuation;
pub mod mechanism;
pub mod oracle;
pub mod harness;
