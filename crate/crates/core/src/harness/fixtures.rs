//! Named instances used throughout the tests and the fixture corpus.

use crate::agents::{AgentSet, TieBreak};
use crate::matroid::FeasibilitySystem;
use crate::mechanism::{Instance, MechanismError};
use crate::scalar::{q, Scalar};
use crate::stochastic::{JointDistribution, SignalGrid};
use crate::valuation::{ValuationFamily, ValuationProfile};

/// Independent uniform signals on the given grids.
pub fn uniform_product<S: Scalar>(
    name: &str,
    grids: Vec<Vec<S>>,
    feas: FeasibilitySystem,
    family: ValuationFamily<S>,
) -> Result<Instance<S>, MechanismError> {
    let n = grids.len();
    let marginals = grids
        .iter()
        .map(|g| vec![q(1, g.len() as i64); g.len()])
        .collect();
    let grid = SignalGrid::new(grids)?;
    let dist = JointDistribution::from_product(&grid, marginals)?;
    let valuation = ValuationProfile::new(n, family)?;
    Instance::new(name, grid, dist, valuation, feas, TieBreak::ascending(n))
}

/// Two i.i.d. uniform{1, 2} private bidders, one item.
pub fn tiny1<S: Scalar>() -> Instance<S> {
    let g = vec![q(1, 1), q(2, 1)];
    uniform_product(
        "tiny-1",
        vec![g.clone(), g],
        FeasibilitySystem::uniform(2, 1).expect("valid"),
        ValuationFamily::Private,
    )
    .expect("valid fixture")
}

/// Agent 0's signal is `2^m` with probability `2^-(m+1)` for `m < k` and the
/// remaining `2^-k` on `2^k`; agent 1 has one signal and values the item at
/// agent 0's signal minus `eps`. One item.
pub fn gap<S: Scalar>(k: u32, eps: S) -> Result<Instance<S>, MechanismError> {
    let points: Vec<S> = (0..=k).map(|m| q(1i64 << m, 1)).collect();
    let probs: Vec<S> = (0..=k)
        .map(|m| if m < k { q(1, 1i64 << (m + 1)) } else { q(1, 1i64 << k) })
        .collect();
    let grid = SignalGrid::new(vec![points.clone(), vec![S::zero()]])?;
    let dist = JointDistribution::from_table(
        &grid,
        probs.into_iter().enumerate().map(|(m, p)| (vec![m, 0], p)).collect(),
    )?;
    let values = points
        .iter()
        .map(|s| vec![s.clone(), s.clone() - eps.clone()])
        .collect();
    let valuation = ValuationProfile::new(2, ValuationFamily::Table { values })?;
    Instance::new(
        format!("gap-{k}"),
        grid,
        dist,
        valuation,
        FeasibilitySystem::uniform(2, 1)?,
        TieBreak::ascending(2),
    )
}

/// Downward-closed non-matroid `{∅, {0}, {1}, {0,1}, {2}}` with private
/// values; at the profile `(1, 0.5, 1.2)` removing agent 1 raises agent 0's
/// threshold from 0.7 to 1.2.
pub fn nonmat1<S: Scalar>() -> Instance<S> {
    let sets = [&[][..], &[0], &[1], &[0, 1], &[2]]
        .iter()
        .map(|s| s.iter().copied().collect::<AgentSet>())
        .collect();
    uniform_product(
        "nonmat-1",
        vec![
            vec![q(1, 2), q(7, 10), q(1, 1), q(6, 5)],
            vec![q(1, 2), q(1, 1)],
            vec![q(1, 1), q(6, 5)],
        ],
        FeasibilitySystem::explicit(3, sets).expect("downward closed"),
        ValuationFamily::Private,
    )
    .expect("valid fixture")
}

/// Grid indices of the profile `(1, 0.5, 1.2)` in [`nonmat1`].
pub const NONMAT1_PROFILE: [usize; 3] = [2, 0, 1];

/// A point mass on the given private values.
pub fn point_mass<S: Scalar>(values: &[S], feas: FeasibilitySystem) -> Result<Instance<S>, MechanismError> {
    let n = values.len();
    let grid = SignalGrid::new(values.iter().map(|v| vec![v.clone()]).collect())?;
    let dist = JointDistribution::from_table(&grid, vec![(vec![0; n], S::one())])?;
    Instance::new("point-mass", grid, dist, ValuationProfile::private(n), feas, TieBreak::ascending(n))
}

/// One bidder whose private value takes `values[k]` with probability `probs[k]`.
pub fn single_bidder<S: Scalar>(values: Vec<S>, probs: Vec<S>) -> Result<Instance<S>, MechanismError> {
    let grid = SignalGrid::new(vec![values])?;
    let dist = JointDistribution::from_product(&grid, vec![probs])?;
    Instance::new(
        "single-bidder",
        grid,
        dist,
        ValuationProfile::private(1),
        FeasibilitySystem::uniform(1, 1)?,
        TieBreak::ascending(1),
    )
}
