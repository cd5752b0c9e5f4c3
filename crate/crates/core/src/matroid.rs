//! Feasibility systems as independence oracles, plus the matroid algorithms
//! used by the mechanisms and their analysis: greedy max-weight bases, rank,
//! strong basis exchange, exchange bijections and the coupled exchange walk.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::agents::{AgentSet, TieBreak, MAX_AGENTS};
use crate::bipartite;
use crate::scalar::Scalar;

/// Largest ground set for which an explicit family is accepted (the exchange
/// axiom is verified exhaustively at construction).
pub const EXPLICIT_GROUND_LIMIT: usize = 12;

/// Largest ground set whose feasible family may be enumerated.
pub const ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatroidError {
    #[error("element {0} is outside the ground set")]
    OutsideGround(usize),
    #[error("operation `{0}` requires a matroid")]
    Unsupported(&'static str),
    #[error("invalid feasibility system: {0}")]
    Invalid(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("matroid invariant violated (corrupt oracle?): {0}")]
    InvariantViolation(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeasibilityKind {
    Uniform {
        k: usize,
    },
    Partition {
        blocks: Vec<AgentSet>,
        capacities: Vec<usize>,
    },
    /// Agent `i` may be assigned to any slot in `adjacency[i]`.
    Transversal {
        slots: usize,
        adjacency: Vec<Vec<usize>>,
    },
    /// Agent `i` is edge `edges[i]`.
    Graphic {
        vertices: usize,
        edges: Vec<(usize, usize)>,
    },
    Explicit {
        family: Vec<AgentSet>,
    },
}

/// Whether greedy may stop at nonpositive weights or must return a maximal set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisMode {
    /// Maximal independent set of maximum weight (GVCG uses this).
    Full,
    /// Only elements with strictly positive weight are admitted.
    PositiveOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Basis<S> {
    pub elements: AgentSet,
    pub weight: S,
}

/// Output of [`FeasibilitySystem::coupled_exchange_walk`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExchangeWalk {
    pub final_basis: AgentSet,
    pub admitted: AgentSet,
}

/// An independence system over agents `0..n`, possibly restricted to a ground
/// subset. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilitySystem {
    agents: usize,
    ground: AgentSet,
    kind: FeasibilityKind,
    is_matroid: bool,
}

impl FeasibilitySystem {
    pub fn uniform(agents: usize, k: usize) -> Result<Self, MatroidError> {
        check_agents(agents)?;
        Ok(Self::from_parts(agents, FeasibilityKind::Uniform { k }, true))
    }

    pub fn partition(
        agents: usize,
        blocks: Vec<Vec<usize>>,
        capacities: Vec<usize>,
    ) -> Result<Self, MatroidError> {
        check_agents(agents)?;
        if blocks.len() != capacities.len() {
            return Err(MatroidError::Invalid(format!(
                "{} blocks but {} capacities",
                blocks.len(),
                capacities.len()
            )));
        }
        let mut covered = AgentSet::empty();
        let mut sets = Vec::with_capacity(blocks.len());
        for block in blocks {
            let set: AgentSet = block.iter().copied().filter(|&a| a < MAX_AGENTS).collect();
            if block.iter().any(|&a| a >= agents) {
                return Err(MatroidError::Invalid(format!(
                    "partition block {block:?} names an agent outside 0..{agents}"
                )));
            }
            if !set.is_disjoint(covered) {
                return Err(MatroidError::Invalid("partition blocks overlap".into()));
            }
            covered = covered.union(set);
            sets.push(set);
        }
        if covered != AgentSet::full(agents) {
            return Err(MatroidError::Invalid(format!(
                "partition blocks do not cover agents {}",
                AgentSet::full(agents).difference(covered)
            )));
        }
        Ok(Self::from_parts(
            agents,
            FeasibilityKind::Partition {
                blocks: sets,
                capacities,
            },
            true,
        ))
    }

    pub fn transversal(agents: usize, adjacency: Vec<Vec<usize>>) -> Result<Self, MatroidError> {
        check_agents(agents)?;
        if adjacency.len() != agents {
            return Err(MatroidError::Invalid(format!(
                "transversal adjacency lists {} agents, expected {agents}",
                adjacency.len()
            )));
        }
        let slots = adjacency
            .iter()
            .flat_map(|v| v.iter().copied())
            .max()
            .map_or(0, |m| m + 1);
        Ok(Self::from_parts(
            agents,
            FeasibilityKind::Transversal { slots, adjacency },
            true,
        ))
    }

    /// One agent per edge.
    pub fn graphic(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self, MatroidError> {
        check_agents(edges.len())?;
        if let Some(e) = edges.iter().find(|(u, v)| *u >= vertices || *v >= vertices) {
            return Err(MatroidError::Invalid(format!(
                "edge {e:?} references a vertex outside 0..{vertices}"
            )));
        }
        Ok(Self::from_parts(
            edges.len(),
            FeasibilityKind::Graphic { vertices, edges },
            true,
        ))
    }

    /// An explicit family of feasible sets; must contain the empty set and be
    /// downward closed. Matroid-ness is decided here by checking the exchange
    /// axiom on every pair of members.
    pub fn explicit(agents: usize, sets: Vec<AgentSet>) -> Result<Self, MatroidError> {
        check_agents(agents)?;
        if agents > EXPLICIT_GROUND_LIMIT {
            return Err(MatroidError::Invalid(format!(
                "explicit families are limited to {EXPLICIT_GROUND_LIMIT} agents, got {agents}"
            )));
        }
        let universe = AgentSet::full(agents);
        let mut family = sets;
        family.sort();
        family.dedup();
        if let Some(bad) = family.iter().find(|s| !s.is_subset(universe)) {
            return Err(MatroidError::Invalid(format!(
                "feasible set {bad} names an agent outside 0..{agents}"
            )));
        }
        if family.binary_search(&AgentSet::empty()).is_err() {
            return Err(MatroidError::Invalid("the empty set must be feasible".into()));
        }
        for s in &family {
            for e in s.iter() {
                if family.binary_search(&s.without(e)).is_err() {
                    return Err(MatroidError::Invalid(format!(
                        "family is not downward closed: {s} is feasible but {} is not",
                        s.without(e)
                    )));
                }
            }
        }
        let is_matroid = exchange_axiom_holds(&family);
        Ok(Self::from_parts(
            agents,
            FeasibilityKind::Explicit { family },
            is_matroid,
        ))
    }

    fn from_parts(agents: usize, kind: FeasibilityKind, is_matroid: bool) -> Self {
        FeasibilitySystem {
            agents,
            ground: AgentSet::full(agents),
            kind,
            is_matroid,
        }
    }

    /// Number of agents in the universe the system was built over.
    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn ground(&self) -> AgentSet {
        self.ground
    }

    pub fn kind(&self) -> &FeasibilityKind {
        &self.kind
    }

    pub fn is_matroid(&self) -> bool {
        self.is_matroid
    }

    /// True for a 1-uniform system (single-item auctions).
    pub fn is_single_item(&self) -> bool {
        matches!(self.kind, FeasibilityKind::Uniform { k: 1 })
    }

    fn check_subset(&self, subset: AgentSet) -> Result<(), MatroidError> {
        match subset.difference(self.ground).iter().next() {
            Some(e) => Err(MatroidError::OutsideGround(e)),
            None => Ok(()),
        }
    }

    fn require_matroid(&self, op: &'static str) -> Result<(), MatroidError> {
        if self.is_matroid {
            Ok(())
        } else {
            Err(MatroidError::Unsupported(op))
        }
    }

    /// Membership in the feasible family.
    pub fn is_independent(&self, subset: AgentSet) -> Result<bool, MatroidError> {
        self.check_subset(subset)?;
        Ok(self.independent_unchecked(subset))
    }

    fn independent_unchecked(&self, s: AgentSet) -> bool {
        match &self.kind {
            FeasibilityKind::Uniform { k } => s.len() <= *k,
            FeasibilityKind::Partition { blocks, capacities } => blocks
                .iter()
                .zip(capacities)
                .all(|(b, &cap)| s.intersection(*b).len() <= cap),
            FeasibilityKind::Transversal { slots, adjacency } => {
                let adj: Vec<Vec<usize>> = s.iter().map(|a| adjacency[a].clone()).collect();
                bipartite::matching_size(*slots, &adj) == s.len()
            }
            FeasibilityKind::Graphic { vertices, edges } => {
                let mut parent: Vec<usize> = (0..*vertices).collect();
                fn find(p: &mut [usize], mut x: usize) -> usize {
                    while p[x] != x {
                        p[x] = p[p[x]];
                        x = p[x];
                    }
                    x
                }
                for e in s.iter() {
                    let (u, v) = edges[e];
                    let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                    if ru == rv {
                        return false;
                    }
                    parent[ru] = rv;
                }
                true
            }
            FeasibilityKind::Explicit { family } => family.binary_search(&s).is_ok(),
        }
    }

    /// Size of a largest independent subset of `subset`.
    pub fn rank(&self, subset: AgentSet) -> Result<usize, MatroidError> {
        self.require_matroid("rank")?;
        self.check_subset(subset)?;
        let mut chosen = AgentSet::empty();
        for e in subset.iter() {
            if self.independent_unchecked(chosen.with(e)) {
                chosen.insert(e);
            }
        }
        Ok(chosen.len())
    }

    pub fn full_rank(&self) -> Result<usize, MatroidError> {
        self.rank(self.ground)
    }

    pub fn is_basis(&self, set: AgentSet) -> Result<bool, MatroidError> {
        self.require_matroid("is_basis")?;
        Ok(self.is_independent(set)? && set.len() == self.full_rank()?)
    }

    /// Maximum-weight feasible set over the whole ground set.
    pub fn max_weight_basis<S: Scalar>(
        &self,
        weights: &[S],
        tie: &TieBreak,
        mode: BasisMode,
    ) -> Result<Basis<S>, MatroidError> {
        self.max_weight_basis_within(self.ground, weights, tie, mode)
    }

    /// Maximum-weight feasible subset of `candidates`.
    ///
    /// Matroids use the greedy algorithm (decreasing weight, ties to the
    /// earlier agent in `tie`). Non-matroid explicit families are searched
    /// exhaustively; among equal-weight sets the one containing the
    /// highest-priority agent of the symmetric difference wins, which is the
    /// same rule greedy realizes on matroids.
    pub fn max_weight_basis_within<S: Scalar>(
        &self,
        candidates: AgentSet,
        weights: &[S],
        tie: &TieBreak,
        mode: BasisMode,
    ) -> Result<Basis<S>, MatroidError> {
        self.check_subset(candidates)?;
        if let Some(e) = candidates.iter().find(|&e| e >= weights.len()) {
            return Err(MatroidError::Precondition(format!("no weight for element {e}")));
        }
        let elements = if self.is_matroid {
            self.greedy(candidates, weights, tie, mode)
        } else {
            self.exhaustive_best(candidates, weights, tie, mode)
        };
        let weight = crate::scalar::sum(elements.iter().map(|e| weights[e].clone()));
        Ok(Basis { elements, weight })
    }

    fn greedy<S: Scalar>(
        &self,
        candidates: AgentSet,
        weights: &[S],
        tie: &TieBreak,
        mode: BasisMode,
    ) -> AgentSet {
        let mut remaining = priority_list(tie, candidates);
        let mut chosen = AgentSet::empty();
        while !remaining.is_empty() {
            let mut best = 0;
            for pos in 1..remaining.len() {
                if weights[remaining[pos]].definitely_gt(&weights[remaining[best]]) {
                    best = pos;
                }
            }
            let e = remaining.remove(best);
            if mode == BasisMode::PositiveOnly && !weights[e].is_positive() {
                break;
            }
            if self.independent_unchecked(chosen.with(e)) {
                chosen.insert(e);
            }
        }
        chosen
    }

    fn exhaustive_best<S: Scalar>(
        &self,
        candidates: AgentSet,
        weights: &[S],
        tie: &TieBreak,
        mode: BasisMode,
    ) -> AgentSet {
        let mut best: Option<(AgentSet, S)> = None;
        for set in self.feasible_subsets_of(candidates) {
            if mode == BasisMode::Full
                && candidates
                    .difference(set)
                    .iter()
                    .any(|e| self.independent_unchecked(set.with(e)))
            {
                continue;
            }
            let w = crate::scalar::sum(set.iter().map(|e| weights[e].clone()));
            let better = match &best {
                None => true,
                Some((incumbent, bw)) => {
                    if w.definitely_gt(bw) {
                        true
                    } else if bw.definitely_gt(&w) {
                        false
                    } else if mode == BasisMode::PositiveOnly && set.len() != incumbent.len() {
                        set.len() < incumbent.len()
                    } else {
                        priority_prefers(tie, set, *incumbent)
                    }
                }
            };
            if better {
                best = Some((set, w));
            }
        }
        best.map(|(s, _)| s).unwrap_or_default()
    }

    fn feasible_subsets_of(&self, within: AgentSet) -> Vec<AgentSet> {
        match &self.kind {
            FeasibilityKind::Explicit { family } => family
                .iter()
                .copied()
                .filter(|s| s.is_subset(within))
                .collect(),
            _ => within
                .subsets()
                .filter(|&s| self.independent_unchecked(s))
                .collect(),
        }
    }

    /// Every feasible subset of the ground set.
    pub fn feasible_family(&self) -> Result<Vec<AgentSet>, MatroidError> {
        if !matches!(self.kind, FeasibilityKind::Explicit { .. })
            && self.ground.len() > ENUMERATION_LIMIT
        {
            return Err(MatroidError::Precondition(format!(
                "ground set of {} elements is too large to enumerate",
                self.ground.len()
            )));
        }
        let mut family = self.feasible_subsets_of(self.ground);
        family.sort();
        Ok(family)
    }

    /// The system whose feasible sets are the feasible subsets of `keep`.
    pub fn restriction(&self, keep: AgentSet) -> FeasibilitySystem {
        let ground = self.ground.intersection(keep);
        match &self.kind {
            FeasibilityKind::Explicit { family } => {
                let family: Vec<AgentSet> = family
                    .iter()
                    .copied()
                    .filter(|s| s.is_subset(ground))
                    .collect();
                let is_matroid = self.is_matroid || exchange_axiom_holds(&family);
                FeasibilitySystem {
                    agents: self.agents,
                    ground,
                    kind: FeasibilityKind::Explicit { family },
                    is_matroid,
                }
            }
            kind => FeasibilitySystem {
                agents: self.agents,
                ground,
                kind: kind.clone(),
                is_matroid: self.is_matroid,
            },
        }
    }

    /// Extends the independent set `set` to a basis using elements of `from`
    /// (in priority order), then any remaining ground elements.
    pub fn pad_to_basis(
        &self,
        set: AgentSet,
        from: AgentSet,
        tie: &TieBreak,
    ) -> Result<AgentSet, MatroidError> {
        self.require_matroid("pad_to_basis")?;
        if !self.is_independent(set)? {
            return Err(MatroidError::Precondition(format!("{set} is not independent")));
        }
        let mut out = set;
        let order = priority_list(tie, from.intersection(self.ground))
            .into_iter()
            .chain(priority_list(tie, self.ground.difference(from)));
        for e in order {
            if !out.contains(e) && self.independent_unchecked(out.with(e)) {
                out.insert(e);
            }
        }
        Ok(out)
    }

    /// Finds `y ∈ b2 \ b` such that `b - x + y` and `b2 - y + x` are both bases.
    /// Candidates are tried in priority order.
    pub fn strong_basis_exchange(
        &self,
        b: AgentSet,
        b2: AgentSet,
        x: usize,
        tie: &TieBreak,
    ) -> Result<usize, MatroidError> {
        self.require_matroid("strong_basis_exchange")?;
        if !self.is_basis(b)? || !self.is_basis(b2)? {
            return Err(MatroidError::Precondition("arguments must be bases".into()));
        }
        if !b.contains(x) || b2.contains(x) {
            return Err(MatroidError::Precondition(format!(
                "{x} must lie in {b} but not in {b2}"
            )));
        }
        for y in tie.sorted(b2.difference(b)) {
            if self.independent_unchecked(b.without(x).with(y))
                && self.independent_unchecked(b2.without(y).with(x))
            {
                return Ok(y);
            }
        }
        Err(MatroidError::InvariantViolation(format!(
            "no strong exchange partner for {x} between {b} and {b2}"
        )))
    }

    /// A bijection `g: b1 \ b2 → b2 \ b1` with `b2 - g(e) + e` independent for
    /// every `e`, found as a perfect matching in the exchangeability graph.
    pub fn exchange_bijection(
        &self,
        b1: AgentSet,
        b2: AgentSet,
        tie: &TieBreak,
    ) -> Result<BTreeMap<usize, usize>, MatroidError> {
        if b1.len() != b2.len() {
            return Err(MatroidError::Precondition(format!(
                "{b1} and {b2} differ in size"
            )));
        }
        if !self.is_independent(b1)? || !self.is_independent(b2)? {
            return Err(MatroidError::Precondition("arguments must be independent".into()));
        }
        let left = tie.sorted(b1.difference(b2));
        let right = tie.sorted(b2.difference(b1));
        let adjacency: Vec<Vec<usize>> = left
            .iter()
            .map(|&e| {
                (0..right.len())
                    .filter(|&k| self.independent_unchecked(b2.without(right[k]).with(e)))
                    .collect()
            })
            .collect();
        let mates = bipartite::maximum_matching(right.len(), &adjacency);
        let mut map = BTreeMap::new();
        for (l, m) in mates.into_iter().enumerate() {
            match m {
                Some(r) => {
                    map.insert(left[l], right[r]);
                }
                None => {
                    return Err(MatroidError::InvariantViolation(format!(
                        "no exchange bijection between {b1} and {b2}: {} unmatched",
                        left[l]
                    )))
                }
            }
        }
        Ok(map)
    }

    /// Replays the coupled sampling construction on two bases `w` and `wp`.
    ///
    /// The elements of `w \ wp` are processed in priority order `a_1..a_r`.
    /// Step `i` reads coin `2i` (is `a_i` admitted) and coin `2i+1` (is the
    /// exchange partner `b_i` admitted). When `a_i` is admitted the walk keeps
    /// `A` and moves `a_i` into `B`; otherwise it swaps `b_i` into `A`. Common
    /// elements of `w` and `wp` (padding) stay in both sets and are not sampled.
    pub fn coupled_exchange_walk(
        &self,
        w: AgentSet,
        wp: AgentSet,
        coins: &[bool],
        tie: &TieBreak,
    ) -> Result<ExchangeWalk, MatroidError> {
        self.require_matroid("coupled_exchange_walk")?;
        if w.len() != wp.len() || !self.is_basis(w)? || !self.is_basis(wp)? {
            return Err(MatroidError::Precondition(format!(
                "{w} and {wp} must be bases of equal size"
            )));
        }
        let steps = tie.sorted(w.difference(wp));
        if coins.len() != 2 * steps.len() {
            return Err(MatroidError::Precondition(format!(
                "expected {} coin flips, got {}",
                2 * steps.len(),
                coins.len()
            )));
        }
        let (mut a, mut b) = (w, wp);
        let mut admitted = AgentSet::empty();
        for (i, &ai) in steps.iter().enumerate() {
            let bi = self.strong_basis_exchange(a, b, ai, tie)?;
            if coins[2 * i] {
                admitted.insert(ai);
                b = b.without(bi).with(ai);
            } else {
                a = a.without(ai).with(bi);
            }
            if coins[2 * i + 1] {
                admitted.insert(bi);
            }
        }
        Ok(ExchangeWalk {
            final_basis: a,
            admitted,
        })
    }
}

fn check_agents(agents: usize) -> Result<(), MatroidError> {
    if agents > MAX_AGENTS {
        Err(MatroidError::Invalid(format!(
            "{agents} agents exceeds the limit of {MAX_AGENTS}"
        )))
    } else {
        Ok(())
    }
}

fn priority_list(tie: &TieBreak, set: AgentSet) -> Vec<usize> {
    let mut out = tie.sorted(set);
    // agents the tie-break does not know about go last, ascending
    out.extend(set.iter().filter(|&a| a >= tie.len()));
    out
}

/// True when `a` contains the highest-priority element of the symmetric difference.
fn priority_prefers(tie: &TieBreak, a: AgentSet, b: AgentSet) -> bool {
    let diff = a.difference(b).union(b.difference(a));
    diff.iter()
        .min_by_key(|&e| (tie.rank(e), e))
        .is_some_and(|e| a.contains(e))
}

fn exchange_axiom_holds(family: &[AgentSet]) -> bool {
    for a in family {
        for b in family {
            if a.len() > b.len()
                && !a
                    .difference(*b)
                    .iter()
                    .any(|e| family.binary_search(&b.with(e)).is_ok())
            {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Rational};

    fn set(ids: &[usize]) -> AgentSet {
        ids.iter().copied().collect()
    }

    fn nonmat() -> FeasibilitySystem {
        FeasibilitySystem::explicit(3, vec![set(&[]), set(&[0]), set(&[1]), set(&[0, 1]), set(&[2])])
            .unwrap()
    }

    fn triangle() -> FeasibilitySystem {
        FeasibilitySystem::graphic(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn blocks_ac_bd() -> FeasibilitySystem {
        // a=0, b=1, c=2, d=3
        FeasibilitySystem::partition(4, vec![vec![0, 2], vec![1, 3]], vec![1, 1]).unwrap()
    }

    #[test]
    fn independence_examples() {
        let u1 = FeasibilitySystem::uniform(3, 1).unwrap();
        assert!(u1.is_independent(set(&[1])).unwrap());
        assert!(!u1.is_independent(set(&[0, 1])).unwrap());
        let nm = nonmat();
        assert!(!nm.is_matroid());
        assert!(!nm.is_independent(set(&[0, 2])).unwrap());
        assert!(nm.is_independent(set(&[0, 1])).unwrap());
        assert_eq!(u1.is_independent(set(&[5])), Err(MatroidError::OutsideGround(5)));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(FeasibilitySystem::uniform(4, 2).unwrap().full_rank().unwrap(), 2);
        let p = FeasibilitySystem::partition(3, vec![vec![0, 1], vec![2]], vec![1, 1]).unwrap();
        assert_eq!(p.rank(set(&[0, 1])).unwrap(), 1);
        // spanning trees of a triangle, by enumeration of independent subsets
        let t = triangle();
        let brute = AgentSet::full(3)
            .subsets()
            .filter(|&s| t.is_independent(s).unwrap())
            .map(|s| s.len())
            .max()
            .unwrap();
        assert_eq!(brute, 2);
        assert_eq!(t.full_rank().unwrap(), 2);
        assert_eq!(nonmat().rank(set(&[0])), Err(MatroidError::Unsupported("rank")));
    }

    #[test]
    fn max_weight_basis_examples() {
        let tie = TieBreak::ascending(3);
        let w: Vec<Rational> = vec![q(3, 1), q(1, 1), q(2, 1)];
        let u1 = FeasibilitySystem::uniform(3, 1).unwrap();
        assert_eq!(u1.max_weight_basis(&w, &tie, BasisMode::Full).unwrap().elements, set(&[0]));
        let u2 = FeasibilitySystem::uniform(3, 2).unwrap();
        let b = u2.max_weight_basis(&w, &tie, BasisMode::Full).unwrap();
        assert_eq!(b.elements, set(&[0, 2]));
        assert_eq!(b.weight, q(5, 1));
        // explicit non-matroid: {0,1} = 1.5 beats {2} = 1.2
        let w: Vec<Rational> = vec![q(1, 1), q(1, 2), q(6, 5)];
        let b = nonmat().max_weight_basis(&w, &tie, BasisMode::Full).unwrap();
        assert_eq!(b.elements, set(&[0, 1]));
        assert_eq!(b.weight, q(3, 2));
    }

    #[test]
    fn positive_only_mode_skips_nonpositive_weights() {
        let tie = TieBreak::ascending(3);
        let w: Vec<Rational> = vec![q(2, 1), q(0, 1), q(-1, 1)];
        let u = FeasibilitySystem::uniform(3, 3).unwrap();
        assert_eq!(
            u.max_weight_basis(&w, &tie, BasisMode::PositiveOnly).unwrap().elements,
            set(&[0])
        );
        assert_eq!(u.max_weight_basis(&w, &tie, BasisMode::Full).unwrap().elements, set(&[0, 1, 2]));
    }

    #[test]
    fn ties_go_to_priority() {
        let w: Vec<Rational> = vec![q(1, 1), q(1, 1)];
        let u = FeasibilitySystem::uniform(2, 1).unwrap();
        let asc = TieBreak::ascending(2);
        let rev = TieBreak::from_order(vec![1, 0]).unwrap();
        assert_eq!(u.max_weight_basis(&w, &asc, BasisMode::Full).unwrap().elements, set(&[0]));
        assert_eq!(u.max_weight_basis(&w, &rev, BasisMode::Full).unwrap().elements, set(&[1]));
        // the non-matroid search follows the same rule: {0,1} ties {2}, agent 0 has priority
        let w: Vec<Rational> = vec![q(7, 10), q(1, 2), q(6, 5)];
        let tie = TieBreak::ascending(3);
        assert_eq!(nonmat().max_weight_basis(&w, &tie, BasisMode::Full).unwrap().elements, set(&[0, 1]));
        let tie = TieBreak::from_order(vec![2, 0, 1]).unwrap();
        assert_eq!(nonmat().max_weight_basis(&w, &tie, BasisMode::Full).unwrap().elements, set(&[2]));
    }

    #[test]
    fn double_mode_near_ties_use_priority() {
        let w: Vec<f64> = vec![0.7 + 0.5, 1.2];
        let u = FeasibilitySystem::uniform(2, 1).unwrap();
        let rev = TieBreak::from_order(vec![1, 0]).unwrap();
        assert_eq!(u.max_weight_basis(&w, &rev, BasisMode::Full).unwrap().elements, set(&[1]));
    }

    #[test]
    fn strong_exchange_examples() {
        let tie = TieBreak::ascending(4);
        let u2 = FeasibilitySystem::uniform(4, 2).unwrap();
        assert_eq!(u2.strong_basis_exchange(set(&[0, 1]), set(&[2, 3]), 0, &tie).unwrap(), 2);
        let t = triangle();
        let tie3 = TieBreak::ascending(3);
        assert_eq!(t.strong_basis_exchange(set(&[0, 1]), set(&[1, 2]), 0, &tie3).unwrap(), 2);
        assert_eq!(
            blocks_ac_bd().strong_basis_exchange(set(&[0, 1]), set(&[2, 3]), 0, &tie).unwrap(),
            2
        );
        assert!(matches!(
            u2.strong_basis_exchange(set(&[0, 1]), set(&[1, 3]), 1, &tie),
            Err(MatroidError::Precondition(_))
        ));
    }

    #[test]
    fn corrupt_oracle_is_reported() {
        // not a matroid, but we force the flag to exercise the error path
        let family = vec![set(&[]), set(&[0]), set(&[1]), set(&[2]), set(&[3]), set(&[0, 1]), set(&[2, 3])];
        let mut bad = FeasibilitySystem::explicit(4, family).unwrap();
        assert!(!bad.is_matroid());
        bad.is_matroid = true;
        let tie = TieBreak::ascending(4);
        assert!(matches!(
            bad.exchange_bijection(set(&[0, 1]), set(&[2, 3]), &tie),
            Err(MatroidError::InvariantViolation(_))
        ));
        assert!(matches!(
            bad.strong_basis_exchange(set(&[0, 1]), set(&[2, 3]), 0, &tie),
            Err(MatroidError::InvariantViolation(_))
        ));
    }

    #[test]
    fn exchange_bijection_examples() {
        let tie = TieBreak::ascending(4);
        let u2 = FeasibilitySystem::uniform(4, 2).unwrap();
        assert!(u2.exchange_bijection(set(&[0, 1]), set(&[0, 1]), &tie).unwrap().is_empty());
        let g = u2.exchange_bijection(set(&[0, 1]), set(&[2, 3]), &tie).unwrap();
        assert_eq!(g.into_iter().collect::<Vec<_>>(), vec![(0, 2), (1, 3)]);
        let g = blocks_ac_bd().exchange_bijection(set(&[0, 1]), set(&[2, 3]), &tie).unwrap();
        assert_eq!(g.into_iter().collect::<Vec<_>>(), vec![(0, 2), (1, 3)]);
        let rev = TieBreak::from_order(vec![1, 0, 3, 2]).unwrap();
        let g = blocks_ac_bd().exchange_bijection(set(&[0, 1]), set(&[2, 3]), &rev).unwrap();
        assert_eq!(g.into_iter().collect::<Vec<_>>(), vec![(0, 2), (1, 3)]);
    }

    #[test]
    fn restriction_examples() {
        let u = FeasibilitySystem::uniform(4, 2).unwrap();
        let r = u.restriction(set(&[2, 3]));
        assert_eq!(r.ground(), set(&[2, 3]));
        assert_eq!(r.kind(), &FeasibilityKind::Uniform { k: 2 });
        assert_eq!(r.full_rank().unwrap(), 2);
        let r = nonmat().restriction(set(&[2]));
        assert_eq!(r.feasible_family().unwrap(), vec![set(&[]), set(&[2])]);
        assert!(r.is_matroid());
        let r = triangle().restriction(set(&[0, 1]));
        assert_eq!(r.full_rank().unwrap(), 2);
        assert_eq!(r.feasible_family().unwrap().len(), 4);
    }

    #[test]
    fn explicit_validation() {
        assert!(FeasibilitySystem::explicit(2, vec![set(&[0])]).is_err());
        assert!(FeasibilitySystem::explicit(2, vec![set(&[]), set(&[0, 1])]).is_err());
        assert!(FeasibilitySystem::explicit(13, vec![set(&[])]).is_err());
        let u = FeasibilitySystem::explicit(2, vec![set(&[]), set(&[0]), set(&[1])]).unwrap();
        assert!(u.is_matroid());
        assert!(FeasibilitySystem::partition(3, vec![vec![0, 1]], vec![1]).is_err());
    }

    #[test]
    fn walk_examples() {
        let u1 = FeasibilitySystem::uniform(2, 1).unwrap();
        let tie = TieBreak::ascending(2);
        let (a, b) = (set(&[0]), set(&[1]));
        let w = u1.coupled_exchange_walk(a, b, &[true, true], &tie).unwrap();
        assert_eq!((w.final_basis, w.admitted), (set(&[0]), set(&[0, 1])));
        let w = u1.coupled_exchange_walk(a, b, &[false, true], &tie).unwrap();
        assert_eq!((w.final_basis, w.admitted), (set(&[1]), set(&[1])));
        let u0 = FeasibilitySystem::uniform(2, 0).unwrap();
        let w = u0.coupled_exchange_walk(set(&[]), set(&[]), &[], &tie).unwrap();
        assert_eq!((w.final_basis, w.admitted), (set(&[]), set(&[])));
        assert!(u1.coupled_exchange_walk(a, b, &[true], &tie).is_err());
    }

    fn random_matroid(seed: u64) -> FeasibilitySystem {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=10);
        match rng.gen_range(0..4) {
            0 => FeasibilitySystem::uniform(n, rng.gen_range(0..=n)).unwrap(),
            1 => {
                let nb = rng.gen_range(1..=n.min(4));
                let mut blocks = vec![Vec::new(); nb];
                for e in 0..n {
                    blocks[rng.gen_range(0..nb)].push(e);
                }
                blocks.retain(|b| !b.is_empty());
                let caps = blocks.iter().map(|b| rng.gen_range(0..=b.len())).collect();
                FeasibilitySystem::partition(n, blocks, caps).unwrap()
            }
            2 => {
                let v = rng.gen_range(2..=5);
                let edges = (0..n).map(|_| (rng.gen_range(0..v), rng.gen_range(0..v))).collect();
                FeasibilitySystem::graphic(v, edges).unwrap()
            }
            _ => {
                let slots = rng.gen_range(1..=4);
                let adj = (0..n)
                    .map(|_| (0..slots).filter(|_| rng.gen_bool(0.5)).collect())
                    .collect();
                FeasibilitySystem::transversal(n, adj).unwrap()
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn greedy_matches_brute_force(seed in 0u64..u64::MAX, raw in proptest::collection::vec(-5i64..20, 10)) {
            let m = random_matroid(seed);
            let n = m.agents();
            let w: Vec<Rational> = raw[..n].iter().map(|&x| q(x, 1)).collect();
            let tie = TieBreak::ascending(n);
            let brute = m.ground().subsets()
                .filter(|&s| m.is_independent(s).unwrap())
                .map(|s| crate::scalar::sum(s.iter().map(|e| w[e].clone())))
                .max()
                .unwrap();
            let pos = m.max_weight_basis(&w, &tie, BasisMode::PositiveOnly).unwrap();
            proptest::prop_assert_eq!(pos.weight, brute.clone());
            let full = m.max_weight_basis(&w, &tie, BasisMode::Full).unwrap();
            proptest::prop_assert!(m.is_basis(full.elements).unwrap());
            let best_basis = m.ground().subsets()
                .filter(|&s| m.is_basis(s).unwrap())
                .map(|s| crate::scalar::sum(s.iter().map(|e| w[e].clone())))
                .max()
                .unwrap();
            proptest::prop_assert_eq!(full.weight, best_basis);
        }

        #[test]
        fn rank_is_submodular(seed in 0u64..u64::MAX) {
            let m = random_matroid(seed);
            let subsets: Vec<AgentSet> = m.ground().subsets().collect();
            let ranks: Vec<usize> = subsets.iter().map(|&s| m.rank(s).unwrap()).collect();
            let step = (subsets.len() / 64).max(1);
            proptest::prop_assert_eq!(ranks[0], 0);
            for a in subsets.iter().step_by(step) {
                for b in subsets.iter() {
                    let r = |s: AgentSet| ranks[subsets.binary_search(&s).unwrap()];
                    proptest::prop_assert!(r(a.union(*b)) + r(a.intersection(*b)) <= r(*a) + r(*b));
                    if a.is_subset(*b) {
                        proptest::prop_assert!(r(*a) <= r(*b));
                    }
                }
            }
        }

        #[test]
        fn exchange_bijection_is_valid(seed in 0u64..u64::MAX, raw in proptest::collection::vec(0i64..20, 20)) {
            let m = random_matroid(seed);
            let n = m.agents();
            let tie = TieBreak::ascending(n);
            let w1: Vec<Rational> = raw[..n].iter().map(|&x| q(x, 1)).collect();
            let w2: Vec<Rational> = raw[10..10 + n].iter().map(|&x| q(x, 1)).collect();
            let b1 = m.max_weight_basis(&w1, &tie, BasisMode::Full).unwrap().elements;
            let b2 = m.max_weight_basis(&w2, &tie, BasisMode::Full).unwrap().elements;
            let g = m.exchange_bijection(b1, b2, &tie).unwrap();
            proptest::prop_assert_eq!(g.len(), b1.difference(b2).len());
            let image: AgentSet = g.values().copied().collect();
            proptest::prop_assert_eq!(image, b2.difference(b1));
            for (&e, &f) in &g {
                proptest::prop_assert!(m.is_independent(b2.without(f).with(e)).unwrap());
            }
        }
    }

    #[test]
    fn walk_inclusion_frequency_is_exactly_one_quarter() {
        let mut checked = 0;
        for seed in 0..400u64 {
            let m = random_matroid(seed);
            let n = m.agents();
            let tie = TieBreak::ascending(n);
            let w: Vec<Rational> = (0..n).map(|e| q(((e as i64 * 7 + seed as i64) % 11) + 1, 1)).collect();
            let big = m.max_weight_basis(&w, &tie, BasisMode::Full).unwrap().elements;
            let rest = m.restriction(m.ground().difference(big));
            let small = rest.max_weight_basis(&w, &tie, BasisMode::Full).unwrap().elements;
            let padded = m.pad_to_basis(small, big, &tie).unwrap();
            let r = big.difference(padded).len();
            if r == 0 || r > 5 {
                continue;
            }
            checked += 1;
            let mut hits = vec![0usize; n];
            let total = 1usize << (2 * r);
            for mask in 0..total {
                let coins: Vec<bool> = (0..2 * r).map(|b| mask >> b & 1 == 1).collect();
                let walk = m.coupled_exchange_walk(big, padded, &coins, &tie).unwrap();
                assert!(m.is_basis(walk.final_basis).unwrap());
                assert!(walk.admitted.intersection(big).is_subset(walk.final_basis));
                for e in walk.final_basis.intersection(walk.admitted).iter() {
                    hits[e] += 1;
                }
            }
            for e in padded.difference(big).iter() {
                assert_eq!(4 * hits[e], total, "seed {seed}, element {e}");
            }
        }
        assert!(checked >= 50, "only {checked} fixtures exercised");
    }
}
