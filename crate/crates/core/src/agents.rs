//! Agent identifiers, agent sets and the global tie-break order.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Hard limit on instance size imposed by the bitset representation.
pub const MAX_AGENTS: usize = 64;

/// A set of agent ids `0..64`, stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct AgentSet(u64);

impl AgentSet {
    pub const fn empty() -> Self {
        AgentSet(0)
    }

    /// `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_AGENTS, "at most {MAX_AGENTS} agents are supported");
        if n == MAX_AGENTS {
            AgentSet(u64::MAX)
        } else {
            AgentSet((1u64 << n) - 1)
        }
    }

    pub const fn from_bits(bits: u64) -> Self {
        AgentSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(agent: usize) -> Self {
        assert!(agent < MAX_AGENTS);
        AgentSet(1u64 << agent)
    }

    pub fn contains(self, agent: usize) -> bool {
        agent < MAX_AGENTS && self.0 & (1u64 << agent) != 0
    }

    pub fn insert(&mut self, agent: usize) {
        assert!(agent < MAX_AGENTS);
        self.0 |= 1u64 << agent;
    }

    pub fn remove(&mut self, agent: usize) {
        if agent < MAX_AGENTS {
            self.0 &= !(1u64 << agent);
        }
    }

    pub fn with(mut self, agent: usize) -> Self {
        self.insert(agent);
        self
    }

    pub fn without(mut self, agent: usize) -> Self {
        self.remove(agent);
        self
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        AgentSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        AgentSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        AgentSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    /// Ascending agent ids.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    pub fn max_element(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(63 - self.0.leading_zeros() as usize)
        }
    }

    /// Every subset of `self`, in increasing bitmask order.
    pub fn subsets(self) -> impl Iterator<Item = AgentSet> {
        let mask = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let current = next?;
            next = if current == mask {
                None
            } else {
                Some((current.wrapping_sub(mask)) & mask)
            };
            Some(AgentSet(current))
        })
    }
}

impl FromIterator<usize> for AgentSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = AgentSet::empty();
        for a in iter {
            set.insert(a);
        }
        set
    }
}

impl fmt::Debug for AgentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for AgentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, a) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for AgentSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for AgentSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let ids = Vec::<usize>::deserialize(deserializer)?;
        if let Some(bad) = ids.iter().find(|&&a| a >= MAX_AGENTS) {
            return Err(serde::de::Error::custom(format!(
                "agent id {bad} exceeds the {MAX_AGENTS}-agent limit"
            )));
        }
        Ok(ids.into_iter().collect())
    }
}

/// A total priority order over agents. Earlier agents win ties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieBreak {
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl TieBreak {
    /// Ascending agent id, the default order.
    pub fn ascending(n: usize) -> Self {
        TieBreak {
            order: (0..n).collect(),
            rank: (0..n).collect(),
        }
    }

    /// Returns `None` unless `order` is a permutation of `0..order.len()`.
    pub fn from_order(order: Vec<usize>) -> Option<Self> {
        let n = order.len();
        let mut rank = vec![usize::MAX; n];
        for (pos, &a) in order.iter().enumerate() {
            if a >= n || rank[a] != usize::MAX {
                return None;
            }
            rank[a] = pos;
        }
        Some(TieBreak { order, rank })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Position of `agent` in the priority order (0 = highest priority).
    pub fn rank(&self, agent: usize) -> usize {
        self.rank.get(agent).copied().unwrap_or(usize::MAX)
    }

    /// Elements of `set` listed in priority order.
    pub fn sorted(&self, set: AgentSet) -> Vec<usize> {
        self.order.iter().copied().filter(|&a| set.contains(a)).collect()
    }

    /// True when `a` strictly precedes `b`.
    pub fn prefers(&self, a: usize, b: usize) -> bool {
        self.rank(a) < self.rank(b)
    }
}
