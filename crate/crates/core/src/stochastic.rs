//! Finite-support signal distributions: grids, joint pmfs, conditioning,
//! posted-price revenue curves, monopoly prices and regularity diagnostics.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{sum, Scalar};

/// Upper bound on the number of grid profiles a joint distribution may span.
pub const MAX_PROFILES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("probabilities sum to {0}, expected 1")]
    Normalization(String),
    #[error("negative probability {prob} at {at}")]
    Negative { prob: String, at: String },
    #[error("profile {0:?} appears more than once")]
    DuplicateProfile(Vec<usize>),
    #[error("profile {profile:?} is off the grid: {reason}")]
    OffGrid { profile: Vec<usize>, reason: String },
    #[error("conditioning on a zero-probability event: {0}")]
    Conditioning(String),
    #[error("{0}")]
    Shape(String),
}

/// Per-agent sorted signal values.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalGrid<S> {
    points: Vec<Vec<S>>,
}

impl<S: Scalar> SignalGrid<S> {
    pub fn new(points: Vec<Vec<S>>) -> Result<Self, DistributionError> {
        for (i, pts) in points.iter().enumerate() {
            if pts.is_empty() {
                return Err(DistributionError::Grid(format!("agent {i} has an empty grid")));
            }
            if pts.iter().any(|p| !p.to_f64().is_finite()) {
                return Err(DistributionError::Grid(format!("agent {i} has a non-finite point")));
            }
            if pts.windows(2).any(|w| !w[1].definitely_gt(&w[0])) {
                return Err(DistributionError::Grid(format!(
                    "agent {i}: grid must be strictly increasing"
                )));
            }
        }
        let space = ProfileSpace::new(points.iter().map(Vec::len).collect());
        if space.len() > MAX_PROFILES {
            return Err(DistributionError::Grid(format!(
                "{} profiles exceed the limit of {MAX_PROFILES}",
                space.len()
            )));
        }
        Ok(SignalGrid { points })
    }

    pub fn agents(&self) -> usize {
        self.points.len()
    }

    pub fn size(&self, agent: usize) -> usize {
        self.points[agent].len()
    }

    pub fn points(&self, agent: usize) -> &[S] {
        &self.points[agent]
    }

    pub fn signal(&self, agent: usize, index: usize) -> &S {
        &self.points[agent][index]
    }

    /// Grid index of a signal value (tolerant match in double mode).
    pub fn index_of(&self, agent: usize, value: &S) -> Option<usize> {
        self.points.get(agent)?.iter().position(|p| p.approx_eq(value))
    }

    pub fn space(&self) -> ProfileSpace {
        ProfileSpace::new(self.points.iter().map(Vec::len).collect())
    }

    pub fn signals_of(&self, profile: &[usize]) -> Vec<S> {
        profile
            .iter()
            .enumerate()
            .map(|(i, &k)| self.points[i][k].clone())
            .collect()
    }
}

/// Mixed-radix indexing of grid profiles. Profiles are vectors of per-agent
/// grid indices; agent 0 is the most significant digit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileSpace {
    radices: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl ProfileSpace {
    pub fn new(radices: Vec<usize>) -> Self {
        let mut strides = vec![1; radices.len()];
        let mut len = 1usize;
        for i in (0..radices.len()).rev() {
            strides[i] = len;
            len = len.saturating_mul(radices[i]);
        }
        ProfileSpace {
            radices,
            strides,
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn agents(&self) -> usize {
        self.radices.len()
    }

    pub fn radix(&self, agent: usize) -> usize {
        self.radices[agent]
    }

    pub fn stride(&self, agent: usize) -> usize {
        self.strides[agent]
    }

    pub fn contains(&self, profile: &[usize]) -> bool {
        profile.len() == self.radices.len()
            && profile.iter().zip(&self.radices).all(|(&k, &r)| k < r)
    }

    pub fn index(&self, profile: &[usize]) -> usize {
        debug_assert!(self.contains(profile));
        profile.iter().zip(&self.strides).map(|(k, s)| k * s).sum()
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|&s| {
                let k = index / s;
                index %= s;
                k
            })
            .collect()
    }

    /// Index of `profile` with agent `agent`'s coordinate replaced by `k`.
    pub fn index_with(&self, index: usize, agent: usize, k: usize) -> usize {
        let current = (index / self.strides[agent]) % self.radices[agent];
        index - current * self.strides[agent] + k * self.strides[agent]
    }

    pub fn coordinate(&self, index: usize, agent: usize) -> usize {
        (index / self.strides[agent]) % self.radices[agent]
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.len).map(|i| self.decode(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionForm {
    Table,
    Product,
}

/// A finite joint pmf over the grid, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution<S> {
    form: DistributionForm,
    space: ProfileSpace,
    pmf: Vec<S>,
    marginals: Vec<Vec<S>>,
}

impl<S: Scalar> JointDistribution<S> {
    /// Explicit table of `(profile, probability)` rows; unlisted profiles get 0.
    pub fn from_table(
        grid: &SignalGrid<S>,
        entries: Vec<(Vec<usize>, S)>,
    ) -> Result<Self, DistributionError> {
        let space = grid.space();
        let mut pmf = vec![S::zero(); space.len()];
        let mut seen = vec![false; space.len()];
        for (profile, p) in entries {
            if !space.contains(&profile) {
                return Err(DistributionError::OffGrid {
                    profile,
                    reason: "index outside the grid".into(),
                });
            }
            if p.is_negative() {
                return Err(DistributionError::Negative {
                    prob: p.to_string(),
                    at: format!("{profile:?}"),
                });
            }
            let idx = space.index(&profile);
            if seen[idx] {
                return Err(DistributionError::DuplicateProfile(profile));
            }
            seen[idx] = true;
            pmf[idx] = p;
        }
        check_normalized(&pmf)?;
        let marginals = compute_marginals(&space, &pmf);
        Ok(JointDistribution {
            form: DistributionForm::Table,
            space,
            pmf,
            marginals,
        })
    }

    /// Independent agents with the given per-grid-point marginal pmfs.
    pub fn from_product(
        grid: &SignalGrid<S>,
        marginals: Vec<Vec<S>>,
    ) -> Result<Self, DistributionError> {
        if marginals.len() != grid.agents() {
            return Err(DistributionError::Shape(format!(
                "{} marginals for {} agents",
                marginals.len(),
                grid.agents()
            )));
        }
        for (i, m) in marginals.iter().enumerate() {
            if m.len() != grid.size(i) {
                return Err(DistributionError::Shape(format!(
                    "agent {i}: marginal has {} entries, grid has {}",
                    m.len(),
                    grid.size(i)
                )));
            }
            if let Some((k, p)) = m.iter().enumerate().find(|(_, p)| p.is_negative()) {
                return Err(DistributionError::Negative {
                    prob: p.to_string(),
                    at: format!("agent {i} point {k}"),
                });
            }
            check_normalized(m)?;
        }
        let space = grid.space();
        let pmf = (0..space.len())
            .map(|idx| {
                let profile = space.decode(idx);
                profile
                    .iter()
                    .enumerate()
                    .fold(S::one(), |acc, (i, &k)| acc * marginals[i][k].clone())
            })
            .collect();
        Ok(JointDistribution {
            form: DistributionForm::Product,
            space,
            pmf,
            marginals,
        })
    }

    pub fn form(&self) -> DistributionForm {
        self.form
    }

    pub fn space(&self) -> &ProfileSpace {
        &self.space
    }

    pub fn prob(&self, profile: &[usize]) -> &S {
        &self.pmf[self.space.index(profile)]
    }

    pub fn prob_at(&self, index: usize) -> &S {
        &self.pmf[index]
    }

    pub fn pmf(&self) -> &[S] {
        &self.pmf
    }

    /// Marginal pmf of one agent's signal, per grid point.
    pub fn marginal(&self, agent: usize) -> &[S] {
        &self.marginals[agent]
    }

    /// Probability of the slice `{S_{-i} = profile_{-i}}`.
    pub fn slice_mass(&self, agent: usize, profile: &[usize]) -> S {
        let base = self.space.index(profile);
        sum((0..self.space.radix(agent)).map(|k| self.pmf[self.space.index_with(base, agent, k)].clone()))
    }

    /// Conditional pmf of `S_i` given the other coordinates of `profile`,
    /// one weight per grid point of agent `i` (`profile[i]` is ignored).
    pub fn conditional_weights(
        &self,
        agent: usize,
        profile: &[usize],
    ) -> Result<Vec<S>, DistributionError> {
        let base = self.space.index(profile);
        let row: Vec<S> = (0..self.space.radix(agent))
            .map(|k| self.pmf[self.space.index_with(base, agent, k)].clone())
            .collect();
        let mass = sum(row.iter().cloned());
        if !mass.is_positive() {
            let mut others = profile.to_vec();
            others.remove(agent);
            return Err(DistributionError::Conditioning(format!(
                "P[S_-{agent} = {others:?}] = 0"
            )));
        }
        Ok(row.into_iter().map(|p| p / mass.clone()).collect())
    }

    /// Distribution of agent `i`'s signal value given the others' signals.
    pub fn conditional_signal(
        &self,
        grid: &SignalGrid<S>,
        agent: usize,
        profile: &[usize],
    ) -> Result<ScalarDistribution<S>, DistributionError> {
        let w = self.conditional_weights(agent, profile)?;
        ScalarDistribution::new(grid.points(agent).iter().cloned().zip(w).collect())
    }

    /// Every positive-probability profile once, in index order.
    pub fn enumerate_support(&self) -> impl Iterator<Item = (Vec<usize>, &S)> + '_ {
        self.pmf
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_positive())
            .map(|(i, p)| (self.space.decode(i), p))
    }

    pub fn support_indices(&self) -> Vec<usize> {
        (0..self.pmf.len()).filter(|&i| self.pmf[i].is_positive()).collect()
    }

    pub fn sampler(&self) -> ProfileSampler {
        ProfileSampler::new(&self.pmf)
    }

    /// One draw using the caller's stream.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        self.space.decode(self.sampler().sample_index(rng))
    }
}

/// Cached categorical sampler over profile indices.
#[derive(Debug, Clone)]
pub struct ProfileSampler {
    index: WeightedIndex<f64>,
}

impl ProfileSampler {
    fn new<S: Scalar>(pmf: &[S]) -> Self {
        let weights: Vec<f64> = pmf.iter().map(|p| p.to_f64().max(0.0)).collect();
        ProfileSampler {
            index: WeightedIndex::new(weights).expect("a normalized pmf has positive total weight"),
        }
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index.sample(rng)
    }
}

fn check_normalized<S: Scalar>(probs: &[S]) -> Result<(), DistributionError> {
    let total = sum(probs.iter().cloned());
    if (total.clone() - S::one()).abs() > S::normalization_tolerance() {
        return Err(DistributionError::Normalization(total.to_string()));
    }
    Ok(())
}

fn compute_marginals<S: Scalar>(space: &ProfileSpace, pmf: &[S]) -> Vec<Vec<S>> {
    let mut out: Vec<Vec<S>> = (0..space.agents())
        .map(|i| vec![S::zero(); space.radix(i)])
        .collect();
    for (idx, p) in pmf.iter().enumerate() {
        if p.is_exact_zero() {
            continue;
        }
        for (i, m) in out.iter_mut().enumerate() {
            let k = space.coordinate(idx, i);
            m[k] = m[k].clone() + p.clone();
        }
    }
    out
}

/// A finite distribution over real values, support sorted ascending,
/// zero-probability atoms dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarDistribution<S> {
    atoms: Vec<(S, S)>,
}

/// One point of a revenue curve.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePoint<S> {
    pub price: S,
    pub revenue: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport<S> {
    /// `(support point, discrete virtual value)`.
    pub virtual_values: Vec<(S, S)>,
    /// Discrete hazard rate `f(v) / P[X >= v]` per support point.
    pub hazard: Vec<S>,
    pub is_regular: bool,
    pub is_mhr: bool,
}

impl<S: Scalar> ScalarDistribution<S> {
    /// Sorts, merges equal values and drops zero atoms.
    pub fn new(mut atoms: Vec<(S, S)>) -> Result<Self, DistributionError> {
        if let Some((v, p)) = atoms.iter().find(|(_, p)| p.is_negative()) {
            return Err(DistributionError::Negative {
                prob: p.to_string(),
                at: v.to_string(),
            });
        }
        atoms.retain(|(_, p)| p.is_positive());
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(S, S)> = Vec::with_capacity(atoms.len());
        for (v, p) in atoms {
            match merged.last_mut() {
                Some((lv, lp)) if lv.approx_eq(&v) => *lp = lp.clone() + p,
                _ => merged.push((v, p)),
            }
        }
        check_normalized(&merged.iter().map(|(_, p)| p.clone()).collect::<Vec<_>>())?;
        Ok(ScalarDistribution { atoms: merged })
    }

    pub fn point_mass(value: S) -> Self {
        ScalarDistribution {
            atoms: vec![(value, S::one())],
        }
    }

    pub fn atoms(&self) -> &[(S, S)] {
        &self.atoms
    }

    pub fn support(&self) -> impl Iterator<Item = &S> {
        self.atoms.iter().map(|(v, _)| v)
    }

    pub fn mean(&self) -> S {
        sum(self.atoms.iter().map(|(v, p)| v.clone() * p.clone()))
    }

    /// `P[X >= t]`.
    pub fn tail(&self, t: &S) -> S {
        sum(self
            .atoms
            .iter()
            .filter(|(v, _)| v.approx_ge(t))
            .map(|(_, p)| p.clone()))
    }

    /// Distribution of `X` given `X >= threshold`.
    pub fn truncate_above(&self, threshold: &S) -> Result<Self, DistributionError> {
        let mass = self.tail(threshold);
        if !mass.is_positive() {
            return Err(DistributionError::Conditioning(format!(
                "P[X >= {threshold}] = 0"
            )));
        }
        Ok(ScalarDistribution {
            atoms: self
                .atoms
                .iter()
                .filter(|(v, _)| v.approx_ge(threshold))
                .map(|(v, p)| (v.clone(), p.clone() / mass.clone()))
                .collect(),
        })
    }

    /// Expected revenue `p * P[X >= p]` at every support point.
    pub fn revenue_curve(&self) -> Vec<PricePoint<S>> {
        let mut tail = sum(self.atoms.iter().map(|(_, p)| p.clone()));
        let mut out = Vec::with_capacity(self.atoms.len());
        for (v, p) in &self.atoms {
            out.push(PricePoint {
                price: v.clone(),
                revenue: v.clone() * tail.clone(),
            });
            tail = tail - p.clone();
        }
        out
    }

    /// Revenue-maximizing posted price; ties go to the lowest price.
    pub fn monopoly_price(&self) -> PricePoint<S> {
        let mut best: Option<PricePoint<S>> = None;
        for pt in self.revenue_curve() {
            if best.as_ref().is_none_or(|b| pt.revenue.definitely_gt(&b.revenue)) {
                best = Some(pt);
            }
        }
        best.unwrap_or(PricePoint {
            price: S::zero(),
            revenue: S::zero(),
        })
    }

    /// Discrete virtual values with the forward gap, hazard rates, and the
    /// regular / MHR verdicts.
    pub fn regularity_report(&self) -> RegularityReport<S> {
        let n = self.atoms.len();
        let mut virtual_values = Vec::with_capacity(n);
        let mut hazard = Vec::with_capacity(n);
        let mut at_least = sum(self.atoms.iter().map(|(_, p)| p.clone()));
        for k in 0..n {
            let (v, f) = &self.atoms[k];
            let above = at_least.clone() - f.clone();
            let phi = if k + 1 < n {
                let gap = self.atoms[k + 1].0.clone() - v.clone();
                v.clone() - above.clone() * gap / f.clone()
            } else {
                v.clone()
            };
            virtual_values.push((v.clone(), phi));
            hazard.push(f.clone() / at_least.clone());
            at_least = above;
        }
        let is_regular = virtual_values
            .windows(2)
            .all(|w| w[1].1.approx_ge(&w[0].1));
        let is_mhr = hazard.windows(2).all(|w| w[1].approx_ge(&w[0]));
        RegularityReport {
            virtual_values,
            hazard,
            is_regular,
            is_mhr,
        }
    }
}
