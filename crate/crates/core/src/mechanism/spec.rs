use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::agents::AgentSet;
use crate::scalar::{q, Scalar};
use crate::stochastic::ScalarDistribution;

use super::core::{gvcg, gvcg_lazy, vcg_eager};
use super::reserve::{
    monopoly_reserves, value_marginal, Conditioning, ConditionalMonopoly, FixedReserves,
    ReservePolicy,
};
use super::{AuctionOutcome, Instance, MechanismError};

/// Largest agent count for which admission sets are enumerated.
const ADMISSION_ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MechanismId {
    Gvcg,
    GvcgLazy,
    Lookahead,
    RandSingle,
    RandMatroid,
    VcgEager,
}

impl MechanismId {
    pub const ALL: [MechanismId; 6] = [
        MechanismId::Gvcg,
        MechanismId::GvcgLazy,
        MechanismId::Lookahead,
        MechanismId::RandSingle,
        MechanismId::RandMatroid,
        MechanismId::VcgEager,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MechanismId::Gvcg => "gvcg",
            MechanismId::GvcgLazy => "gvcg-lazy",
            MechanismId::Lookahead => "lookahead",
            MechanismId::RandSingle => "rand-single",
            MechanismId::RandMatroid => "rand-matroid",
            MechanismId::VcgEager => "vcg-eager",
        }
    }
}

impl fmt::Display for MechanismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MechanismId {
    type Err = MechanismError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MechanismId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| MechanismError::Config(format!("unknown mechanism `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReserveSource<S> {
    None,
    /// Monopoly price of each agent's value distribution in isolation.
    Monopoly,
    /// Conditional monopoly reserve, as in the lookahead auction.
    Conditional,
    Fixed(Vec<S>),
    /// Each reserve is an independent draw from the agent's value distribution.
    SingleSample,
}

impl<S: Scalar> ReserveSource<S> {
    /// Parses `none`, `monopoly`, `conditional`, `single-sample` or
    /// `fixed(r1,r2,...)`.
    pub fn parse(s: &str) -> Result<Self, MechanismError> {
        let s = s.trim();
        match s {
            "none" => return Ok(ReserveSource::None),
            "monopoly" => return Ok(ReserveSource::Monopoly),
            "conditional" => return Ok(ReserveSource::Conditional),
            "single-sample" => return Ok(ReserveSource::SingleSample),
            _ => {}
        }
        let inner = s
            .strip_prefix("fixed(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| MechanismError::Config(format!("unknown reserve source `{s}`")))?;
        inner
            .split(',')
            .map(|x| S::parse_literal(x).map_err(|e| MechanismError::Config(e.to_string())))
            .collect::<Result<Vec<_>, _>>()
            .map(ReserveSource::Fixed)
    }
}

impl<S: Scalar> fmt::Display for ReserveSource<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReserveSource::None => f.write_str("none"),
            ReserveSource::Monopoly => f.write_str("monopoly"),
            ReserveSource::Conditional => f.write_str("conditional"),
            ReserveSource::SingleSample => f.write_str("single-sample"),
            ReserveSource::Fixed(r) => {
                f.write_str("fixed(")?;
                for (k, x) in r.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// One draw of a mechanism's internal randomness, with its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization<S> {
    pub weight: S,
    pub admitted: Option<AgentSet>,
    pub reserves: Option<Vec<S>>,
    pub label: String,
}

impl<S: Scalar> Realization<S> {
    pub fn deterministic() -> Self {
        Realization {
            weight: S::one(),
            admitted: None,
            reserves: None,
            label: "-".into(),
        }
    }

    pub fn admission(admitted: AgentSet, weight: S, label: String) -> Self {
        Realization {
            weight,
            admitted: Some(admitted),
            reserves: None,
            label,
        }
    }
}

/// A mechanism together with its reserve configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism<S> {
    pub id: MechanismId,
    pub reserve: ReserveSource<S>,
    pub conditioning: Conditioning,
}

impl<S: Scalar> Mechanism<S> {
    /// The mechanism with its default reserve source.
    pub fn new(id: MechanismId) -> Self {
        let reserve = match id {
            MechanismId::Gvcg => ReserveSource::None,
            MechanismId::GvcgLazy | MechanismId::VcgEager => ReserveSource::Monopoly,
            MechanismId::Lookahead | MechanismId::RandSingle | MechanismId::RandMatroid => {
                ReserveSource::Conditional
            }
        };
        Mechanism {
            id,
            reserve,
            conditioning: Conditioning::Winner,
        }
    }

    pub fn with_reserve(mut self, reserve: ReserveSource<S>) -> Result<Self, MechanismError> {
        let ok = match self.id {
            MechanismId::Gvcg => matches!(reserve, ReserveSource::None),
            MechanismId::Lookahead => matches!(reserve, ReserveSource::Conditional),
            MechanismId::VcgEager => !matches!(reserve, ReserveSource::Conditional),
            _ => true,
        };
        if !ok {
            return Err(MechanismError::Config(format!(
                "{} does not accept reserve source {reserve}",
                self.id
            )));
        }
        self.reserve = reserve;
        Ok(self)
    }

    pub fn with_conditioning(mut self, conditioning: Conditioning) -> Self {
        self.conditioning = conditioning;
        self
    }

    /// Identifier plus any non-default configuration.
    pub fn label(&self) -> String {
        let default = Mechanism::<S>::new(self.id);
        let mut out = self.id.to_string();
        if self.reserve != default.reserve {
            out.push_str(&format!("[{}]", self.reserve));
        }
        if self.conditioning != default.conditioning && self.uses_conditional() {
            out.push_str(&format!("[{}]", self.conditioning));
        }
        out
    }

    fn uses_conditional(&self) -> bool {
        matches!(self.reserve, ReserveSource::Conditional)
    }

    /// Checks the environment requirements of this mechanism.
    pub fn check(&self, inst: &Instance<S>) -> Result<(), MechanismError> {
        match self.id {
            MechanismId::VcgEager => inst.require_private("vcg-eager")?,
            _ => inst.require_gvcg_assumptions()?,
        }
        match self.id {
            MechanismId::RandSingle if !inst.feasibility().is_single_item() => Err(
                MechanismError::WrongVariant("rand-single needs a 1-uniform feasibility system".into()),
            ),
            MechanismId::RandMatroid => inst.require_matroid("rand-matroid"),
            _ => Ok(()),
        }?;
        if let ReserveSource::Fixed(r) = &self.reserve {
            if r.len() != inst.agents() {
                return Err(MechanismError::Config(format!(
                    "{} fixed reserves for {} agents",
                    r.len(),
                    inst.agents()
                )));
            }
        }
        Ok(())
    }

    /// Binds the mechanism to an instance, precomputing reserves and the
    /// enumeration of internal randomness.
    pub fn bind<'a>(&'a self, inst: &'a Instance<S>) -> Result<BoundMechanism<'a, S>, MechanismError> {
        self.check(inst)?;
        let n = inst.agents();
        let mut marginals = Vec::new();
        let fixed = match &self.reserve {
            ReserveSource::Monopoly => monopoly_reserves(inst)?,
            ReserveSource::Fixed(r) => r.clone(),
            _ => vec![S::zero(); n],
        };
        let policy: Box<dyn ReservePolicy<S> + 'a> = match &self.reserve {
            ReserveSource::Conditional => Box::new(ConditionalMonopoly {
                conditioning: if self.id == MechanismId::Lookahead {
                    Conditioning::Winner
                } else {
                    self.conditioning
                },
            }),
            _ => Box::new(FixedReserves(fixed.clone())),
        };
        if self.reserve == ReserveSource::SingleSample {
            marginals = (0..n).map(|i| value_marginal(inst, i)).collect::<Result<_, _>>()?;
        }
        Ok(BoundMechanism {
            mech: self,
            inst,
            policy,
            fixed,
            marginals,
        })
    }
}

/// A mechanism bound to an instance.
pub struct BoundMechanism<'a, S: Scalar> {
    mech: &'a Mechanism<S>,
    inst: &'a Instance<S>,
    policy: Box<dyn ReservePolicy<S> + 'a>,
    fixed: Vec<S>,
    marginals: Vec<ScalarDistribution<S>>,
}

impl<'a, S: Scalar> BoundMechanism<'a, S> {
    pub fn mechanism(&self) -> &Mechanism<S> {
        self.mech
    }

    /// Number of realizations [`Self::realizations`] would produce.
    pub fn realization_count(&self) -> Result<usize, MechanismError> {
        let n = self.inst.agents();
        let admissions = match self.mech.id {
            MechanismId::RandSingle | MechanismId::RandMatroid => {
                if n > ADMISSION_ENUMERATION_LIMIT {
                    return Err(MechanismError::Size(format!(
                        "cannot enumerate admission sets of {n} agents"
                    )));
                }
                (1usize << n) + usize::from(self.mech.id == MechanismId::RandMatroid)
            }
            _ => 1,
        };
        let draws = self
            .marginals
            .iter()
            .try_fold(1usize, |acc, m| acc.checked_mul(m.atoms().len()))
            .ok_or_else(|| MechanismError::Size("too many reserve draws".into()))?;
        admissions
            .checked_mul(draws)
            .ok_or_else(|| MechanismError::Size("too many realizations".into()))
    }

    /// Every realization of the internal randomness with its probability.
    pub fn realizations(&self) -> Result<Vec<Realization<S>>, MechanismError> {
        self.realization_count()?;
        let n = self.inst.agents();
        let all = AgentSet::full(n);
        let mut out = match self.mech.id {
            MechanismId::RandSingle => all
                .subsets()
                .map(|z| {
                    let w = pow(q::<S>(2, 3), z.len()) * pow(q::<S>(1, 3), n - z.len());
                    Realization::admission(z, w, format!("Z={z}"))
                })
                .collect(),
            MechanismId::RandMatroid => {
                let mut v = vec![Realization::admission(all, q(1, 2), "all".into())];
                let w = q::<S>(1, 2) * pow(q::<S>(1, 2), n);
                v.extend(all.subsets().map(|z| Realization::admission(z, w.clone(), format!("sub Z={z}"))));
                v
            }
            _ => vec![Realization::deterministic()],
        };
        for (i, m) in self.marginals.iter().enumerate() {
            out = out
                .into_iter()
                .flat_map(|r| {
                    m.atoms().iter().map(move |(x, p)| {
                        let mut reserves = r.reserves.clone().unwrap_or_default();
                        reserves.push(x.clone());
                        let label = if i == 0 {
                            format!("{} r=({x}", r.label)
                        } else {
                            format!("{},{x}", r.label)
                        };
                        Realization {
                            weight: r.weight.clone() * p.clone(),
                            admitted: r.admitted,
                            reserves: Some(reserves),
                            label,
                        }
                    })
                })
                .collect();
        }
        if !self.marginals.is_empty() {
            for r in &mut out {
                r.label.push(')');
            }
        }
        Ok(out)
    }

    /// One draw of the internal randomness.
    pub fn sample_realization<R: Rng + ?Sized>(&self, rng: &mut R) -> Realization<S> {
        let n = self.inst.agents();
        let admitted = match self.mech.id {
            MechanismId::RandSingle => Some((0..n).filter(|_| rng.gen_bool(2.0 / 3.0)).collect()),
            MechanismId::RandMatroid => Some(if rng.gen_bool(0.5) {
                AgentSet::full(n)
            } else {
                (0..n).filter(|_| rng.gen_bool(0.5)).collect()
            }),
            _ => None,
        };
        let reserves = (!self.marginals.is_empty()).then(|| {
            self.marginals
                .iter()
                .map(|m| {
                    let w: Vec<f64> = m.atoms().iter().map(|(_, p)| p.to_f64()).collect();
                    let k = WeightedIndex::new(w).expect("marginal has positive mass").sample(rng);
                    m.atoms()[k].0.clone()
                })
                .collect()
        });
        Realization {
            weight: S::one(),
            admitted,
            reserves,
            label: "sampled".into(),
        }
    }

    /// Outcome at a profile index under one realization.
    pub fn outcome(
        &self,
        profile: usize,
        realization: &Realization<S>,
    ) -> Result<AuctionOutcome<S>, MechanismError> {
        let inst = self.inst;
        let all = AgentSet::full(inst.agents());
        let active = realization.admitted.unwrap_or(all);
        let sampled;
        let policy: &dyn ReservePolicy<S> = match &realization.reserves {
            Some(r) => {
                sampled = FixedReserves(r.clone());
                &sampled
            }
            None => self.policy.as_ref(),
        };
        let mut out = match self.mech.id {
            MechanismId::Gvcg => gvcg(inst, profile, active)?,
            MechanismId::VcgEager => {
                let reserves = realization.reserves.as_ref().unwrap_or(&self.fixed);
                vcg_eager(inst, profile, active, reserves)?
            }
            _ => gvcg_lazy(inst, profile, active, policy)?,
        };
        out.admitted = realization.admitted;
        Ok(out)
    }
}

fn pow<S: Scalar>(base: S, exp: usize) -> S {
    (0..exp).fold(S::one(), |acc, _| acc * base.clone())
}
