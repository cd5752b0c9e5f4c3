use crate::agents::TieBreak;
use crate::matroid::FeasibilitySystem;
use crate::scalar::Scalar;
use crate::stochastic::{JointDistribution, ProfileSpace, SignalGrid};
use crate::valuation::{AssumptionReport, ValuationProfile, ValueTable};

use super::MechanismError;

/// All primitives of one auction environment, validated for consistency.
#[derive(Debug, Clone)]
pub struct Instance<S> {
    pub name: String,
    grid: SignalGrid<S>,
    dist: JointDistribution<S>,
    valuation: ValuationProfile<S>,
    values: ValueTable<S>,
    feas: FeasibilitySystem,
    tie: TieBreak,
    assumptions: AssumptionReport,
}

impl<S: Scalar> Instance<S> {
    /// Rejects inconsistent agent counts and valuations failing A.1. The
    /// other assumption checks are recorded for the mechanisms to consult.
    pub fn new(
        name: impl Into<String>,
        grid: SignalGrid<S>,
        dist: JointDistribution<S>,
        valuation: ValuationProfile<S>,
        feas: FeasibilitySystem,
        tie: TieBreak,
    ) -> Result<Self, MechanismError> {
        let n = grid.agents();
        if dist.space() != &grid.space() {
            return Err(MechanismError::Config("distribution does not match the grid".into()));
        }
        if valuation.agents() != n || feas.agents() != n || tie.len() != n {
            return Err(MechanismError::Config(format!(
                "agent counts disagree: grid {n}, valuation {}, feasibility {}, tie-break {}",
                valuation.agents(),
                feas.agents(),
                tie.len()
            )));
        }
        let values = valuation.tabulate(&grid)?;
        let assumptions = AssumptionReport::of(&values);
        if let Some(v) = assumptions.a1.first() {
            return Err(MechanismError::Assumption(format!(
                "{} monotonicity violations, first: {v}",
                assumptions.a1.len()
            )));
        }
        Ok(Instance {
            name: name.into(),
            grid,
            dist,
            valuation,
            values,
            feas,
            tie,
            assumptions,
        })
    }

    pub fn agents(&self) -> usize {
        self.grid.agents()
    }

    pub fn grid(&self) -> &SignalGrid<S> {
        &self.grid
    }

    pub fn dist(&self) -> &JointDistribution<S> {
        &self.dist
    }

    pub fn valuation(&self) -> &ValuationProfile<S> {
        &self.valuation
    }

    pub fn values(&self) -> &ValueTable<S> {
        &self.values
    }

    pub fn feasibility(&self) -> &FeasibilitySystem {
        &self.feas
    }

    pub fn tie_break(&self) -> &TieBreak {
        &self.tie
    }

    pub fn assumptions(&self) -> &AssumptionReport {
        &self.assumptions
    }

    pub fn space(&self) -> &ProfileSpace {
        self.dist.space()
    }

    /// `v_i` at profile index `profile`.
    pub fn value(&self, profile: usize, agent: usize) -> &S {
        self.values.get(profile, agent)
    }

    pub fn is_private(&self) -> bool {
        self.assumptions.private
    }

    /// Environments where the GVCG family is ex post IC: interdependent
    /// values need single crossing and a matroid; private values accept any
    /// downward-closed family.
    pub fn require_gvcg_assumptions(&self) -> Result<(), MechanismError> {
        if self.is_private() {
            return Ok(());
        }
        if let Some(v) = self.assumptions.single_crossing.first() {
            return Err(MechanismError::Assumption(format!(
                "interdependent values fail single crossing ({} violations, first: {v})",
                self.assumptions.single_crossing.len()
            )));
        }
        if !self.feas.is_matroid() {
            return Err(MechanismError::Assumption(
                "interdependent values need a matroid feasibility system".into(),
            ));
        }
        Ok(())
    }

    pub fn require_private(&self, what: &str) -> Result<(), MechanismError> {
        if self.is_private() {
            Ok(())
        } else {
            Err(MechanismError::Assumption(format!("{what} needs private values")))
        }
    }

    pub fn require_matroid(&self, what: &str) -> Result<(), MechanismError> {
        if self.feas.is_matroid() {
            Ok(())
        } else {
            Err(MechanismError::WrongVariant(format!("{what} needs a matroid")))
        }
    }
}
