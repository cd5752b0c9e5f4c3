//! Interdependent valuation families and grid checks of the standing
//! assumptions (monotonicity, single crossing, diminishing cross effects).

use std::fmt;

use thiserror::Error;

use crate::scalar::{sum, Scalar};
use crate::stochastic::{ProfileSpace, SignalGrid};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValuationError {
    #[error("signal {value} is not on agent {agent}'s grid")]
    OffGrid { agent: usize, value: String },
    #[error("{0}")]
    Shape(String),
    #[error("value of agent {agent} at {profile:?} is {value}: values must be finite and nonnegative")]
    BadValue {
        agent: usize,
        profile: Vec<usize>,
        value: String,
    },
}

/// A nondecreasing step function on one agent's grid. `steps` lists
/// `(grid point, value)` pairs; the function equals the value of the last
/// step at or below the argument, and 0 below the first step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction<S> {
    pub steps: Vec<(S, S)>,
}

impl<S: Scalar> StepFunction<S> {
    pub fn constant(value: S) -> Self {
        StepFunction {
            steps: vec![(S::zero(), value)],
        }
    }

    pub fn eval(&self, x: &S) -> S {
        let mut out = S::zero();
        for (p, v) in &self.steps {
            if x.approx_ge(p) {
                out = v.clone();
            } else {
                break;
            }
        }
        out
    }
}

/// A piecewise-linear function through sorted breakpoints, extended
/// linearly past both ends with the end slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear<S> {
    pub points: Vec<(S, S)>,
}

impl<S: Scalar> PiecewiseLinear<S> {
    pub fn new(points: Vec<(S, S)>) -> Result<Self, ValuationError> {
        if points.len() < 2 {
            return Err(ValuationError::Shape(
                "a piecewise-linear function needs at least two breakpoints".into(),
            ));
        }
        if points.windows(2).any(|w| !w[1].0.definitely_gt(&w[0].0)) {
            return Err(ValuationError::Shape("breakpoints must be strictly increasing".into()));
        }
        Ok(PiecewiseLinear { points })
    }

    fn slope(&self, k: usize) -> S {
        let (x0, y0) = &self.points[k];
        let (x1, y1) = &self.points[k + 1];
        (y1.clone() - y0.clone()) / (x1.clone() - x0.clone())
    }

    pub fn eval(&self, x: &S) -> S {
        let last = self.points.len() - 2;
        let seg = (0..=last)
            .find(|&k| !x.definitely_gt(&self.points[k + 1].0))
            .unwrap_or(last);
        let (x0, y0) = &self.points[seg];
        y0.clone() + self.slope(seg) * (x.clone() - x0.clone())
    }

    pub fn is_concave(&self) -> bool {
        let slopes: Vec<S> = (0..self.points.len() - 1).map(|k| self.slope(k)).collect();
        slopes.windows(2).all(|w| w[0].approx_ge(&w[1]))
    }

    pub fn is_nondecreasing(&self) -> bool {
        (0..self.points.len() - 1).all(|k| !self.slope(k).is_negative())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValuationFamily<S> {
    /// `v_i(s) = s_i`.
    Private,
    /// `v_i(s) = s_i + beta * sum_{j != i} s_j`.
    WeightedSum { beta: S },
    /// `v_i(s) = sum_j g_ij(s_j)`, with `terms[i][j] = g_ij`.
    Additive { terms: Vec<Vec<StepFunction<S>>> },
    /// `v_i(s) = h_i(sum_j g_ij(s_j))` with concave `h_i`.
    ConcaveAdditive {
        terms: Vec<Vec<StepFunction<S>>>,
        outer: Vec<PiecewiseLinear<S>>,
    },
    /// `values[profile index][i]`, indexed like [`ProfileSpace`].
    Table { values: Vec<Vec<S>> },
}

impl<S> ValuationFamily<S> {
    pub fn tag(&self) -> &'static str {
        match self {
            ValuationFamily::Private => "private",
            ValuationFamily::WeightedSum { .. } => "weighted_sum",
            ValuationFamily::Additive { .. } => "additive",
            ValuationFamily::ConcaveAdditive { .. } => "concave_additive",
            ValuationFamily::Table { .. } => "table",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValuationProfile<S> {
    agents: usize,
    family: ValuationFamily<S>,
}

impl<S: Scalar> ValuationProfile<S> {
    pub fn new(agents: usize, family: ValuationFamily<S>) -> Result<Self, ValuationError> {
        let check_terms = |terms: &Vec<Vec<StepFunction<S>>>| {
            if terms.len() != agents || terms.iter().any(|row| row.len() != agents) {
                return Err(ValuationError::Shape(format!(
                    "additive terms must form an {agents}x{agents} matrix"
                )));
            }
            Ok(())
        };
        match &family {
            ValuationFamily::Private | ValuationFamily::Table { .. } => {}
            ValuationFamily::WeightedSum { beta } => {
                if beta.is_negative() || beta.definitely_gt(&S::one()) {
                    return Err(ValuationError::Shape(format!("beta = {beta} is outside [0, 1]")));
                }
            }
            ValuationFamily::Additive { terms } => check_terms(terms)?,
            ValuationFamily::ConcaveAdditive { terms, outer } => {
                check_terms(terms)?;
                if outer.len() != agents {
                    return Err(ValuationError::Shape(format!(
                        "{} outer functions for {agents} agents",
                        outer.len()
                    )));
                }
                if let Some(i) = outer.iter().position(|h| !h.is_concave()) {
                    return Err(ValuationError::Shape(format!("outer function of agent {i} is not concave")));
                }
                if let Some(i) = outer.iter().position(|h| !h.is_nondecreasing()) {
                    return Err(ValuationError::Shape(format!(
                        "outer function of agent {i} is decreasing somewhere"
                    )));
                }
            }
        }
        Ok(ValuationProfile { agents, family })
    }

    pub fn private(agents: usize) -> Self {
        ValuationProfile {
            agents,
            family: ValuationFamily::Private,
        }
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn family(&self) -> &ValuationFamily<S> {
        &self.family
    }

    /// `v_i` at a profile of grid indices.
    pub fn value(&self, grid: &SignalGrid<S>, agent: usize, profile: &[usize]) -> S {
        let signal = |j: usize| grid.signal(j, profile[j]).clone();
        let additive = |terms: &Vec<Vec<StepFunction<S>>>| {
            sum((0..self.agents).map(|j| terms[agent][j].eval(&signal(j))))
        };
        match &self.family {
            ValuationFamily::Private => signal(agent),
            ValuationFamily::WeightedSum { beta } => {
                let others = sum((0..self.agents).filter(|&j| j != agent).map(signal));
                signal(agent) + beta.clone() * others
            }
            ValuationFamily::Additive { terms } => additive(terms),
            ValuationFamily::ConcaveAdditive { terms, outer } => outer[agent].eval(&additive(terms)),
            ValuationFamily::Table { values } => {
                values[grid.space().index(profile)][agent].clone()
            }
        }
    }

    /// `v_i` at a profile of signal values.
    pub fn value_at(&self, grid: &SignalGrid<S>, agent: usize, signals: &[S]) -> Result<S, ValuationError> {
        if signals.len() != grid.agents() {
            return Err(ValuationError::Shape(format!(
                "profile has {} signals for {} agents",
                signals.len(),
                grid.agents()
            )));
        }
        let profile = signals
            .iter()
            .enumerate()
            .map(|(j, x)| {
                grid.index_of(j, x).ok_or_else(|| ValuationError::OffGrid {
                    agent: j,
                    value: x.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.value(grid, agent, &profile))
    }

    /// Every value on the grid, validated finite and nonnegative.
    pub fn tabulate(&self, grid: &SignalGrid<S>) -> Result<ValueTable<S>, ValuationError> {
        if grid.agents() != self.agents {
            return Err(ValuationError::Shape(format!(
                "valuation has {} agents, grid has {}",
                self.agents,
                grid.agents()
            )));
        }
        let space = grid.space();
        if let ValuationFamily::Table { values } = &self.family {
            if values.len() != space.len() || values.iter().any(|row| row.len() != self.agents) {
                return Err(ValuationError::Shape(format!(
                    "value table needs {} rows of {} values",
                    space.len(),
                    self.agents
                )));
            }
        }
        let mut values = Vec::with_capacity(space.len() * self.agents);
        for idx in 0..space.len() {
            let profile = space.decode(idx);
            for i in 0..self.agents {
                let v = self.value(grid, i, &profile);
                if v.is_negative() || !v.to_f64().is_finite() {
                    return Err(ValuationError::BadValue {
                        agent: i,
                        profile,
                        value: v.to_string(),
                    });
                }
                values.push(v);
            }
        }
        Ok(ValueTable {
            agents: self.agents,
            space,
            values,
        })
    }
}

/// Dense cache of `v_i(s)` for every grid profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable<S> {
    agents: usize,
    space: ProfileSpace,
    values: Vec<S>,
}

impl<S: Scalar> ValueTable<S> {
    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn space(&self) -> &ProfileSpace {
        &self.space
    }

    /// `v_i` at profile index `idx`.
    pub fn get(&self, idx: usize, agent: usize) -> &S {
        &self.values[idx * self.agents + agent]
    }

    pub fn row(&self, idx: usize) -> &[S] {
        &self.values[idx * self.agents..(idx + 1) * self.agents]
    }

    /// True when every `v_i` depends on `s_i` alone.
    pub fn is_private(&self) -> bool {
        (0..self.space.len()).all(|idx| {
            (0..self.agents).all(|i| {
                let base = (0..self.agents)
                    .filter(|&j| j != i)
                    .fold(idx, |acc, j| self.space.index_with(acc, j, 0));
                self.get(idx, i).approx_eq(self.get(base, i))
            })
        })
    }

    pub fn all_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_approx_zero())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Assumption {
    /// Nondecreasing in every signal, strictly increasing in the own signal.
    Monotone,
    SingleCrossing,
    /// Cross effects shrink as the own signal grows.
    DiminishingCross,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Assumption::Monotone => "A.1",
            Assumption::SingleCrossing => "A.2",
            Assumption::DiminishingCross => "A.3",
        })
    }
}

/// One failing tuple of a grid check.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub assumption: Assumption,
    pub agent: usize,
    /// The other agent involved, if any.
    pub other: Option<usize>,
    pub profile: Vec<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} agent {}", self.assumption, self.agent)?;
        if let Some(j) = self.other {
            write!(f, " vs {j}")?;
        }
        write!(f, " at {:?}: {}", self.profile, self.detail)
    }
}

/// Each value is nondecreasing along every grid step and strictly
/// increasing along the agent's own steps.
pub fn check_a1<S: Scalar>(table: &ValueTable<S>) -> Vec<Violation> {
    let space = table.space();
    let mut out = Vec::new();
    for idx in 0..space.len() {
        for j in 0..table.agents() {
            let k = space.coordinate(idx, j);
            if k + 1 >= space.radix(j) {
                continue;
            }
            let up = space.index_with(idx, j, k + 1);
            for i in 0..table.agents() {
                let (lo, hi) = (table.get(idx, i), table.get(up, i));
                let ok = if i == j { hi.definitely_gt(lo) } else { hi.approx_ge(lo) };
                if !ok {
                    out.push(Violation {
                        assumption: Assumption::Monotone,
                        agent: i,
                        other: (i != j).then_some(j),
                        profile: space.decode(idx),
                        detail: format!("raising s_{j} moves the value from {lo} to {hi}"),
                    });
                }
            }
        }
    }
    out
}

/// For `s_i < s_i'`: `v_i >= v_j` at `s_i` implies `v_i > v_j` at `s_i'`.
pub fn check_single_crossing<S: Scalar>(table: &ValueTable<S>) -> Vec<Violation> {
    let space = table.space();
    let n = table.agents();
    let mut out = Vec::new();
    for i in 0..n {
        for idx in (0..space.len()).filter(|&idx| space.coordinate(idx, i) == 0) {
            for lo in 0..space.radix(i) {
                let a = space.index_with(idx, i, lo);
                for j in (0..n).filter(|&j| j != i) {
                    if !table.get(a, i).approx_ge(table.get(a, j)) {
                        continue;
                    }
                    for hi in lo + 1..space.radix(i) {
                        let b = space.index_with(idx, i, hi);
                        if !table.get(b, i).definitely_gt(table.get(b, j)) {
                            out.push(Violation {
                                assumption: Assumption::SingleCrossing,
                                agent: i,
                                other: Some(j),
                                profile: space.decode(a),
                                detail: format!(
                                    "v_{i} >= v_{j} at s_{i} index {lo} but not strictly above at index {hi}"
                                ),
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

/// The forward difference of `v_i` in `s_j` is nonincreasing in `s_i`.
pub fn check_a3<S: Scalar>(table: &ValueTable<S>) -> Vec<Violation> {
    let space = table.space();
    let n = table.agents();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            for idx in 0..space.len() {
                let (ki, kj) = (space.coordinate(idx, i), space.coordinate(idx, j));
                if ki + 1 >= space.radix(i) || kj + 1 >= space.radix(j) {
                    continue;
                }
                let diff = |at: usize| {
                    let up = space.index_with(at, j, kj + 1);
                    table.get(up, i).clone() - table.get(at, i).clone()
                };
                let here = diff(idx);
                let next = diff(space.index_with(idx, i, ki + 1));
                if next.definitely_gt(&here) {
                    out.push(Violation {
                        assumption: Assumption::DiminishingCross,
                        agent: i,
                        other: Some(j),
                        profile: space.decode(idx),
                        detail: format!(
                            "raising s_{j} adds {here} at s_{i} index {ki} but {next} at index {}",
                            ki + 1
                        ),
                    });
                }
            }
        }
    }
    out
}

/// Outcome of all grid checks on one valuation.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub a1: Vec<Violation>,
    pub single_crossing: Vec<Violation>,
    pub a3: Vec<Violation>,
    pub private: bool,
}

impl AssumptionReport {
    pub fn of<S: Scalar>(table: &ValueTable<S>) -> Self {
        AssumptionReport {
            a1: check_a1(table),
            single_crossing: check_single_crossing(table),
            a3: check_a3(table),
            private: table.is_private(),
        }
    }

    pub fn a1_holds(&self) -> bool {
        self.a1.is_empty()
    }

    pub fn a2_holds(&self) -> bool {
        self.single_crossing.is_empty()
    }

    pub fn a3_holds(&self) -> bool {
        self.a3.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Rational};

    type R = Rational;

    fn grid(n: usize, pts: &[i64]) -> SignalGrid<R> {
        SignalGrid::new(vec![pts.iter().map(|&x| q(x, 1)).collect(); n]).unwrap()
    }

    fn table_family(g: &SignalGrid<R>, f: impl Fn(&[R]) -> Vec<R>) -> ValuationFamily<R> {
        let space = g.space();
        ValuationFamily::Table {
            values: (0..space.len()).map(|idx| f(&g.signals_of(&space.decode(idx)))).collect(),
        }
    }

    #[test]
    fn value_examples() {
        let g = grid(2, &[1, 2, 3, 4]);
        let p = ValuationProfile::private(2);
        assert_eq!(p.value_at(&g, 0, &[q(3, 1), q(1, 1)]).unwrap(), q(3, 1));
        let ws = ValuationProfile::new(2, ValuationFamily::WeightedSum { beta: q(1, 2) }).unwrap();
        assert_eq!(ws.value_at(&g, 0, &[q(2, 1), q(4, 1)]).unwrap(), q(4, 1));
        let gap = ValuationProfile::new(2, table_family(&g, |s| vec![s[0].clone(), s[0].clone() - q::<R>(1, 10)])).unwrap();
        assert_eq!(gap.value_at(&g, 1, &[q(4, 1), q(1, 1)]).unwrap(), q(39, 10));
        assert!(matches!(
            p.value_at(&g, 0, &[q(5, 1), q(1, 1)]),
            Err(ValuationError::OffGrid { agent: 0, .. })
        ));
    }

    #[test]
    fn single_crossing_examples() {
        let g = grid(3, &[0, 1, 2]);
        let p = ValuationProfile::<R>::private(3).tabulate(&g).unwrap();
        assert!(check_single_crossing(&p).is_empty());
        let ws = ValuationProfile::new(3, ValuationFamily::WeightedSum { beta: q(1, 2) }).unwrap();
        assert!(check_single_crossing(&ws.tabulate(&g).unwrap()).is_empty());
        let g01 = grid(2, &[0, 1]);
        let common = ValuationProfile::new(2, ValuationFamily::WeightedSum { beta: q(1, 1) }).unwrap();
        let v = check_single_crossing(&common.tabulate(&g01).unwrap());
        assert!(!v.is_empty());
        assert!(v.iter().all(|x| x.assumption == Assumption::SingleCrossing));
    }

    #[test]
    fn a3_examples() {
        let g = grid(2, &[1, 2, 3]);
        let step = |pts: &[(i64, i64)]| StepFunction {
            steps: pts.iter().map(|&(x, y)| (q(x, 1), q(y, 1))).collect(),
        };
        let terms = vec![
            vec![step(&[(1, 1), (2, 3), (3, 6)]), step(&[(1, 0), (3, 1)])],
            vec![step(&[(1, 0), (2, 2)]), step(&[(1, 2), (2, 4), (3, 5)])],
        ];
        let add = ValuationProfile::new(2, ValuationFamily::Additive { terms: terms.clone() }).unwrap();
        let t = add.tabulate(&g).unwrap();
        assert!(check_a3(&t).is_empty() && check_a1(&t).is_empty());

        let min10 = PiecewiseLinear::new(vec![(q(0, 1), q(0, 1)), (q(10, 1), q(10, 1)), (q(11, 1), q(10, 1))]).unwrap();
        let ca = ValuationProfile::new(
            2,
            ValuationFamily::ConcaveAdditive { terms, outer: vec![min10.clone(), min10] },
        )
        .unwrap();
        assert!(check_a3(&ca.tabulate(&g).unwrap()).is_empty());

        let g12 = grid(2, &[1, 2]);
        let prod = ValuationProfile::new(2, table_family(&g12, |s| vec![s[0].clone() * s[1].clone(), s[1].clone()])).unwrap();
        let v = check_a3(&prod.tabulate(&g12).unwrap());
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].agent, v[0].other), (0, Some(1)));
    }

    #[test]
    fn a1_detects_flat_own_signal() {
        let g = grid(2, &[1, 2]);
        let flat = ValuationProfile::new(2, table_family(&g, |s| vec![q(1, 1), s[1].clone()])).unwrap();
        let v = check_a1(&flat.tabulate(&g).unwrap());
        assert!(!v.is_empty() && v.iter().all(|x| x.agent == 0 && x.other.is_none()));
        let neg = ValuationProfile::new(2, table_family(&g, |s| vec![s[0].clone() - q::<R>(2, 1), s[1].clone()])).unwrap();
        assert!(matches!(neg.tabulate(&g), Err(ValuationError::BadValue { .. })));
    }

    #[test]
    fn piecewise_linear_extrapolates_with_end_slopes() {
        let h = PiecewiseLinear::<R>::new(vec![(q(0, 1), q(0, 1)), (q(2, 1), q(4, 1)), (q(4, 1), q(5, 1))]).unwrap();
        assert_eq!(h.eval(&q(1, 1)), q(2, 1));
        assert_eq!(h.eval(&q(3, 1)), q(9, 2));
        assert_eq!(h.eval(&q(6, 1)), q(6, 1));
        assert_eq!(h.eval(&q(-1, 1)), q(-2, 1));
        assert!(h.is_concave());
        let convex = PiecewiseLinear::<R>::new(vec![(q(0, 1), q(0, 1)), (q(1, 1), q(1, 1)), (q(2, 1), q(3, 1))]).unwrap();
        assert!(!convex.is_concave());
    }

    #[test]
    fn private_detection() {
        let g = grid(2, &[1, 2]);
        assert!(ValuationProfile::<R>::private(2).tabulate(&g).unwrap().is_private());
        let ws = ValuationProfile::new(2, ValuationFamily::WeightedSum { beta: q(1, 4) }).unwrap();
        assert!(!ws.tabulate(&g).unwrap().is_private());
        let ws0 = ValuationProfile::new(2, ValuationFamily::WeightedSum { beta: q(0, 1) }).unwrap();
        assert!(ws0.tabulate(&g).unwrap().is_private());
    }

    proptest::proptest! {
        #[test]
        fn additive_differences_telescope(raw in proptest::collection::vec(0i64..4, 27), j in 1usize..3, s in proptest::collection::vec(0usize..3, 3)) {
            // g_ij as cumulative sums of nonnegative increments on the grid {0,1,2}
            let g = grid(3, &[0, 1, 2]);
            let terms: Vec<Vec<StepFunction<R>>> = (0..3).map(|i| (0..3).map(|jj| {
                let base = (i * 3 + jj) * 3;
                let mut acc = 0;
                StepFunction { steps: (0..3).map(|k| { acc += raw[base + k] + if i == jj { 1 } else { 0 }; (q(k as i64, 1), q(acc, 1)) }).collect() }
            }).collect()).collect();
            let vp = ValuationProfile::new(3, ValuationFamily::Additive { terms: terms.clone() }).unwrap();
            let t = vp.tabulate(&g).unwrap();
            proptest::prop_assert!(check_a1(&t).is_empty());
            let space = g.space();
            let idx = space.index(&s);
            let floor = space.index_with(idx, j, 0);
            let lhs = t.get(idx, 0).clone() - t.get(floor, 0).clone();
            let steps = sum((0..s[j]).map(|k| terms[0][j].eval(&q(k as i64 + 1, 1)) - terms[0][j].eval(&q(k as i64, 1))));
            proptest::prop_assert_eq!(lhs, steps);
        }

        #[test]
        fn monotone_profiles_are_monotone_along_every_step(beta in 0i64..=4, pts in proptest::collection::btree_set(0i64..10, 1..4)) {
            let pts: Vec<i64> = pts.into_iter().collect();
            let g = grid(3, &pts);
            let ws = ValuationProfile::new(3, ValuationFamily::WeightedSum { beta: q(beta, 4) }).unwrap();
            let t = ws.tabulate(&g).unwrap();
            proptest::prop_assert!(check_a1(&t).is_empty());
            if beta < 4 {
                proptest::prop_assert!(check_single_crossing(&t).is_empty());
            }
            proptest::prop_assert!(check_a3(&t).is_empty());
        }
    }
}
