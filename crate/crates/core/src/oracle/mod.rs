//! Exact optimal revenue over randomized ex post IC, ex post IR mechanisms,
//! by linear programming.

pub mod lp;
mod revenue;

pub use self::lp::{Constraint, LinearProgram, LpError, LpSolution, LpStatus, Relation, VarKind};
pub use self::revenue::{
    build_revenue_lp, opt_revenue, opt_revenue_with, solve_full_lp, verify_witness, LpCounts,
    LpLayout, OracleConfig, OracleError, OracleResult, RevenueLp, SliceMass, SolveStats, Witness,
    WitnessRow, DEFAULT_VARIABLE_CAP,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::TieBreak;
    use crate::harness::fixtures::{gap, nonmat1, point_mass, single_bidder, tiny1, uniform_product};
    use crate::matroid::FeasibilitySystem;
    use crate::mechanism::{expected_revenue, value_marginal, Instance, Mechanism, MechanismId, RevenueMode};
    use crate::scalar::{q, Rational, Scalar};
    use crate::stochastic::{JointDistribution, SignalGrid};
    use crate::valuation::{ValuationFamily, ValuationProfile};
    use proptest::prelude::*;

    type R = Rational;

    fn cfg() -> OracleConfig {
        OracleConfig::default()
    }

    fn ints(xs: &[i64]) -> Vec<R> {
        xs.iter().map(|&x| q(x, 1)).collect()
    }

    fn uniform_single(values: &[i64]) -> Instance<R> {
        let n = values.len() as i64;
        single_bidder(ints(values), vec![q(1, n); values.len()]).unwrap()
    }

    fn weighted_sum(beta: R, grid: &[i64]) -> Instance<R> {
        uniform_product(
            "ws",
            vec![ints(grid), ints(grid)],
            FeasibilitySystem::uniform(2, 1).unwrap(),
            ValuationFamily::WeightedSum { beta },
        )
        .unwrap()
    }

    #[test]
    fn constraint_counts() {
        let one = uniform_single(&[1, 2]);
        let c = build_revenue_lp(&one, &cfg()).unwrap().counts;
        assert_eq!((c.variables, c.simplex, c.ic, c.ir), (6, 2, 2, 2));
        let c = build_revenue_lp(&tiny1::<R>(), &cfg()).unwrap().counts;
        assert_eq!((c.variables, c.feasible_sets), (20, 3));
        assert_eq!((c.simplex, c.ic, c.ir), (4, 8, 8));
    }

    #[test]
    fn size_cap_is_enforced() {
        let err = build_revenue_lp(&tiny1::<R>(), &OracleConfig { variable_cap: 19 }).unwrap_err();
        assert!(matches!(err, OracleError::Size { variables: 20, .. }));
    }

    #[test]
    fn no_agents_means_no_revenue() {
        let grid = SignalGrid::<R>::new(vec![]).unwrap();
        let dist = JointDistribution::from_product(&grid, vec![]).unwrap();
        let inst = Instance::new(
            "empty",
            grid,
            dist,
            ValuationProfile::private(0),
            FeasibilitySystem::uniform(0, 0).unwrap(),
            TieBreak::ascending(0),
        )
        .unwrap();
        assert_eq!(opt_revenue(&inst).unwrap().optimum, q(0, 1));
    }

    #[test]
    fn worked_optima() {
        assert_eq!(opt_revenue(&uniform_single(&[1, 2])).unwrap().optimum, q(1, 1));
        let seven = point_mass(&[q::<R>(7, 1)], FeasibilitySystem::uniform(1, 1).unwrap()).unwrap();
        assert_eq!(opt_revenue(&seven).unwrap().optimum, q(7, 1));
        assert_eq!(opt_revenue(&tiny1::<R>()).unwrap().optimum, q(3, 2));
        let zero = point_mass(&[q::<R>(0, 1), q(0, 1)], FeasibilitySystem::uniform(2, 1).unwrap()).unwrap();
        assert_eq!(opt_revenue(&zero).unwrap().optimum, q(0, 1));
    }

    #[test]
    fn gap_instance_serves_the_second_agent() {
        let inst = gap::<R>(3, q(1, 10)).unwrap();
        let opt = opt_revenue(&inst).unwrap().optimum;
        assert!(opt >= q(12, 5), "{opt}");
    }

    #[test]
    fn full_and_reduced_programs_agree() {
        let cases = vec![
            tiny1::<R>(),
            nonmat1(),
            gap(2, q(1, 10)).unwrap(),
            weighted_sum(q(1, 2), &[0, 1, 2]),
            weighted_sum(q(1, 3), &[1, 3]),
            uniform_single(&[1, 2, 4]),
        ];
        for inst in cases {
            let fast = opt_revenue(&inst).unwrap();
            let slow = solve_full_lp(&inst, &cfg()).unwrap();
            assert_eq!(fast.optimum, slow, "{}", inst.name);
        }
    }

    #[test]
    fn witness_satisfies_every_constraint() {
        for inst in [tiny1::<R>(), nonmat1(), gap(3, q(1, 10)).unwrap(), weighted_sum(q(1, 2), &[0, 1, 2])] {
            let res = opt_revenue(&inst).unwrap();
            assert!(res.witness.audit(&inst).is_empty(), "{}", inst.name);
            let full = build_revenue_lp(&inst, &cfg()).unwrap();
            verify_witness(&full, &res.witness).unwrap();
            let mut bad = res.witness.clone();
            let row = bad.rows.iter_mut().find(|r| r.prob > q(0, 1)).unwrap();
            row.payments[0] = row.payments[0].clone() + q::<R>(1, 100);
            assert!(verify_witness(&full, &bad).is_err());
        }
    }

    #[test]
    fn double_mode_matches_exact() {
        let exact = opt_revenue(&weighted_sum(q(1, 2), &[0, 1, 2])).unwrap();
        let approx = opt_revenue(&uniform_product::<f64>(
            "ws",
            vec![vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0]],
            FeasibilitySystem::uniform(2, 1).unwrap(),
            ValuationFamily::WeightedSum { beta: 0.5 },
        )
        .unwrap())
        .unwrap();
        assert!((approx.optimum - exact.optimum.to_f64()).abs() < 1e-9);
        assert!(!approx.stats.warm_started && exact.stats.warm_started);
    }

    #[test]
    fn oracle_dominates_the_mechanisms() {
        for inst in [tiny1::<R>(), nonmat1(), gap(2, q(1, 10)).unwrap()] {
            let opt = opt_revenue(&inst).unwrap().optimum;
            for id in MechanismId::ALL {
                let mech = Mechanism::new(id);
                if mech.check(&inst).is_err() {
                    continue;
                }
                let rev = expected_revenue(&inst, &mech, RevenueMode::exact()).unwrap().value;
                assert!(rev <= opt, "{} {id}: {rev} > {opt}", inst.name);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn single_bidder_optimum_is_the_monopoly_revenue(
            raw in prop::collection::vec((1i64..20, 1i64..6), 1..5)
        ) {
            let mut values: Vec<i64> = raw.iter().map(|r| r.0).collect();
            values.sort_unstable();
            values.dedup();
            let weights: Vec<i64> = raw.iter().take(values.len()).map(|r| r.1).collect();
            let total: i64 = weights.iter().sum();
            let inst = single_bidder::<R>(ints(&values), weights.iter().map(|&w| q(w, total)).collect()).unwrap();
            let monopoly = value_marginal(&inst, 0).unwrap().monopoly_price().revenue;
            prop_assert_eq!(opt_revenue(&inst).unwrap().optimum, monopoly);
        }
    }
}
