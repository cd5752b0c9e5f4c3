use std::path::PathBuf;

use mechlab::harness::{load_dir, InstanceFile, run, ModeSpec, RunConfig};
use mechlab::mechanism::{expected_revenue, Mechanism, MechanismId, RevenueMode};
use mechlab::scalar::{Rational, Scalar};

fn corpus() -> Vec<mechlab::mechanism::Instance<Rational>> {
    load_dir(&PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")).unwrap()
}

#[test]
fn rational_reports_are_byte_identical() {
    let insts = corpus();
    let a = run(&insts, &RunConfig::default()).unwrap();
    let b = run(&insts, &RunConfig::default()).unwrap();
    assert_eq!(a.csv_string(), b.csv_string());
    assert!(!a.failed());
    let mc = RunConfig {
        mode: ModeSpec::MonteCarlo { trials: 500, seed: 42 },
        oracle: false,
        upper_bound: false,
        ..RunConfig::default()
    };
    let a = run(&insts[..6], &mc).unwrap();
    let b = run(&insts[..6], &mc).unwrap();
    assert_eq!(a.csv_string(), b.csv_string());
}

#[test]
fn ratio_is_exact_division() {
    let insts = corpus();
    let rep = run(&insts, &RunConfig::default()).unwrap();
    for r in rep.rows.iter().filter(|r| r.counts()) {
        let (rev, opt) = (r.revenue.clone().unwrap(), r.oracle.clone().unwrap());
        if opt.is_positive() {
            assert_eq!(r.ratio.clone().unwrap() * opt, rev, "{} {}", r.instance, r.mechanism);
        }
    }
}

#[test]
fn monte_carlo_estimates_land_within_three_standard_errors() {
    let mut compared = 0;
    for inst in corpus() {
        for id in MechanismId::ALL {
            let mech = Mechanism::new(id);
            if mech.check(&inst).is_err() {
                continue;
            }
            let exact = expected_revenue(&inst, &mech, RevenueMode::exact()).unwrap().value.to_f64();
            let approx = InstanceFile::from_instance(&inst).build::<f64>(&inst.name).unwrap();
            let mc = expected_revenue(&approx, &Mechanism::new(id), RevenueMode::MonteCarlo { trials: 20_000, seed: 17 })
                .unwrap();
            let se = mc.std_error.unwrap();
            let gap = (mc.value - exact).abs();
            assert!(gap <= 3.0 * se + 1e-12, "{} {id}: {} vs {exact} (se {se})", inst.name, mc.value);
            compared += 1;
        }
    }
    assert!(compared > 100);
}
