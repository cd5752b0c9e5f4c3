use std::path::PathBuf;
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn mechlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mechlab"))
        .args(args)
        .env("MECHLAB_FIXTURES", fixtures())
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn run_reports_tiny_fixture() {
    let o = mechlab(&["run", "--instance", "tiny-1", "--mechanism", "gvcg", "--mechanism", "lookahead"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("tiny-1,gvcg,ok,3/2,"));
    assert!(lines[2].starts_with("tiny-1,lookahead,ok,3/2,"));
    assert!(lines[2].contains(",1/2,yes,pass,0"));
}

#[test]
fn run_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gap.csv");
    let o = mechlab(&[
        "run",
        "--instance",
        "gap-4",
        "--mechanism",
        "rand-single",
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "9",
    ]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("gap-4,rand-single,ok,"));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("gap.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["arithmetic"], "rational");
    assert_eq!(meta["tolerance"], 1e-9);
    assert_eq!(meta["failed"], false);
    assert!(meta["instances"][0]["lp"]["variables"].as_u64().unwrap() > 0);
}

#[test]
fn monte_carlo_and_double_modes_run() {
    let o = mechlab(&[
        "run", "--instance", "tiny-1", "--mechanism", "gvcg", "--mode", "mc", "--trials", "2000", "--seed", "3",
        "--arithmetic", "double",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let cols: Vec<&str> = row.split(',').collect();
    let est: f64 = cols[4].parse().unwrap();
    let se: f64 = cols[5].parse().unwrap();
    assert!((est - 1.5).abs() <= 3.0 * se, "{row}");
}

#[test]
fn oracle_emits_witness_and_statistics() {
    let o = mechlab(&["oracle", "--instance", "tiny-1"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("profile,signals,prob,allocation,alloc,payments\n"));
    let side: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(side["optimum"], "3/2");
    assert_eq!(side["counts"]["variables"], 20);
}

#[test]
fn compare_reports_the_reversal() {
    let o = mechlab(&["compare", "--instance", "nonmat-1", "--reserve-source", "fixed(0,3/5,0)", "--profile", "2,0,1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().contains(",7/10,6/5,true,"), "{text}");
}

#[test]
fn audit_passes_on_fixtures() {
    let o = mechlab(&["audit", "--instance", "tiny-1", "--instance", "nonmat-1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn gen_writes_loadable_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = mechlab(&[
        "gen", "--generator", "weighted-sum", "--count", "3", "--seed", "7", "--param", "agents=2", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let mut files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert_eq!(files.len(), 3);
    let o = mechlab(&["run", "--instance", files[0].to_str().unwrap(), "--mechanism", "lookahead"]);
    assert!(o.status.success());
}

#[test]
fn errors_exit_nonzero_with_a_field_message() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"agents": 1, "grid": [["1","2"]], "distribution": {"kind": "product", "marginals": [["1/2","49/100"]]},
            "valuation": {"kind": "private"}, "feasibility": {"kind": "uniform", "k": 1}}"#,
    )
    .unwrap();
    let o = mechlab(&["run", "--instance", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("distribution.marginals"));
    let o = mechlab(&["run", "--instance", "no-such-fixture"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mechlab(&["gen", "--generator", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}
