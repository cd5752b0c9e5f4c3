use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mechlab::harness::tables::{audit_csv, compare_csv, oracle_sidecar, witness_csv};
use mechlab::harness::{
    generate_instances, load_instance, resolve_instance_path, run, GenParams, InstanceFile, MechanismSpec,
    ModeSpec, RunConfig, FIXTURES_ENV, GENERATORS,
};
use mechlab::mechanism::{ic_ir_audit, monopoly_reserves, Instance, MechanismId, ReserveSource};
use mechlab::oracle::opt_revenue;
use mechlab::scalar::{Arithmetic, Rational, Scalar};

#[derive(Parser)]
#[command(name = "mechlab", version, about = "GVCG auctions for interdependent values, with an LP revenue oracle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Revenue, audit, oracle and ratio report for instances x mechanisms.
    Run(RunArgs),
    /// Ex post IC/IR audit over every realization and profile.
    Audit(AuditArgs),
    /// Optimal revenue, witness mechanism and LP statistics.
    Oracle(OracleArgs),
    /// Lazy against eager thresholds per profile and agent.
    Compare(CompareArgs),
    /// Write generated instances as instance files.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Mc,
}

#[derive(Args)]
struct Source {
    /// Instance file or fixture name (repeatable).
    #[arg(long = "instance")]
    instances: Vec<String>,
    /// Fixture directory for bare names.
    #[arg(long, env = FIXTURES_ENV)]
    fixtures: Option<PathBuf>,
    /// Generate instances instead of loading them.
    #[arg(long)]
    generator: Option<String>,
    /// Generator parameter `key=value` (repeatable).
    #[arg(long = "param")]
    params: Vec<String>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "rational")]
    arithmetic: Arithmetic,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Mechanism id (repeatable); all when omitted.
    #[arg(long = "mechanism")]
    mechanisms: Vec<MechanismId>,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// CSV path; the sidecar goes next to it with `.meta.json` appended.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Reserve source for gvcg-lazy and vcg-eager.
    #[arg(long)]
    reserve_source: Option<String>,
    #[arg(long)]
    no_oracle: bool,
    #[arg(long)]
    no_upper_bound: bool,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long = "mechanism")]
    mechanisms: Vec<MechanismId>,
    #[arg(long)]
    reserve_source: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    source: Source,
    /// Witness CSV path; the sidecar goes next to it with `.meta.json` appended.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    source: Source,
    /// `monopoly` or `fixed(r1,...)`.
    #[arg(long, default_value = "monopoly")]
    reserve_source: String,
    /// Comma-separated grid indices; every supported profile when omitted.
    #[arg(long, value_delimiter = ',')]
    profile: Option<Vec<usize>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    generator: String,
    #[arg(long = "param")]
    params: Vec<String>,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; instance files go to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn gen_params(params: &[String], count: Option<usize>) -> Result<GenParams> {
    let mut p = GenParams::default();
    for s in params {
        p.set(s)?;
    }
    if let Some(c) = count {
        p.count = c;
    }
    Ok(p)
}

fn load<S: Scalar>(src: &Source) -> Result<Vec<Instance<S>>> {
    let mut out = Vec::new();
    for arg in &src.instances {
        let path = resolve_instance_path(arg, src.fixtures.as_deref());
        out.push(load_instance::<S>(&path)?);
    }
    if let Some(name) = &src.generator {
        let params = gen_params(&src.params, src.count)?;
        for inst in generate_instances(name, &params, src.seed)? {
            let file = InstanceFile::from_instance::<Rational>(&inst);
            out.push(file.build::<S>(&inst.name)?);
        }
    }
    if out.is_empty() {
        bail!("no instances: pass --instance or --generator");
    }
    Ok(out)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn specs(ids: &[MechanismId], reserve: Option<&str>) -> Vec<MechanismSpec> {
    let ids = if ids.is_empty() { MechanismId::ALL.to_vec() } else { ids.to_vec() };
    ids.into_iter()
        .map(|id| MechanismSpec {
            id,
            reserve: reserve
                .filter(|_| matches!(id, MechanismId::GvcgLazy | MechanismId::VcgEager))
                .map(str::to_string),
        })
        .collect()
}

fn cmd_run<S: Scalar>(a: &RunArgs) -> Result<bool> {
    let instances = load::<S>(&a.source)?;
    let cfg = RunConfig {
        mechanisms: specs(&a.mechanisms, a.reserve_source.as_deref()),
        mode: match a.mode {
            Mode::Exact => ModeSpec::Exact,
            Mode::Mc => ModeSpec::MonteCarlo {
                trials: a.trials,
                seed: a.source.seed,
            },
        },
        oracle: !a.no_oracle,
        upper_bound: !a.no_upper_bound,
        tolerance: a.tolerance,
    };
    let report = run(&instances, &cfg)?;
    emit(a.out.as_deref(), &report.csv_string())?;
    if let Some(out) = &a.out {
        emit(Some(&sidecar_path(out)), &report.sidecar_json())?;
    }
    Ok(!report.failed())
}

fn cmd_audit<S: Scalar>(a: &AuditArgs) -> Result<bool> {
    let instances = load::<S>(&a.source)?;
    let mut rows = Vec::new();
    for inst in &instances {
        for spec in specs(&a.mechanisms, a.reserve_source.as_deref()) {
            let mech = spec.build::<S>()?;
            if let Err(e) = mech.check(inst) {
                log::info!("{} {spec}: not applicable: {e}", inst.name);
                continue;
            }
            let v = ic_ir_audit(inst, &mech)?;
            eprintln!("{} {spec}: {}", inst.name, if v.is_empty() { "pass".to_string() } else { format!("{} violations", v.len()) });
            rows.push((inst.name.clone(), spec.to_string(), v));
        }
    }
    emit(a.out.as_deref(), &audit_csv(&rows)?)?;
    Ok(rows.iter().all(|r| r.2.is_empty()))
}

fn cmd_oracle<S: Scalar>(a: &OracleArgs) -> Result<bool> {
    let instances = load::<S>(&a.source)?;
    if instances.len() > 1 && a.out.is_some() {
        bail!("--out takes a single instance");
    }
    for inst in &instances {
        let res = opt_revenue(inst).with_context(|| inst.name.clone())?;
        let side = serde_json::to_string_pretty(&oracle_sidecar(inst, &res))? + "\n";
        emit(a.out.as_deref(), &witness_csv(inst, &res)?)?;
        match &a.out {
            Some(out) => emit(Some(&sidecar_path(out)), &side)?,
            None => eprint!("{side}"),
        }
    }
    Ok(true)
}

fn cmd_compare<S: Scalar>(a: &CompareArgs) -> Result<bool> {
    let instances = load::<S>(&a.source)?;
    let mut text = String::new();
    for (k, inst) in instances.iter().enumerate() {
        let reserves = match ReserveSource::<S>::parse(&a.reserve_source)? {
            ReserveSource::Monopoly => monopoly_reserves(inst)?,
            ReserveSource::None => vec![S::zero(); inst.agents()],
            ReserveSource::Fixed(r) if r.len() == inst.agents() => r,
            other => bail!("compare needs per-agent reserves, got `{other}`"),
        };
        let csv = compare_csv(inst, &reserves, a.profile.as_deref())?;
        // Keep one header across instances.
        let body = if k == 0 { csv.as_str() } else { csv.split_once('\n').map_or("", |x| x.1) };
        text.push_str(body);
    }
    emit(a.out.as_deref(), &text)?;
    Ok(true)
}

fn cmd_gen(a: &GenArgs) -> Result<bool> {
    if !GENERATORS.contains(&a.generator.as_str()) {
        bail!("unknown generator `{}`; known: {}", a.generator, GENERATORS.join(", "));
    }
    let params = gen_params(&a.params, Some(a.count))?;
    let instances = generate_instances(&a.generator, &params, a.seed)?;
    match &a.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for inst in &instances {
                let path = dir.join(format!("{}.json", inst.name));
                fs::write(&path, InstanceFile::from_instance(inst).to_json())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            eprintln!("wrote {} instances to {}", instances.len(), dir.display());
        }
        None => {
            for inst in &instances {
                println!("{}", InstanceFile::from_instance(inst).to_json());
            }
        }
    }
    Ok(true)
}

fn arithmetic(cmd: &Command) -> Arithmetic {
    match cmd {
        Command::Run(a) => a.source.arithmetic,
        Command::Audit(a) => a.source.arithmetic,
        Command::Oracle(a) => a.source.arithmetic,
        Command::Compare(a) => a.source.arithmetic,
        Command::Gen(_) => Arithmetic::Rational,
    }
}

fn dispatch<S: Scalar>(cmd: &Command) -> Result<bool> {
    match cmd {
        Command::Run(a) => cmd_run::<S>(a),
        Command::Audit(a) => cmd_audit::<S>(a),
        Command::Oracle(a) => cmd_oracle::<S>(a),
        Command::Compare(a) => cmd_compare::<S>(a),
        Command::Gen(a) => cmd_gen(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match arithmetic(&cli.command) {
        Arithmetic::Rational => dispatch::<Rational>(&cli.command),
        Arithmetic::Double => dispatch::<f64>(&cli.command),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
