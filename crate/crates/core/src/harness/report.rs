//! Experiment runs: revenue, audit, oracle and upper bound per instance and
//! mechanism, written as CSV plus a JSON sidecar.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::mechanism::{
    expected_revenue, ic_ir_audit, opt_upper_bound, Instance, Mechanism, MechanismError, MechanismId,
    ReserveSource, RevenueMode,
};
use crate::oracle::{opt_revenue, LpCounts};
use crate::scalar::{q, Scalar};

use super::HarnessError;

/// Fixed CSV header.
pub const CSV_COLUMNS: [&str; 14] = [
    "instance",
    "mechanism",
    "status",
    "revenue",
    "revenue_float",
    "std_error",
    "oracle",
    "upper_bound",
    "ratio",
    "ratio_float",
    "guarantee",
    "bound_ok",
    "audit",
    "violations",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MechanismSpec {
    pub id: MechanismId,
    /// Reserve source text such as `monopoly` or `fixed(1,2)`.
    pub reserve: Option<String>,
}

impl MechanismSpec {
    pub fn new(id: MechanismId) -> Self {
        MechanismSpec { id, reserve: None }
    }

    pub fn build<S: Scalar>(&self) -> Result<Mechanism<S>, MechanismError> {
        let m = Mechanism::new(self.id);
        match &self.reserve {
            None => Ok(m),
            Some(r) => m.with_reserve(ReserveSource::parse(r)?),
        }
    }
}

impl fmt::Display for MechanismSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.reserve {
            None => write!(f, "{}", self.id),
            Some(r) => write!(f, "{}[{r}]", self.id),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ModeSpec {
    Exact,
    MonteCarlo { trials: usize, seed: u64 },
}

impl ModeSpec {
    pub fn revenue_mode(self) -> RevenueMode {
        match self {
            ModeSpec::Exact => RevenueMode::exact(),
            ModeSpec::MonteCarlo { trials, seed } => RevenueMode::MonteCarlo { trials, seed },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mechanisms: Vec<MechanismSpec>,
    pub mode: ModeSpec,
    pub oracle: bool,
    pub upper_bound: bool,
    pub tolerance: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mechanisms: MechanismId::ALL.iter().map(|&id| MechanismSpec::new(id)).collect(),
            mode: ModeSpec::Exact,
            oracle: true,
            upper_bound: true,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    /// The mechanism's preconditions fail on this instance.
    NotApplicable(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow<S> {
    pub instance: String,
    pub mechanism: String,
    pub status: RowStatus,
    pub revenue: Option<S>,
    pub std_error: Option<f64>,
    pub oracle: Option<S>,
    pub upper_bound: Option<S>,
    /// Revenue over the oracle optimum; absent when the optimum is zero.
    pub ratio: Option<S>,
    pub guarantee: Option<S>,
    pub bound_ok: Option<bool>,
    pub violations: Option<usize>,
    pub wall_ms: f64,
}

impl<S: Scalar> ReportRow<S> {
    pub fn audit_passed(&self) -> bool {
        self.violations.is_none_or(|v| v == 0)
    }

    /// Whether the row counts toward acceptance: applicable and audit-clean.
    pub fn counts(&self) -> bool {
        self.status == RowStatus::Ok && self.violations == Some(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceMeta {
    pub name: String,
    pub agents: usize,
    pub profiles: usize,
    pub lp: Option<LpCounts>,
    pub oracle_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowTiming {
    pub instance: String,
    pub mechanism: String,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMeta {
    pub version: &'static str,
    pub arithmetic: String,
    #[serde(flatten)]
    pub mode: ModeSpec,
    pub tolerance: f64,
    pub mechanisms: Vec<String>,
    pub instances: Vec<InstanceMeta>,
    pub timings: Vec<RowTiming>,
    pub failed: bool,
}

#[derive(Debug, Clone)]
pub struct RatioReport<S> {
    pub rows: Vec<ReportRow<S>>,
    pub meta: RunMeta,
}

/// Approximation guarantee checked for a mechanism on an instance.
pub fn guarantee<S: Scalar>(id: MechanismId, inst: &Instance<S>) -> Option<S> {
    let a = inst.assumptions();
    let interdependent_ok = a.a1_holds() && a.a2_holds() && a.a3_holds();
    match id {
        MechanismId::Lookahead if inst.is_private() => Some(q(1, 2)),
        MechanismId::RandSingle if inst.feasibility().is_single_item() && interdependent_ok => Some(q(2, 9)),
        MechanismId::RandMatroid if inst.feasibility().is_matroid() && interdependent_ok => Some(q(1, 18)),
        _ => None,
    }
}

struct InstanceResult<S> {
    rows: Vec<ReportRow<S>>,
    meta: InstanceMeta,
}

fn run_instance<S: Scalar>(inst: &Instance<S>, cfg: &RunConfig) -> Result<InstanceResult<S>, HarnessError> {
    let wrap = |source: MechanismError| HarnessError::Mechanism {
        instance: inst.name.clone(),
        source,
    };
    let (oracle, lp, oracle_ms) = if cfg.oracle {
        let t = Instant::now();
        let res = opt_revenue(inst).map_err(|source| HarnessError::Oracle {
            instance: inst.name.clone(),
            source,
        })?;
        (Some(res.optimum), Some(res.counts), Some(ms(t)))
    } else {
        (None, None, None)
    };
    let upper = if cfg.upper_bound && inst.feasibility().is_matroid() {
        Some(opt_upper_bound(inst).map_err(wrap)?)
    } else {
        None
    };
    let tol = S::parse_literal(&format!("{:e}", cfg.tolerance)).unwrap_or_else(|_| S::zero());
    let mut rows = Vec::with_capacity(cfg.mechanisms.len());
    for spec in &cfg.mechanisms {
        let t = Instant::now();
        let mut row = ReportRow {
            instance: inst.name.clone(),
            mechanism: spec.to_string(),
            status: RowStatus::Ok,
            revenue: None,
            std_error: None,
            oracle: oracle.clone(),
            upper_bound: upper.clone(),
            ratio: None,
            guarantee: None,
            bound_ok: None,
            violations: None,
            wall_ms: 0.0,
        };
        let mech = spec.build::<S>().map_err(wrap)?;
        if let Err(e) = mech.check(inst) {
            row.status = RowStatus::NotApplicable(e.to_string());
            row.wall_ms = ms(t);
            rows.push(row);
            continue;
        }
        let violations = ic_ir_audit(inst, &mech).map_err(wrap)?;
        row.violations = Some(violations.len());
        for v in violations.iter().take(5) {
            log::warn!("{} {}: {v}", inst.name, spec);
        }
        let est = expected_revenue(inst, &mech, cfg.mode.revenue_mode()).map_err(wrap)?;
        row.std_error = est.std_error;
        if let Some(opt) = &oracle {
            if opt.is_positive() {
                row.ratio = Some(est.value.clone() / opt.clone());
            }
            row.guarantee = guarantee(spec.id, inst);
            if let Some(g) = &row.guarantee {
                let slack = est.value.clone() - g.clone() * opt.clone();
                row.bound_ok = Some(!(slack + tol.clone()).is_negative());
            }
        }
        row.revenue = Some(est.value);
        row.wall_ms = ms(t);
        rows.push(row);
    }
    Ok(InstanceResult {
        rows,
        meta: InstanceMeta {
            name: inst.name.clone(),
            agents: inst.agents(),
            profiles: inst.space().len(),
            lp,
            oracle_ms,
        },
    })
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs every instance and mechanism. Instances are processed in parallel;
/// rows keep input order.
pub fn run<S: Scalar>(instances: &[Instance<S>], cfg: &RunConfig) -> Result<RatioReport<S>, HarnessError> {
    let results: Vec<InstanceResult<S>> = instances
        .par_iter()
        .map(|inst| run_instance(inst, cfg))
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    let mut metas = Vec::new();
    for r in results {
        rows.extend(r.rows);
        metas.push(r.meta);
    }
    let failed = rows
        .iter()
        .any(|r| !r.audit_passed() || r.bound_ok == Some(false));
    let meta = RunMeta {
        version: env!("CARGO_PKG_VERSION"),
        arithmetic: S::ARITHMETIC.to_string(),
        mode: cfg.mode,
        tolerance: cfg.tolerance,
        mechanisms: cfg.mechanisms.iter().map(|m| m.to_string()).collect(),
        instances: metas,
        timings: rows
            .iter()
            .map(|r| RowTiming {
                instance: r.instance.clone(),
                mechanism: r.mechanism.clone(),
                wall_ms: r.wall_ms,
            })
            .collect(),
        failed,
    };
    Ok(RatioReport { rows, meta })
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map(T::to_string).unwrap_or_default()
}

fn float<S: Scalar>(x: &Option<S>) -> String {
    x.as_ref().map(|v| format!("{:.12}", v.to_f64())).unwrap_or_default()
}

impl<S: Scalar> RatioReport<S> {
    /// Nonzero exit: an audit failed or a guarantee was missed.
    pub fn failed(&self) -> bool {
        self.meta.failed
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_COLUMNS)?;
        for r in &self.rows {
            let status = match &r.status {
                RowStatus::Ok => "ok".to_string(),
                RowStatus::NotApplicable(why) => format!("n/a: {why}"),
            };
            let audit = match r.violations {
                None => "",
                Some(0) => "pass",
                Some(_) => "fail",
            };
            w.write_record([
                r.instance.clone(),
                r.mechanism.clone(),
                status,
                opt(&r.revenue),
                float(&r.revenue),
                r.std_error.map(|e| format!("{e:.12}")).unwrap_or_default(),
                opt(&r.oracle),
                opt(&r.upper_bound),
                opt(&r.ratio),
                float(&r.ratio),
                opt(&r.guarantee),
                r.bound_ok.map(|b| if b { "yes" } else { "no" }.to_string()).unwrap_or_default(),
                audit.to_string(),
                opt(&r.violations),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8")
    }

    pub fn sidecar_json(&self) -> String {
        serde_json::to_string_pretty(&self.meta).expect("serializable") + "\n"
    }
}
