//! CSV tables for the `oracle`, `audit` and `compare` subcommands.

use serde::Serialize;

use crate::mechanism::{threshold_comparison, AuditViolation, Instance, MechanismError, Threshold};
use crate::oracle::{LpCounts, OracleResult, SolveStats};
use crate::scalar::Scalar;

use super::HarnessError;

pub const WITNESS_COLUMNS: [&str; 6] = ["profile", "signals", "prob", "allocation", "alloc", "payments"];
pub const AUDIT_COLUMNS: [&str; 7] = ["instance", "mechanism", "kind", "agent", "profile", "deviation", "gap"];
pub const COMPARE_COLUMNS: [&str; 10] = [
    "instance",
    "profile",
    "agent",
    "value",
    "reserve",
    "removed",
    "lazy_threshold",
    "eager_threshold",
    "eager_above_lazy",
    "signals",
];

fn join<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, HarnessError> {
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

/// One row per retained profile: the allocation distribution over feasible
/// sets, the interim allocation and the payments.
pub fn witness_csv<S: Scalar>(inst: &Instance<S>, res: &OracleResult<S>) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(WITNESS_COLUMNS)?;
    for row in &res.witness.rows {
        let profile = inst.space().decode(row.profile);
        w.write_record([
            join(&profile),
            join(inst.grid().signals_of(&profile)),
            row.prob.to_string(),
            join(row.allocation.iter().map(|(set, y)| format!("{set}:{y}"))),
            join(&row.alloc),
            join(&row.payments),
        ])?;
    }
    finish(w)
}

#[derive(Debug, Serialize)]
pub struct OracleSidecar {
    pub version: &'static str,
    pub instance: String,
    pub arithmetic: String,
    pub optimum: String,
    pub optimum_float: f64,
    pub counts: LpCounts,
    pub constraints: usize,
    pub stats: SolveStats,
}

pub fn oracle_sidecar<S: Scalar>(inst: &Instance<S>, res: &OracleResult<S>) -> OracleSidecar {
    OracleSidecar {
        version: env!("CARGO_PKG_VERSION"),
        instance: inst.name.clone(),
        arithmetic: S::ARITHMETIC.to_string(),
        optimum: res.optimum.to_string(),
        optimum_float: res.optimum.to_f64(),
        counts: res.counts,
        constraints: res.counts.constraints(),
        stats: res.stats,
    }
}

pub fn audit_csv<S: Scalar>(rows: &[(String, String, Vec<AuditViolation<S>>)]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(AUDIT_COLUMNS)?;
    for (instance, mechanism, violations) in rows {
        for v in violations {
            w.write_record([
                instance.clone(),
                format!("{mechanism} {}", v.realization),
                v.kind.to_string(),
                v.agent.to_string(),
                join(&v.profile),
                v.deviation.map(|d| d.to_string()).unwrap_or_default(),
                v.gap.to_string(),
            ])?;
        }
    }
    finish(w)
}

fn threshold_cell<S: Scalar>(t: &Threshold<S>) -> String {
    match t {
        Threshold::At { value, .. } => value.to_string(),
        Threshold::NeverWins => "never".into(),
        Threshold::Inactive => "removed".into(),
    }
}

/// Lazy against eager thresholds at every supported profile.
pub fn compare_csv<S: Scalar>(
    inst: &Instance<S>,
    reserves: &[S],
    profiles: Option<&[usize]>,
) -> Result<String, HarnessError> {
    let wrap = |source: MechanismError| HarnessError::Mechanism {
        instance: inst.name.clone(),
        source,
    };
    let indices = match profiles {
        Some(p) => vec![inst.space().index(p)],
        None => inst.dist().support_indices(),
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COMPARE_COLUMNS)?;
    for idx in indices {
        let profile = inst.space().decode(idx);
        for row in threshold_comparison(inst, idx, reserves).map_err(wrap)? {
            let above = match (row.eager.value(), row.lazy.value()) {
                (Some(e), Some(l)) => e.definitely_gt(l),
                _ => false,
            };
            w.write_record([
                inst.name.clone(),
                join(&profile),
                row.agent.to_string(),
                inst.value(idx, row.agent).to_string(),
                reserves[row.agent].to_string(),
                row.removed.to_string(),
                threshold_cell(&row.lazy),
                threshold_cell(&row.eager),
                above.to_string(),
                join(inst.grid().signals_of(&profile)),
            ])?;
        }
    }
    finish(w)
}
