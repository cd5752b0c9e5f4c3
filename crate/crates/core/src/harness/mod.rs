//! Instance files, generators, experiment runs and ratio reports.

pub mod file;
pub mod fixtures;
pub mod generate;
pub mod report;
pub mod tables;

use std::path::PathBuf;

use thiserror::Error;

use crate::mechanism::MechanismError;
use crate::oracle::OracleError;

pub use self::file::{load_dir, load_instance, save_instance, InstanceFile};
pub use self::generate::{generate_instances, GenParams, MatroidChoice, GENERATORS};
pub use self::report::{
    guarantee, run, MechanismSpec, ModeSpec, RatioReport, ReportRow, RowStatus, RunConfig,
    RunMeta, CSV_COLUMNS,
};

/// Environment variable naming the default fixture directory.
pub const FIXTURES_ENV: &str = "MECHLAB_FIXTURES";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{file}: {field}: {message}")]
    Field {
        file: String,
        field: String,
        message: String,
    },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("generator {name}: {message}")]
    Generator { name: String, message: String },
    #[error("{instance}: {source}")]
    Mechanism {
        instance: String,
        source: MechanismError,
    },
    #[error("{instance}: {source}")]
    Oracle {
        instance: String,
        source: OracleError,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Resolves an instance argument: an existing path, or a name looked up in
/// the fixture directory (with or without `.json`).
pub fn resolve_instance_path(arg: &str, fixtures: Option<&std::path::Path>) -> PathBuf {
    let direct = PathBuf::from(arg);
    if direct.exists() {
        return direct;
    }
    if let Some(dir) = fixtures {
        for candidate in [dir.join(arg), dir.join(format!("{arg}.json"))] {
            if candidate.exists() {
                return candidate;
            }
        }
    }
    direct
}
