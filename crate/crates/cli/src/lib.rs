//! Reproducible experiment runner for `circle-rigidity`.
//!
//! A run validates an [`ExperimentConfig`], executes one pipeline (or all of
//! them for `suite`), and writes CSV tables, `run.log` and `summary.json`
//! into the output directory. Exit codes: 0 success, 1 I/O failure,
//! 2 invalid configuration, 3 numerical failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod experiments;
pub mod output;

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

pub use config::{
    validate, ConesConfig, Experiment, ExperimentConfig, Observable, ShiftConfig, Violation,
};
use output::{check_schema, Artifacts, Staging, LOG_FILE};

/// Output directory used when neither the config nor the command line names one.
pub const DEFAULT_OUT: &str = "results";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid configuration:\n{}", format_violations(.0))]
    Validation(Vec<Violation>),
    #[error(transparent)]
    Core(#[from] circle_rigidity::Error),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("output schema error: {0}")]
    Schema(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| format!("  {x}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl CliError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        use circle_rigidity::Error as E;
        match self {
            CliError::Config(_) | CliError::Validation(_) => 2,
            CliError::Core(e) if e.is_numerical() || matches!(e, E::ConeBoundary) => 3,
            CliError::Core(_) => 2,
            CliError::Io(_) | CliError::Schema(_) => 1,
        }
    }
}

/// What a successful run produced.
#[derive(Debug)]
pub struct RunReport {
    pub out: PathBuf,
    /// Files written, in commit order; `summary.json` is last.
    pub files: Vec<String>,
    pub summary: Value,
}

fn execute(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Value, CliError> {
    use Experiment as X;
    let single = |kind: Experiment, art: &mut Artifacts| match kind {
        X::Density => experiments::density(cfg, art),
        X::Periodic => experiments::periodic(cfg, art),
        X::Equidist => experiments::equidist(cfg, art),
        X::Conjugacy => experiments::conjugacy(cfg, art),
        X::Cones => experiments::cones(cfg, art),
        X::ShiftExact => experiments::shift_exact(cfg, art),
        X::Suite => unreachable!("suite is expanded by the caller"),
    };
    let kinds: Vec<Experiment> = match cfg.experiment {
        X::Suite => {
            let mut kinds = vec![X::Density, X::Periodic, X::Equidist];
            if cfg.target.is_some() {
                kinds.push(X::Conjugacy);
            }
            if cfg.cones.is_some() {
                kinds.push(X::Cones);
            }
            if cfg.shift.is_some() {
                kinds.push(X::ShiftExact);
            }
            kinds
        }
        kind => vec![kind],
    };
    let mut results = serde_json::Map::new();
    for kind in kinds {
        art.log(format!("running {kind}"));
        results.insert(kind.name().to_string(), single(kind, art)?);
    }
    Ok(Value::Object(results))
}

/// Validates and runs `cfg`, writing artifacts to `cfg.out` (or
/// [`DEFAULT_OUT`]). Nothing is left behind when the run fails.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let violations = validate(cfg);
    if !violations.is_empty() {
        return Err(CliError::Validation(violations));
    }
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let mut staging = Staging::new(&out)?;
    let mut art = Artifacts::default();
    art.log(format!("experiment {}", cfg.experiment));
    art.log(format!(
        "N range {}..={}, grid {}",
        cfg.n_min, cfg.n_max, cfg.grid
    ));
    let results = execute(cfg, &mut art)?;

    let schema = art.schema();
    for table in &art.tables {
        check_schema(table, &schema)?;
    }
    let mut files = Vec::new();
    for table in &art.tables {
        staging.write_csv(table)?;
        files.push(table.file_name());
        if cfg.gnuplot {
            staging.write_gnuplot(table)?;
            files.push(format!("{}.dat", table.name));
        }
    }
    art.log("status ok");
    staging.write_text(LOG_FILE, &(art.log.join("\n") + "\n"))?;
    files.push(LOG_FILE.to_string());
    files.push(output::SUMMARY_FILE.to_string());

    let summary = json!({
        "experiment": cfg.experiment,
        "config": cfg,
        "schema": schema,
        "results": results,
        "files": files,
    });
    let committed = staging.commit(&summary)?;
    Ok(RunReport {
        out,
        files: committed,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use circle_rigidity::Error as E;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Validation(Vec::new()).exit_code(), 2);
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        let stalled = E::NoConvergence {
            what: "power iteration",
            iterations: 10,
        };
        assert_eq!(CliError::Core(stalled).exit_code(), 3);
        assert_eq!(CliError::Core(E::ConeBoundary).exit_code(), 3);
        assert_eq!(
            CliError::Core(E::DegreeMismatch { f: 2, g: 3 }).exit_code(),
            2
        );
        assert_eq!(CliError::Io("disk".into()).exit_code(), 1);
    }
}
