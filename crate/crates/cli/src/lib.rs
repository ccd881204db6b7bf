//! Harness that runs the named identity checks from a JSON config and
//! writes JSON and CSV reports.

pub mod checks;
pub mod config;
pub mod report;

use checks::{run_check, CheckName};
use config::{check_param_name, ConfigError, RunConfig};
use rayon::prelude::*;
use report::{Report, SweepReport};
use std::time::Instant;

/// Environment variable that overrides the default worker count.
pub const WORKERS_ENV: &str = "FRACFUETER_WORKERS";

/// Worker count: explicit value, then `FRACFUETER_WORKERS`, then the
/// available parallelism.
pub fn resolve_workers(explicit: Option<usize>) -> Result<usize, ConfigError> {
    if let Some(n) = explicit {
        return if n == 0 {
            Err(ConfigError::Invalid("--workers must be at least 1".into()))
        } else {
            Ok(n)
        };
    }
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(ConfigError::Invalid(format!("{WORKERS_ENV}={v:?} is not a positive integer"))),
        };
    }
    Ok(std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs the configured checks on a pool of `workers` threads. Outcomes are
/// collected in config order once every check has finished, and all
/// reductions inside the checks are order-fixed, so the payload does not
/// depend on `workers`.
pub fn run(cfg: &RunConfig, workers: usize) -> Result<Report, ConfigError> {
    let setup = cfg.setup()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ConfigError::Invalid(format!("cannot start {workers} workers: {e}")))?;
    let mut names: Vec<CheckName> = Vec::new();
    for c in &cfg.checks {
        if !names.contains(c) {
            names.push(*c);
        }
    }
    let outcomes = pool.install(|| names.par_iter().map(|c| run_check(*c, cfg, &setup)).collect());
    Ok(Report::new(cfg.clone(), outcomes, workers, start.elapsed().as_secs_f64()))
}

/// Runs the config once per value of a global resolution parameter.
pub fn sweep(cfg: &RunConfig, param: &str, values: &[String], workers: usize) -> Result<SweepReport, ConfigError> {
    check_param_name(param)?;
    if values.is_empty() {
        return Err(ConfigError::Invalid("sweep needs at least one value".into()));
    }
    let configs = values
        .iter()
        .map(|v| {
            let mut c = cfg.clone();
            c.set_param(param, v)?;
            Ok(c)
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;
    let runs = configs.iter().map(|c| run(c, workers)).collect::<Result<Vec<_>, _>>()?;
    Ok(SweepReport::new(param.to_string(), values.to_vec(), runs))
}
