//! Library side of the command-line front end: configuration, datasets,
//! figure reproduction, sweeps and oracle verification.

pub mod config;
pub mod dataset;
pub mod figure;
pub mod oracle_check;
pub mod sweep;

pub use config::{parse_angle, AxisSpec, Format, RunConfig};
pub use dataset::Dataset;

use crate::error::{Error, Result};
use crate::model::{collective_moments, ModelParams};
use crate::pairwise::{concurrence_x, rho12};
use crate::squeezing::{saturating_squeezing, SqueezingReport};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "DARKSPIN_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;
/// Numerical failures that are neither configuration nor capacity problems.
pub const EXIT_OTHER: i32 = 1;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::InvalidParams(_)
        | Error::Domain(_)
        | Error::Index(_)
        | Error::UnknownObservable(_) => EXIT_CONFIG,
        Error::Capacity(_) => EXIT_CAPACITY,
        _ => EXIT_OTHER,
    }
}

/// Flag, then environment, then `None` meaning machine parallelism.
pub fn resolve_workers(flag: Option<usize>) -> Result<Option<usize>> {
    let chosen = match flag {
        Some(w) => Some(w),
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                Error::Config(format!("{WORKERS_ENV}=`{v}` is not a worker count"))
            })?),
            Err(_) => None,
        },
    };
    match chosen {
        Some(0) => Err(Error::Config("worker count must be positive".into())),
        other => Ok(other),
    }
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Squeezing of the ideal dark state; degenerate denominators saturate.
pub fn ideal_squeezing(p: &ModelParams) -> Result<SqueezingReport> {
    if p.atoms() < 2 {
        return Err(Error::InvalidParams(
            "squeezing needs at least two atoms".into(),
        ));
    }
    Ok(saturating_squeezing(
        p.atoms(),
        &collective_moments(p),
        None,
    ))
}

pub fn ideal_concurrence(p: &ModelParams) -> Result<f64> {
    Ok(concurrence_x(&rho12(p)?))
}

/// `i·π/count` for `i = 0..count`, the half-open angle grid on `[0, π)`.
pub fn theta_grid(count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| std::f64::consts::PI * i as f64 / count as f64)
        .collect()
}

/// `count + 1` points spanning `[−π, π]`.
pub fn k_grid(count: usize) -> Vec<f64> {
    use std::f64::consts::PI;
    (0..=count)
        .map(|i| -PI + 2.0 * PI * i as f64 / count as f64)
        .collect()
}

/// `count + 1` points spanning `[0, 1]`.
pub fn p_grid(count: usize) -> Vec<f64> {
    (0..=count).map(|i| i as f64 / count as f64).collect()
}
