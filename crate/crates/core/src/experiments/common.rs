//! Replica plumbing shared by the runners.

use rayon::prelude::*;

use crate::config::{HalfLineConfig, LatticeConfig};
use crate::dynamics::{Trajectory, WeakAsymParams};
use crate::error::{Error, Result};
use crate::stats::{McMeta, McResult};

/// Stream id of replica `i` in block `block`; blocks separate the ε values
/// and sub-experiments of one run.
pub fn stream_id(block: u64, i: u64) -> u64 {
    (block << 32) | i
}

/// Evaluate `f` on replicas 0..n in parallel, results in replica order.
pub fn replicate<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..n as u64).into_par_iter().map(f).collect()
}

/// Z_t(x) = exp(−λh_t(x) + νt) read off a half-line configuration.
pub fn z_at(cfg: &HalfLineConfig, x: usize, t: f64, w: &WeakAsymParams) -> f64 {
    let mut h = -2 * cfg.injections() as i64;
    for i in 1..=x {
        h += 2 * cfg.sigma(i) as i64 - 1;
    }
    (-w.lambda * h as f64 + w.nu * t).exp()
}

pub fn half_line(state: &LatticeConfig) -> Result<&HalfLineConfig> {
    match state {
        LatticeConfig::HalfLine(c) => Ok(c),
        LatticeConfig::Fasep(_) => Err(Error::InvalidArgument("expected a half-line state".into())),
    }
}

/// State of a trajectory recorded at `t`.
pub fn snapshot_at(traj: &Trajectory, t: f64) -> Result<&LatticeConfig> {
    traj.snapshots
        .iter()
        .find(|(s, _)| (s - t).abs() <= 1e-9 * t.max(1.0))
        .map(|(_, c)| c)
        .ok_or_else(|| Error::TimeMismatch(format!("no snapshot at t = {t}")))
}

/// Column `j` of per-replica sample rows as an MC result.
pub fn column_mc(rows: &[Vec<f64>], j: usize, seeds: std::ops::Range<u64>, meta: McMeta) -> Result<McResult> {
    let xs: Vec<f64> = rows.iter().map(|r| r[j]).collect();
    McResult::from_samples(&xs, seeds, meta)
}

/// Site nearest to u on the ε² lattice.
pub fn site_of(u: f64, epsilon: f64) -> usize {
    (u / (epsilon * epsilon)).round().max(0.0) as usize
}

pub fn fmt_key(parts: &[(&str, f64)]) -> String {
    let inner: Vec<String> = parts.iter().map(|(k, v)| format!("{k}={v}")).collect();
    inner.join(",")
}
