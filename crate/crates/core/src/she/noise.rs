//! Discretized space-time white noise.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Largest number of noise cells a single grid may hold.
pub const MAX_CELLS: usize = 50_000_000;

/// Space-time mesh shared by the noise and the solver. Nodes are
/// u_j = j·dx for j = 0..=m with m·dx ≥ U_max; steps are t_n = n·dt.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SheGrid {
    pub dt: f64,
    pub dx: f64,
    pub horizon: f64,
    pub u_max: f64,
}

impl SheGrid {
    pub fn new(dt: f64, dx: f64, horizon: f64, u_max: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt = {dt}")));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::InvalidArgument(format!("dx = {dx}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidTime(horizon));
        }
        if !(u_max > 2.0 * dx && u_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("domain cut {u_max} is below two cells")));
        }
        Ok(Self { dt, dx, horizon, u_max })
    }

    /// Domain cut 6√T + u_of_interest.
    pub fn for_target(dt: f64, dx: f64, horizon: f64, u_of_interest: f64) -> Result<Self> {
        Self::new(dt, dx, horizon, 6.0 * horizon.sqrt() + u_of_interest)
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt - 1e-9).ceil() as usize
    }

    /// Index m of the far (absorbing) node.
    pub fn last_node(&self) -> usize {
        (self.u_max / self.dx - 1e-9).ceil() as usize
    }

    pub fn interior(&self) -> usize {
        self.last_node() - 1
    }

    pub fn cells(&self) -> usize {
        self.steps().saturating_mul(self.interior())
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    fn guard(&self) -> Result<()> {
        let c = self.cells();
        if c > MAX_CELLS {
            return Err(Error::GridTooLarge(c));
        }
        Ok(())
    }
}

/// i.i.d. centered Gaussians of variance 1/(dt·dx), one per time step and
/// interior node, stored step-major.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseGrid {
    pub grid: SheGrid,
    pub values: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
}

impl NoiseGrid {
    pub fn zeros(grid: SheGrid) -> Result<Self> {
        grid.guard()?;
        Ok(Self { values: vec![0.0; grid.cells()], grid, seed: 0, stream: 0 })
    }

    /// Noise row for step n (interior nodes 1..m−1).
    pub fn row(&self, n: usize) -> &[f64] {
        let w = self.grid.interior();
        &self.values[n * w..(n + 1) * w]
    }

    pub fn scaled(mut self, gamma: f64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= gamma);
        self
    }
}

pub fn sample_noise(dt: f64, dx: f64, horizon: f64, u_max: f64, seed: u64) -> Result<NoiseGrid> {
    sample_noise_stream(SheGrid::new(dt, dx, horizon, u_max)?, seed, 0)
}

/// Noise for replica `stream` of `seed`.
pub fn sample_noise_stream(grid: SheGrid, seed: u64, stream: u64) -> Result<NoiseGrid> {
    grid.guard()?;
    let sd = 1.0 / (grid.dt * grid.dx).sqrt();
    let mut r = rng::stream(seed, stream);
    let values = (0..grid.cells())
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut r);
            sd * z
        })
        .collect();
    Ok(NoiseGrid { grid, values, seed, stream })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_by_seed() {
        let a = sample_noise(0.01, 0.1, 0.1, 1.0, 5).unwrap();
        let b = sample_noise(0.01, 0.1, 0.1, 1.0, 5).unwrap();
        let c = sample_noise(0.01, 0.1, 0.1, 1.0, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn guard_trips() {
        let g = SheGrid::new(1e-7, 1e-4, 1.0, 10.0).unwrap();
        assert!(matches!(NoiseGrid::zeros(g), Err(Error::GridTooLarge(_))));
        assert!(SheGrid::new(0.0, 0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn shape() {
        let g = SheGrid::new(0.1, 0.25, 1.0, 2.0).unwrap();
        assert_eq!(g.steps(), 10);
        assert_eq!(g.last_node(), 8);
        assert_eq!(g.cells(), 70);
    }
}
