//! Time stepping of the mild solution 𝒵_t = P^Dir_t·𝒵_ini + ∫P^Dir_{t−s}𝒵_sξ.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::noise::{sample_noise_stream, NoiseGrid, SheGrid};
use crate::error::{Error, Result};
use crate::kernels::d_dirichlet_unchecked;
use crate::kernels::special::erfc;
use crate::stats::{McMeta, McResult};

pub type IcFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Initial data. For `DeltaPrime` the deterministic term dP^Dir_t(u,0) is
/// added in closed form and only the stochastic part is stepped.
#[derive(Clone)]
pub enum IcKind {
    DeltaPrime,
    NearEq(IcFn),
    /// Node values u_0..=u_m, for restarts.
    Sampled(Vec<f64>),
}

impl IcKind {
    pub fn near_eq<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        IcKind::NearEq(Arc::new(f))
    }

    pub fn label(&self) -> &'static str {
        match self {
            IcKind::DeltaPrime => "delta_prime",
            IcKind::NearEq(_) => "near_eq",
            IcKind::Sampled(_) => "sampled",
        }
    }
}

impl fmt::Debug for IcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IcKind::Sampled(v) => write!(f, "Sampled({} nodes)", v.len()),
            other => f.write_str(other.label()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// (I − dt/2·Δ_h)V^{n+1} = V^n + dt·𝒵^n·ξ^n.
    BackwardEuler,
    /// V^{n+1} = V^n + dt/2·Δ_hV^n + dt·𝒵^n·ξ^n, guarded by dt ≤ c_guard·dx².
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub scheme: Scheme,
    /// Noise amplitude multiplier.
    pub gamma: f64,
    pub c_guard: f64,
    /// Snapshot times; the horizon is always included.
    pub snapshots: Vec<f64>,
    /// Positions beyond this are treated as buffer for the leakage monitor;
    /// defaults to U_max − 6√T.
    pub u_of_interest: Option<f64>,
    pub leak_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::BackwardEuler,
            gamma: 1.0,
            c_guard: 1.0,
            snapshots: Vec::new(),
            u_of_interest: None,
            leak_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MildSolution {
    pub grid: SheGrid,
    pub times: Vec<f64>,
    pub space: Vec<f64>,
    /// values[k][j] = 𝒵(times[k], space[j]).
    pub values: Vec<Vec<f64>>,
    pub ic_kind: String,
    /// Bound on the far-boundary influence inside the region of interest,
    /// relative to the solution scale there.
    pub leakage: f64,
    pub seed: u64,
    pub stream: u64,
}

impl MildSolution {
    pub fn snapshot_index(&self, t: f64) -> Result<usize> {
        let tol = 0.5 * self.grid.dt;
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= tol)
            .ok_or_else(|| Error::TimeMismatch(format!("no snapshot at t = {t}")))
    }

    /// Linear interpolation between nodes.
    pub fn value(&self, t: f64, u: f64) -> Result<f64> {
        let k = self.snapshot_index(t)?;
        interp(&self.values[k], self.grid.dx, u)
    }

    pub fn snapshot(&self, t: f64) -> Result<&[f64]> {
        Ok(&self.values[self.snapshot_index(t)?])
    }
}

fn interp(row: &[f64], dx: f64, u: f64) -> Result<f64> {
    let m = row.len() - 1;
    let x = u / dx;
    if !(x >= 0.0) || x > m as f64 + 1e-9 {
        return Err(Error::InvalidArgument(format!("position {u} outside the solver domain")));
    }
    let j = (x.floor() as usize).min(m.saturating_sub(1));
    let f = x - j as f64;
    if f.abs() < 1e-9 {
        return Ok(row[j]);
    }
    Ok(row[j] * (1.0 - f) + row[j + 1] * f)
}

/// LU factors of the constant backward-Euler matrix on the interior nodes.
struct Tridiag {
    off: f64,
    cp: Vec<f64>,
    inv_den: Vec<f64>,
}

impl Tridiag {
    fn new(n: usize, r: f64) -> Self {
        let diag = 1.0 + r;
        let off = -r / 2.0;
        let mut cp = vec![0.0; n];
        let mut inv_den = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let den = diag - off * prev;
            inv_den[i] = 1.0 / den;
            cp[i] = off / den;
            prev = cp[i];
        }
        Self { off, cp, inv_den }
    }

    fn solve(&self, d: &mut [f64]) {
        let n = d.len();
        let mut prev = 0.0;
        for i in 0..n {
            d[i] = (d[i] - self.off * prev) * self.inv_den[i];
            prev = d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            d[i] -= self.cp[i] * d[i + 1];
        }
    }
}

pub fn solve_mild(ic: &IcKind, noise: &NoiseGrid) -> Result<MildSolution> {
    solve_mild_with(ic, noise, &SolveOptions::default())
}

pub fn solve_mild_with(ic: &IcKind, noise: &NoiseGrid, opts: &SolveOptions) -> Result<MildSolution> {
    let g = noise.grid;
    let (dt, dx) = (g.dt, g.dx);
    let m = g.last_node();
    let steps = g.steps();
    let r = dt / (dx * dx);
    if opts.scheme == Scheme::Explicit && dt > opts.c_guard * dx * dx {
        return Err(Error::Stability(format!("dt = {dt} exceeds {} · dx² = {}", opts.c_guard, opts.c_guard * dx * dx)));
    }
    let space: Vec<f64> = (0..=m).map(|j| g.node(j)).collect();
    let delta = matches!(ic, IcKind::DeltaPrime);
    // stepped part: the full field for near-eq data, the stochastic
    // correction for δ₀′
    let mut v = vec![0.0; m + 1];
    match ic {
        IcKind::DeltaPrime => {}
        IcKind::NearEq(f) => {
            for j in 1..m {
                v[j] = f(space[j]);
            }
        }
        IcKind::Sampled(vals) => {
            if vals.len() != m + 1 {
                return Err(Error::InvalidArgument(format!("{} initial values for {} nodes", vals.len(), m + 1)));
            }
            v[1..m].copy_from_slice(&vals[1..m]);
        }
    }
    let mut wanted: Vec<usize> = opts
        .snapshots
        .iter()
        .map(|&t| {
            if !(0.0..=g.horizon + 1e-12).contains(&t) {
                Err(Error::InvalidTime(t))
            } else {
                Ok((t / dt).round() as usize)
            }
        })
        .collect::<Result<_>>()?;
    wanted.push(steps);
    wanted.sort_unstable();
    wanted.dedup();

    let u_int = opts.u_of_interest.unwrap_or(g.u_max - 6.0 * g.horizon.sqrt()).clamp(0.0, g.u_max);
    let j_int = ((u_int / dx).floor() as usize).min(m);
    let reach = erfc((g.u_max - u_int) / (2.0 * g.horizon).sqrt());

    let tri = Tridiag::new(m - 1, r);
    let full = |n: usize, v: &[f64]| -> Vec<f64> {
        let t = g.time(n);
        let mut z = v.to_vec();
        if delta && t > 0.0 {
            for j in 1..m {
                z[j] += d_dirichlet_unchecked(t, space[j]);
            }
        }
        z[0] = 0.0;
        z[m] = 0.0;
        z
    };

    let mut times = Vec::with_capacity(wanted.len());
    let mut values = Vec::with_capacity(wanted.len());
    let mut next = 0;
    let mut far_sup: f64 = 0.0;
    let mut int_sup: f64 = 0.0;
    let mut rhs = vec![0.0; m - 1];
    for n in 0..=steps {
        if next < wanted.len() && wanted[next] == n {
            times.push(g.time(n));
            values.push(full(n, &v));
            next += 1;
        }
        far_sup = far_sup.max(v[m - 1].abs());
        int_sup = int_sup.max(v[1..=j_int.clamp(1, m - 1)].iter().fold(0.0f64, |a, x| a.max(x.abs())));
        if n == steps {
            break;
        }
        let xi = noise.row(n);
        let tm = g.time(n) + 0.5 * dt;
        for j in 1..m {
            let z = if delta { v[j] + d_dirichlet_unchecked(tm, space[j]) } else { v[j] };
            let kick = dt * opts.gamma * z * xi[j - 1];
            rhs[j - 1] = match opts.scheme {
                Scheme::BackwardEuler => v[j] + kick,
                Scheme::Explicit => v[j] + 0.5 * r * (v[j + 1] - 2.0 * v[j] + v[j - 1]) + kick,
            };
        }
        if opts.scheme == Scheme::BackwardEuler {
            tri.solve(&mut rhs);
        }
        v[1..m].copy_from_slice(&rhs);
        if !v[m / 2].is_finite() {
            return Err(Error::Stability(format!("non-finite value at step {n}")));
        }
    }
    if delta {
        // the closed-form term vanishes at the far node up to e^{−U²/2t}
        let t = g.horizon;
        int_sup = int_sup.max(d_dirichlet_unchecked(t, t.sqrt().min(u_int.max(dx))));
    }
    let leakage = if int_sup > 0.0 { far_sup * reach / int_sup } else { 0.0 };
    if leakage > opts.leak_tol {
        return Err(Error::Leakage(leakage));
    }
    Ok(MildSolution {
        grid: g,
        times,
        space,
        values,
        ic_kind: ic.label().to_string(),
        leakage,
        seed: noise.seed,
        stream: noise.stream,
    })
}

/// Independent solves, replica i driven by noise stream i of `seed`.
pub fn solve_ensemble(
    ic: &IcKind,
    grid: SheGrid,
    opts: &SolveOptions,
    seed: u64,
    replicas: usize,
) -> Result<Vec<MildSolution>> {
    (0..replicas as u64)
        .into_par_iter()
        .map(|i| solve_mild_with(ic, &sample_noise_stream(grid, seed, i)?, opts))
        .collect()
}

/// Monte Carlo estimate of E[𝒵_t(u)^order] over an ensemble.
pub fn moment_estimate(ensemble: &[MildSolution], t: f64, u: f64, order: u32) -> Result<McResult> {
    if ensemble.len() < 100 {
        return Err(Error::DegenerateEnsemble(format!("{} solutions, need at least 100", ensemble.len())));
    }
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidArgument(format!("moment order {order}")));
    }
    let samples: Vec<f64> = ensemble.iter().map(|s| s.value(t, u).map(|z| z.powi(order as i32))).collect::<Result<_>>()?;
    let lo = ensemble.iter().map(|s| s.stream).min().unwrap_or(0);
    let hi = ensemble.iter().map(|s| s.stream).max().unwrap_or(0) + 1;
    McResult::from_samples(
        &samples,
        lo..hi,
        McMeta { experiment: format!("she-moment-{order}"), epsilon: None, t, u },
    )
}

/// E[𝒵_t(u)²] for δ₀′ data as dP² + mean((𝒵 − dP)²), which drops the
/// mean-zero cross term 2dP·(𝒵 − dP) from the sample average.
pub fn second_moment_centered(ensemble: &[MildSolution], t: f64, u: f64) -> Result<McResult> {
    if ensemble.len() < 100 {
        return Err(Error::DegenerateEnsemble(format!("{} solutions, need at least 100", ensemble.len())));
    }
    if ensemble.iter().any(|s| s.ic_kind != "delta_prime") {
        return Err(Error::InvalidArgument("centered estimator needs δ₀′ data".into()));
    }
    let d = d_dirichlet_unchecked(t, u);
    let samples: Vec<f64> =
        ensemble.iter().map(|s| s.value(t, u).map(|z| d * d + (z - d) * (z - d))).collect::<Result<_>>()?;
    let lo = ensemble.iter().map(|s| s.stream).min().unwrap_or(0);
    let hi = ensemble.iter().map(|s| s.stream).max().unwrap_or(0) + 1;
    McResult::from_samples(&samples, lo..hi, McMeta { experiment: "she-moment-2-centered".into(), epsilon: None, t, u })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{d_dirichlet_kernel, dirichlet_kernel};
    use crate::kernels::quad::{integrate_panels, uniform_breaks};

    #[test]
    fn zero_noise_delta_prime_is_closed_form() {
        let g = SheGrid::for_target(1e-3, 0.05, 0.5, 1.0).unwrap();
        let s = solve_mild(&IcKind::DeltaPrime, &NoiseGrid::zeros(g).unwrap()).unwrap();
        let want = d_dirichlet_kernel(0.5, 1.0).unwrap();
        assert!((s.value(0.5, 1.0).unwrap() - want).abs() < 1e-14);
        assert_eq!(s.value(0.5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn zero_noise_near_eq_matches_quadrature() {
        let gfun = |u: f64| (0.3 * u).exp() * (1.0 - (-4.0 * u).exp());
        let t = 0.3;
        let g = SheGrid::for_target(2.5e-5, 0.005, t, 2.0).unwrap();
        let s = solve_mild(&IcKind::near_eq(gfun), &NoiseGrid::zeros(g).unwrap()).unwrap();
        for u in [0.25, 1.0, 2.0] {
            let hi = u + 12.0 * t.sqrt();
            let exact = integrate_panels(|v| dirichlet_kernel(t, u, v).unwrap() * gfun(v), &uniform_breaks(0.0, hi, 16), 32);
            let got = s.value(t, u).unwrap();
            assert!((got - exact).abs() < 2e-4 * exact.abs().max(1.0), "u={u}: {got} vs {exact}");
        }
    }

    #[test]
    fn explicit_guard() {
        let g = SheGrid::new(0.01, 0.05, 0.1, 1.0).unwrap();
        let opts = SolveOptions { scheme: Scheme::Explicit, ..Default::default() };
        assert!(matches!(
            solve_mild_with(&IcKind::DeltaPrime, &NoiseGrid::zeros(g).unwrap(), &opts),
            Err(Error::Stability(_))
        ));
    }

    #[test]
    fn leakage_is_flagged() {
        let g = SheGrid::new(1e-3, 0.05, 1.0, 1.5).unwrap();
        let opts = SolveOptions { u_of_interest: Some(1.0), ..Default::default() };
        let r = solve_mild_with(&IcKind::near_eq(|_| 1.0), &NoiseGrid::zeros(g).unwrap(), &opts);
        assert!(matches!(r, Err(Error::Leakage(_))));
    }

    #[test]
    fn small_ensemble_rejected() {
        let g = SheGrid::new(0.01, 0.1, 0.1, 2.0).unwrap();
        let e = solve_ensemble(&IcKind::DeltaPrime, g, &SolveOptions::default(), 1, 10).unwrap();
        assert!(matches!(moment_estimate(&e, 0.1, 1.0, 1), Err(Error::DegenerateEnsemble(_))));
    }
}
