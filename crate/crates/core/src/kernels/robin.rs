//! The half-line heat kernel with Robin boundary 𝗉(−1,·) = μ𝗉(0,·).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fullline::{fullline_kernel, fullline_table, negligible_index};
use super::quad::{gauss_legendre, uniform_breaks};
use super::special::CompensatedSum;
use crate::error::{Error, Result};

pub const DEFAULT_SERIES_TOL: f64 = 1e-14;
const ODE_STEP: f64 = 0.01;
const LEAKAGE_TOL: f64 = 1e-15;
const QUAD_AGREEMENT: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RobinMethod {
    ImageSeries { tol: f64 },
    Quadrature { nodes: usize },
    OdeOracle { lattice_size: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobinKernelSpec {
    pub mu: f64,
    pub method: RobinMethod,
}

impl RobinKernelSpec {
    pub fn image_series(mu: f64) -> Self {
        Self { mu, method: RobinMethod::ImageSeries { tol: DEFAULT_SERIES_TOL } }
    }

    pub fn quadrature(mu: f64, nodes: usize) -> Self {
        Self { mu, method: RobinMethod::Quadrature { nodes } }
    }

    pub fn ode_oracle(mu: f64, lattice_size: usize) -> Self {
        Self { mu, method: RobinMethod::OdeOracle { lattice_size } }
    }

    /// 𝗉^ε: image series with μ = e^{−ε}.
    pub fn weak(epsilon: f64) -> Self {
        Self::image_series((-epsilon).exp())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(Error::InvalidArgument(format!("μ = {} is not in (0,1]", self.mu)));
        }
        match self.method {
            RobinMethod::ImageSeries { tol } if !(tol > 0.0 && tol < 1.0) => {
                Err(Error::InvalidArgument(format!("series tolerance {tol} is not in (0,1)")))
            }
            RobinMethod::Quadrature { nodes } if nodes < 4 => {
                Err(Error::InvalidArgument(format!("{nodes} nodes per panel is too few")))
            }
            RobinMethod::OdeOracle { lattice_size } if lattice_size == 0 => {
                Err(Error::InvalidArgument("empty ODE lattice".into()))
            }
            _ => Ok(()),
        }
    }

    /// Image-series truncation index z*, the least z with μ^z < tol.
    pub fn truncation_index(&self) -> Option<usize> {
        match self.method {
            RobinMethod::ImageSeries { tol } => Some(truncation_index(self.mu, tol)),
            _ => None,
        }
    }
}

fn truncation_index(mu: f64, tol: f64) -> usize {
    if mu >= 1.0 {
        2
    } else {
        (tol.ln() / mu.ln()).floor() as usize + 1
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidTime(t));
    }
    Ok(())
}

/// Image-series values 𝗉_t^R(x, y) for all x, y ≤ n_max.
#[derive(Clone, Debug)]
pub struct RobinTable {
    pub mu: f64,
    pub t: f64,
    pub n_max: usize,
    p: Vec<f64>,
    suffix: Vec<f64>,
}

impl RobinTable {
    pub fn new(mu: f64, t: f64, n_max: usize, tol: f64) -> Result<Self> {
        RobinKernelSpec { mu, method: RobinMethod::ImageSeries { tol } }.validate()?;
        check_time(t)?;
        let z_tail = truncation_index(mu, tol).min(negligible_index(t) + 20);
        let top = 2 * n_max + 2 + z_tail;
        let p = fullline_table(t, top)?;
        // suffix[m] = Σ_{z≥2} μ^z p(m+z), via suffix[m−1] = μ²p(m+1) + μ·suffix[m]
        let mut suffix = vec![0.0; 2 * n_max + 1];
        let mut s = 0.0;
        let mu2 = mu * mu;
        for m in (0..=top - 2).rev() {
            if m <= 2 * n_max {
                suffix[m] = s;
            }
            if m == 0 {
                break;
            }
            s = mu2 * p[m + 1] + mu * s;
        }
        Ok(Self { mu, t, n_max, p, suffix })
    }

    /// Table sized so that rows up to x_max carry all of their mass.
    pub fn covering(mu: f64, t: f64, x_max: usize) -> Result<Self> {
        Self::new(mu, t, x_max + negligible_index(t), DEFAULT_SERIES_TOL)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        debug_assert!(x <= self.n_max && y <= self.n_max);
        let d = x.abs_diff(y);
        let m = x + y;
        let mut acc = CompensatedSum::new();
        acc.add(self.p[d]);
        acc.add(self.mu * self.p[m + 1]);
        if self.mu < 1.0 {
            acc.add((1.0 - 1.0 / (self.mu * self.mu)) * self.suffix[m]);
        }
        acc.value()
    }

    pub fn row(&self, x: usize) -> Vec<f64> {
        (0..=self.n_max).map(|y| self.get(x, y)).collect()
    }

    /// Σ_y 𝗉_t(x, y) over the table.
    pub fn mass(&self, x: usize) -> f64 {
        let mut acc = CompensatedSum::new();
        for y in 0..=self.n_max {
            acc.add(self.get(x, y));
        }
        acc.value()
    }
}

/// Gauss–Legendre nodes on [0, θ_max] carrying the weight
/// e^{t(cos θ − 1)}/π, for even integrands over the unit circle.
#[derive(Clone, Debug)]
pub(crate) struct CircleRule {
    pub theta: Vec<f64>,
    pub weight: Vec<f64>,
}

impl CircleRule {
    /// Panels narrow enough to resolve the Gaussian peak of width t^{−1/2},
    /// oscillations up to `max_freq` and a pole at distance `pole_gap`
    /// from the circle.
    pub fn new(t: f64, max_freq: f64, pole_gap: f64, order: usize) -> Self {
        let theta_max = if t > 375.0 { (1.0 - 750.0 / t).acos() } else { PI };
        let mut h = PI / 4.0;
        if t > 0.0 {
            h = h.min(4.0 / t.sqrt());
        }
        h = h.min(6.0 * PI / (max_freq + 1.0));
        if pole_gap > 0.0 {
            h = h.min(2.0 * pole_gap);
        }
        let panels = (theta_max / h).ceil() as usize;
        let rule = gauss_legendre(order);
        let mut theta = Vec::new();
        let mut weight = Vec::new();
        for w in uniform_breaks(0.0, theta_max, panels).windows(2) {
            for (th, wt) in rule.mapped(w[0], w[1]) {
                theta.push(th);
                weight.push(wt * (t * (th.cos() - 1.0)).exp() / PI);
            }
        }
        Self { theta, weight }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let mut acc = CompensatedSum::new();
        for (th, w) in self.theta.iter().zip(&self.weight) {
            acc.add(w * f(*th));
        }
        acc.value()
    }
}

/// (μ − ξ)/(1 − μξ) at ξ = e^{iθ}.
#[inline]
pub(crate) fn robin_factor(mu: f64, theta: f64) -> Complex64 {
    let xi = Complex64::from_polar(1.0, theta);
    (mu - xi) / (1.0 - mu * xi)
}

fn pole_gap(mu: f64) -> f64 {
    if mu < 1.0 {
        1.0 - mu
    } else {
        0.0
    }
}

fn quadrature_matrix_with(mu: f64, t: f64, n: usize, order: usize) -> Vec<Vec<f64>> {
    let rule = CircleRule::new(t, (2 * n + 1) as f64, pole_gap(mu), order);
    let k = rule.theta.len();
    let m: Vec<Complex64> = rule.theta.iter().map(|&th| robin_factor(mu, th)).collect();
    // cos(jθ), sin(jθ) for j = 0..=2n+1
    let harmonics: Vec<(Vec<f64>, Vec<f64>)> = (0..=2 * n + 1)
        .map(|j| {
            let c = rule.theta.iter().map(|&th| (j as f64 * th).cos()).collect();
            let s = rule.theta.iter().map(|&th| (j as f64 * th).sin()).collect();
            (c, s)
        })
        .collect();
    (0..=n)
        .into_par_iter()
        .map(|x| {
            (0..=n)
                .map(|y| {
                    let (cd, _) = &harmonics[x.abs_diff(y)];
                    let (cs, ss) = &harmonics[x + y + 1];
                    let mut acc = CompensatedSum::new();
                    for i in 0..k {
                        let img = cs[i] * m[i].re - ss[i] * m[i].im;
                        acc.add(rule.weight[i] * (cd[i] + img));
                    }
                    acc.value()
                })
                .collect()
        })
        .collect()
}

fn quadrature_matrix(mu: f64, t: f64, n: usize, order: usize) -> Result<Vec<Vec<f64>>> {
    let a = quadrature_matrix_with(mu, t, n, order);
    let b = quadrature_matrix_with(mu, t, n, order + 16);
    let diff = a
        .iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max);
    if diff > QUAD_AGREEMENT {
        return Err(Error::Quadrature(format!(
            "circle rule with {order} and {} nodes per panel differ by {diff:e} at t = {t}",
            order + 16
        )));
    }
    Ok(b)
}

fn ode_certify(t: f64, lattice: usize, reach: usize) -> Result<()> {
    if reach >= lattice {
        return Err(Error::Leakage(1.0));
    }
    let leak = fullline_kernel(t, (lattice - reach) as i64)?;
    if leak > LEAKAGE_TOL {
        return Err(Error::Leakage(leak));
    }
    Ok(())
}

/// y ↦ 𝗉_t^R(x, y) on 0..=lattice by RK4 on ∂_t v = ½Δv with the Robin
/// row v(−1) = μv(0) and v(lattice+1) = 0.
pub fn robin_ode_row(mu: f64, t: f64, x: usize, lattice: usize) -> Result<Vec<f64>> {
    RobinKernelSpec::ode_oracle(mu, lattice).validate()?;
    check_time(t)?;
    ode_certify(t, lattice, x)?;
    let len = lattice + 1;
    let mut v = vec![0.0; len];
    v[x] = 1.0;
    if t == 0.0 {
        return Ok(v);
    }
    let steps = (t / ODE_STEP).ceil() as usize;
    let h = t / steps as f64;
    let rhs = |v: &[f64], out: &mut [f64]| {
        let n = v.len();
        for y in 0..n {
            let left = if y == 0 { mu * v[0] } else { v[y - 1] };
            let right = if y + 1 < n { v[y + 1] } else { 0.0 };
            out[y] = 0.5 * (left + right) - v[y];
        }
    };
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]);
    for _ in 0..steps {
        rhs(&v, &mut k1);
        for i in 0..len {
            tmp[i] = v[i] + 0.5 * h * k1[i];
        }
        rhs(&tmp, &mut k2);
        for i in 0..len {
            tmp[i] = v[i] + 0.5 * h * k2[i];
        }
        rhs(&tmp, &mut k3);
        for i in 0..len {
            tmp[i] = v[i] + h * k3[i];
        }
        rhs(&tmp, &mut k4);
        for i in 0..len {
            v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(v)
}

/// 𝗉_t^R(x, y) for all x, y ≤ n by the method of `spec`.
pub fn robin_matrix(spec: &RobinKernelSpec, t: f64, n: usize) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    check_time(t)?;
    match spec.method {
        RobinMethod::ImageSeries { tol } => {
            let tab = RobinTable::new(spec.mu, t, n, tol)?;
            Ok((0..=n).map(|x| (0..=n).map(|y| tab.get(x, y)).collect()).collect())
        }
        RobinMethod::Quadrature { nodes } => quadrature_matrix(spec.mu, t, n, nodes),
        RobinMethod::OdeOracle { lattice_size } => {
            ode_certify(t, lattice_size, n)?;
            (0..=n)
                .into_par_iter()
                .map(|x| robin_ode_row(spec.mu, t, x, lattice_size).map(|r| r[..=n].to_vec()))
                .collect()
        }
    }
}

/// 𝗉_t^R(x, y) by the method of `spec`.
pub fn robin_kernel(spec: &RobinKernelSpec, t: f64, x: usize, y: usize) -> Result<f64> {
    spec.validate()?;
    check_time(t)?;
    match spec.method {
        RobinMethod::ImageSeries { tol } => Ok(RobinTable::new(spec.mu, t, x.max(y), tol)?.get(x, y)),
        RobinMethod::Quadrature { nodes } => {
            let eval = |order: usize| {
                let rule = CircleRule::new(t, (x + y + 1) as f64, pole_gap(spec.mu), order);
                let d = x.abs_diff(y) as f64;
                let s = (x + y + 1) as f64;
                rule.integrate(|th| {
                    (d * th).cos() + (Complex64::from_polar(1.0, s * th) * robin_factor(spec.mu, th)).re
                })
            };
            let a = eval(nodes);
            let b = eval(nodes + 16);
            if (a - b).abs() > QUAD_AGREEMENT {
                return Err(Error::Quadrature(format!("circle rule at (t,x,y)=({t},{x},{y}) differs by {:e}", (a - b).abs())));
            }
            Ok(b)
        }
        RobinMethod::OdeOracle { lattice_size } => {
            ode_certify(t, lattice_size, x.max(y))?;
            Ok(robin_ode_row(spec.mu, t, x, lattice_size)?[y])
        }
    }
}

/// Lattice size that certifies the ODE oracle for points up to `reach`.
pub fn ode_lattice_for(t: f64, reach: usize) -> usize {
    reach + negligible_index(t)
}

/// y ↦ 𝗉_t^R(x, y) through Σ_n e^{−t}tⁿ/n! Kⁿ(x, ·), with K the one-step
/// kernel: ±1 with probability ½, and from 0 stay with probability μ/2
/// (the remaining (1−μ)/2 is killed).
pub fn robin_uniformized(mu: f64, t: f64, x: usize, lattice: usize) -> Result<Vec<f64>> {
    RobinKernelSpec::image_series(mu).validate()?;
    check_time(t)?;
    let n_terms = (t + 12.0 * t.sqrt() + 40.0).ceil() as usize;
    let len = lattice + 1;
    ode_certify(t, lattice, x)?;
    let mut v = vec![0.0; len];
    v[x] = 1.0;
    let mut out = vec![0.0; len];
    let mut weight = (-t).exp();
    let mut log_weight = -t;
    let mut next = vec![0.0; len];
    for n in 0..=n_terms {
        if n > 0 {
            log_weight += t.ln() - (n as f64).ln();
            weight = log_weight.exp();
        }
        for i in 0..len {
            out[i] += weight * v[i];
        }
        for y in 0..len {
            let left = if y == 0 { mu * v[0] } else { v[y - 1] };
            let right = if y + 1 < len { v[y + 1] } else { 0.0 };
            next[y] = 0.5 * (left + right);
        }
        std::mem::swap(&mut v, &mut next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MU: f64 = 0.904_837_418_035_959_6;

    #[test]
    fn identity_at_zero() {
        for spec in [RobinKernelSpec::image_series(MU), RobinKernelSpec::quadrature(MU, 32), RobinKernelSpec::ode_oracle(MU, 60)] {
            assert!((robin_kernel(&spec, 0.0, 3, 3).unwrap() - 1.0).abs() < 1e-12);
            assert!(robin_kernel(&spec, 0.0, 3, 4).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn methods_agree_small() {
        let n = 20;
        for t in [0.5, 3.0, 25.0] {
            let a = robin_matrix(&RobinKernelSpec::image_series(MU), t, n).unwrap();
            let b = robin_matrix(&RobinKernelSpec::quadrature(MU, 32), t, n).unwrap();
            let c = robin_matrix(&RobinKernelSpec::ode_oracle(MU, ode_lattice_for(t, n)), t, n).unwrap();
            for x in 0..=n {
                for y in 0..=n {
                    assert!((a[x][y] - b[x][y]).abs() < 1e-12, "series/quad t={t} ({x},{y})");
                    assert!((a[x][y] - c[x][y]).abs() < 1e-9, "series/ode t={t} ({x},{y})");
                }
            }
        }
    }

    #[test]
    fn uniformization_matches_series() {
        let t = 12.0;
        let row = robin_uniformized(0.8, t, 4, ode_lattice_for(t, 30)).unwrap();
        let tab = RobinTable::new(0.8, t, 30, 1e-15).unwrap();
        for y in 0..=30 {
            assert!((row[y] - tab.get(4, y)).abs() < 1e-13);
        }
    }

    #[test]
    fn neumann_case_is_two_images() {
        let tab = RobinTable::new(1.0, 2.0, 10, 1e-14).unwrap();
        let p = fullline_table(2.0, 30).unwrap();
        assert!((tab.get(2, 5) - (p[3] + p[8])).abs() < 1e-16);
        let wide = RobinTable::covering(1.0, 2.0, 0).unwrap();
        assert!((wide.mass(0) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn truncation_index_geometry() {
        let spec = RobinKernelSpec::image_series(MU);
        let z = spec.truncation_index().unwrap();
        assert!(MU.powi(z as i32) < DEFAULT_SERIES_TOL);
        assert!(MU.powi(z as i32 - 1) >= DEFAULT_SERIES_TOL);
    }

    #[test]
    fn invalid_specs() {
        assert!(RobinKernelSpec::image_series(1.2).validate().is_err());
        assert!(RobinKernelSpec::quadrature(0.5, 2).validate().is_err());
        assert!(robin_kernel(&RobinKernelSpec::ode_oracle(0.9, 10), 50.0, 1, 1).is_err());
    }
}
