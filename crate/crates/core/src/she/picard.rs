//! Second moments of the chaos layers 𝒰_n by the Itô-isometry recursion
//! E[𝒰_{n+1}(t,u)²] = ∫₀ᵗds∫dv P^Dir_{t−s}(u,v)²E[𝒰_n(s,v)²].
//!
//! Brownian scaling gives E[𝒰_n(t,u)²] = t^{n/2}ρ_n(u/√t)·dP^Dir_t(u,0)², so
//! only the profiles ρ_n(w) at t = 1 are computed. The substitution
//! s = (1 − cos β)/2 absorbs both endpoint singularities.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::quad::gauss_legendre;
use crate::kernels::special::CompensatedSum;
use crate::kernels::{d_dirichlet_unchecked, FIT_MARGIN};

pub const MAX_LAYERS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardGrid {
    pub w_max: f64,
    pub n_w: usize,
    pub beta_order: usize,
    pub v_order: usize,
    pub v_panels: usize,
}

impl Default for PicardGrid {
    fn default() -> Self {
        Self { w_max: 8.0, n_w: 321, beta_order: 64, v_order: 24, v_panels: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardState {
    pub grid: PicardGrid,
    pub w: Vec<f64>,
    /// profiles[n][k] = ρ_n(w_k).
    pub profiles: Vec<Vec<f64>>,
}

impl PicardState {
    pub fn n(&self) -> usize {
        self.profiles.len() - 1
    }

    fn profile_at(&self, n: usize, w: f64) -> f64 {
        interp_clamped(&self.profiles[n], self.grid.w_max, w)
    }

    /// E[𝒰_n(t,u)²].
    pub fn second_moment(&self, n: usize, t: f64, u: f64) -> f64 {
        let d = d_dirichlet_unchecked(t, u);
        t.powf(n as f64 / 2.0) * self.profile_at(n, u / t.sqrt()) * d * d
    }

    /// f_n(t) = sup_u E[𝒰_n(t,u)²]/dP^Dir_t(u,0)².
    pub fn f(&self, n: usize, t: f64) -> f64 {
        t.powf(n as f64 / 2.0) * self.profiles[n].iter().fold(0.0f64, |a, &b| a.max(b))
    }

    /// S_n(t,u) = Σ_{k≤n} E[𝒰_k²]/dP², the truncated second-moment ratio.
    pub fn partial_ratio(&self, n: usize, t: f64, u: f64) -> f64 {
        (0..=n.min(self.n())).map(|k| t.powf(k as f64 / 2.0) * self.profile_at(k, u / t.sqrt())).sum()
    }

    /// Fits C on every other w node for n ≤ n_fit, inflates it by
    /// FIT_MARGIN and checks f_n(t) ≤ Cⁿt^{n/2}/⌊n/2⌋! on all nodes and
    /// the supplied times.
    pub fn bound_check(&self, n_fit: usize, times: &[f64]) -> PicardBound {
        let n_fit = n_fit.min(self.n());
        let coarse = |n: usize| self.profiles[n].iter().step_by(2).fold(0.0f64, |a, &b| a.max(b));
        let mut c_fit: f64 = 0.0;
        for n in 1..=n_fit {
            c_fit = c_fit.max((coarse(n) * factorial(n / 2)).powf(1.0 / n as f64));
        }
        let c = FIT_MARGIN * c_fit;
        let mut worst: f64 = 0.0;
        let mut rows = Vec::new();
        for n in 0..=n_fit {
            for &t in times {
                let bound = c.powi(n as i32) * t.powf(n as f64 / 2.0) / factorial(n / 2);
                let f = self.f(n, t);
                worst = worst.max(f / bound);
                rows.push((n, t, f, bound));
            }
        }
        PicardBound { c_fit, c, worst_ratio: worst, pass: worst <= 1.0, rows }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardBound {
    pub c_fit: f64,
    pub c: f64,
    pub worst_ratio: f64,
    pub pass: bool,
    /// (n, t, f_n(t), bound).
    pub rows: Vec<(usize, f64, f64, f64)>,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn interp_clamped(vals: &[f64], w_max: f64, w: f64) -> f64 {
    let n = vals.len() - 1;
    let x = (w / w_max * n as f64).clamp(0.0, n as f64);
    let j = (x.floor() as usize).min(n - 1);
    let f = x - j as f64;
    vals[j] * (1.0 - f) + vals[j + 1] * f
}

/// [P_τ(w,v)/dP_1(w,0)]², finite at w = 0.
fn kernel_ratio_sq(w: f64, v: f64, tau: f64) -> f64 {
    let lin = if w * v < 1e-12 * tau { 2.0 * v / tau } else { -(-2.0 * w * v / tau).exp_m1() / w };
    let e = (-(w - v) * (w - v) / tau + w * w).exp();
    e * lin * lin / (2.0 * PI * tau) / (8.0 / PI)
}

fn next_profile(state: &PicardState, n: usize) -> Vec<f64> {
    let g = state.grid;
    let beta = gauss_legendre(g.beta_order);
    let vrule = gauss_legendre(g.v_order);
    let prev = &state.profiles[n];
    state
        .w
        .par_iter()
        .map(|&w| {
            let mut acc = CompensatedSum::new();
            for (b, wb) in beta.mapped(0.0, PI) {
                let s = 0.5 * (1.0 - b.cos());
                let tau = 1.0 - s;
                if s <= 0.0 || tau <= 0.0 {
                    continue;
                }
                let jac = (s * tau).sqrt();
                let sig = (s * tau).sqrt() + 1e-300;
                let centre = w * s;
                let lo = (centre - 10.0 * sig).max(0.0);
                let hi = centre + 10.0 * sig + 10.0 * s.sqrt().min(tau.sqrt());
                let width = (hi - lo) / g.v_panels as f64;
                let mut inner = 0.0;
                for p in 0..g.v_panels {
                    let a = lo + p as f64 * width;
                    for (v, wv) in vrule.mapped(a, a + width) {
                        let d = d_dirichlet_unchecked(s, v);
                        inner += wv * kernel_ratio_sq(w, v, tau) * d * d * interp_clamped(prev, g.w_max, v / s.sqrt());
                    }
                }
                acc.add(wb * jac * s.powf(n as f64 / 2.0) * inner);
            }
            acc.value()
        })
        .collect()
}

pub fn picard_layers(n_max: usize, grid: PicardGrid) -> Result<PicardState> {
    if n_max > MAX_LAYERS {
        return Err(Error::InvalidArgument(format!("n_max = {n_max} exceeds the cost guard {MAX_LAYERS}")));
    }
    if grid.n_w < 3 || grid.w_max <= 0.0 || grid.beta_order < 4 || grid.v_order < 4 || grid.v_panels == 0 {
        return Err(Error::InvalidArgument(format!("{grid:?}")));
    }
    let w: Vec<f64> = (0..grid.n_w).map(|k| grid.w_max * k as f64 / (grid.n_w - 1) as f64).collect();
    let mut state = PicardState { grid, profiles: vec![vec![1.0; w.len()]], w };
    for n in 0..n_max {
        let next = next_profile(&state, n);
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::Quadrature(format!("layer {} is not finite", n + 1)));
        }
        state.profiles.push(next);
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{gt_function, second_moment_ratio};

    #[test]
    fn layer_zero_is_one() {
        let s = picard_layers(0, PicardGrid::default()).unwrap();
        assert_eq!(s.f(0, 0.3), 1.0);
        assert!(picard_layers(9, PicardGrid::default()).is_err());
    }

    #[test]
    fn first_layer_at_origin() {
        let s = picard_layers(1, PicardGrid::default()).unwrap();
        let want = 3.0 * PI.sqrt() / 4.0;
        assert!((s.profiles[1][0] - want).abs() < 1e-6, "{}", s.profiles[1][0]);
    }

    #[test]
    fn first_layer_is_time_integral_of_gt() {
        let s = picard_layers(1, PicardGrid::default()).unwrap();
        let rule = gauss_legendre(64);
        for (t, u) in [(1.0, 0.7), (0.5, 1.2), (2.0, 0.3)] {
            let direct: f64 = rule
                .mapped(0.0, PI)
                .map(|(b, wb)| {
                    let s_ = t * 0.5 * (1.0 - b.cos());
                    wb * 0.5 * t * b.sin() * gt_function(t, s_, u).unwrap().value
                })
                .sum();
            let got = s.second_moment(1, t, u);
            assert!((got - direct).abs() < 1e-4 * direct, "({t},{u}): {got} vs {direct}");
        }
    }

    #[test]
    fn partial_sums_approach_closed_form() {
        let s = picard_layers(8, PicardGrid::default()).unwrap();
        for (t, u) in [(0.25, 0.5), (0.5, 1.0)] {
            let exact = second_moment_ratio(t, u).unwrap();
            let mut last = 0.0;
            for n in 0..=8 {
                let p = s.partial_ratio(n, t, u);
                assert!(p > last && p <= exact * (1.0 + 1e-3));
                last = p;
            }
            assert!((last - exact).abs() < 2e-3 * exact, "({t},{u}): {last} vs {exact}");
        }
    }
}
