//! Empirical shape checks of the heat-kernel inequalities.
//!
//! Each check samples LHS/RHS-shape on a coarse grid, takes the sup as the
//! fitted constant, then re-samples on a disjoint fine grid and passes when
//! the fine sup stays within `FIT_MARGIN` times the fitted constant (and
//! below the hard limit, for the inequalities whose constant is explicit).

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fullline::negligible_index;
use super::quad::{gauss_legendre, geometric_breaks, uniform_breaks};
use super::robin::{RobinTable, DEFAULT_SERIES_TOL};
use super::special::CompensatedSum;
use crate::error::{Error, Result};

pub const FIT_MARGIN: f64 = 1.5;

/// (1/π)∫e^{−z²/5}dz = √(5/π).
pub fn universal_kernel_constant() -> f64 {
    (5.0 / PI).sqrt()
}

/// (16/π)∫|z|e^{−z²/5}dz = 80/π.
pub fn first_moment_constant() -> f64 {
    80.0 / PI
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsGrid {
    pub coarse_times: usize,
    pub x_max: Option<usize>,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub time_order: usize,
}

impl Default for BoundsGrid {
    fn default() -> Self {
        Self { coarse_times: 8, x_max: None, a: 1.0, b: 1.0, alpha: 0.5, time_order: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub grid_size: usize,
    pub fitted_constant: f64,
    pub fine_sup: f64,
    pub limit: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub epsilon: f64,
    pub t_macro: f64,
    pub checks: Vec<BoundCheck>,
}

impl BoundsReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,grid_size,fitted_constant,fine_sup,limit,pass\n");
        for c in &self.checks {
            let limit = c.limit.map(|l| format!("{l:.10e}")).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{:.10e},{:.10e},{},{}",
                c.name, c.grid_size, c.fitted_constant, c.fine_sup, limit, c.pass
            );
        }
        s
    }
}

impl std::fmt::Display for BoundsReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "bounds suite at ε = {}, T = {}", self.epsilon, self.t_macro)?;
        for c in &self.checks {
            write!(f, "  {:<22} n={:<6} fitted={:<12.6e} fine={:<12.6e}", c.name, c.grid_size, c.fitted_constant, c.fine_sup)?;
            if let Some(l) = c.limit {
                write!(f, " limit={l:.6}")?;
            }
            writeln!(f, " {}", if c.pass { "pass" } else { "FAIL" })?;
        }
        Ok(())
    }
}

fn verdict(name: &str, coarse: &[f64], fine: &[f64], limit: Option<f64>) -> BoundCheck {
    let sup = |v: &[f64]| v.iter().copied().fold(0.0f64, |m, x| if x.is_nan() { f64::INFINITY } else { m.max(x) });
    let fitted = sup(coarse);
    let fine_sup = sup(fine);
    let mut pass = fitted.is_finite() && fine_sup <= FIT_MARGIN * fitted.max(f64::MIN_POSITIVE);
    if let Some(l) = limit {
        pass &= fitted <= l && fine_sup <= l;
    }
    BoundCheck { name: name.to_string(), grid_size: coarse.len() + fine.len(), fitted_constant: fitted, fine_sup, limit, pass }
}

/// Geometric times on [lo, hi]; `fine` shifts them by half a step.
fn times(lo: f64, hi: f64, n: usize, fine: bool) -> Vec<f64> {
    let n = n.max(2);
    let r = (hi / lo).ln() / (n - 1) as f64;
    if fine {
        (0..n - 1).map(|k| lo * ((k as f64 + 0.5) * r).exp()).collect()
    } else {
        (0..n).map(|k| lo * (k as f64 * r).exp()).collect()
    }
}

fn sites(x_max: usize, fine: bool) -> Vec<usize> {
    let mut v = if fine { vec![0, 3] } else { vec![0, 1] };
    loop {
        let next = v.last().unwrap() * 2 + usize::from(!fine);
        if next > x_max {
            break;
        }
        v.push(next);
    }
    v
}

struct Ctx {
    eps: f64,
    mu: f64,
    grid: BoundsGrid,
}

impl Ctx {
    fn table(&self, t: f64, x_max: usize) -> Result<RobinTable> {
        RobinTable::new(self.mu, t, x_max + 2 + negligible_index(t), DEFAULT_SERIES_TOL)
    }

    fn first_moment(&self, tab: &RobinTable, x: usize) -> f64 {
        let mut acc = CompensatedSum::new();
        let mut w = 1.0;
        for y in 0..=tab.n_max {
            acc.add(tab.get(x, y) * w);
            w *= self.mu;
        }
        acc.value()
    }

    /// Ratios of the single-time inequalities at time t over the sites xs.
    fn pointwise(&self, t: f64, xs: &[usize]) -> Result<Vec<(&'static str, f64)>> {
        let eps2 = self.eps * self.eps;
        let a = self.grid.a;
        let b = self.grid.b;
        let alpha = self.grid.alpha;
        let st = t.sqrt();
        let k_max = st.ceil() as usize;
        let x_top = xs.iter().copied().max().unwrap_or(0) + k_max + 1;
        let tab = self.table(t, x_top)?;
        let reach = negligible_index(t);
        let mut out = Vec::new();
        let damp = |v: f64| 1.0f64.min(t.powf(-(1.0 + v) / 2.0));
        for &x in xs {
            let ys = 0..=(x + reach).min(tab.n_max - 1);
            // hkbound1
            let s: f64 = ys.clone().map(|y| tab.get(x, y) * (a * eps2 * y as f64).exp()).sum();
            out.push(("hkbound1", s / (a * eps2 * x as f64).exp()));
            // hkbound2 at v = ½ and v = 1
            for (name, v) in [("hkbound2[v=0.5]", 0.5), ("hkbound2[v=1]", 1.0)] {
                for k in [1usize, (k_max / 2).max(1), k_max] {
                    let y = x + k;
                    let d = ys.clone().map(|z| (tab.get(x, z) - tab.get(y, z)).abs()).fold(0.0, f64::max);
                    out.push((name, d / (damp(v) * (k as f64).powf(v))));
                }
            }
            // hkbound4 with v = 1, and hkbound5
            let lam = 1.0f64.min(1.0 / st);
            for dir in [1i64, -1] {
                if dir < 0 && x == 0 {
                    continue;
                }
                let xn = (x as i64 + dir) as usize;
                let mut worst: f64 = 0.0;
                let mut acc = CompensatedSum::new();
                for z in ys.clone() {
                    let g = (tab.get(xn, z) - tab.get(x, z)).abs();
                    let dist = x.abs_diff(z) as f64;
                    worst = worst.max(g / (damp(1.0) * (-b * dist * lam).exp()));
                    acc.add(g * (a * eps2 * z as f64).exp() * (a * dist * lam).exp());
                }
                out.push(("hkbound4", worst));
                out.push(("hkbound5", acc.value() / ((a * eps2 * x as f64).exp() / st)));
            }
            // long-time estimate
            if t >= 1.0 {
                let m = ys.clone().map(|y| tab.get(x, y)).fold(0.0, f64::max);
                out.push(("boundheatkernel", st * m));
            }
            // first-moment estimates
            let ez = self.first_moment(&tab, x);
            let shape = (1.0 / (eps2 * eps2 * t)).min(1.0 / eps2);
            out.push(("boundIC1", ez / eps2 / shape));
            for k in [1usize, (k_max / 2).max(1), k_max] {
                let ey = self.first_moment(&tab, x + k);
                let lhs = (ez - ey).abs() / eps2;
                let rhs = (eps2 * k as f64).powf(alpha) * (eps2 * eps2 * t).powf(-1.0 - alpha / 2.0);
                out.push(("boundIC2", lhs / rhs));
            }
            // killing
            let mass: f64 = ys.clone().map(|y| tab.get(x, y)).sum();
            out.push(("killing", (1.0 - mass).abs() / (self.eps * st)));
        }
        Ok(out)
    }

    fn hkbound3(&self, s: f64, xs: &[usize]) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for dt in [0.25, 1.0, 4.0] {
            let t = s + dt;
            let x_top = xs.iter().copied().max().unwrap_or(0) + t.sqrt().ceil() as usize;
            let ts = self.table(s, x_top)?;
            let tt = self.table(t, x_top)?;
            for &x in xs {
                for y in x.saturating_sub(t.sqrt().ceil() as usize)..=x + t.sqrt().ceil() as usize {
                    let rhs = dt.exp() * tt.get(x, y);
                    if rhs > 1e-200 {
                        out.push(ts.get(x, y) / rhs);
                    }
                }
            }
        }
        Ok(out)
    }

    /// f(r) = Σ_{y≥1}|∇⁺𝗉_r(x,y)∇⁻𝗉_r(x,y)|e^{aε²|x−y|} for each x.
    fn cancel_integrand(&self, r: f64, xs: &[usize]) -> Result<Vec<f64>> {
        let x_top = xs.iter().copied().max().unwrap_or(1);
        let tab = self.table(r, x_top + 1)?;
        let reach = negligible_index(r);
        let eps2 = self.eps * self.eps;
        Ok(xs
            .iter()
            .map(|&x| {
                let mut acc = CompensatedSum::new();
                for y in 1..=(x + reach).min(tab.n_max - 1) {
                    let gp = tab.get(x + 1, y) - tab.get(x, y);
                    let gm = tab.get(x - 1, y) - tab.get(x, y);
                    acc.add((gp * gm).abs() * (self.grid.a * eps2 * x.abs_diff(y) as f64).exp());
                }
                acc.value()
            })
            .collect())
    }

    /// ∫₀^R f(r)w(r)dr per site on doubling panels, with w = 1 or
    /// w = (R−r)^{−1/2} handled by r = R − w² on the upper half.
    fn cancel_integral(&self, big_r: f64, xs: &[usize], singular: bool) -> Result<Vec<f64>> {
        let rule = gauss_legendre(self.grid.time_order);
        let mut nodes: Vec<(f64, f64)> = Vec::new();
        let split = if singular { big_r / 2.0 } else { big_r };
        for w in geometric_breaks(0.5f64.min(split), split).windows(2) {
            for (r, wt) in rule.mapped(w[0], w[1]) {
                let weight = if singular { wt / (big_r - r).sqrt() } else { wt };
                nodes.push((r, weight));
            }
        }
        if singular {
            let wmax = (big_r / 2.0).sqrt();
            let panels = (wmax / 2.0).ceil() as usize + 2;
            for w in uniform_breaks(0.0, wmax, panels).windows(2) {
                for (s, wt) in rule.mapped(w[0], w[1]) {
                    nodes.push((big_r - s * s, 2.0 * wt));
                }
            }
        }
        let parts: Result<Vec<Vec<f64>>> = nodes
            .par_iter()
            .map(|&(r, w)| self.cancel_integrand(r, xs).map(|v| v.into_iter().map(|f| f * w).collect()))
            .collect();
        let parts = parts?;
        Ok((0..xs.len()).map(|i| parts.iter().map(|p| p[i]).collect::<CompensatedSum>().value()).collect())
    }
}

/// Runs every inequality of the suite at the given ε and macroscopic
/// horizon T (microscopic times up to ε⁻⁴T).
pub fn bounds_suite(epsilon: f64, t_macro: f64, grid: &BoundsGrid) -> Result<BoundsReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    if !(t_macro > 0.0) {
        return Err(Error::InvalidTime(t_macro));
    }
    let eps2 = epsilon * epsilon;
    let t_top = t_macro / (eps2 * eps2);
    let x_max = grid.x_max.unwrap_or((4.0 / eps2).ceil() as usize);
    let ctx = Ctx { eps: epsilon, mu: (-epsilon).exp(), grid: grid.clone() };
    let mut checks = Vec::new();

    let collect = |fine: bool| -> Result<Vec<(&'static str, f64)>> {
        let xs = sites(x_max, fine);
        let ts = times(0.5, t_top.max(1e4), grid.coarse_times, fine);
        let parts: Result<Vec<_>> = ts
            .par_iter()
            .map(|&t| {
                let mut v = ctx.pointwise(t, &xs)?;
                if t > t_top {
                    v.retain(|(n, _)| *n == "boundheatkernel");
                }
                Ok(v)
            })
            .collect();
        Ok(parts?.into_iter().flatten().collect())
    };
    let coarse = collect(false)?;
    let fine = collect(true)?;
    let pick = |v: &[(&'static str, f64)], name: &str| -> Vec<f64> {
        v.iter().filter(|(n, _)| *n == name).map(|(_, r)| *r).collect()
    };
    for name in ["hkbound1", "hkbound2[v=0.5]", "hkbound2[v=1]", "hkbound4", "hkbound5", "killing", "boundIC2"] {
        checks.push(verdict(name, &pick(&coarse, name), &pick(&fine, name), None));
    }
    checks.push(verdict(
        "boundheatkernel",
        &pick(&coarse, "boundheatkernel"),
        &pick(&fine, "boundheatkernel"),
        Some(universal_kernel_constant()),
    ));
    checks.push(verdict("boundIC1", &pick(&coarse, "boundIC1"), &pick(&fine, "boundIC1"), Some(first_moment_constant())));

    let h3 = |fine: bool| -> Result<Vec<f64>> {
        let xs = sites(x_max.min(64), fine);
        let mut out = Vec::new();
        for s in times(0.5, t_top, grid.coarse_times, fine) {
            out.extend(ctx.hkbound3(s, &xs)?);
        }
        Ok(out)
    };
    checks.push(verdict("hkbound3", &h3(false)?, &h3(true)?, Some(1.0 + 1e-12)));

    let cancel_sites = |fine: bool| -> Vec<usize> { sites(x_max, fine).into_iter().filter(|&x| x >= 1).collect() };
    let c1 = |fine: bool| ctx.cancel_integral(t_top, &cancel_sites(fine), false);
    checks.push(verdict("hkboundcancel1", &c1(false)?, &c1(true)?, Some(1.0)));

    let c2 = |fine: bool| -> Result<Vec<f64>> {
        let xs = cancel_sites(fine);
        let mut out = Vec::new();
        for t in times(t_macro / 16.0, t_macro, 3, fine) {
            out.extend(ctx.cancel_integral(t / (eps2 * eps2), &xs, true)?.into_iter().map(|v| v / eps2));
        }
        Ok(out)
    };
    checks.push(verdict("hkboundcancel2", &c2(false)?, &c2(true)?, None));

    Ok(BoundsReport { epsilon, t_macro, checks })
}

/// 𝗉_s(x,y) ≤ e^{t−s}𝗉_t(x,y) at one point, returned as LHS/RHS.
pub fn time_monotonicity_ratio(mu: f64, s: f64, t: f64, x: usize, y: usize) -> Result<f64> {
    if !(t >= s && s >= 0.0) {
        return Err(Error::InvalidArgument(format!("need t ≥ s ≥ 0, got s={s}, t={t}")));
    }
    let a = RobinTable::new(mu, s, x.max(y), DEFAULT_SERIES_TOL)?.get(x, y);
    let b = RobinTable::new(mu, t, x.max(y), DEFAULT_SERIES_TOL)?.get(x, y);
    Ok(a / ((t - s).exp() * b))
}
