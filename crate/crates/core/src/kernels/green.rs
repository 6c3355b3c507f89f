//! Σ_y∫∇⁺𝗉_t(x,y)∇⁺𝗉_t(x′,y)dt, by time integration and by the Green
//! function of the killed walk.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fullline::negligible_index;
use super::quad::{gauss_legendre, geometric_breaks};
use super::robin::{robin_factor, CircleRule, RobinTable, DEFAULT_SERIES_TOL};
use super::special::CompensatedSum;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GreenRoute {
    TimeIntegral,
    GreenSolve,
}

const TIME_ORDER: usize = 24;

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidArgument(format!("μ = {mu} must lie in (0,1) for a killed walk")));
    }
    Ok(())
}

/// Σ_y ∇⁺𝗉_t(x,y)∇⁺𝗉_t(x′,y) by explicit summation over y.
pub fn gradient_product_sum(mu: f64, t: f64, x: usize, xp: usize) -> Result<f64> {
    let tab = RobinTable::new(mu, t, x.max(xp) + 1 + negligible_index(t), DEFAULT_SERIES_TOL)?;
    let mut acc = CompensatedSum::new();
    for y in 0..=tab.n_max {
        let a = tab.get(x + 1, y) - tab.get(x, y);
        let b = tab.get(xp + 1, y) - tab.get(xp, y);
        acc.add(a * b);
    }
    Ok(acc.value())
}

/// ∫_T^∞ Σ_y∇⁺𝗉_t(x,y)∇⁺𝗉_t(x′,y)dt
/// = (1/2π)∫e^{2T(cos θ−1)}Re[ξ^{x−x′} − ξ^{x+x′+2}m(ξ)]dθ, m = (μ−ξ)/(1−μξ).
pub fn green_tail(mu: f64, x: usize, xp: usize, t_from: f64) -> Result<f64> {
    check_mu(mu)?;
    let d = x as f64 - xp as f64;
    let s = (x + xp + 2) as f64;
    let eval = |order: usize| {
        let rule = CircleRule::new(2.0 * t_from, s, 1.0 - mu, order);
        rule.integrate(|th| (d * th).cos() - (Complex64::from_polar(1.0, s * th) * robin_factor(mu, th)).re)
    };
    let a = eval(32);
    let b = eval(48);
    if (a - b).abs() > 1e-12 {
        return Err(Error::TailNotCertified(format!("tail rule differs by {:e} at T = {t_from}", (a - b).abs())));
    }
    Ok(b)
}

/// Time-integral route: Gauss–Legendre on doubling panels over [0, t_max]
/// with explicit y-sums, plus the closed Fourier tail beyond t_max. The
/// tail is certified by agreement of two quadrature orders, and the time
/// integral by agreement of two panel orders within `tol`.
pub fn green_cancellation(mu: f64, x: usize, xp: usize, t_max: f64, tol: f64) -> Result<f64> {
    check_mu(mu)?;
    if !(t_max > 0.0) {
        return Err(Error::InvalidTime(t_max));
    }
    let breaks = geometric_breaks(0.5, t_max);
    let integrate = |order: usize| -> Result<f64> {
        let rule = gauss_legendre(order);
        let nodes: Vec<(f64, f64)> = breaks.windows(2).flat_map(|w| rule.mapped(w[0], w[1]).collect::<Vec<_>>()).collect();
        let vals: Result<Vec<f64>> =
            nodes.par_iter().map(|&(t, w)| gradient_product_sum(mu, t, x, xp).map(|v| v * w)).collect();
        Ok(vals?.into_iter().collect::<CompensatedSum>().value())
    };
    let body = integrate(TIME_ORDER)?;
    let check = integrate(TIME_ORDER - 8)?;
    if (body - check).abs() > tol {
        return Err(Error::TailNotCertified(format!(
            "time quadrature orders disagree by {:e} on [0, {t_max}]",
            (body - check).abs()
        )));
    }
    Ok(body + green_tail(mu, x, xp, t_max)?)
}

/// G(·, x′) on 0..=x′ for the discrete-time killed walk (expected visits to
/// x′), by a tridiagonal solve of (I − K)G = δ_{x′} with G(x′+1) = G(x′).
pub fn green_column(mu: f64, xp: usize) -> Result<Vec<f64>> {
    check_mu(mu)?;
    let n = xp + 1;
    // rows: a[i]·g[i−1] + b[i]·g[i] + c[i]·g[i+1] = r[i]
    let mut a = vec![0.0; n];
    let mut b = vec![1.0; n];
    let mut c = vec![0.0; n];
    let mut r = vec![0.0; n];
    for i in 0..n {
        if i > 0 {
            a[i] = -0.5;
        }
        if i + 1 < n {
            c[i] = -0.5;
        }
    }
    b[0] = 1.0 - mu / 2.0;
    // at x′ the right neighbour equals G(x′), folding −½ into the diagonal
    b[n - 1] -= 0.5;
    r[n - 1] = 1.0;
    // Thomas algorithm
    for i in 1..n {
        let w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        r[i] -= w * r[i - 1];
    }
    let mut g = vec![0.0; n];
    g[n - 1] = r[n - 1] / b[n - 1];
    for i in (0..n - 1).rev() {
        g[i] = (r[i] - c[i] * g[i + 1]) / b[i];
    }
    Ok(g)
}

/// G(y, x′) for any y ≥ 0.
pub fn green_function(mu: f64, y: usize, xp: usize) -> Result<f64> {
    let col = green_column(mu, xp)?;
    Ok(col[y.min(xp)])
}

/// Green route: ½[G(x+1,x′+1) + G(x,x′) − G(x+1,x′) − G(x,x′+1)], using
/// ∫₀^∞𝗉_{2t}dt = ½G.
pub fn green_cancellation_solve(mu: f64, x: usize, xp: usize) -> Result<f64> {
    let g = |y: usize, z: usize| green_function(mu, y, z);
    Ok(0.5 * (g(x + 1, xp + 1)? + g(x, xp)? - g(x + 1, xp)? - g(x, xp + 1)?))
}

pub fn green_cancellation_by(route: GreenRoute, mu: f64, x: usize, xp: usize, t_max: f64, tol: f64) -> Result<f64> {
    match route {
        GreenRoute::TimeIntegral => green_cancellation(mu, x, xp, t_max, tol),
        GreenRoute::GreenSolve => green_cancellation_solve(mu, x, xp),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MU: f64 = 0.904_837_418_035_959_6;

    #[test]
    fn green_column_closed_form() {
        for xp in [0usize, 1, 5, 12] {
            let col = green_column(MU, xp).unwrap();
            for (y, g) in col.iter().enumerate() {
                let exact = 2.0 / (1.0 - MU) + 2.0 * y as f64;
                assert!((g - exact).abs() < 1e-10 * exact, "y={y} x'={xp}");
            }
        }
    }

    #[test]
    fn first_step_identity() {
        for x in 0..6 {
            let lhs = green_function(MU, x + 1, x + 1).unwrap();
            let rhs = 2.0 + green_function(MU, x, x + 1).unwrap();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn solve_route_is_indicator() {
        for x in 0..5 {
            for xp in 0..5 {
                let v = green_cancellation_solve(MU, x, xp).unwrap();
                let want = if x == xp { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn time_route_matches() {
        let v = green_cancellation(MU, 3, 3, 64.0, 1e-8).unwrap();
        assert!((v - 1.0).abs() < 1e-7, "{v}");
        let v = green_cancellation(MU, 2, 7, 64.0, 1e-8).unwrap();
        assert!(v.abs() < 1e-7, "{v}");
    }

    #[test]
    fn tail_is_consistent_with_body() {
        // ∫_a^b of the y-sum equals tail(a) − tail(b)
        let (a, b) = (4.0, 6.0);
        let rule = gauss_legendre(20);
        let body: f64 = rule.mapped(a, b).map(|(t, w)| w * gradient_product_sum(MU, t, 1, 2).unwrap()).sum();
        let diff = green_tail(MU, 1, 2, a).unwrap() - green_tail(MU, 1, 2, b).unwrap();
        assert!((body - diff).abs() < 1e-12);
    }

    #[test]
    fn rejects_unkilled_walk() {
        assert!(green_column(1.0, 3).is_err());
    }
}
