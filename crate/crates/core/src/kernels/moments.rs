//! E[Z_t(x)] for the empty initial condition Z₀(y) = μ^y, μ = e^{−ε}.

use num_complex::Complex64;

use super::fullline::negligible_index;
use super::robin::{CircleRule, RobinTable, DEFAULT_SERIES_TOL};
use super::special::CompensatedSum;
use crate::error::{Error, Result};

fn check(epsilon: f64, t: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidTime(t));
    }
    Ok(())
}

/// ξ^x(1−μ²)(1−ξ²)/((1−μ/ξ)(1−μξ)²) at ξ = e^{iθ}.
fn first_moment_integrand(mu: f64, x: f64, theta: f64) -> f64 {
    let xi = Complex64::from_polar(1.0, theta);
    let num = Complex64::from_polar(1.0, x * theta) * (1.0 - mu * mu) * (1.0 - xi * xi);
    let den = (1.0 - mu / xi) * (1.0 - mu * xi) * (1.0 - mu * xi);
    (num / den).re
}

fn contour(mu: f64, t: f64, x: usize, order: usize) -> f64 {
    let rule = CircleRule::new(t, x as f64 + 2.0, 1.0 - mu, order);
    rule.integrate(|th| first_moment_integrand(mu, x as f64, th))
}

/// E[Z_t(x)] = Σ_y 𝗉_t^ε(x,y)μ^y by the radius-one contour integral.
pub fn first_moment_exact(epsilon: f64, t_micro: f64, x: usize) -> Result<f64> {
    check(epsilon, t_micro)?;
    let mu = (-epsilon).exp();
    let a = contour(mu, t_micro, x, 32);
    let b = contour(mu, t_micro, x, 48);
    let scale = 1.0 / (epsilon * epsilon);
    if (a - b).abs() > 1e-13 * scale {
        return Err(Error::Quadrature(format!(
            "first-moment contour at ε={epsilon}, t={t_micro}, x={x} differs by {:e}",
            (a - b).abs()
        )));
    }
    Ok(b)
}

/// E[Z_t(x)] by direct summation Σ_y 𝗉_t^ε(x,y)μ^y.
pub fn first_moment_convolution(epsilon: f64, t_micro: f64, x: usize) -> Result<f64> {
    check(epsilon, t_micro)?;
    let mu = (-epsilon).exp();
    let tab = RobinTable::new(mu, t_micro, x + negligible_index(t_micro), DEFAULT_SERIES_TOL)?;
    let mut acc = CompensatedSum::new();
    let mut w = 1.0;
    for y in 0..=tab.n_max {
        acc.add(tab.get(x, y) * w);
        w *= mu;
    }
    Ok(acc.value())
}

/// ε⁻²E[Z_{ε⁻⁴t}(ε⁻²u)] with ε⁻²u rounded to the nearest site.
pub fn rescaled_first_moment(epsilon: f64, t_macro: f64, u: f64) -> Result<f64> {
    let e2 = epsilon * epsilon;
    let x = (u / e2).round().max(0.0) as usize;
    Ok(first_moment_exact(epsilon, t_macro / (e2 * e2), x)? / e2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_value() {
        let mu = (-0.1f64).exp();
        for x in [0usize, 3, 10] {
            let v = first_moment_exact(0.1, 0.0, x).unwrap();
            assert!((v - mu.powi(x as i32)).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn contour_matches_convolution() {
        for (eps, t, x) in [(0.1, 100.0, 0usize), (0.1, 100.0, 10), (0.1, 100.0, 40), (0.3, 7.0, 2)] {
            let a = first_moment_exact(eps, t, x).unwrap();
            let b = first_moment_convolution(eps, t, x).unwrap();
            assert!((a - b).abs() < 1e-10, "({eps},{t},{x}): {a} vs {b}");
        }
    }

    #[test]
    fn sub_unit() {
        for t in [1.0, 10.0, 1000.0] {
            let v = first_moment_exact(0.2, t, 5).unwrap();
            assert!(v > 0.0 && v < 1.0);
        }
    }
}
