//! Continuum kernels on ℝ₊: P^Dir, dP^Dir, G_t and the two-point second
//! moment of the δ₀′ solution.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::quad::{adaptive, gauss_legendre, integrate_panels, uniform_breaks};
use super::special::{erf, erfcx, erfcx_derivatives, CompensatedSum};
use crate::error::{Error, Result};

/// A point evaluation of a continuum kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuousKernelEval {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub value: f64,
}

fn check(t: f64, u: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidTime(t));
    }
    if !(u >= 0.0) {
        return Err(Error::InvalidArgument(format!("position {u} is negative")));
    }
    Ok(())
}

/// P^Dir_t(u,v) = (2πt)^{−1/2}(e^{−(u−v)²/2t} − e^{−(u+v)²/2t}).
pub fn dirichlet_kernel(t: f64, u: f64, v: f64) -> Result<f64> {
    check(t, u)?;
    check(t, v)?;
    Ok(dirichlet_unchecked(t, u, v))
}

#[inline]
pub(crate) fn dirichlet_unchecked(t: f64, u: f64, v: f64) -> f64 {
    let d = u - v;
    (-d * d / (2.0 * t)).exp() * -(-2.0 * u * v / t).exp_m1() / (2.0 * PI * t).sqrt()
}

pub fn dirichlet_eval(t: f64, u: f64, v: f64) -> Result<ContinuousKernelEval> {
    Ok(ContinuousKernelEval { t, u, v, value: dirichlet_kernel(t, u, v)? })
}

/// dP^Dir_t(u,0) = 2√(2/π)·u·e^{−u²/2t}/t^{3/2}.
pub fn d_dirichlet_kernel(t: f64, u: f64) -> Result<f64> {
    check(t, u)?;
    Ok(d_dirichlet_unchecked(t, u))
}

#[inline]
pub(crate) fn d_dirichlet_unchecked(t: f64, u: f64) -> f64 {
    2.0 * (2.0 / PI).sqrt() * u * (-u * u / (2.0 * t)).exp() / t.powf(1.5)
}

/// The same quantity as (1/2π)∫e^{−tθ²/2 + iθu}(−4iθ)dθ
/// = (4/π)∫₀^∞ θ sin(θu)e^{−tθ²/2}dθ.
pub fn d_dirichlet_fourier(t: f64, u: f64) -> Result<f64> {
    check(t, u)?;
    let theta_max = (2.0 * 40.0 / t).sqrt();
    let panels = ((u * theta_max / PI).ceil() as usize + 8).max(8);
    let v = integrate_panels(
        |th| th * (th * u).sin() * (-t * th * th / 2.0).exp(),
        &uniform_breaks(0.0, theta_max, panels),
        32,
    );
    Ok(4.0 / PI * v)
}

/// G_t(s,u) together with its ratio to dP^Dir_t(u,0)²·√t/√(s(t−s)).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GtEval {
    pub value: f64,
    pub ratio_to_bound: f64,
}

/// Sharp constant of the G_t bound, 3/(4√π).
pub fn gt_bound_constant() -> f64 {
    3.0 / (4.0 * PI.sqrt())
}

fn gt_check(t: f64, s: f64, u: f64) -> Result<()> {
    if !(t > 0.0 && s > 0.0 && s < t) {
        return Err(Error::InvalidArgument(format!("need 0 < s < t, got s={s}, t={t}")));
    }
    if !(u > 0.0) {
        return Err(Error::InvalidArgument(format!("need u > 0, got {u}")));
    }
    Ok(())
}

/// Closed form G_t(s,u) = 2e^{−u²/t}X/(π^{3/2}t^{5/2}√(s(t−s))) with
/// X = (t(t−s)/s)(1 − e^{−su²/(t(t−s))}) + 2u².
pub fn gt_function(t: f64, s: f64, u: f64) -> Result<GtEval> {
    gt_check(t, s, u)?;
    let r = t - s;
    let x = t * r / s * -(-s * u * u / (t * r)).exp_m1() + 2.0 * u * u;
    let value = 2.0 * (-u * u / t).exp() * x / (PI.powf(1.5) * t.powf(2.5) * (s * r).sqrt());
    let ratio_to_bound = x / (4.0 * PI.sqrt() * u * u);
    Ok(GtEval { value, ratio_to_bound })
}

/// G_t(s,u) = ∫₀^∞(P^Dir_{t−s}(u,v))²(dP^Dir_s(v,0))²dv by adaptive quadrature.
pub fn gt_quadrature(t: f64, s: f64, u: f64) -> Result<f64> {
    gt_check(t, s, u)?;
    let r = t - s;
    let f = |v: f64| {
        let a = dirichlet_unchecked(r, u, v);
        let b = d_dirichlet_unchecked(s, v);
        a * a * b * b
    };
    let v_max = u + 9.0 * t.sqrt();
    let peaks = [0.0, u.min(v_max), s.sqrt(), v_max];
    let mut breaks: Vec<f64> = peaks.to_vec();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut acc = CompensatedSum::new();
    for w in breaks.windows(2) {
        acc.add(adaptive(f, w[0], w[1], 0.0, 1e-13)?);
    }
    Ok(acc.value())
}

/// ‖𝒵_t(u)‖₂²/dP^Dir_t(u,0)² and its u→0 envelope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondMomentEval {
    pub ratio: f64,
    pub bound: f64,
}

const TAYLOR_TERMS: usize = 18;

fn amplitude(t: f64) -> f64 {
    (PI * t).sqrt() * (t / 4.0).exp() * (1.0 + erf(t.sqrt() / 2.0))
}

/// Closed-form second-moment ratio; a Taylor expansion in u replaces the
/// direct formula when u/√t is small and the numerator cancels to O(u²).
pub fn second_moment_ratio(t: f64, u: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidTime(t));
    }
    if !(u >= 0.0) {
        return Err(Error::InvalidArgument(format!("need u ≥ 0, got {u}")));
    }
    let st = t.sqrt();
    let a = amplitude(t);
    if u < 0.05 * st.min(1.0) {
        // N(u) = Σ_k N_k u^k with N₀ = N₁ = 0; ratio = Σ_{k≥2} N_k u^{k−2}/4.
        let d = erfcx_derivatives(-st / 2.0, TAYLOR_TERMS + 2);
        let c = PI.sqrt() * t.powf(1.5);
        let mut acc = CompensatedSum::new();
        acc.add(2.0 * a + 4.0 + c * d[2] / (2.0 * t));
        let mut fact = 2.0;
        let mut upow = 1.0;
        for k in 3..=TAYLOR_TERMS + 2 {
            fact *= k as f64;
            upow *= u;
            acc.add(c * d[k] / (fact * st.powi(k as i32)) * upow);
        }
        return Ok(acc.value() / 4.0);
    }
    let mut n = CompensatedSum::new();
    n.add(a * (t * (u - 1.0) + 2.0 * u * u));
    n.add(PI.sqrt() * t.powf(1.5) * erfcx((2.0 * u - t) / (2.0 * st)));
    n.add(2.0 * u * (t + 2.0 * u));
    Ok(n.value() / (4.0 * u * u))
}

/// (A(t+6) + 2(t+4))/8 with A = √(πt)e^{t/4}(1 + erf(√t/2)).
pub fn second_moment_bound(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidTime(t));
    }
    Ok((amplitude(t) * (t + 6.0) + 2.0 * (t + 4.0)) / 8.0)
}

pub fn second_moment_exact(t: f64, u: f64) -> Result<SecondMomentEval> {
    if !(u > 0.0) {
        return Err(Error::InvalidArgument(format!("need u > 0, got {u}")));
    }
    Ok(SecondMomentEval { ratio: second_moment_ratio(t, u)?, bound: second_moment_bound(t)? })
}

/// Result of the vertical-line double integral for E[𝒵_t(u₁)𝒵_t(u₂)].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NestedIntegral {
    pub value: f64,
    pub imag_residue: f64,
    pub lambda: f64,
    pub nodes: usize,
    pub truncation_bound: f64,
    pub refinement_gap: f64,
}

fn nested_with(t: f64, u1: f64, u2: f64, eta: f64, lambda: f64, panels: usize, order: usize) -> Complex64 {
    let rule = gauss_legendre(order);
    let mut ys = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for w in uniform_breaks(-lambda, lambda, panels).windows(2) {
        for (y, wt) in rule.mapped(w[0], w[1]) {
            ys.push(y);
            ws.push(wt);
        }
    }
    let c1 = 1.0 + eta;
    let g1: Vec<Complex64> = ys
        .iter()
        .map(|&y| {
            let z = Complex64::new(c1, y);
            (t * z * z / 2.0 - u1 * z).exp() * z
        })
        .collect();
    let g2: Vec<Complex64> = ys
        .iter()
        .map(|&y| {
            let z = Complex64::new(0.0, y);
            (t * z * z / 2.0 - u2 * z).exp() * z
        })
        .collect();
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for (i, &y1) in ys.iter().enumerate() {
        let z1 = Complex64::new(c1, y1);
        for (j, &y2) in ys.iter().enumerate() {
            let z2 = Complex64::new(0.0, y2);
            let cross = (z1 - z2) / (z1 - z2 - 1.0) * (z1 + z2) / (z1 + z2 - 1.0);
            let v = cross * g1[i] * g2[j] * (ws[i] * ws[j]);
            re.add(v.re);
            im.add(v.im);
        }
    }
    Complex64::new(re.value(), im.value()) * (16.0 / (4.0 * PI * PI))
}

/// 16∫∫ (z₁−z₂)/(z₁−z₂−1)·(z₁+z₂)/(z₁+z₂−1)·e^{tz₁²/2−u₁z₁+tz₂²/2−u₂z₂}z₁z₂
/// dz₁dz₂/(2πi)² on Re z₁ = 1+η, Re z₂ = 0, truncated at |Im z| ≤ Λ.
pub fn nested_contour_integral(t: f64, u1: f64, u2: f64, eta: f64) -> Result<NestedIntegral> {
    if !(t > 0.0) {
        return Err(Error::InvalidTime(t));
    }
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!("need η > 0, got {eta}")));
    }
    let lambda = (2.0 * 40.0 / t).sqrt();
    // Tail of the Gaussian weights beyond Λ, times the polynomial growth.
    let c1 = 1.0 + eta;
    let truncation_bound =
        16.0 * (t * c1 * c1 / 2.0).exp() * (-t * lambda * lambda / 2.0).exp() * (lambda + c1).powi(3) * 4.0;
    let freq = (u1.max(u2) + t * c1) * 2.0 * lambda / (2.0 * PI);
    let panels = (freq.ceil() as usize + 2 * (lambda * t.sqrt()).ceil() as usize + 8).max(12);
    let coarse = nested_with(t, u1, u2, eta, lambda, panels, 20);
    let fine = nested_with(t, u1, u2, eta, lambda, panels, 28);
    let gap = (fine - coarse).norm();
    if gap > 1e-9 * fine.norm().max(1e-300) {
        return Err(Error::Quadrature(format!(
            "double contour at t={t}: {panels}x20 vs {panels}x28 nodes per axis differ by {gap:e}"
        )));
    }
    Ok(NestedIntegral {
        value: fine.re,
        imag_residue: fine.im,
        lambda,
        nodes: panels * 28,
        truncation_bound,
        refinement_gap: gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let direct = (1.0 - (-2.0f64).exp()) / (2.0 * PI).sqrt();
        assert!((dirichlet_kernel(1.0, 1.0, 1.0).unwrap() - direct).abs() < 1e-15);
        assert!((direct - 0.344_951_313_888_244_6).abs() < 1e-15);
        assert_eq!(dirichlet_kernel(2.0, 1.5, 0.0).unwrap(), 0.0);
        assert!((d_dirichlet_kernel(1.0, 1.0).unwrap() - 0.967_883).abs() < 1e-6);
        assert_eq!(d_dirichlet_kernel(1.0, 0.0).unwrap(), 0.0);
        assert!(dirichlet_kernel(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn fourier_route() {
        for (t, u) in [(1.0, 1.0), (0.1, 0.3), (3.0, 5.0), (0.01, 0.05)] {
            let a = d_dirichlet_kernel(t, u).unwrap();
            let b = d_dirichlet_fourier(t, u).unwrap();
            assert!((a - b).abs() < 1e-11 * a.max(1.0), "({t},{u}): {a} vs {b}");
        }
    }

    #[test]
    fn gt_closed_form_matches_quadrature() {
        for (t, s, u) in [(1.0, 0.3, 0.7), (2.0, 1.5, 2.0), (0.5, 0.01, 0.1), (1.0, 0.999, 3.0)] {
            let a = gt_function(t, s, u).unwrap().value;
            let b = gt_quadrature(t, s, u).unwrap();
            assert!((a - b).abs() < 1e-10 * a, "({t},{s},{u}): {a} vs {b}");
        }
        assert!(gt_function(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn second_moment_reference() {
        let r = second_moment_ratio(1.0, 1.0).unwrap();
        assert!((r - 3.503_055_114_086_1).abs() < 1e-11);
        let r = second_moment_ratio(0.5, 0.25).unwrap();
        assert!((r - 2.542_610_779_273).abs() < 1e-11);
    }

    #[test]
    fn taylor_branch_is_continuous() {
        // reference values at 40 digits on both sides of the switch u = 0.05√t
        for (t, u, want) in [
            (0.01, 0.005, 1.141_670_620_085_751),
            (0.01, 0.004_999, 1.141_670_976_615_264_3),
            (1e-4, 1e-9, 1.013_393_959_945_548_4),
        ] {
            let got = second_moment_ratio(t, u).unwrap();
            assert!((got - want).abs() < 1e-12 * want, "({t},{u}): {got} vs {want}");
        }
        for t in [0.01f64, 0.5, 2.0] {
            let b0 = second_moment_bound(t).unwrap();
            assert!((second_moment_ratio(t, 0.0).unwrap() - b0).abs() < 1e-12 * b0);
        }
    }
}
