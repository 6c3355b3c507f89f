use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Built-in test functions, all vanishing at 0 and defined on ℝ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum TestFn {
    /// u·e^{−u²}.
    HermiteDamped,
    /// exp(1 − 1/(1 − ((u−c)/w)²)) on |u − c| < w; needs c > w so that it
    /// vanishes near 0.
    Bump { center: f64, width: f64 },
    /// u(1 − u/L)⁴ on [0, L], extended oddly to negative u.
    PolynomialCutoff { length: f64 },
}

/// The compactly supported C^∞ bump on [−1, 1] with value 1 and slope 0 at 0.
pub const BUMP: TestFn = TestFn::Bump { center: 0.0, width: 1.0 };

fn bump_derivs(s: f64) -> (f64, f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let a = 1.0 - s * s;
    let f = (1.0 - 1.0 / a).exp();
    // g = 1 − 1/a, g′ = −2s/a², g″ = −2/a² − 8s²/a³
    let g1 = -2.0 * s / (a * a);
    let g2 = -2.0 / (a * a) - 8.0 * s * s / (a * a * a);
    (f, f * g1, f * (g2 + g1 * g1))
}

impl TestFn {
    /// (φ, φ′, φ″) at u.
    pub fn derivs(&self, u: f64) -> (f64, f64, f64) {
        match *self {
            TestFn::HermiteDamped => {
                let e = (-u * u).exp();
                (u * e, (1.0 - 2.0 * u * u) * e, (4.0 * u.powi(3) - 6.0 * u) * e)
            }
            TestFn::Bump { center, width } => {
                let (f, f1, f2) = bump_derivs((u - center) / width);
                (f, f1 / width, f2 / (width * width))
            }
            TestFn::PolynomialCutoff { length } => {
                let s = u.abs();
                if s >= length {
                    return (0.0, 0.0, 0.0);
                }
                let b = 1.0 - s / length;
                let f = s * b.powi(4);
                let f1 = b.powi(4) - 4.0 * s * b.powi(3) / length;
                let f2 = -8.0 * b.powi(3) / length + 12.0 * s * b * b / (length * length);
                (u.signum() * f, f1, u.signum() * f2)
            }
        }
    }

    pub fn value(&self, u: f64) -> f64 {
        self.derivs(u).0
    }

    /// A point beyond which φ is below 1e-16 in magnitude (or exactly zero).
    pub fn support_end(&self) -> f64 {
        match *self {
            TestFn::HermiteDamped => 6.5,
            TestFn::Bump { center, width } => center + width,
            TestFn::PolynomialCutoff { length } => length,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "hermite-damped" => Ok(TestFn::HermiteDamped),
            "bump" => Ok(TestFn::Bump { center: 1.5, width: 1.0 }),
            "polynomial-cutoff" => Ok(TestFn::PolynomialCutoff { length: 3.0 }),
            other => Err(Error::InvalidArgument(format!("unknown test function {other}"))),
        }
    }
}

/// φ_ε = φ + εφ′(0)ψ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrectedTestFn {
    pub phi: TestFn,
    pub psi: TestFn,
    pub epsilon: f64,
    pub slope: f64,
}

pub fn corrected_test_function(phi: TestFn, psi: TestFn, epsilon: f64) -> Result<CorrectedTestFn> {
    let (p0, slope, _) = phi.derivs(0.0);
    if p0 != 0.0 {
        return Err(Error::InvalidArgument(format!("φ(0) = {p0}, expected 0")));
    }
    let (s0, s1, _) = psi.derivs(0.0);
    if (s0 - 1.0).abs() > 1e-15 || s1.abs() > 1e-15 {
        return Err(Error::InvalidArgument("ψ needs ψ(0) = 1 and ψ′(0) = 0".into()));
    }
    Ok(CorrectedTestFn { phi, psi, epsilon, slope })
}

impl CorrectedTestFn {
    pub fn derivs(&self, u: f64) -> (f64, f64, f64) {
        let (a, a1, a2) = self.phi.derivs(u);
        let (b, b1, b2) = self.psi.derivs(u);
        let c = self.epsilon * self.slope;
        (a + c * b, a1 + c * b1, a2 + c * b2)
    }

    pub fn value(&self, u: f64) -> f64 {
        self.derivs(u).0
    }

    /// ε⁻²[e^{−ε}φ_ε(0) − φ_ε(−ε²)].
    pub fn boundary_combination(&self) -> f64 {
        let e = self.epsilon;
        ((-e).exp() * self.value(0.0) - self.value(-e * e)) / (e * e)
    }

    pub fn support_end(&self) -> f64 {
        self.phi.support_end().max(self.psi.support_end())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numeric_check(f: TestFn, u: f64) {
        let h = 1e-5;
        let (v, d1, d2) = f.derivs(u);
        let fd1 = (f.value(u + h) - f.value(u - h)) / (2.0 * h);
        let fd2 = (f.value(u + h) - 2.0 * v + f.value(u - h)) / (h * h);
        assert!((d1 - fd1).abs() < 1e-6, "{f:?} at {u}: {d1} vs {fd1}");
        assert!((d2 - fd2).abs() < 1e-3, "{f:?} at {u}: {d2} vs {fd2}");
    }

    #[test]
    fn derivatives_match_differences() {
        for u in [-0.7, -0.2, 0.3, 0.9, 1.7, 2.4] {
            numeric_check(TestFn::HermiteDamped, u);
            numeric_check(BUMP, u * 0.5);
            numeric_check(TestFn::Bump { center: 1.5, width: 1.0 }, u);
            numeric_check(TestFn::PolynomialCutoff { length: 3.0 }, u);
        }
    }

    #[test]
    fn bump_properties() {
        assert_eq!(BUMP.derivs(0.0), (1.0, 0.0, -2.0));
        assert_eq!(BUMP.value(1.0), 0.0);
        assert_eq!(BUMP.value(-1.2), 0.0);
    }

    #[test]
    fn corrected_values() {
        let c = corrected_test_function(TestFn::HermiteDamped, BUMP, 0.1).unwrap();
        assert!((c.value(0.0) - 0.1).abs() < 1e-15);
        let flat = corrected_test_function(TestFn::Bump { center: 1.5, width: 1.0 }, BUMP, 0.1).unwrap();
        for u in [0.0, 0.7, 1.4] {
            assert_eq!(flat.value(u), flat.phi.value(u));
        }
        assert!(corrected_test_function(BUMP, BUMP, 0.1).is_err());
    }

    #[test]
    fn boundary_combination_vanishes() {
        let mut prev = f64::INFINITY;
        for eps in [0.4, 0.2, 0.1, 0.05, 0.025] {
            let c = corrected_test_function(TestFn::HermiteDamped, BUMP, eps).unwrap();
            let b = c.boundary_combination().abs();
            assert!(b < prev);
            prev = b;
        }
        assert!(prev < 0.02);
    }
}
