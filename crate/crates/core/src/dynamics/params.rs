use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar parameters of the exclusion dynamics and of its Hopf-Cole field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakAsymParams {
    pub epsilon: f64,
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    pub nu: f64,
    pub mu: f64,
    pub diffusion: f64,
}

/// p = ½e^ε, q = ½e^{−ε}.
pub fn weak_asym_params(epsilon: f64) -> Result<WeakAsymParams> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    let p = 0.5 * epsilon.exp();
    let q = 0.5 * (-epsilon).exp();
    Ok(WeakAsymParams {
        epsilon,
        p,
        q,
        lambda: -epsilon,
        nu: 0.5 * epsilon.exp() * (-epsilon).exp_m1().powi(2),
        mu: (-epsilon).exp(),
        diffusion: 0.5,
    })
}

impl WeakAsymParams {
    /// Parameters for arbitrary rates 0 < q ≤ p, with ε = ½ log(p/q).
    pub fn from_rates(p: f64, q: f64) -> Result<Self> {
        if !(q > 0.0 && p >= q) {
            return Err(Error::InvalidArgument(format!("rates p={p}, q={q} need 0 < q <= p")));
        }
        let d = (p * q).sqrt();
        Ok(WeakAsymParams {
            epsilon: 0.5 * (p / q).ln(),
            p,
            q,
            lambda: 0.5 * (q / p).ln(),
            nu: (p.sqrt() - q.sqrt()).powi(2),
            mu: (q / p).sqrt(),
            diffusion: d,
        })
    }

    /// The symmetric limit p = q = ½.
    pub fn symmetric() -> Self {
        Self::from_rates(0.5, 0.5).expect("valid rates")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_point_one() {
        let w = weak_asym_params(0.1).unwrap();
        // oracle: the defining expressions evaluated directly
        let (p, q) = (0.5 * 0.1f64.exp(), 0.5 * (-0.1f64).exp());
        assert!((w.p - p).abs() < 1e-15 && (w.q - q).abs() < 1e-15);
        assert!((w.nu - (p + q - 2.0 * (p * q).sqrt())).abs() < 1e-15);
        assert!((w.lambda - 0.5 * (q / p).ln()).abs() < 1e-15);
        assert!((w.mu - (q / p).sqrt()).abs() < 1e-15);
        assert!((w.diffusion - (p * q).sqrt()).abs() < 1e-15);
        assert!((w.p - 0.5525855).abs() < 1e-7);
        assert!((w.q - 0.4524187).abs() < 1e-7);
        assert!((w.mu - 0.9048374).abs() < 1e-7);
        assert!((w.nu - 0.0050042).abs() < 1e-7);
        assert_eq!(w.diffusion, 0.5);
    }

    #[test]
    fn nu_closed_form() {
        for eps in [0.01, 0.2, 0.5, 0.9] {
            let w = weak_asym_params(eps).unwrap();
            let alt = 0.5 * eps.exp() * ((-eps).exp() - 1.0).powi(2);
            assert!((w.nu - alt).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_limit() {
        let s = WeakAsymParams::symmetric();
        assert_eq!((s.p, s.q, s.lambda, s.nu, s.mu, s.diffusion), (0.5, 0.5, 0.0, 0.0, 1.0, 0.5));
        let w = weak_asym_params(1e-9).unwrap();
        assert!((w.p - 0.5).abs() < 1e-8 && w.nu < 1e-17);
    }

    #[test]
    fn range_guard() {
        assert!(weak_asym_params(0.0).is_err());
        assert!(weak_asym_params(1.0).is_err());
        assert!(weak_asym_params(f64::NAN).is_err());
    }
}
