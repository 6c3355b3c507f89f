//! Height function, discrete Hopf-Cole field and its rescalings.

mod replay;
mod testfn;

pub use replay::{
    martingale_residual, test_function_martingale, HeightReplay, MartingaleDiag, NDecomposition, Step, ZChange,
};
pub use testfn::{corrected_test_function, CorrectedTestFn, TestFn, BUMP};

use crate::config::HalfLineConfig;
use crate::dynamics::WeakAsymParams;
use crate::error::{Error, Result};

/// h(0) = −2·injections and h(x+1) − h(x) = 2σ(x+1) − 1, stored on 0..=N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightField {
    pub h0: i64,
    pub values: Vec<i64>,
}

pub fn height_field(cfg: &HalfLineConfig) -> HeightField {
    let h0 = -2 * cfg.injections() as i64;
    let mut values = Vec::with_capacity(cfg.n_trunc() + 1);
    values.push(h0);
    let mut h = h0;
    for &s in cfg.occ() {
        h += 2 * s as i64 - 1;
        values.push(h);
    }
    HeightField { h0, values }
}

/// Z_t(x) = exp(−λh_t(x) + νt) on 0..=N together with Z_t(−1) = μZ_t(0).
#[derive(Clone, Debug, PartialEq)]
pub struct HopfColeField {
    pub t_micro: f64,
    pub values: Vec<f64>,
    pub boundary: f64,
    pub params: WeakAsymParams,
}

pub fn hopf_cole(h: &HeightField, t_micro: f64, params: &WeakAsymParams) -> HopfColeField {
    let values: Vec<f64> = h.values.iter().map(|&v| (-params.lambda * v as f64 + params.nu * t_micro).exp()).collect();
    HopfColeField { t_micro, boundary: params.mu * values[0], values, params: *params }
}

impl HopfColeField {
    /// Z(x) for x ≥ −1.
    pub fn at(&self, x: i64) -> Result<f64> {
        match x {
            -1 => Ok(self.boundary),
            x if x >= 0 && (x as usize) < self.values.len() => Ok(self.values[x as usize]),
            _ => Err(Error::SiteOutOfRange(x)),
        }
    }

    pub fn grad_plus(&self, x: i64) -> Result<f64> {
        Ok(self.at(x + 1)? - self.at(x)?)
    }

    pub fn grad_minus(&self, x: i64) -> Result<f64> {
        Ok(self.at(x - 1)? - self.at(x)?)
    }
}

/// Δ^μZ(x): the plain Laplacian for x > 0, Z(1) + μZ(0) − 2Z(0) at x = 0.
pub fn laplacian_mu(z: &HopfColeField, x: i64) -> Result<f64> {
    if x < 0 || x as usize + 1 >= z.values.len() {
        return Err(Error::SiteOutOfRange(x));
    }
    let v = &z.values;
    let x = x as usize;
    Ok(if x == 0 {
        v[1] + z.params.mu * v[0] - 2.0 * v[0]
    } else {
        v[x + 1] + v[x - 1] - 2.0 * v[x]
    })
}

/// Exact d[M(x)]/dt.
pub fn qv_rate_exact(cfg: &HalfLineConfig, z: &HopfColeField, x: usize) -> Result<f64> {
    let zx = z.at(x as i64)?;
    let (p, q) = (z.params.p, z.params.q);
    let d2 = (p - q) * (p - q);
    Ok(if x == 0 {
        zx * zx * (1 - cfg.sigma(1)) as f64 * d2 / p
    } else {
        let (a, b) = (cfg.sigma(x) as f64, cfg.sigma(x + 1) as f64);
        zx * zx * (a * (1.0 - b) * d2 / p + b * (1.0 - a) * d2 / q)
    })
}

/// The two displayed terms of the small-ε expansion of d[M(x)]/dt.
pub fn qv_weak_asym_expansion(z: &HopfColeField, x: i64) -> Result<(f64, f64)> {
    let eps = z.params.epsilon;
    let zx = z.at(x)?;
    let leading = eps * eps * zx * zx;
    let grad = if x == 0 {
        -eps * zx * z.grad_plus(0)?
    } else {
        z.grad_plus(x)? * z.grad_minus(x)?
    };
    Ok((leading, grad))
}

/// Prefactor of a rescaled view.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    /// ε⁻²·Z, for the empty initial condition.
    ZetaEmpty,
    /// Z itself, for near-equilibrium data.
    ZetaNearEq,
}

impl Scale {
    pub fn prefactor(self, epsilon: f64) -> f64 {
        match self {
            Scale::ZetaEmpty => epsilon.powi(-2),
            Scale::ZetaNearEq => 1.0,
        }
    }
}

/// Samples of prefactor·Z_{ε⁻⁴t}(k) at u = ε²k, linearly interpolated.
#[derive(Clone, Debug, PartialEq)]
pub struct RescaledField {
    pub t_macro: f64,
    pub epsilon: f64,
    pub scale: Scale,
    pub samples: Vec<f64>,
}

pub fn rescale(z: &HopfColeField, epsilon: f64, t_macro: f64, scale: Scale) -> Result<RescaledField> {
    let expect = t_macro * epsilon.powi(-4);
    if (expect - z.t_micro).abs() > 1e-9 * expect.max(1.0) {
        return Err(Error::TimeMismatch(format!(
            "field at t={} but ε⁻⁴·{t_macro} = {expect}",
            z.t_micro
        )));
    }
    let c = scale.prefactor(epsilon);
    Ok(RescaledField { t_macro, epsilon, scale, samples: z.values.iter().map(|v| c * v).collect() })
}

impl RescaledField {
    pub fn grid_point(&self, k: usize) -> f64 {
        self.epsilon * self.epsilon * k as f64
    }

    /// Piecewise-linear evaluation; errors beyond the stored grid.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if u < 0.0 || !u.is_finite() {
            return Err(Error::InvalidArgument(format!("u = {u}")));
        }
        let s = u / (self.epsilon * self.epsilon);
        let k = s.floor() as usize;
        if k + 1 >= self.samples.len() {
            if k + 1 == self.samples.len() && s == k as f64 {
                return Ok(self.samples[k]);
            }
            return Err(Error::SiteOutOfRange(k as i64));
        }
        let f = s - k as f64;
        Ok(self.samples[k] * (1.0 - f) + self.samples[k + 1] * f)
    }
}

/// (field, φ)_ε = ε²Σ_x φ(ε²x)·field(x).
pub fn pairing_eps(field: &[f64], phi: impl Fn(f64) -> f64, epsilon: f64) -> f64 {
    let e2 = epsilon * epsilon;
    e2 * field.iter().enumerate().map(|(x, v)| phi(e2 * x as f64) * v).sum::<f64>()
}

/// Residuals of νZ + ℒZ − DΔZ over the local occupation patterns.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    /// max |νZ + ℒZ − DΔZ| / Z over the 8 patterns of (σ(x−1), σ(x), σ(x+1)).
    pub interior_max_rel: f64,
    /// Z(−1)/Z(0) forced by the boundary equation when σ(1) = 1.
    pub boundary_ratio_occupied: f64,
    /// Z(−1)/Z(0) forced by the boundary equation when σ(1) = 0.
    pub boundary_ratio_empty: f64,
    pub mu: f64,
}

impl IdentityReport {
    pub fn boundary_max_rel(&self) -> f64 {
        let a = (self.boundary_ratio_occupied - self.mu).abs() / self.mu;
        let b = (self.boundary_ratio_empty - self.mu).abs() / self.mu;
        a.max(b)
    }
}

/// Evaluate the generator on Z directly from jump rates, for every local
/// pattern, without using the closed forms for λ, ν.
pub fn hopf_cole_identity(params: &WeakAsymParams) -> IdentityReport {
    let (p, q, lam, nu, d) = (params.p, params.q, params.lambda, params.nu, params.diffusion);
    let z = |h: i64| (-lam * h as f64).exp();
    let mut worst: f64 = 0.0;
    for bits in 0..8u8 {
        let s = [(bits >> 2) & 1, (bits >> 1) & 1, bits & 1];
        // heights at x−2, x−1, x, x+1 with h(x−2) = 0
        let mut h = [0i64; 4];
        for k in 0..3 {
            h[k + 1] = h[k] + 2 * s[k] as i64 - 1;
        }
        let (zm, z0, zp) = (z(h[1]), z(h[2]), z(h[3]));
        let mut gen = 0.0;
        if s[1] == 1 && s[2] == 0 {
            gen += p * (z(h[2] - 2) - z0);
        }
        if s[1] == 0 && s[2] == 1 {
            gen += q * (z(h[2] + 2) - z0);
        }
        let resid = nu * z0 + gen - d * (zp + zm - 2.0 * z0);
        worst = worst.max(resid.abs() / z0);
    }
    // at x = 0: injection at rate p when σ(1) = 0, h(0) → h(0) − 2
    let solve = |occupied: bool| {
        let z1 = if occupied { (lam).exp().recip() } else { lam.exp() };
        let gen = if occupied { 0.0 } else { p * ((2.0 * lam).exp() - 1.0) };
        (nu + gen) / d - z1 + 2.0
    };
    IdentityReport {
        interior_max_rel: worst,
        boundary_ratio_occupied: solve(true),
        boundary_ratio_empty: solve(false),
        mu: params.mu,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::weak_asym_params;

    #[test]
    fn empty_height_and_field() {
        let w = weak_asym_params(0.1).unwrap();
        let h = height_field(&HalfLineConfig::empty(10));
        assert_eq!(h.values, (0..=10).map(|x| -x).collect::<Vec<i64>>());
        let z = hopf_cole(&h, 0.0, &w);
        for (x, v) in z.values.iter().enumerate() {
            assert!((v - w.mu.powi(x as i32)).abs() < 1e-14);
        }
        assert_eq!(z.boundary, w.mu * z.values[0]);
    }

    #[test]
    fn one_injected_particle_at_three() {
        let cfg = HalfLineConfig::from_sites(6, &[3]).unwrap().with_injections(1);
        let h = height_field(&cfg);
        assert_eq!(h.values, vec![-2, -3, -4, -3, -4, -5, -6]);
        let w = weak_asym_params(0.1).unwrap();
        let z = hopf_cole(&h, 0.0, &w);
        let z2 = hopf_cole(&HeightField { h0: 0, values: vec![0, -1, -2] }, 0.0, &w);
        assert!((z2.values[2] - (-0.2f64).exp()).abs() < 1e-15);
        assert!((z.values[0] - (-0.2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn packed_height() {
        let cfg = HalfLineConfig::parse("11111").unwrap().with_injections(5);
        assert_eq!(height_field(&cfg).values, vec![-10, -9, -8, -7, -6, -5]);
    }

    #[test]
    fn laplacian_of_geometric_field() {
        let w = weak_asym_params(0.1).unwrap();
        let z = hopf_cole(&height_field(&HalfLineConfig::empty(8)), 0.0, &w);
        let mu = w.mu;
        for x in 1..6 {
            let expect = mu.powi(x as i32) * (mu + 1.0 / mu - 2.0);
            assert!((laplacian_mu(&z, x).unwrap() - expect).abs() < 1e-15);
            assert!((expect - 2.0 * w.nu * z.values[x as usize]).abs() < 1e-15);
        }
        assert!((laplacian_mu(&z, 0).unwrap() - (-0.190325)).abs() < 1e-6);
        assert!(laplacian_mu(&z, 8).is_err());
    }

    #[test]
    fn identity_holds_to_round_off() {
        for eps in [0.05, 0.1, 0.5, 0.9] {
            let r = hopf_cole_identity(&weak_asym_params(eps).unwrap());
            assert!(r.interior_max_rel < 1e-13, "{r:?}");
            assert!(r.boundary_max_rel() < 1e-12, "{r:?}");
        }
        let r = hopf_cole_identity(&WeakAsymParams::from_rates(0.9, 0.1).unwrap());
        assert!(r.interior_max_rel < 1e-13 && r.boundary_max_rel() < 1e-12);
    }

    #[test]
    fn rescale_and_interpolate() {
        let eps = 0.5;
        let w = weak_asym_params(eps).unwrap();
        let t_macro = 0.125;
        let z = hopf_cole(&height_field(&HalfLineConfig::empty(20)), t_macro / eps.powi(4), &w);
        assert!(rescale(&z, eps, 0.2, Scale::ZetaEmpty).is_err());
        let s = rescale(&z, eps, t_macro, Scale::ZetaNearEq).unwrap();
        let e = rescale(&z, eps, t_macro, Scale::ZetaEmpty).unwrap();
        for k in 0..20 {
            assert_eq!(e.samples[k], s.samples[k] * 4.0);
        }
        let mid = s.eval(0.25 * 1.5).unwrap();
        assert!((mid - 0.5 * (s.samples[1] + s.samples[2])).abs() < 1e-14);
        assert_eq!(s.eval(0.5).unwrap(), s.samples[2]);
    }

    #[test]
    fn ratio_identity_on_random_config() {
        let w = weak_asym_params(0.3).unwrap();
        let cfg = HalfLineConfig::parse("0110100111").unwrap().with_injections(4);
        let z = hopf_cole(&height_field(&cfg), 2.5, &w);
        for x in 0..10 {
            let r = z.values[x + 1] / z.values[x];
            let expect = if cfg.sigma(x + 1) == 1 { (w.p / w.q).sqrt() } else { (w.q / w.p).sqrt() };
            assert!((r - expect).abs() < 1e-14);
        }
    }
}
