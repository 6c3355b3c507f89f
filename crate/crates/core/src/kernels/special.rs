pub use puruspe::{erf, erfc, erfcx};

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Derivatives erfcx^{(k)}(z) for k = 0..=n.
pub fn erfcx_derivatives(z: f64, n: usize) -> Vec<f64> {
    let mut d = Vec::with_capacity(n + 1);
    d.push(erfcx(z));
    if n >= 1 {
        d.push(2.0 * z * d[0] - 2.0 / std::f64::consts::PI.sqrt());
    }
    for k in 1..n {
        let next = 2.0 * z * d[k] + 2.0 * k as f64 * d[k - 1];
        d.push(next);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_beats_naive() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn erf_reference_values() {
        assert!((erf(0.5) - 0.520_499_877_813_046_5).abs() < 1e-15);
        assert!((erfcx(3.0) - 0.179_001_151_181_389_98).abs() < 1e-15);
    }

    #[test]
    fn erfcx_derivative_matches_difference() {
        let z = -0.3;
        let d = erfcx_derivatives(z, 4);
        let h = 1e-4;
        let fd = |k: usize| (erfcx_derivatives(z + h, k)[k - 1] - erfcx_derivatives(z - h, k)[k - 1]) / (2.0 * h);
        for k in 1..=4 {
            assert!((d[k] - fd(k)).abs() < 1e-6 * d[k].abs().max(1.0), "k={k}");
        }
    }
}
