//! Monte Carlo summaries and the distributional tests used by the
//! experiments.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::kernels::special::CompensatedSum;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct McMeta {
    pub experiment: String,
    pub epsilon: Option<f64>,
    pub t: f64,
    pub u: f64,
}

/// A Monte Carlo estimate with standard error sample-std/√n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub estimate: f64,
    pub stderr: f64,
    pub n: usize,
    pub seeds: Range<u64>,
    pub meta: McMeta,
}

impl McResult {
    pub fn from_samples(samples: &[f64], seeds: Range<u64>, meta: McMeta) -> Result<Self> {
        let acc = Accumulator::from_slice(samples);
        if acc.n < 2 {
            return Err(Error::DegenerateEnsemble(format!("{} samples", acc.n)));
        }
        Ok(Self { estimate: acc.mean(), stderr: acc.stderr(), n: acc.n, seeds, meta })
    }

    /// (estimate − target)/stderr; infinite when stderr vanishes and the
    /// estimate misses the target.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = self.estimate - target;
        if self.stderr > 0.0 {
            d / self.stderr
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY * d.signum()
        }
    }

    pub fn within(&self, target: f64, k: f64) -> bool {
        self.z_score(target).abs() <= k
    }
}

/// Sum and sum of squares; merging is associative.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Accumulator {
    pub n: usize,
    sum: f64,
    sum_sq: f64,
    shift: f64,
}

impl Accumulator {
    /// Samples are shifted by the first value to limit cancellation in the
    /// variance.
    pub fn from_slice(xs: &[f64]) -> Self {
        let shift = xs.first().copied().unwrap_or(0.0);
        let mut s = CompensatedSum::new();
        let mut q = CompensatedSum::new();
        for &x in xs {
            let d = x - shift;
            s.add(d);
            q.add(d * d);
        }
        Self { n: xs.len(), sum: s.value(), sum_sq: q.value(), shift }
    }

    pub fn mean(&self) -> f64 {
        self.shift + self.sum / self.n as f64
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn stderr(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

/// Sample covariance of paired samples.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return 0.0;
    }
    let mx = Accumulator::from_slice(&xs[..n]).mean();
    let my = Accumulator::from_slice(&ys[..n]).mean();
    let s: CompensatedSum = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    s.value() / (n as f64 - 1.0)
}

/// Pearson chi-square test that two count vectors come from one law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Bins where both counts are below `min_expected` are pooled into one.
pub fn chi_square_two_sample(a: &[u64], b: &[u64], min_expected: f64) -> Result<ChiSquareTest> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument("count vectors differ in length".into()));
    }
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return Err(Error::DegenerateEnsemble("empty sample".into()));
    }
    let (na, nb) = (na as f64, nb as f64);
    let total = na + nb;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x as f64, y as f64);
        let row = x + y;
        if row * na.min(nb) / total < min_expected {
            pooled.0 += x;
            pooled.1 += y;
        } else {
            bins.push((x, y));
        }
    }
    if pooled.0 + pooled.1 > 0.0 {
        bins.push(pooled);
    }
    let mut stat = 0.0;
    for (x, y) in &bins {
        let row = x + y;
        let ea = row * na / total;
        let eb = row * nb / total;
        stat += (x - ea).powi(2) / ea + (y - eb).powi(2) / eb;
    }
    let dof = bins.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?.sf(stat)
    };
    Ok(ChiSquareTest { statistic: stat, dof, p_value })
}

/// Kolmogorov–Smirnov test of samples against a continuous CDF, with the
/// asymptotic p-value Q(√n·D).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsTest> {
    if samples.is_empty() {
        return Err(Error::DegenerateEnsemble("no samples".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    Ok(KsTest { statistic: d, p_value: kolmogorov_q(lambda) })
}

fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}
