//! Transition probabilities p_t(x) = e^{−t}I_x(t) of the rate-one simple
//! random walk on ℤ.

use std::f64::consts::PI;

use super::quad::{gauss_legendre, uniform_breaks};
use super::special::CompensatedSum;
use crate::error::{Error, Result};

const RESCALE_AT: f64 = 1e250;

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidTime(t));
    }
    Ok(())
}

/// Index beyond which p_t(n) is negligible relative to the bulk.
pub fn negligible_index(t: f64) -> usize {
    (12.0 * t.sqrt()).ceil() as usize + 40
}

/// p_t(0), …, p_t(n_max) by backward (Miller) recurrence
/// I_{n−1} = I_{n+1} + (2n/t)I_n, normalized through e^{−t}(I₀ + 2ΣI_n) = 1.
pub fn fullline_table(t: f64, n_max: usize) -> Result<Vec<f64>> {
    check_time(t)?;
    let mut out = vec![0.0; n_max + 1];
    if t == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    let start = n_max + negligible_index(t);
    let mut above = 0.0f64;
    let mut cur = 1e-280f64;
    // Values for n > n_max only contribute to the normalization.
    let mut tail = CompensatedSum::new();
    let mut body = vec![0.0; n_max + 1];
    for n in (1..=start).rev() {
        let below = above + (2.0 * n as f64 / t) * cur;
        if n <= n_max {
            body[n] = cur;
        } else {
            tail.add(cur);
        }
        above = cur;
        cur = below;
        if cur.abs() > RESCALE_AT {
            let f = 1.0 / RESCALE_AT;
            cur *= f;
            above *= f;
            let rescaled = tail.value() * f;
            tail = CompensatedSum::new();
            tail.add(rescaled);
            for b in body.iter_mut().skip(n) {
                *b *= f;
            }
        }
    }
    body[0] = cur;
    let mut norm = CompensatedSum::new();
    norm.add(body[0]);
    for v in body.iter().skip(1) {
        norm.add(2.0 * v);
    }
    norm.add(2.0 * tail.value());
    let z = norm.value();
    for (o, b) in out.iter_mut().zip(&body) {
        *o = b / z;
    }
    Ok(out)
}

/// p_t(x) by the Bessel route.
pub fn fullline_bessel(t: f64, x: i64) -> Result<f64> {
    let n = x.unsigned_abs() as usize;
    Ok(fullline_table(t, n)?[n])
}

/// p_t(x) = (1/π)∫₀^π e^{t(cos θ − 1)}cos(xθ)dθ on Gauss–Legendre panels.
pub fn fullline_integral(t: f64, x: i64) -> Result<f64> {
    check_time(t)?;
    let theta_max = if t > 375.0 { (1.0 - 750.0 / t).acos() } else { PI };
    let freq = x.unsigned_abs() as f64;
    let panels = ((freq * theta_max / PI).ceil() as usize + (t.sqrt() * theta_max).ceil() as usize + 4).max(4);
    let rule = gauss_legendre(24);
    let mut acc = CompensatedSum::new();
    for w in uniform_breaks(0.0, theta_max, panels).windows(2) {
        for (th, wt) in rule.mapped(w[0], w[1]) {
            acc.add(wt * (t * (th.cos() - 1.0)).exp() * (freq * th).cos());
        }
    }
    Ok(acc.value() / PI)
}

/// p_t(x); the Bessel route with the integral route as a fallback when the
/// recurrence underflows.
pub fn fullline_kernel(t: f64, x: i64) -> Result<f64> {
    let v = fullline_bessel(t, x)?;
    if v.is_finite() {
        Ok(v)
    } else {
        fullline_integral(t, x)
    }
}
