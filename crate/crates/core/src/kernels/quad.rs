use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussLegendre;

use super::special::CompensatedSum;
use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [−1, 1].
#[derive(Clone, Debug)]
pub struct GlRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GlRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }

    /// Mapped (node, weight) pairs on [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, w * half))
    }
}

/// Cached Gauss–Legendre rule of the given order.
pub fn gauss_legendre(order: usize) -> Arc<GlRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GlRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(order)
        .or_insert_with(|| {
            let n = NonZeroUsize::new(order.max(1)).expect("nonzero order");
            let rule = GaussLegendre::new(n);
            let (nodes, weights) = rule.as_node_weight_pairs().iter().copied().unzip();
            Arc::new(GlRule { nodes, weights })
        })
        .clone()
}

/// Sum of fixed-order rules over consecutive panels [b₀,b₁], [b₁,b₂], ….
pub fn integrate_panels<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], order: usize) -> f64 {
    let rule = gauss_legendre(order);
    let mut acc = CompensatedSum::new();
    for w in breaks.windows(2) {
        acc.add(rule.integrate(w[0], w[1], &mut f));
    }
    acc.value()
}

/// Breakpoints 0, h, 2h, 4h, … up to b (the first panel is [0, h]).
pub fn geometric_breaks(h: f64, b: f64) -> Vec<f64> {
    let mut v = vec![0.0];
    let mut x = h.min(b);
    while x < b {
        v.push(x);
        x *= 2.0;
    }
    v.push(b);
    v
}

/// Breakpoints splitting [a, b] into `n` equal panels.
pub fn uniform_breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
}

const ADAPTIVE_ORDER: usize = 15;
const MAX_DEPTH: u32 = 48;

/// Adaptive bisection with a 15-point rule; a panel is accepted when the
/// whole-panel and two-half estimates agree to within its share of the
/// tolerance.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let rule = gauss_legendre(ADAPTIVE_ORDER);
    let whole = rule.integrate(a, b, &f);
    let mut acc = CompensatedSum::new();
    let mut stack = vec![(a, b, whole, 0u32)];
    let scale = whole.abs();
    let width = (b - a).abs();
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, &f);
        let right = rule.integrate(mid, hi, &f);
        let refined = left + right;
        let share = (hi - lo).abs() / width;
        let tol = (abs_tol.max(rel_tol * scale.max(refined.abs()))) * share;
        let floor = 1e-15 * scale;
        if (refined - est).abs() <= tol.max(floor) || (hi - lo).abs() < 1e-15 * width {
            acc.add(refined);
        } else if depth >= MAX_DEPTH {
            return Err(Error::Quadrature(format!(
                "adaptive rule on [{a}, {b}] stalled at depth {depth} near {mid}"
            )));
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Ok(acc.value())
}
