//! Exact path functionals of Z along a logged half-line trajectory. Between
//! events Z(x) = e^{−λh(x)}e^{νs}, so every time integral is a sum of closed
//! form pieces over holding intervals.

use crate::config::{HalfLineConfig, LatticeConfig};
use crate::dynamics::{Trajectory, TransitionKind, WeakAsymParams};
use crate::error::{Error, Result};
use crate::hopfcole::testfn::CorrectedTestFn;

/// ∫_a^b e^{νs} ds.
fn growth_integral(nu: f64, a: f64, b: f64) -> f64 {
    if nu == 0.0 {
        b - a
    } else {
        (nu * a).exp() * (nu * (b - a)).exp_m1() / nu
    }
}

/// Height profile and the weights e^{−λh} under replay of an event log.
#[derive(Clone, Debug)]
pub struct HeightReplay {
    pub params: WeakAsymParams,
    /// σ(x) for x in 0..=N+1 (index 0 unused).
    pub sigma: Vec<u8>,
    pub h: Vec<i64>,
    /// e^{−λh(x)}.
    pub w: Vec<f64>,
    pub time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Step {
    Hold(f64),
    Jump(ZChange),
}

/// The single site whose height moved, with the weights before and after.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZChange {
    pub site: usize,
    pub old_w: f64,
    pub new_w: f64,
}

impl HeightReplay {
    pub fn new(init: &HalfLineConfig, params: &WeakAsymParams) -> Self {
        let hf = super::height_field(init);
        let mut sigma = vec![0u8; init.n_trunc() + 2];
        sigma[1..=init.n_trunc()].copy_from_slice(init.occ());
        let w = hf.values.iter().map(|&h| (-params.lambda * h as f64).exp()).collect();
        HeightReplay { params: *params, sigma, h: hf.values, w, time: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.h.len() - 1
    }

    /// Z(x) at the current time.
    pub fn z(&self, x: usize) -> f64 {
        self.w[x] * (self.params.nu * self.time).exp()
    }

    pub fn growth(&self, b: f64) -> f64 {
        growth_integral(self.params.nu, self.time, b)
    }

    pub fn apply(&mut self, kind: TransitionKind) -> Result<ZChange> {
        let n = self.n();
        let (site, dh) = match kind {
            TransitionKind::AsepInject if self.sigma[1] == 0 => {
                self.sigma[1] = 1;
                (0, -2)
            }
            TransitionKind::AsepRight(x) if x < n && self.sigma[x] == 1 && self.sigma[x + 1] == 0 => {
                self.sigma[x] = 0;
                self.sigma[x + 1] = 1;
                (x, -2)
            }
            TransitionKind::AsepLeft(x) if x < n && self.sigma[x] == 0 && self.sigma[x + 1] == 1 => {
                self.sigma[x] = 1;
                self.sigma[x + 1] = 0;
                (x, 2)
            }
            other => return Err(Error::InvalidArgument(format!("{other:?} cannot be replayed here"))),
        };
        let old_w = self.w[site];
        self.h[site] += dh;
        self.w[site] = (-self.params.lambda * self.h[site] as f64).exp();
        Ok(ZChange { site, old_w, new_w: self.w[site] })
    }

    /// Walk the log up to `t`, calling `visit(state, Step::Hold(b))` for every
    /// holding interval [state.time, b] and `visit(state, Step::Jump(change))`
    /// after each event.
    pub fn run<V>(traj: &Trajectory, params: &WeakAsymParams, t: f64, mut visit: V) -> Result<Self>
    where
        V: FnMut(&Self, Step),
    {
        let LatticeConfig::HalfLine(init) = &traj.init else {
            return Err(Error::InvalidArgument("replay needs a half-line trajectory".into()));
        };
        if t > traj.t_end || t < 0.0 {
            return Err(Error::BeyondHorizon { t, horizon: traj.t_end });
        }
        let events = traj.events.as_ref().ok_or(Error::MissingLog)?;
        let mut st = HeightReplay::new(init, params);
        for ev in events {
            if ev.time > t {
                break;
            }
            visit(&st, Step::Hold(ev.time));
            st.time = ev.time;
            let ch = st.apply(ev.kind)?;
            visit(&st, Step::Jump(ch));
        }
        visit(&st, Step::Hold(t));
        st.time = t;
        Ok(st)
    }
}

/// Martingale residual and compensator at one site.
#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleDiag {
    pub site: usize,
    pub residual: f64,
    pub qv_integral: f64,
    /// (x, y, M_t(x)·M_t(y)) for the later sites y of the request.
    pub cross: Vec<(usize, usize, f64)>,
}

/// M_t(x) = Z_t(x) − Z_0(x) − D∫Δ^μZ and ∫ d[M(x)] for each requested site.
pub fn martingale_residual(
    traj: &Trajectory,
    sites: &[usize],
    t: f64,
    params: &WeakAsymParams,
) -> Result<Vec<MartingaleDiag>> {
    let LatticeConfig::HalfLine(init) = &traj.init else {
        return Err(Error::InvalidArgument("martingale residuals need a half-line trajectory".into()));
    };
    if let Some(&x) = sites.iter().find(|&&x| x + 1 >= init.n_trunc()) {
        return Err(Error::SiteOutOfRange(x as i64));
    }
    let (p, q, mu, nu, d) = (params.p, params.q, params.mu, params.nu, params.diffusion);
    let d2 = (p - q) * (p - q);
    let start = HeightReplay::new(init, params);
    let z0: Vec<f64> = sites.iter().map(|&x| start.w[x]).collect();
    let mut drift = vec![0.0; sites.len()];
    let mut qv = vec![0.0; sites.len()];
    let end = HeightReplay::run(
        traj,
        params,
        t,
        |st, step| {
            let Step::Hold(b) = step else { return };
            if b <= st.time {
                return;
            }
            let g1 = st.growth(b);
            let g2 = growth_integral(2.0 * nu, st.time, b);
            for (k, &x) in sites.iter().enumerate() {
                let w = &st.w;
                let lap = if x == 0 { w[1] + (mu - 2.0) * w[0] } else { w[x + 1] + w[x - 1] - 2.0 * w[x] };
                drift[k] += d * lap * g1;
                let rate = if x == 0 {
                    (1 - st.sigma[1]) as f64 * d2 / p
                } else {
                    let (a, c) = (st.sigma[x] as f64, st.sigma[x + 1] as f64);
                    a * (1.0 - c) * d2 / p + c * (1.0 - a) * d2 / q
                };
                qv[k] += w[x] * w[x] * rate * g2;
            }
        },
    )?;
    let m: Vec<f64> = sites.iter().enumerate().map(|(k, &x)| end.z(x) - z0[k] - drift[k]).collect();
    Ok(sites
        .iter()
        .enumerate()
        .map(|(k, &x)| MartingaleDiag {
            site: x,
            residual: m[k],
            qv_integral: qv[k],
            cross: (k + 1..sites.len()).map(|j| (x, sites[j], m[k] * m[j])).collect(),
        })
        .collect())
}

/// N_t^ε(φ_ε) and its exact split into the limiting terms, the three error
/// terms and the drift of the ψ correction.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NDecomposition {
    pub n: f64,
    pub main: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub psi_drift: f64,
}

impl NDecomposition {
    pub fn reconstruction_error(&self) -> f64 {
        (self.main + self.r1 + self.r2 + self.r3 + self.psi_drift - self.n).abs()
    }
}

/// Test-function martingale at microscopic time `t_micro` for the field
/// κ·Z (κ = ε⁻² for the empty initial condition, 1 near equilibrium).
pub fn test_function_martingale(
    traj: &Trajectory,
    phi: &CorrectedTestFn,
    t_micro: f64,
    params: &WeakAsymParams,
    kappa: f64,
) -> Result<NDecomposition> {
    let LatticeConfig::HalfLine(init) = &traj.init else {
        return Err(Error::InvalidArgument("test-function martingale needs a half-line trajectory".into()));
    };
    let eps = phi.epsilon;
    let e2 = eps * eps;
    let mu = params.mu;
    let n = init.n_trunc();
    let ymax = ((phi.support_end() / e2).ceil() as usize + 2).min(n - 1);
    let f = |y: i64| phi.derivs(e2 * y as f64);
    // weight vectors over y in 0..=ymax
    let mut wa = Vec::new(); // φ_ε: the A functional
    let mut wb = Vec::new(); // Δφ_ε plus the boundary term: the B functional
    let mut wphi = Vec::new();
    let mut wpsi = Vec::new();
    let mut wphi2 = Vec::new();
    let mut wpsi2 = Vec::new();
    let mut wr1 = Vec::new();
    for y in 0..=ymax as i64 {
        let (v, _, v2) = f(y);
        let lap = f(y + 1).0 + f(y - 1).0 - 2.0 * v;
        wa.push(v);
        wb.push(lap + if y == 0 { mu * f(0).0 - f(-1).0 } else { 0.0 });
        wphi.push(phi.phi.value(e2 * y as f64));
        wpsi.push(phi.psi.value(e2 * y as f64));
        wphi2.push(phi.phi.derivs(e2 * y as f64).2);
        wpsi2.push(phi.psi.derivs(e2 * y as f64).2);
        wr1.push(lap - e2 * e2 * v2);
    }
    let weights = [&wa, &wb, &wphi, &wpsi, &wphi2, &wpsi2, &wr1];
    let start = HeightReplay::new(init, params);
    let dot = |wv: &[f64], st: &HeightReplay| wv.iter().zip(&st.w).map(|(a, b)| a * b).sum::<f64>();
    let mut s: Vec<f64> = weights.iter().map(|wv| dot(wv, &start)).collect();
    let s0 = s.clone();
    let z00 = start.w[0];
    let mut integ = vec![0.0; weights.len()];
    let mut int_z0 = 0.0;
    let mut cur_w0 = z00;
    let end = HeightReplay::run(
        traj,
        params,
        t_micro,
        |st, step| match step {
            Step::Hold(b) => {
                if b <= st.time {
                    return;
                }
                let g = st.growth(b);
                for (acc, sv) in integ.iter_mut().zip(&s) {
                    *acc += sv * g;
                }
                int_z0 += cur_w0 * g;
            }
            Step::Jump(ch) => {
                if ch.site <= ymax {
                    let dw = ch.new_w - ch.old_w;
                    for (sv, wv) in s.iter_mut().zip(weights.iter()) {
                        *sv += wv[ch.site] * dw;
                    }
                }
                if ch.site == 0 {
                    cur_w0 = ch.new_w;
                }
            }
        },
    )?;
    // exact resummation at the end to avoid drift of the running sums
    let growth_t = (params.nu * end.time).exp();
    let s_end: Vec<f64> = weights.iter().map(|wv| dot(wv, &end) * growth_t).collect();
    let c = kappa * e2;
    let e4 = e2 * e2;
    let nval = c * (s_end[0] - s0[0] - 0.5 * integ[1]);
    let main = c * (s_end[2] - s0[2]) - 0.5 * c * e4 * integ[4];
    let r1 = -0.5 * c * integ[6];
    let r2 = -0.5 * c * ((-eps).exp() * f(0).0 - f(-1).0) * int_z0;
    let r3 = c * eps * phi.slope * (s_end[3] - s0[3]);
    let psi_drift = -0.5 * c * e4 * eps * phi.slope * integ[5];
    Ok(NDecomposition { n: nval, main, r1, r2, r3, psi_drift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::certified_trunc;
    use crate::dynamics::{simulate_ctmc, weak_asym_params, Record};
    use crate::hopfcole::{corrected_test_function, height_field, hopf_cole, TestFn, BUMP};

    fn run(eps: f64, t: f64, seed: u64) -> (Trajectory, WeakAsymParams) {
        let w = weak_asym_params(eps).unwrap();
        let init = LatticeConfig::HalfLine(HalfLineConfig::empty(certified_trunc(0, t)));
        (simulate_ctmc(&init, &w, t, seed, &Record::FullLog).unwrap(), w)
    }

    #[test]
    fn replay_matches_recomputed_field() {
        let (tr, w) = run(0.3, 60.0, 5);
        let end = HeightReplay::run(&tr, &w, 60.0, |_, _| {}).unwrap();
        let LatticeConfig::HalfLine(term) = &tr.terminal else { unreachable!() };
        let z = hopf_cole(&height_field(term), 60.0, &w);
        for x in 0..40 {
            assert!((end.z(x) - z.values[x]).abs() <= 1e-12 * z.values[x]);
        }
    }

    #[test]
    fn zero_time_residual_is_zero() {
        let (tr, w) = run(0.3, 10.0, 1);
        for d in martingale_residual(&tr, &[0, 3, 7], 0.0, &w).unwrap() {
            assert_eq!(d.residual, 0.0);
            assert_eq!(d.qv_integral, 0.0);
        }
        assert!(matches!(martingale_residual(&tr, &[0], 11.0, &w), Err(Error::BeyondHorizon { .. })));
    }

    #[test]
    fn residual_without_events_is_deterministic_growth_gap() {
        // frozen configuration: only the ν-growth and the Laplacian contribute
        let (mut tr, w) = run(0.3, 5.0, 1);
        tr.events = Some(Vec::new());
        let d = &martingale_residual(&tr, &[4], 2.0, &w).unwrap()[0];
        let z0 = w.mu.powi(4);
        // on the empty field Δ^μZ = 2νZ at x>0, so M = z0(e^{νt}−1) − ½·2ν·z0(e^{νt}−1)/ν = 0
        assert!(d.residual.abs() < 1e-14 * z0, "{}", d.residual);
    }

    #[test]
    fn decomposition_is_exact() {
        let (tr, w) = run(0.3, 100.0, 9);
        for phi in [TestFn::HermiteDamped, TestFn::PolynomialCutoff { length: 3.0 }] {
            let c = corrected_test_function(phi, BUMP, 0.3).unwrap();
            let d = test_function_martingale(&tr, &c, 100.0, &w, 0.3f64.powi(-2)).unwrap();
            assert!(d.reconstruction_error() < 1e-10 * (1.0 + d.n.abs()), "{d:?}");
        }
    }
}
