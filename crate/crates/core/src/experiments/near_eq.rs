//! Half-line process from product Bernoulli(ρ) data, ρ = (1 − ε(B + ½))/2.

use rand::RngExt;

use super::common::{fmt_key, replicate, site_of, snapshot_at, stream_id, z_at, half_line};
use super::config::{near_eq_fill, ExperimentConfig};
use super::report::{Cell, Check, Plot, Report, Series, Table, Tag};
use crate::config::{certified_trunc, HalfLineConfig, LatticeConfig};
use crate::dynamics::{simulate_replica, weak_asym_params, Record};
use crate::error::{Error, Result};
use crate::kernels::{negligible_index, RobinTable, DEFAULT_SERIES_TOL, FIT_MARGIN};
use crate::rng;
use crate::she::{solve_mild, IcKind, NoiseGrid, SheGrid};
use crate::stats::{Accumulator, McMeta, McResult};

const IC_SALT: u64 = 0x5eed_b0b0_0000_0000;
const MOMENT_STEP: f64 = 0.25;

pub fn bernoulli_density(epsilon: f64, b: f64) -> f64 {
    (1.0 - epsilon * (b + 0.5)) / 2.0
}

/// E[Z₀(x)] and E[Z₀(x)²] for Bernoulli(ρ) on 1..=n_fill and empty beyond.
struct InitialMoments {
    beta: f64,
    gamma: f64,
    mu: f64,
    n_fill: usize,
}

impl InitialMoments {
    fn new(epsilon: f64, rho: f64, n_fill: usize) -> Self {
        let (e, e2) = (epsilon.exp(), (2.0 * epsilon).exp());
        Self { beta: rho * e + (1.0 - rho) / e, gamma: rho * e2 + (1.0 - rho) / e2, mu: (-epsilon).exp(), n_fill }
    }

    fn mean(&self, y: usize) -> f64 {
        let k = y.min(self.n_fill);
        self.beta.powi(k as i32) * self.mu.powi((y - k) as i32)
    }

    /// E[(Z₀(x′) − Z₀(x))²] for x ≤ x′ ≤ n_fill.
    fn increment_sq(&self, x: usize, xp: usize) -> f64 {
        let g = |k: usize| self.gamma.powi(k as i32);
        g(xp) - 2.0 * g(x) * self.beta.powi((xp - x) as i32) + g(x)
    }
}

fn fit_exponential(us: &[f64], norms: &[f64]) -> (f64, f64) {
    let n = us.len() as f64;
    let logs: Vec<f64> = norms.iter().map(|v| v.max(1e-300).ln()).collect();
    let mu = us.iter().sum::<f64>() / n;
    let ml = logs.iter().sum::<f64>() / n;
    let sxx: f64 = us.iter().map(|u| (u - mu).powi(2)).sum();
    let sxy: f64 = us.iter().zip(&logs).map(|(u, l)| (u - mu) * (l - ml)).sum();
    let a = if sxx > 0.0 { (sxy / sxx).max(0.0) } else { 0.0 };
    let c = us.iter().zip(norms).map(|(u, v)| v * (-a * u).exp()).fold(0.0, f64::max);
    (a, c)
}

pub fn run_near_equilibrium(cfg: &ExperimentConfig, b: f64) -> Result<Report> {
    cfg.validate()?;
    let o = &cfg.near_eq;
    let k = cfg.ci_multiplier;
    let mut report = Report::new("near-eq");
    for &eps in &cfg.epsilon {
        let rho = bernoulli_density(eps, b);
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidDensity(rho));
        }
    }
    let halves: Vec<f64> = cfg.epsilon.iter().map(|&e| bernoulli_density(e, -0.5)).collect();
    report.checks.push(Check::new("rho-half-at-B=-1/2", 0.5, halves.first().copied().unwrap_or(0.5), 0.0, halves.iter().all(|&r| r == 0.5)));

    let u_top = cfg.u.iter().cloned().fold(0.0, f64::max);
    let gap_top = o.holder_gaps.iter().cloned().fold(0.0, f64::max);
    let n_grid = ((u_top + gap_top) / MOMENT_STEP).floor() as usize;
    let grid_u: Vec<f64> = (0..=n_grid).map(|i| i as f64 * MOMENT_STEP).collect();

    let mut moments = Table::new(
        "moment_shape",
        &[
            ("epsilon", Tag::Param),
            ("time", Tag::Param),
            ("u", Tag::Param),
            ("fine", Tag::Param),
            ("mc_l2_norm", Tag::Mc),
            ("mc_stderr", Tag::Mc),
            ("exact_l2_norm", Tag::Exact),
            ("envelope", Tag::Verdict),
        ],
    );
    let mut holder = Table::new(
        "holder",
        &[
            ("epsilon", Tag::Param),
            ("u", Tag::Param),
            ("gap", Tag::Param),
            ("mc_increment_l2", Tag::Mc),
            ("exact_increment_l2", Tag::Exact),
            ("normalized", Tag::Mc),
        ],
    );
    let mut means = Table::new(
        "mean",
        &[
            ("epsilon", Tag::Param),
            ("t", Tag::Param),
            ("u", Tag::Param),
            ("mc_mean", Tag::Mc),
            ("mc_stderr", Tag::Mc),
            ("n", Tag::Mc),
            ("exact_discrete", Tag::Exact),
            ("continuum_mean", Tag::Formula),
            ("z_score", Tag::Verdict),
        ],
    );
    let mut symmetry = Table::new(
        "symmetry",
        &[("epsilon", Tag::Param), ("t", Tag::Param), ("x", Tag::Param), ("mc_z_over_u", Tag::Mc), ("mc_stderr", Tag::Mc)],
    );
    let mut holder_consts = Vec::new();
    let mut mean_series = Vec::new();

    for (blk, &eps) in cfg.epsilon.iter().enumerate() {
        let w = weak_asym_params(eps)?;
        let rho = bernoulli_density(eps, b);
        let n_fill = near_eq_fill(cfg, eps);
        let im = InitialMoments::new(eps, rho, n_fill);
        let micro: Vec<f64> = cfg.t_macro.iter().map(|t| t / eps.powi(4)).collect();
        let t_top = micro.iter().cloned().fold(0.0, f64::max);
        let n_trunc = certified_trunc(n_fill, t_top);
        let grid_x: Vec<usize> = grid_u.iter().map(|&u| site_of(u, eps)).collect();
        let pairs: Vec<(f64, f64, usize, usize)> = cfg
            .u
            .iter()
            .flat_map(|&u| o.holder_gaps.iter().map(move |&g| (u, g)))
            .map(|(u, g)| (u, g, site_of(u, eps), site_of(u + g, eps)))
            .collect();
        let mean_x: Vec<usize> = cfg.u.iter().map(|&u| site_of(u, eps)).collect();
        let sym_x: Vec<usize> = (1..=4).collect();
        let record = Record::Snapshots(micro.clone());
        // row: Z₀ on grid | increments | per time: Z_t on grid, Z_t at u, Z_t(x)/(ε²x)
        let rows = replicate(cfg.replicas, |i| {
            let id = stream_id(blk as u64, i);
            let mut r = rng::stream(cfg.seed ^ IC_SALT, id);
            let mut occ: Vec<u8> = (0..n_fill).map(|_| (r.random::<f64>() < rho) as u8).collect();
            occ.resize(n_trunc, 0);
            let init = HalfLineConfig::from_occ(occ, 0)?;
            let mut row: Vec<f64> = grid_x.iter().map(|&x| z_at(&init, x, 0.0, &w)).collect();
            row.extend(pairs.iter().map(|&(_, _, x, xp)| z_at(&init, xp, 0.0, &w) - z_at(&init, x, 0.0, &w)));
            let tr = simulate_replica(&LatticeConfig::HalfLine(init), &w, t_top, cfg.seed, id, &record)?;
            for &tm in &micro {
                let c = half_line(snapshot_at(&tr, tm)?)?;
                row.extend(grid_x.iter().map(|&x| z_at(c, x, tm, &w)));
                row.extend(mean_x.iter().map(|&x| z_at(c, x, tm, &w)));
                row.extend(sym_x.iter().map(|&x| z_at(c, x, tm, &w) / (eps * eps * x as f64)));
            }
            Ok(row)
        })?;
        let col = |j: usize| -> Vec<f64> { rows.iter().map(|r| r[j]).collect() };
        let l2 = |j: usize| -> (f64, f64) {
            let sq: Vec<f64> = col(j).iter().map(|v| v * v).collect();
            let a = Accumulator::from_slice(&sq);
            let m = a.mean().sqrt();
            (m, a.stderr() / (2.0 * m.max(1e-300)))
        };

        // moment envelopes at time 0 and at each t
        let per_t = grid_x.len() + mean_x.len() + sym_x.len();
        let base_t = grid_x.len() + pairs.len();
        let mut a0 = 0.0;
        for (ti, label) in std::iter::once((None, 0.0)).chain(cfg.t_macro.iter().enumerate().map(|(i, &t)| (Some(i), t))) {
            let off = match ti {
                None => 0,
                Some(i) => base_t + i * per_t,
            };
            let norms: Vec<(f64, f64)> = (0..grid_x.len()).map(|j| l2(off + j)).collect();
            let coarse: Vec<usize> = (0..grid_x.len()).step_by(2).collect();
            let (a, c) = fit_exponential(
                &coarse.iter().map(|&j| grid_u[j]).collect::<Vec<_>>(),
                &coarse.iter().map(|&j| norms[j].0).collect::<Vec<_>>(),
            );
            if ti.is_none() {
                a0 = a;
            }
            let mut ok = true;
            let mut worst = (0.0f64, 0.0f64);
            for j in 0..grid_x.len() {
                let env = FIT_MARGIN * c * (a * grid_u[j]).exp();
                let fine = j % 2 == 1;
                if fine {
                    ok &= norms[j].0 <= env + k * norms[j].1;
                    if norms[j].0 / env > worst.0 {
                        worst = (norms[j].0 / env, norms[j].1 / env);
                    }
                }
                let exact = if ti.is_none() { im.gamma.powi(grid_x[j] as i32).sqrt().into() } else { Cell::from("") };
                moments.push(vec![eps.into(), label.into(), grid_u[j].into(), fine.into(), norms[j].0.into(), norms[j].1.into(), exact, env.into()]);
            }
            let which = if ti.is_none() { "Z0".to_string() } else { format!("Zt[t={label}]") };
            report.checks.push(Check::new(format!("moment-envelope-{which}[eps={eps}]"), 1.0, worst.0, worst.1, ok));
        }

        // Hölder increments at time 0, with the exponent a of the moment fit
        let mut c_eps: f64 = 0.0;
        for (pi, &(u, g, x, xp)) in pairs.iter().enumerate() {
            let (d, _) = l2(grid_x.len() + pi);
            let exact = im.increment_sq(x, xp).max(0.0).sqrt();
            let norm = d / (g.powf(o.holder_alpha) * (a0 * (2.0 * u + g)).exp());
            c_eps = c_eps.max(norm);
            holder.push(vec![eps.into(), u.into(), g.into(), d.into(), exact.into(), norm.into()]);
        }
        holder_consts.push((eps, c_eps));

        // mean against the exact discrete evolution and the continuum mean
        let mut pts = Vec::new();
        for (ti, &t) in cfg.t_macro.iter().enumerate() {
            let tm = micro[ti];
            let off = base_t + ti * per_t + grid_x.len();
            let x_top = mean_x.iter().copied().max().unwrap_or(0);
            let tab = RobinTable::new(w.mu, tm, x_top + negligible_index(tm), DEFAULT_SERIES_TOL)?;
            let sg = SheGrid::for_target(1e-4, 0.01, t, u_top)?;
            let cont = solve_mild(&IcKind::near_eq(move |u| (-b * u).exp()), &NoiseGrid::zeros(sg)?)?;
            for (j, &u) in cfg.u.iter().enumerate() {
                let x = mean_x[j];
                let exact: f64 = (0..=tab.n_max).map(|y| tab.get(x, y) * im.mean(y)).sum();
                let r = McResult::from_samples(
                    &col(off + j),
                    0..cfg.replicas as u64,
                    McMeta { experiment: "near-eq".into(), epsilon: Some(eps), t, u },
                )?;
                let cm = cont.value(t, u)?;
                means.push(vec![
                    eps.into(),
                    t.into(),
                    u.into(),
                    r.estimate.into(),
                    r.stderr.into(),
                    r.n.into(),
                    exact.into(),
                    cm.into(),
                    r.z_score(exact).into(),
                ]);
                report.checks.push(Check::within_ci(
                    format!("mean-vs-discrete[{}]", fmt_key(&[("eps", eps), ("t", t), ("u", u)])),
                    exact,
                    r.estimate,
                    r.stderr,
                    k,
                ));
                pts.push((u, r.estimate));
            }
            if o.symmetry {
                let off = base_t + ti * per_t + grid_x.len() + mean_x.len();
                for (j, &x) in sym_x.iter().enumerate() {
                    let a = Accumulator::from_slice(&col(off + j));
                    symmetry.push(vec![eps.into(), t.into(), x.into(), a.mean().into(), a.stderr().into()]);
                }
            }
        }
        mean_series.push(Series { label: format!("eps={eps}"), points: pts });
    }
    if holder_consts.len() >= 2 {
        let hi = holder_consts.iter().map(|c| c.1).fold(0.0, f64::max);
        let lo = holder_consts.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        report.checks.push(Check::at_most("holder-constant-spread", o.holder_spread, hi / lo));
    }
    let mut hc = Table::new("holder_constants", &[("epsilon", Tag::Param), ("fitted_c", Tag::Mc)]);
    for (e, c) in &holder_consts {
        hc.push(vec![(*e).into(), (*c).into()]);
    }
    report.tables.extend([moments, holder, hc, means]);
    if o.symmetry {
        report.tables.push(symmetry);
    }
    report.plots.push(Plot {
        name: "near_eq_mean".into(),
        title: "E[Z_t(u)] from Bernoulli data".into(),
        x_label: "u".into(),
        y_label: "mean".into(),
        series: mean_series,
    });
    Ok(report)
}
