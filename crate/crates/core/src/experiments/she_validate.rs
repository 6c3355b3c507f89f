//! Validation of the mild-solution solver and the Picard layers against
//! closed forms.

use super::config::ExperimentConfig;
use super::report::{Check, Plot, Report, Series, Table, Tag};
use crate::error::Result;
use crate::kernels::{d_dirichlet_kernel, second_moment_ratio, FIT_MARGIN};
use crate::she::{
    moment_estimate, picard_layers, second_moment_centered, solve_ensemble, solve_mild, IcKind, NoiseGrid,
    PicardGrid, SheGrid, SolveOptions,
};
use crate::stats::Accumulator;

/// Sup over u ≤ 2 of the zero-noise error after restarting from dP_{t0}.
fn restart_error(t0: f64, t: f64, dt: f64, dx: f64) -> Result<f64> {
    let g = SheGrid::for_target(dt, dx, t, 2.0)?;
    let s = solve_mild(&IcKind::near_eq(move |u| d_dirichlet_kernel(t0, u).unwrap_or(0.0)), &NoiseGrid::zeros(g)?)?;
    let mut worst: f64 = 0.0;
    for k in 1..=100 {
        let u = 0.02 * k as f64;
        worst = worst.max((s.value(t, u)? - d_dirichlet_kernel(t0 + t, u)?).abs());
    }
    Ok(worst)
}

pub fn run_she_validation(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let o = &cfg.she;
    let k = cfg.ci_multiplier;
    let mut report = Report::new("she-validate");

    // deterministic heat flow
    let (dt0, dx0) = o.order_coarse;
    let e1 = restart_error(o.order_t0, o.order_t, dt0, dx0)?;
    let e2 = restart_error(o.order_t0, o.order_t, dt0 / 4.0, dx0 / 2.0)?;
    let order = (e1 / e2).ln() / 4f64.ln();
    let mut det = Table::new(
        "zero_noise_order",
        &[("dt", Tag::Param), ("dx", Tag::Param), ("sup_error", Tag::Exact), ("order_in_dt", Tag::Exact)],
    );
    det.push(vec![dt0.into(), dx0.into(), e1.into(), "".into()]);
    det.push(vec![(dt0 / 4.0).into(), (dx0 / 2.0).into(), e2.into(), order.into()]);
    report.checks.push(Check::new("zero-noise-order", o.order_min, order, 0.0, order >= o.order_min));
    let g = SheGrid::for_target(o.mean_dt, o.mean_dx, o.mean_t, o.mean_u)?;
    let zero = solve_mild(&IcKind::DeltaPrime, &NoiseGrid::zeros(g)?)?;
    let exact = d_dirichlet_kernel(o.mean_t, o.mean_u)?;
    report.checks.push(Check::at_most("zero-noise-delta-prime", 1e-12, (zero.value(o.mean_t, o.mean_u)? - exact).abs()));
    report.tables.push(det);

    // ensemble mean and the √t shape of the noise contribution
    let mut snaps = o.shape_times.clone();
    snaps.push(o.mean_t);
    let horizon = snaps.iter().cloned().fold(0.0, f64::max);
    let u_top = o.shape_u.iter().cloned().fold(o.mean_u, f64::max);
    let g = SheGrid::for_target(o.mean_dt, o.mean_dx, horizon, u_top)?;
    let opts = SolveOptions { snapshots: snaps.clone(), ..Default::default() };
    let ens = solve_ensemble(&IcKind::DeltaPrime, g, &opts, cfg.seed, cfg.replicas)?;
    let m1 = moment_estimate(&ens, o.mean_t, o.mean_u, 1)?;
    let mut mt = Table::new(
        "ensemble",
        &[("t", Tag::Param), ("u", Tag::Param), ("quantity", Tag::Param), ("mc", Tag::Mc), ("mc_stderr", Tag::Mc), ("n", Tag::Mc), ("target", Tag::Formula)],
    );
    mt.push(vec![o.mean_t.into(), o.mean_u.into(), "mean".into(), m1.estimate.into(), m1.stderr.into(), m1.n.into(), exact.into()]);
    report.checks.push(Check::within_ci(format!("ensemble-mean[t={},u={}]", o.mean_t, o.mean_u), exact, m1.estimate, m1.stderr, k));
    // ‖𝒵 − dP‖₂²/(√t·dP²): fit on the outer times, verify on the inner ones
    let mut shape = Vec::new();
    for &t in &o.shape_times {
        for &u in &o.shape_u {
            let d = d_dirichlet_kernel(t, u)?;
            let v: Vec<f64> = ens.iter().map(|s| s.value(t, u).map(|z| (z - d).powi(2))).collect::<Result<_>>()?;
            let a = Accumulator::from_slice(&v);
            let norm = t.sqrt() * d * d;
            shape.push((t, u, a.mean() / norm, a.stderr() / norm));
            mt.push(vec![t.into(), u.into(), "var_over_sqrt_t_dp2".into(), (a.mean() / norm).into(), (a.stderr() / norm).into(), ens.len().into(), "".into()]);
        }
    }
    let t_lo = o.shape_times.iter().cloned().fold(f64::INFINITY, f64::min);
    let t_hi = o.shape_times.iter().cloned().fold(0.0, f64::max);
    let outer = |t: f64| t == t_lo || t == t_hi;
    let c_fit = shape.iter().filter(|s| outer(s.0)).map(|s| s.2).fold(0.0, f64::max);
    let ok = shape.iter().filter(|s| !outer(s.0)).all(|s| s.2 <= FIT_MARGIN * c_fit + k * s.3);
    let inner_sup = shape.iter().filter(|s| !outer(s.0)).map(|s| s.2).fold(0.0, f64::max);
    report.checks.push(Check::new("noise-shape-sqrt-t", FIT_MARGIN * c_fit, inner_sup, 0.0, ok));
    // uniqueness-class diagnostic sup s²E[𝒵_s(u)²], reported only
    let mut diag: f64 = 0.0;
    for &t in &snaps {
        for j in 1..ens[0].space.len() {
            let m: f64 = ens.iter().map(|s| s.snapshot(t).map(|r| r[j] * r[j]).unwrap_or(0.0)).sum::<f64>() / ens.len() as f64;
            diag = diag.max(t * t * m);
        }
    }
    mt.push(vec![horizon.into(), "".into(), "sup_s2_second_moment".into(), diag.into(), "".into(), ens.len().into(), "".into()]);
    drop(ens);

    // order-2 ratio on the fine grid
    let g = SheGrid::for_target(o.dt, o.dx, o.order2_t, o.order2_u)?;
    let ens = solve_ensemble(&IcKind::DeltaPrime, g, &SolveOptions::default(), cfg.seed.wrapping_add(1), cfg.replicas)?;
    let m2 = second_moment_centered(&ens, o.order2_t, o.order2_u)?;
    drop(ens);
    let d = d_dirichlet_kernel(o.order2_t, o.order2_u)?;
    let (ratio, se) = (m2.estimate / (d * d), m2.stderr / (d * d));
    let target = second_moment_ratio(o.order2_t, o.order2_u)?;
    mt.push(vec![o.order2_t.into(), o.order2_u.into(), "second_moment_ratio".into(), ratio.into(), se.into(), m2.n.into(), target.into()]);
    report.checks.push(Check::new(
        format!("order2-ratio[t={},u={}]", o.order2_t, o.order2_u),
        target,
        ratio,
        se,
        (ratio / target - 1.0).abs() <= o.order2_tol,
    ));
    report.tables.push(mt);

    // Picard layers
    let p = picard_layers(o.picard_layers, PicardGrid::default())?;
    let bound = p.bound_check(o.picard_layers, &o.picard_times);
    let mut pt = Table::new(
        "picard",
        &[("n", Tag::Param), ("t", Tag::Param), ("f_n", Tag::Exact), ("bound", Tag::Exact)],
    );
    for &(n, t, f, b) in &bound.rows {
        pt.push(vec![n.into(), t.into(), f.into(), b.into()]);
    }
    report.checks.push(Check::at_most("picard-f0-is-one", 1.0, o.picard_times.iter().map(|&t| p.f(0, t)).fold(0.0, f64::max)));
    report.checks.push(Check::new(format!("picard-fn-shape[n<={}]", o.picard_layers), 1.0, bound.worst_ratio, 0.0, bound.pass));
    report.plots.push(Plot {
        name: "picard_fn".into(),
        title: "f_n(t) of the chaos layers".into(),
        x_label: "t".into(),
        y_label: "f_n".into(),
        series: (0..=p.n())
            .map(|n| Series { label: format!("n={n}"), points: o.picard_times.iter().map(|&t| (t, p.f(n, t))).collect() })
            .collect(),
    });
    report.tables.push(pt);
    Ok(report)
}
