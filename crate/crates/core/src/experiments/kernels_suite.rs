//! Deterministic kernel checks: Robin three-way agreement, the Green
//! cancellation, the G_t bound, the second-moment closed form and the
//! bounds suite.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::report::{Cell, Check, Report, Table, Tag};
use crate::error::Result;
use crate::kernels::{
    bounds_suite, d_dirichlet_kernel, gt_bound_constant, gt_function, gt_quadrature, green_cancellation,
    green_cancellation_solve, nested_contour_integral, ode_lattice_for, robin_matrix, second_moment_ratio,
    universal_kernel_constant, BoundsGrid, RobinKernelSpec, FIT_MARGIN,
};

fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max)
}

pub fn robin_agreement(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let o = &cfg.kernels;
    let mu = (-o.robin_epsilon).exp();
    let n = o.robin_x_max;
    let mut t = Table::new(
        "robin_agreement",
        &[("t", Tag::Param), ("series_vs_quadrature", Tag::Exact), ("series_vs_ode", Tag::Exact), ("quadrature_vs_ode", Tag::Exact)],
    );
    let mut worst: f64 = 0.0;
    for &time in &o.robin_times {
        let a = robin_matrix(&RobinKernelSpec::image_series(mu), time, n)?;
        let b = robin_matrix(&RobinKernelSpec::quadrature(mu, 32), time, n)?;
        let c = robin_matrix(&RobinKernelSpec::ode_oracle(mu, ode_lattice_for(time, n)), time, n)?;
        let (ab, ac, bc) = (max_abs_diff(&a, &b), max_abs_diff(&a, &c), max_abs_diff(&b, &c));
        worst = worst.max(ab).max(ac).max(bc);
        t.push(vec![time.into(), ab.into(), ac.into(), bc.into()]);
    }
    report.checks.push(Check::at_most(format!("robin-three-way[x,y<={n}]"), o.robin_tol, worst));
    report.tables.push(t);
    Ok(())
}

pub fn green_check(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let o = &cfg.kernels;
    let mu = (-o.robin_epsilon).exp();
    let mut t = Table::new(
        "green_cancellation",
        &[("x", Tag::Param), ("x_prime", Tag::Param), ("time_integral", Tag::Exact), ("green_solve", Tag::Exact), ("target", Tag::Formula)],
    );
    let pairs: Vec<(usize, usize)> = (0..=o.green_max).flat_map(|x| (0..=o.green_max).map(move |y| (x, y))).collect();
    let vals: Vec<(f64, f64)> = pairs
        .iter()
        .map(|&(x, y)| Ok((green_cancellation(mu, x, y, o.green_t_max, 1e-9)?, green_cancellation_solve(mu, x, y)?)))
        .collect::<Result<_>>()?;
    let (mut wt, mut ws): (f64, f64) = (0.0, 0.0);
    for (&(x, y), &(a, b)) in pairs.iter().zip(&vals) {
        let target = if x == y { 1.0 } else { 0.0 };
        wt = wt.max((a - target).abs());
        ws = ws.max((b - target).abs());
        t.push(vec![x.into(), y.into(), a.into(), b.into(), target.into()]);
    }
    report.checks.push(Check::at_most("green-time-integral", o.green_tol, wt));
    report.checks.push(Check::at_most("green-solve", o.green_tol, ws));
    report.tables.push(t);
    Ok(())
}

pub fn gt_check(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let o = &cfg.kernels;
    let n = o.gt_grid;
    let time = 1.0;
    let pts: Vec<(f64, f64)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| ((i as f64 + 0.5) / n as f64, 4.0 * (j as f64 + 1.0) / n as f64)))
        .collect();
    let worst = pts
        .iter()
        .map(|&(r, u)| gt_function(time, r * time, u).map(|g| g.ratio_to_bound))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let limit = gt_bound_constant() + 1e-9;
    report.checks.push(Check::at_most(format!("gt-ratio-sup[{} points]", pts.len()), limit, worst));
    let m = o.gt_quadrature_points.max(1);
    let step = (pts.len() / m).max(1);
    let sample: Vec<(f64, f64)> = pts.iter().step_by(step).copied().collect();
    let rel: Vec<(f64, f64, f64, f64)> = sample
        .par_iter()
        .map(|&(r, u)| {
            let a = gt_function(time, r * time, u)?.value;
            let b = gt_quadrature(time, r * time, u)?;
            Ok((r, u, a, b))
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(
        "gt_quadrature",
        &[("s_over_t", Tag::Param), ("u", Tag::Param), ("closed_form", Tag::Formula), ("quadrature", Tag::Exact)],
    );
    let mut wr: f64 = 0.0;
    for (r, u, a, b) in rel {
        wr = wr.max((a - b).abs() / b.abs().max(1e-300));
        t.push(vec![r.into(), u.into(), a.into(), b.into()]);
    }
    report.checks.push(Check::at_most("gt-closed-vs-quadrature", o.gt_tol, wr));
    report.tables.push(t);
    Ok(())
}

pub fn second_moment_check(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let o = &cfg.kernels;
    let mut t = Table::new(
        "second_moment_nested",
        &[("t", Tag::Param), ("u", Tag::Param), ("nested_integral", Tag::Exact), ("closed_form", Tag::Formula), ("rel_error", Tag::Exact)],
    );
    let mut worst: f64 = 0.0;
    for &time in &o.second_times {
        for &u in &o.second_u {
            let d = d_dirichlet_kernel(time, u)?;
            let closed = second_moment_ratio(time, u)? * d * d;
            let nested = nested_contour_integral(time, u, u, 0.5)?.value;
            let rel = (nested - closed).abs() / closed.abs();
            worst = worst.max(rel);
            t.push(vec![time.into(), u.into(), nested.into(), closed.into(), rel.into()]);
        }
    }
    report.checks.push(Check::at_most("second-moment-nested-vs-closed", o.second_tol, worst));
    let ts = o.small_t;
    let got = second_moment_ratio(ts, 1e-6 * ts.sqrt())?;
    let expansion = 1.0 + 0.75 * PI.sqrt() * ts.sqrt();
    t.push(vec![ts.into(), (1e-6 * ts.sqrt()).into(), Cell::from(""), got.into(), ((got - expansion).abs()).into()]);
    report.checks.push(Check::new(
        format!("second-moment-small-t[t={ts}]"),
        expansion,
        got,
        0.0,
        (got - expansion).abs() <= o.small_t_tol,
    ));
    report.tables.push(t);
    Ok(())
}

pub fn bounds_check(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let o = &cfg.kernels;
    let r = bounds_suite(o.bounds_epsilon, o.bounds_t, &BoundsGrid::default())?;
    let mut t = Table::new(
        "bounds",
        &[
            ("inequality", Tag::Param),
            ("grid_size", Tag::Param),
            ("fitted_constant", Tag::Exact),
            ("fine_sup", Tag::Exact),
            ("limit", Tag::Formula),
            ("pass", Tag::Verdict),
        ],
    );
    for c in &r.checks {
        let limit = c.limit.map(Cell::from).unwrap_or_else(|| "".into());
        t.push(vec![c.name.clone().into(), c.grid_size.into(), c.fitted_constant.into(), c.fine_sup.into(), limit, c.pass.into()]);
        let threshold = c.limit.unwrap_or(f64::INFINITY).min(FIT_MARGIN * c.fitted_constant);
        report.checks.push(Check::new(format!("bound[{}]", c.name), threshold, c.fine_sup, 0.0, c.pass));
    }
    let uni = r.get("boundheatkernel").map(|c| c.fine_sup).unwrap_or(f64::INFINITY);
    report.checks.push(Check::at_most("universal-constant", o.universal_limit, uni.max(0.0)));
    report.checks.push(Check::at_most("universal-constant-closed-form", o.universal_limit, universal_kernel_constant()));
    report.tables.push(t);
    Ok(())
}

pub fn run_kernels_suite(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let mut report = Report::new("kernels-suite");
    robin_agreement(cfg, &mut report)?;
    green_check(cfg, &mut report)?;
    gt_check(cfg, &mut report)?;
    second_moment_check(cfg, &mut report)?;
    bounds_check(cfg, &mut report)?;
    Ok(report)
}
