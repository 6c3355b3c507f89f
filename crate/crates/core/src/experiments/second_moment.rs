//! E[(𝒵ᵉ_t(u))²]/dP² from the empty half-line against the continuum
//! second-moment ratio and its envelope.

use super::common::{column_mc, fmt_key, site_of};
use super::config::ExperimentConfig;
use super::first_moment::empty_ic_samples;
use super::report::{Check, Plot, Report, Series, Table, Tag};
use crate::error::{Error, Result};
use crate::kernels::{d_dirichlet_kernel, second_moment_exact};
use crate::stats::McMeta;

pub fn run_second_moment_ratio(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    if cfg.u.iter().any(|&u| u <= 0.0) {
        return Err(Error::InvalidArgument("the ratio needs u > 0".into()));
    }
    let k = cfg.ci_multiplier;
    let mut report = Report::new("second-moment");
    let mut table = Table::new(
        "second_moment",
        &[
            ("epsilon", Tag::Param),
            ("t", Tag::Param),
            ("u", Tag::Param),
            ("x", Tag::Param),
            ("mc_ratio", Tag::Mc),
            ("mc_stderr", Tag::Mc),
            ("n", Tag::Mc),
            ("closed_form", Tag::Formula),
            ("envelope", Tag::Formula),
            ("gap", Tag::Mc),
        ],
    );
    let mut eps_sorted = cfg.epsilon.clone();
    eps_sorted.sort_by(|a, b| b.total_cmp(a));
    // (t,u) → [(ε, mc gap, stderr)]
    let mut ladder: Vec<((f64, f64), Vec<(f64, f64, f64)>)> = Vec::new();
    for (b, &eps) in eps_sorted.iter().enumerate() {
        let sites: Vec<usize> = cfg.u.iter().map(|&u| site_of(u, eps)).collect();
        let rows = empty_ic_samples(cfg, eps, b as u64, &cfg.t_macro, &sites, 2)?;
        for (ti, &t) in cfg.t_macro.iter().enumerate() {
            for (ui, &u) in cfg.u.iter().enumerate() {
                let d = d_dirichlet_kernel(t, u)?;
                let r = column_mc(
                    &rows,
                    ti * sites.len() + ui,
                    0..cfg.replicas as u64,
                    McMeta { experiment: "second-moment".into(), epsilon: Some(eps), t, u },
                )?;
                let (ratio, se) = (r.estimate / (d * d), r.stderr / (d * d));
                let cf = second_moment_exact(t, u)?;
                let gap = ratio - cf.ratio;
                table.push(vec![
                    eps.into(),
                    t.into(),
                    u.into(),
                    sites[ui].into(),
                    ratio.into(),
                    se.into(),
                    r.n.into(),
                    cf.ratio.into(),
                    cf.bound.into(),
                    gap.into(),
                ]);
                if u <= cfg.second_moment.envelope_u_max {
                    report.checks.push(Check::new(
                        format!("envelope[{}]", fmt_key(&[("eps", eps), ("t", t), ("u", u)])),
                        cf.bound,
                        ratio,
                        se,
                        ratio <= cf.bound + k * se,
                    ));
                }
                match ladder.iter_mut().find(|(kk, _)| *kk == (t, u)) {
                    Some((_, v)) => v.push((eps, gap, se)),
                    None => ladder.push(((t, u), vec![(eps, gap, se)])),
                }
            }
        }
    }
    if eps_sorted.len() >= 2 {
        for ((t, u), v) in &ladder {
            let (first, last) = (v[0], v[v.len() - 1]);
            let slack = k * (first.2.powi(2) + last.2.powi(2)).sqrt();
            report.checks.push(Check::new(
                format!("gap-trend[{}]", fmt_key(&[("t", *t), ("u", *u)])),
                first.1.abs(),
                last.1.abs(),
                (first.2.powi(2) + last.2.powi(2)).sqrt(),
                last.1.abs() <= first.1.abs() + slack,
            ));
        }
    }
    for &t in &cfg.t_macro {
        let (lo, hi) = (cfg.u.iter().cloned().fold(f64::INFINITY, f64::min), cfg.u.iter().cloned().fold(0.0, f64::max));
        if hi > lo {
            let a = second_moment_exact(t, lo)?.ratio;
            let b = second_moment_exact(t, hi)?.ratio;
            report.checks.push(Check::new(
                format!("large-u-ratio-to-one[{}]", fmt_key(&[("t", t), ("u", hi)])),
                1.0,
                b,
                0.0,
                (b - 1.0).abs() < (a - 1.0).abs(),
            ));
        }
    }
    report.plots.push(Plot {
        name: "second_moment_gap".into(),
        title: "MC ratio minus closed form".into(),
        x_label: "epsilon".into(),
        y_label: "gap".into(),
        series: ladder
            .iter()
            .map(|((t, u), v)| Series { label: format!("t={t}, u={u}"), points: v.iter().map(|&(e, g, _)| (e, g)).collect() })
            .collect(),
    });
    report.tables.push(table);
    Ok(report)
}
