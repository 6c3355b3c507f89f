//! Martingale problem residuals along full event logs.

use super::common::{fmt_key, replicate, stream_id};
use super::config::ExperimentConfig;
use super::report::{Cell, Check, Plot, Report, Series, Table, Tag};
use crate::config::{certified_trunc, HalfLineConfig, LatticeConfig};
use crate::dynamics::{simulate_replica, weak_asym_params, Record};
use crate::error::{Error, Result};
use crate::hopfcole::{corrected_test_function, martingale_residual, test_function_martingale, TestFn, BUMP};
use crate::stats::{McMeta, McResult};

struct Sample {
    m: Vec<f64>,
    m2_minus_qv: Vec<f64>,
    cross: Vec<f64>,
    n: f64,
    r: [f64; 3],
}

fn run_block(cfg: &ExperimentConfig, eps: f64, t_micro: f64, replicas: usize, block: u64, with_sites: bool) -> Result<Vec<Sample>> {
    let w = weak_asym_params(eps)?;
    let sites = &cfg.martingale.sites;
    let reach = sites.iter().copied().max().unwrap_or(0) + 2;
    let init = LatticeConfig::HalfLine(HalfLineConfig::empty(certified_trunc(reach, t_micro)));
    let phi = corrected_test_function(TestFn::by_name(&cfg.martingale.test_fn)?, BUMP, eps)?;
    replicate(replicas, |i| {
        let tr = simulate_replica(&init, &w, t_micro, cfg.seed, stream_id(block, i), &Record::FullLog)?;
        let (m, m2_minus_qv, cross) = if with_sites {
            let diags = martingale_residual(&tr, sites, t_micro, &w)?;
            (
                diags.iter().map(|d| d.residual).collect(),
                diags.iter().map(|d| d.residual * d.residual - d.qv_integral).collect(),
                diags.iter().flat_map(|d| d.cross.iter().map(|c| c.2)).collect(),
            )
        } else {
            (Vec::new(), Vec::new(), Vec::new())
        };
        let nd = test_function_martingale(&tr, &phi, t_micro, &w, eps.powi(-2))?;
        Ok(Sample { m, m2_minus_qv, cross, n: nd.n, r: [nd.r1, nd.r2, nd.r3] })
    })
}

pub fn run_martingale_checks(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let &eps0 = cfg.epsilon.first().ok_or_else(|| Error::InvalidArgument("no ε listed".into()))?;
    let k = cfg.ci_multiplier;
    let t_micro = cfg.martingale.t_micro;
    let t_macro = t_micro * eps0.powi(4);
    let sites = cfg.martingale.sites.clone();
    let mut report = Report::new("martingale");
    let samples = run_block(cfg, eps0, t_micro, cfg.replicas, 0, true)?;
    let seeds = 0..cfg.replicas as u64;
    let mc = |xs: Vec<f64>, name: &str| {
        McResult::from_samples(&xs, seeds.clone(), McMeta { experiment: name.into(), epsilon: Some(eps0), t: t_macro, u: 0.0 })
    };
    let mut table = Table::new(
        "martingale",
        &[
            ("quantity", Tag::Param),
            ("epsilon", Tag::Param),
            ("t_micro", Tag::Param),
            ("mc_mean", Tag::Mc),
            ("mc_stderr", Tag::Mc),
            ("n", Tag::Mc),
            ("z_score", Tag::Verdict),
        ],
    );
    let mut add = |name: String, r: McResult, report: &mut Report| {
        table.push(vec![Cell::from(name.clone()), eps0.into(), t_micro.into(), r.estimate.into(), r.stderr.into(), r.n.into(), r.z_score(0.0).into()]);
        report.checks.push(Check::within_ci(name, 0.0, r.estimate, r.stderr, k));
    };
    for (j, &x) in sites.iter().enumerate() {
        add(format!("E[M(x)][x={x}]"), mc(samples.iter().map(|s| s.m[j]).collect(), "M")?, &mut report);
        add(format!("E[M(x)^2-QV][x={x}]"), mc(samples.iter().map(|s| s.m2_minus_qv[j]).collect(), "M2")?, &mut report);
    }
    let mut c = 0;
    for (a, &x) in sites.iter().enumerate() {
        for &y in &sites[a + 1..] {
            add(format!("E[M(x)M(y)][x={x},y={y}]"), mc(samples.iter().map(|s| s.cross[c]).collect(), "MM")?, &mut report);
            c += 1;
        }
    }
    add(format!("E[N(phi_eps)][{}]", cfg.martingale.test_fn), mc(samples.iter().map(|s| s.n).collect(), "N")?, &mut report);
    report.tables.push(table);

    // error-term magnitudes along the ε ladder at fixed macroscopic time
    let mut trend = Table::new(
        "error_terms",
        &[
            ("epsilon", Tag::Param),
            ("t_micro", Tag::Param),
            ("mean_abs_r1", Tag::Mc),
            ("mean_abs_r2", Tag::Mc),
            ("stderr_r2", Tag::Mc),
            ("mean_abs_r3", Tag::Mc),
            ("n", Tag::Mc),
        ],
    );
    let mut ladder = cfg.martingale.trend_epsilon.clone();
    ladder.sort_by(|a, b| b.total_cmp(a));
    let mut r2 = Vec::new();
    let mut series: Vec<Series> = (1..=3).map(|i| Series { label: format!("E|R{i}|"), points: Vec::new() }).collect();
    for (b, &eps) in ladder.iter().enumerate() {
        let tm = t_macro / eps.powi(4);
        let n = cfg.martingale.trend_replicas;
        let s = run_block(cfg, eps, tm, n, 1 + b as u64, false)?;
        let abs: Vec<McResult> = (0..3)
            .map(|i| {
                McResult::from_samples(
                    &s.iter().map(|x| x.r[i].abs()).collect::<Vec<_>>(),
                    0..n as u64,
                    McMeta { experiment: format!("R{}", i + 1), epsilon: Some(eps), t: t_macro, u: 0.0 },
                )
            })
            .collect::<Result<_>>()?;
        trend.push(vec![
            eps.into(),
            tm.into(),
            abs[0].estimate.into(),
            abs[1].estimate.into(),
            abs[1].stderr.into(),
            abs[2].estimate.into(),
            n.into(),
        ]);
        for i in 0..3 {
            series[i].points.push((eps, abs[i].estimate));
        }
        r2.push((eps, abs[1].estimate, abs[1].stderr));
    }
    if r2.len() >= 2 {
        let ok = r2.windows(2).all(|w| w[1].1 < w[0].1);
        report.checks.push(Check::new(
            format!("R2-decreasing[{}]", fmt_key(&[("eps_hi", r2[0].0), ("eps_lo", r2[r2.len() - 1].0)])),
            r2[0].1,
            r2[r2.len() - 1].1,
            r2[r2.len() - 1].2,
            ok,
        ));
    }
    report.tables.push(trend);
    report.plots.push(Plot {
        name: "error_terms".into(),
        title: "Mean magnitude of the error terms".into(),
        x_label: "epsilon".into(),
        y_label: "E|R|".into(),
        series,
    });
    Ok(report)
}
