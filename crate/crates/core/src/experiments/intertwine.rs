//! Exact generator intertwining, the Hopf-Cole identity, and a two-sample
//! comparison of the mapped facilitated process with the half-line process.

use super::common::{replicate, snapshot_at, stream_id};
use super::config::ExperimentConfig;
use super::report::{Cell, Check, Report, Table, Tag};
use crate::config::{certified_trunc, FasepConfig, HalfLineConfig, LatticeConfig};
use crate::dynamics::{intertwining_exact, simulate_replica, weak_asym_params, Record};
use crate::error::{Error, Result};
use crate::hopfcole::hopf_cole_identity;
use crate::stats::chi_square_two_sample;

fn pattern(c: &HalfLineConfig, sites: usize) -> usize {
    (1..=sites).fold(0, |acc, i| acc | ((c.sigma(i) as usize) << (i - 1)))
}

pub fn run_intertwining_test(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let eps = cfg.epsilon.first().copied().unwrap_or(0.2);
    let w = weak_asym_params(eps)?;
    let o = &cfg.intertwine;
    let mut report = Report::new("intertwine");

    let exact = intertwining_exact(o.max_window, &w)?;
    let mut t = Table::new(
        "exact",
        &[("check", Tag::Param), ("configs", Tag::Exact), ("functions", Tag::Exact), ("mismatches", Tag::Exact)],
    );
    t.push(vec![
        "generator-intertwining".into(),
        exact.configs_checked.into(),
        exact.indicators_checked.into(),
        exact.mismatches.len().into(),
    ]);
    report.checks.push(Check::new(
        format!("intertwining-mismatches[window<={}]", o.max_window),
        0.0,
        exact.mismatches.len() as f64,
        0.0,
        exact.mismatches.is_empty() && exact.configs_checked > 0,
    ));
    let id = hopf_cole_identity(&w);
    let mut h = Table::new("hopf_cole", &[("quantity", Tag::Param), ("value", Tag::Exact)]);
    h.push(vec!["interior_max_rel".into(), id.interior_max_rel.into()]);
    h.push(vec!["boundary_ratio_occupied".into(), id.boundary_ratio_occupied.into()]);
    h.push(vec!["boundary_ratio_empty".into(), id.boundary_ratio_empty.into()]);
    h.push(vec!["mu".into(), id.mu.into()]);
    report.checks.push(Check::at_most("hopf-cole-interior", 1e-12, id.interior_max_rel));
    report.checks.push(Check::at_most("hopf-cole-boundary", 1e-12, id.boundary_max_rel()));

    let mut stat = Table::new(
        "law_comparison",
        &[("t_micro", Tag::Param), ("statistic", Tag::Mc), ("dof", Tag::Mc), ("p_value", Tag::Mc), ("n", Tag::Mc)],
    );
    if cfg.replicas > 0 {
        if o.sites == 0 || o.sites > 16 {
            return Err(Error::InvalidArgument(format!("{} compared sites", o.sites)));
        }
        let t_top = o.times.iter().cloned().fold(0.0, f64::max);
        let record = Record::Snapshots(o.times.clone());
        let fasep = LatticeConfig::Fasep(FasepConfig::step(0));
        let asep = LatticeConfig::HalfLine(HalfLineConfig::empty(certified_trunc(o.sites, t_top)));
        let bins = 1usize << o.sites;
        let patterns = |init: &LatticeConfig, block: u64| -> Result<Vec<Vec<usize>>> {
            replicate(cfg.replicas, |i| {
                let tr = simulate_replica(init, &w, t_top, cfg.seed, stream_id(block, i), &record)?;
                o.times
                    .iter()
                    .map(|&s| {
                        let c = match snapshot_at(&tr, s)? {
                            LatticeConfig::Fasep(f) => f.map_to_halfline()?,
                            LatticeConfig::HalfLine(c) => c.clone(),
                        };
                        Ok(pattern(&c, o.sites))
                    })
                    .collect()
            })
        };
        let a = patterns(&fasep, 0)?;
        let b = patterns(&asep, 1)?;
        for (j, &s) in o.times.iter().enumerate() {
            let mut ca = vec![0u64; bins];
            let mut cb = vec![0u64; bins];
            a.iter().for_each(|r| ca[r[j]] += 1);
            b.iter().for_each(|r| cb[r[j]] += 1);
            let test = chi_square_two_sample(&ca, &cb, o.min_expected)?;
            stat.push(vec![s.into(), test.statistic.into(), test.dof.into(), test.p_value.into(), Cell::from(cfg.replicas)]);
            report.checks.push(Check::new(format!("chi-square-p[t={s}]"), o.level, test.p_value, 0.0, test.p_value > o.level));
        }
    }
    report.tables.extend([t, h, stat]);
    Ok(report)
}
