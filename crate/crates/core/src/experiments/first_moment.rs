//! E[𝒵ᵉ_t(u)] from the empty half-line against the exact finite-ε value
//! and the continuum limit dP^Dir_t(u,0).

use super::common::{column_mc, fmt_key, half_line, replicate, site_of, snapshot_at, stream_id, z_at};
use super::config::ExperimentConfig;
use super::report::{Cell, Check, Plot, Report, Series, Table, Tag};
use crate::config::{certified_trunc, HalfLineConfig, LatticeConfig};
use crate::dynamics::{simulate_replica, weak_asym_params, Record};
use crate::error::Result;
use crate::kernels::{d_dirichlet_kernel, first_moment_exact};
use crate::stats::McMeta;

/// Per-replica samples of ε⁻²Z_{ε⁻⁴t}(x) (power 1) or its square (power 2)
/// at every (t, x) pair, in row-major order over `times` × `sites`.
pub(crate) fn empty_ic_samples(
    cfg: &ExperimentConfig,
    epsilon: f64,
    block: u64,
    times: &[f64],
    sites: &[usize],
    power: i32,
) -> Result<Vec<Vec<f64>>> {
    let w = weak_asym_params(epsilon)?;
    let e4 = epsilon.powi(4);
    let micro: Vec<f64> = times.iter().map(|t| t / e4).collect();
    let t_top = micro.iter().cloned().fold(0.0, f64::max);
    let init = LatticeConfig::HalfLine(HalfLineConfig::empty(certified_trunc(sites.iter().copied().max().unwrap_or(0), t_top)));
    let record = Record::Snapshots(micro.clone());
    let scale = epsilon.powi(-2);
    replicate(cfg.replicas, |i| {
        let tr = simulate_replica(&init, &w, t_top, cfg.seed, stream_id(block, i), &record)?;
        let mut row = Vec::with_capacity(micro.len() * sites.len());
        for &tm in &micro {
            let c = half_line(snapshot_at(&tr, tm)?)?;
            for &x in sites {
                row.push((scale * z_at(c, x, tm, &w)).powi(power));
            }
        }
        Ok(row)
    })
}

pub fn run_first_moment_convergence(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let k = cfg.ci_multiplier;
    let mut report = Report::new("first-moment");
    let mut table = Table::new(
        "first_moment",
        &[
            ("epsilon", Tag::Param),
            ("t", Tag::Param),
            ("u", Tag::Param),
            ("x", Tag::Param),
            ("mc_mean", Tag::Mc),
            ("mc_stderr", Tag::Mc),
            ("n", Tag::Mc),
            ("exact", Tag::Exact),
            ("target", Tag::Formula),
            ("deviation", Tag::Exact),
            ("z_score", Tag::Verdict),
        ],
    );
    let mut eps_sorted = cfg.epsilon.clone();
    eps_sorted.sort_by(|a, b| b.total_cmp(a));
    // deviation[(t,u)] along the ε ladder, largest ε first
    let mut ladder: Vec<((f64, f64), Vec<(f64, f64, f64)>)> = Vec::new();
    for (b, &eps) in eps_sorted.iter().enumerate() {
        let sites: Vec<usize> = cfg.u.iter().map(|&u| site_of(u, eps)).collect();
        let mc = cfg.first_moment.mc_epsilon.is_empty() || cfg.first_moment.mc_epsilon.iter().any(|&e| (e - eps).abs() < 1e-12);
        let rows = if mc && cfg.replicas > 0 { Some(empty_ic_samples(cfg, eps, b as u64, &cfg.t_macro, &sites, 1)?) } else { None };
        for (ti, &t) in cfg.t_macro.iter().enumerate() {
            for (ui, &u) in cfg.u.iter().enumerate() {
                let x = sites[ui];
                let e2 = eps * eps;
                let exact = first_moment_exact(eps, t / (e2 * e2), x)? / e2;
                let target = d_dirichlet_kernel(t, u)?;
                let dev = (exact - target).abs();
                let mut row: Vec<Cell> = vec![eps.into(), t.into(), u.into(), x.into()];
                if let Some(rows) = &rows {
                    let r = column_mc(
                        rows,
                        ti * sites.len() + ui,
                        0..cfg.replicas as u64,
                        McMeta { experiment: "first-moment".into(), epsilon: Some(eps), t, u },
                    )?;
                    let z = r.z_score(exact);
                    row.extend([r.estimate.into(), r.stderr.into(), r.n.into(), exact.into(), target.into(), dev.into(), z.into()]);
                    report.checks.push(Check::within_ci(
                        format!("mc-vs-exact[{}]", fmt_key(&[("eps", eps), ("t", t), ("u", u)])),
                        exact,
                        r.estimate,
                        r.stderr,
                        k,
                    ));
                } else {
                    row.extend([Cell::from(""), "".into(), "".into(), exact.into(), target.into(), dev.into(), "".into()]);
                }
                table.push(row);
                let key = (t, u);
                match ladder.iter_mut().find(|(kk, _)| *kk == key) {
                    Some((_, v)) => v.push((eps, dev, exact)),
                    None => ladder.push((key, vec![(eps, dev, exact)])),
                }
            }
        }
    }
    if eps_sorted.len() >= 2 {
        for ((t, u), v) in &ladder {
            let decreasing = v.windows(2).all(|w| w[1].1 < w[0].1);
            let last = v.last().map(|x| x.1).unwrap_or(0.0);
            let first = v.first().map(|x| x.1).unwrap_or(0.0);
            let name = if *u == 0.0 { "u0-shrinking" } else { "deviation-decreasing" };
            report.checks.push(Check::new(format!("{name}[{}]", fmt_key(&[("t", *t), ("u", *u)])), first, last, 0.0, decreasing));
        }
    }
    report.plots.push(Plot {
        name: "first_moment_deviation".into(),
        title: "|exact finite-ε mean − dP^Dir|".into(),
        x_label: "epsilon".into(),
        y_label: "deviation".into(),
        series: ladder
            .iter()
            .map(|((t, u), v)| Series { label: format!("t={t}, u={u}"), points: v.iter().map(|&(e, d, _)| (e, d)).collect() })
            .collect(),
    });
    report.tables.push(table);
    Ok(report)
}
