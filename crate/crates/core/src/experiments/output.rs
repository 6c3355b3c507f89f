//! CSV tables with a metadata header, summary.csv and SVG line plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use super::report::{Plot, Report, Table};
use crate::error::Result;

/// Hex SHA-256 of the canonical TOML form of the config.
pub fn config_digest(cfg: &ExperimentConfig) -> Result<String> {
    let h = Sha256::digest(cfg.to_toml()?.as_bytes());
    Ok(h.iter().map(|b| format!("{b:02x}")).collect())
}

fn git_hash() -> String {
    Command::new("git")
        .args(["rev-parse", "HEAD"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Header and rows of a table, without the metadata lines.
pub fn table_body(t: &Table) -> String {
    let mut out = String::new();
    let names: Vec<String> = t.columns.iter().map(|c| csv_field(&c.name)).collect();
    out.push_str(&names.join(","));
    out.push('\n');
    for row in &t.rows {
        let cells: Vec<String> = row.iter().map(|c| csv_field(&c.render())).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn summary_body(r: &Report) -> String {
    let mut out = String::from("name,target,estimate,stderr,pass\n");
    for c in &r.checks {
        let _ = writeln!(out, "{},{:.12e},{:.12e},{:.12e},{}", csv_field(&c.name), c.target, c.estimate, c.stderr, c.pass);
    }
    out
}

/// Writes `<table>.csv` per table, `summary.csv` and `<plot>.svg`; returns
/// the paths written.
pub fn emit_outputs(report: &Report, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let meta = format!(
        "# experiment: {}\n# git: {}\n# seed: {}\n# config-sha256: {}\n",
        report.experiment,
        git_hash(),
        cfg.seed,
        config_digest(cfg)?
    );
    let mut written = Vec::new();
    for t in &report.tables {
        let tags: Vec<&str> = t.columns.iter().map(|c| c.tag.as_str()).collect();
        let text = format!("{meta}# tags: {}\n{}", tags.join(","), table_body(t));
        let p = dir.join(format!("{}.csv", t.name));
        fs::write(&p, text)?;
        written.push(p);
    }
    let p = dir.join("summary.csv");
    fs::write(&p, format!("{meta}{}", summary_body(report)))?;
    written.push(p);
    for plot in &report.plots {
        let p = dir.join(format!("{}.svg", plot.name));
        fs::write(&p, render_svg(plot))?;
        written.push(p);
    }
    Ok(written)
}

/// Strips the leading `#` metadata lines of an emitted CSV.
pub fn strip_metadata(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub fn render_svg(plot: &Plot) -> String {
    let (w, h, m) = (640.0, 420.0, 60.0);
    let pts: Vec<(f64, f64)> =
        plot.series.iter().flat_map(|s| s.points.iter().copied()).filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    let span = |v: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-300 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = span(&mut pts.iter().map(|p| p.0));
    let (y0, y1) = span(&mut pts.iter().map(|p| p.1));
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#, w / 2.0, escape(&plot.title));
    let _ = writeln!(
        s,
        r#"<path d="M{m} {m} L{m} {b} L{r} {b}" fill="none" stroke="black"/>"#,
        b = h - m,
        r = w - m
    );
    for (v, lo, hi) in [(0, x0, x1), (1, y0, y1)] {
        for (k, val) in [lo, hi].iter().enumerate() {
            let label = format!("{val:.3e}");
            if v == 0 {
                let x = if k == 0 { m } else { w - m };
                let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle" font-size="11">{label}</text>"#, h - m + 16.0);
            } else {
                let y = if k == 0 { h - m } else { m };
                let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end" font-size="11">{label}</text>"#, m - 4.0);
            }
        }
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#, w / 2.0, h - 12.0, escape(&plot.x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(&plot.y_label)
    );
    for (i, series) in plot.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let d: Vec<String> = series
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .enumerate()
            .map(|(k, &(x, y))| format!("{}{:.2} {:.2}", if k == 0 { "M" } else { "L" }, sx(x), sy(y)))
            .collect();
        if !d.is_empty() {
            let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.join(" "));
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" fill="{color}">{}</text>"#,
            w - m + 4.0,
            m + 14.0 * i as f64,
            escape(&series.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{ExperimentKind, Series, Tag};

    #[test]
    fn body_has_no_metadata() {
        let mut t = Table::new("x", &[("a", Tag::Param), ("b", Tag::Exact)]);
        t.push(vec![1.0.into(), "p,q".into()]);
        assert_eq!(table_body(&t), "a,b\n1.000000000000e0,\"p,q\"\n");
    }

    #[test]
    fn digest_tracks_config() {
        let a = ExperimentConfig::preset(ExperimentKind::FirstMoment);
        let mut b = a.clone();
        assert_eq!(config_digest(&a).unwrap(), config_digest(&b).unwrap());
        b.seed += 1;
        assert_ne!(config_digest(&a).unwrap(), config_digest(&b).unwrap());
        assert_eq!(config_digest(&a).unwrap().len(), 64);
    }

    #[test]
    fn svg_escapes_labels() {
        let p = Plot {
            name: "p".into(),
            title: "a<b & c".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series { label: "s".into(), points: vec![(0.0, 1.0), (1.0, f64::NAN), (2.0, 3.0)] }],
        };
        let s = render_svg(&p);
        assert!(s.contains("a&lt;b &amp; c"));
        assert!(!s.contains("NaN"));
    }
}
