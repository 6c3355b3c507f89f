//! Acceptance criteria 1–10, one line each.
//!
//! Criterion 7 has a known failing sub-check: the exact finite-ε mean at
//! u = 2 crosses the continuum value between ε = 0.3 and ε = 0.2, so its
//! deviation is not monotone on the ladder {0.4, 0.3, 0.2}. The test pins
//! that outcome instead of hiding it.

use std::time::Instant;

use fasep_core::experiments::{
    bounds_check, green_check, gt_check, robin_agreement, run_first_moment_convergence, run_intertwining_test,
    run_martingale_checks, run_she_validation, second_moment_check, Check, ExperimentConfig, ExperimentKind, Report,
};
use fasep_core::Result;

struct Outcome {
    id: usize,
    title: &'static str,
    checks: Vec<Check>,
    secs: f64,
    limit: f64,
    error: Option<String>,
}

impl Outcome {
    fn failing(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }

    fn pass(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.failing().is_empty() && self.secs < self.limit
    }

    fn line(&self) -> String {
        let verdict = if self.pass() { "PASS" } else { "FAIL" };
        let mut s = format!(
            "criterion {:>2} {verdict} {} ({}/{} checks, {:.1} s of {:.0} s)",
            self.id,
            self.title,
            self.checks.iter().filter(|c| c.pass).count(),
            self.checks.len(),
            self.secs,
            self.limit
        );
        if let Some(e) = &self.error {
            s.push_str(&format!(" error: {e}"));
        }
        for name in self.failing() {
            let c = self.checks.iter().find(|c| c.name == name).unwrap();
            s.push_str(&format!(" | failing {name}: target {:.6e}, estimate {:.6e}", c.target, c.estimate));
        }
        s
    }
}

fn timed<F>(id: usize, title: &'static str, limit: f64, keep: fn(&Check) -> bool, f: F) -> Outcome
where
    F: FnOnce() -> Result<Report>,
{
    let start = Instant::now();
    let r = f();
    let secs = start.elapsed().as_secs_f64();
    match r {
        Ok(rep) => Outcome { id, title, checks: rep.checks.into_iter().filter(keep).collect(), secs, limit, error: None },
        Err(e) => Outcome { id, title, checks: Vec::new(), secs, limit, error: Some(e.to_string()) },
    }
}

fn kernel_part(part: fn(&ExperimentConfig, &mut Report) -> Result<()>) -> Result<Report> {
    let cfg = ExperimentConfig::preset(ExperimentKind::KernelsSuite);
    let mut r = Report::new("kernels-suite");
    part(&cfg, &mut r)?;
    Ok(r)
}

fn intertwine_exact_only() -> Result<Report> {
    let mut cfg = ExperimentConfig::preset(ExperimentKind::Intertwine);
    cfg.replicas = 0;
    run_intertwining_test(&cfg)
}

fn main() {
    let all: fn(&Check) -> bool = |_| true;
    let outcomes = vec![
        timed(1, "generator intertwining", 60.0, |c| c.name.starts_with("intertwining-"), intertwine_exact_only),
        timed(2, "Hopf-Cole identity", 10.0, |c| c.name.starts_with("hopf-cole-"), intertwine_exact_only),
        timed(3, "Robin kernel three-way agreement", 300.0, all, || kernel_part(robin_agreement)),
        timed(4, "Green cancellation", 120.0, all, || kernel_part(green_check)),
        timed(5, "G_t bound and closed form", 60.0, all, || kernel_part(gt_check)),
        timed(6, "second-moment closed form", 120.0, all, || kernel_part(second_moment_check)),
        timed(7, "first-moment convergence", 1800.0, all, || {
            run_first_moment_convergence(&ExperimentConfig::preset(ExperimentKind::FirstMoment))
        }),
        timed(8, "martingale suite", 1800.0, all, || {
            run_martingale_checks(&ExperimentConfig::preset(ExperimentKind::Martingale))
        }),
        timed(9, "SHE solver validation", 3600.0, all, || {
            run_she_validation(&ExperimentConfig::preset(ExperimentKind::SheValidate))
        }),
        timed(10, "kernel bounds suite", 600.0, all, || kernel_part(bounds_check)),
    ];
    for o in &outcomes {
        println!("{}", o.line());
    }
    let unexpected: Vec<usize> = outcomes.iter().filter(|o| !as_expected(o)).map(|o| o.id).collect();
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
    println!("acceptance: outcomes as expected");
}

fn as_expected(o: &Outcome) -> bool {
    if o.id == 7 {
        let mc = o.checks.iter().filter(|c| c.name.starts_with("mc-vs-exact")).count();
        o.error.is_none() && o.secs < o.limit && o.failing() == ["deviation-decreasing[t=0.5,u=2]"] && mc == 4
    } else {
        o.pass()
    }
}
