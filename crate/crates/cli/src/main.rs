//! `fasep`: run one experiment and write its tables, plots and summary.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fasep_core::experiments::{emit_outputs, run, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "fasep", version, about = "Exclusion-process and SHE experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mean of the rescaled Hopf-Cole field against the exact finite-ε formula.
    FirstMoment(Common),
    /// Second moment ratio, its envelope and ε-trend.
    SecondMoment(Common),
    /// Martingale identities and error-term magnitudes.
    Martingale(Common),
    /// Exact intertwining, Hopf-Cole identities and the coupled chi-square test.
    Intertwine(Common),
    /// Near-equilibrium Bernoulli data.
    NearEq {
        #[command(flatten)]
        common: Common,
        /// Drift parameter of the Bernoulli density.
        #[arg(long, allow_hyphen_values = true)]
        b: Option<f64>,
    },
    /// Deterministic kernel identities and bounds.
    KernelsSuite(Common),
    /// SHE solver and Picard layer validation.
    SheValidate(Common),
}

#[derive(Args)]
struct Common {
    /// TOML file whose keys override the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    threads: Option<usize>,
}

fn build(kind: ExperimentKind, c: &Common, b: Option<f64>) -> Result<ExperimentConfig, String> {
    let mut cfg = ExperimentConfig::preset(kind);
    if let Some(p) = &c.config {
        let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
        cfg = cfg.overlay_toml(&text).map_err(|e| format!("{}: {e}", p.display()))?;
        if cfg.experiment != kind {
            return Err(format!("config is for {}, not {}", cfg.experiment.name(), kind.name()));
        }
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(r) = c.replicas {
        cfg.replicas = r;
    }
    if let Some(o) = &c.out {
        cfg.out_dir = o.to_string_lossy().into_owned();
    }
    if let Some(b) = b {
        cfg.near_eq.b = b;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common, b) = match &cli.cmd {
        Cmd::FirstMoment(c) => (ExperimentKind::FirstMoment, c, None),
        Cmd::SecondMoment(c) => (ExperimentKind::SecondMoment, c, None),
        Cmd::Martingale(c) => (ExperimentKind::Martingale, c, None),
        Cmd::Intertwine(c) => (ExperimentKind::Intertwine, c, None),
        Cmd::NearEq { common, b } => (ExperimentKind::NearEq, common, *b),
        Cmd::KernelsSuite(c) => (ExperimentKind::KernelsSuite, c, None),
        Cmd::SheValidate(c) => (ExperimentKind::SheValidate, c, None),
    };
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let cfg = match build(kind, common, b) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit_outputs(&report, &cfg, cfg.out_dir.as_ref()) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    for c in &report.checks {
        println!(
            "{} {} target={:.6e} estimate={:.6e} stderr={:.3e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.target,
            c.estimate,
            c.stderr
        );
    }
    println!("outputs in {}", cfg.out_dir);
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
