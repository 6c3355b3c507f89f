//! Config-driven experiment runners producing tagged tables and checks.

mod common;
mod config;
mod first_moment;
mod intertwine;
mod kernels_suite;
mod martingale;
mod near_eq;
mod output;
mod report;
mod second_moment;
mod she_validate;

pub use config::{
    bernoulli_ic_events, empty_ic_events, predicted_events, ExperimentConfig, ExperimentKind, FirstMomentOpts,
    IntertwineOpts, KernelsOpts, MartingaleOpts, NearEqOpts, SecondMomentOpts, SheOpts, DEFAULT_EVENT_BUDGET, DEFAULT_SEED,
};
pub use first_moment::run_first_moment_convergence;
pub use intertwine::run_intertwining_test;
pub use kernels_suite::{bounds_check, green_check, gt_check, robin_agreement, run_kernels_suite, second_moment_check};
pub use martingale::run_martingale_checks;
pub use near_eq::{bernoulli_density, run_near_equilibrium};
pub use output::{config_digest, emit_outputs, render_svg, strip_metadata, summary_body, table_body};
pub use report::{Cell, Check, Column, Plot, Report, Series, Table, Tag};
pub use second_moment::run_second_moment_ratio;
pub use she_validate::run_she_validation;

use crate::error::Result;

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    match cfg.experiment {
        ExperimentKind::FirstMoment => run_first_moment_convergence(cfg),
        ExperimentKind::SecondMoment => run_second_moment_ratio(cfg),
        ExperimentKind::Martingale => run_martingale_checks(cfg),
        ExperimentKind::Intertwine => run_intertwining_test(cfg),
        ExperimentKind::NearEq => run_near_equilibrium(cfg, cfg.near_eq.b),
        ExperimentKind::KernelsSuite => run_kernels_suite(cfg),
        ExperimentKind::SheValidate => run_she_validation(cfg),
    }
}
