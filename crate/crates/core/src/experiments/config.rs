//! Experiment configuration, presets and the event budget model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    FirstMoment,
    SecondMoment,
    Martingale,
    Intertwine,
    NearEq,
    KernelsSuite,
    SheValidate,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::FirstMoment,
        ExperimentKind::SecondMoment,
        ExperimentKind::Martingale,
        ExperimentKind::Intertwine,
        ExperimentKind::NearEq,
        ExperimentKind::KernelsSuite,
        ExperimentKind::SheValidate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::FirstMoment => "first-moment",
            ExperimentKind::SecondMoment => "second-moment",
            ExperimentKind::Martingale => "martingale",
            ExperimentKind::Intertwine => "intertwine",
            ExperimentKind::NearEq => "near-eq",
            ExperimentKind::KernelsSuite => "kernels-suite",
            ExperimentKind::SheValidate => "she-validate",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment {s}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FirstMomentOpts {
    /// ε values that get a Monte Carlo column; empty means all.
    pub mc_epsilon: Vec<f64>,
}

impl Default for FirstMomentOpts {
    fn default() -> Self {
        Self { mc_epsilon: vec![0.2] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SecondMomentOpts {
    /// Largest u at which the envelope is asserted; beyond it only the
    /// trend towards the closed form is checked.
    pub envelope_u_max: f64,
}

impl Default for SecondMomentOpts {
    fn default() -> Self {
        Self { envelope_u_max: 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MartingaleOpts {
    /// Microscopic horizon at the first listed ε; the trend runs use the
    /// same macroscopic time.
    pub t_micro: f64,
    pub sites: Vec<usize>,
    pub test_fn: String,
    pub trend_epsilon: Vec<f64>,
    pub trend_replicas: usize,
}

impl Default for MartingaleOpts {
    fn default() -> Self {
        Self {
            t_micro: 200.0,
            sites: vec![5, 6],
            test_fn: "hermite-damped".into(),
            trend_epsilon: vec![0.2, 0.1],
            trend_replicas: 2000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntertwineOpts {
    pub max_window: usize,
    pub times: Vec<f64>,
    /// σ(1..=sites) is compared.
    pub sites: usize,
    pub level: f64,
    pub min_expected: f64,
}

impl Default for IntertwineOpts {
    fn default() -> Self {
        Self { max_window: 12, times: vec![5.0, 50.0], sites: 6, level: 1e-3, min_expected: 5.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NearEqOpts {
    pub b: f64,
    pub holder_alpha: f64,
    /// Bernoulli fill reaches max(u) + fill_margin·√max(t) in macroscopic
    /// units.
    pub fill_margin: f64,
    /// Separations |u − u′| of the Hölder check.
    pub holder_gaps: Vec<f64>,
    /// Report Z_t(u)/u near u = 0 (never asserted).
    pub symmetry: bool,
    /// Allowed spread max/min of the fitted Hölder constant across ε.
    pub holder_spread: f64,
}

impl Default for NearEqOpts {
    fn default() -> Self {
        Self {
            b: -0.5,
            holder_alpha: 1.0 / 3.0,
            fill_margin: 8.0,
            holder_gaps: vec![0.05, 0.1, 0.2, 0.4],
            symmetry: false,
            holder_spread: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelsOpts {
    pub robin_epsilon: f64,
    pub robin_times: Vec<f64>,
    pub robin_x_max: usize,
    pub robin_tol: f64,
    pub green_max: usize,
    pub green_t_max: f64,
    pub green_tol: f64,
    /// Points per axis of the (s/t, u) grid.
    pub gt_grid: usize,
    pub gt_quadrature_points: usize,
    pub gt_tol: f64,
    pub second_times: Vec<f64>,
    pub second_u: Vec<f64>,
    pub second_tol: f64,
    pub small_t: f64,
    pub small_t_tol: f64,
    pub bounds_epsilon: f64,
    pub bounds_t: f64,
    pub universal_limit: f64,
}

impl Default for KernelsOpts {
    fn default() -> Self {
        Self {
            robin_epsilon: 0.1,
            robin_times: vec![1.0, 10.0, 100.0],
            robin_x_max: 60,
            robin_tol: 1e-8,
            green_max: 8,
            green_t_max: 256.0,
            green_tol: 1e-6,
            gt_grid: 100,
            gt_quadrature_points: 40,
            gt_tol: 1e-8,
            second_times: vec![0.5, 1.0, 2.0],
            second_u: vec![0.25, 0.5, 1.0],
            second_tol: 1e-6,
            small_t: 1e-4,
            small_t_tol: 1e-3,
            bounds_epsilon: 0.1,
            bounds_t: 1.0,
            universal_limit: 1.2616,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SheOpts {
    pub dx: f64,
    pub dt: f64,
    pub order2_t: f64,
    pub order2_u: f64,
    pub order2_tol: f64,
    pub mean_dx: f64,
    pub mean_dt: f64,
    pub mean_t: f64,
    pub mean_u: f64,
    pub shape_times: Vec<f64>,
    pub shape_u: Vec<f64>,
    pub order_t0: f64,
    pub order_t: f64,
    pub order_coarse: (f64, f64),
    pub order_min: f64,
    pub picard_layers: usize,
    pub picard_times: Vec<f64>,
}

impl Default for SheOpts {
    fn default() -> Self {
        Self {
            dx: 0.01,
            dt: 1e-4,
            order2_t: 0.25,
            order2_u: 0.5,
            order2_tol: 0.15,
            mean_dx: 0.02,
            mean_dt: 4e-4,
            mean_t: 0.5,
            mean_u: 1.0,
            shape_times: vec![0.1, 0.2, 0.4],
            shape_u: vec![0.25, 0.5, 1.0],
            order_t0: 0.1,
            order_t: 0.4,
            order_coarse: (4e-4, 0.02),
            order_min: 0.9,
            picard_layers: 6,
            picard_times: vec![0.05, 0.1, 0.2, 0.4, 0.7, 1.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub epsilon: Vec<f64>,
    pub t_macro: Vec<f64>,
    pub u: Vec<f64>,
    pub replicas: usize,
    pub seed: u64,
    pub out_dir: String,
    /// CI multiplier k in |estimate − target| ≤ k·stderr.
    pub ci_multiplier: f64,
    /// Refuse runs whose predicted event count exceeds this.
    pub event_budget: f64,
    #[serde(default)]
    pub first_moment: FirstMomentOpts,
    #[serde(default)]
    pub second_moment: SecondMomentOpts,
    #[serde(default)]
    pub martingale: MartingaleOpts,
    #[serde(default)]
    pub intertwine: IntertwineOpts,
    #[serde(default)]
    pub near_eq: NearEqOpts,
    #[serde(default)]
    pub kernels: KernelsOpts,
    #[serde(default)]
    pub she: SheOpts,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_EVENT_BUDGET: f64 = 2e10;

impl ExperimentConfig {
    /// Settings of the acceptance run for `kind`.
    pub fn preset(kind: ExperimentKind) -> Self {
        let (epsilon, t_macro, u, replicas) = match kind {
            ExperimentKind::FirstMoment => (vec![0.4, 0.3, 0.2], vec![0.5], vec![0.0, 0.5, 1.0, 2.0], 10_000),
            ExperimentKind::SecondMoment => (vec![0.3, 0.2], vec![0.5], vec![0.5, 1.0, 4.0], 10_000),
            ExperimentKind::Martingale => (vec![0.2], vec![], vec![], 10_000),
            ExperimentKind::Intertwine => (vec![0.2], vec![], vec![], 20_000),
            ExperimentKind::NearEq => (vec![0.2, 0.1], vec![0.1], vec![0.5, 1.0, 2.0], 1000),
            ExperimentKind::KernelsSuite => (vec![], vec![], vec![], 0),
            ExperimentKind::SheValidate => (vec![], vec![], vec![], 1000),
        };
        Self {
            experiment: kind,
            epsilon,
            t_macro,
            u,
            replicas,
            seed: DEFAULT_SEED,
            out_dir: format!("out/{}", kind.name()),
            ci_multiplier: 3.0,
            event_budget: DEFAULT_EVENT_BUDGET,
            first_moment: FirstMomentOpts::default(),
            second_moment: SecondMomentOpts::default(),
            martingale: MartingaleOpts::default(),
            intertwine: IntertwineOpts::default(),
            near_eq: NearEqOpts::default(),
            kernels: KernelsOpts::default(),
            she: SheOpts::default(),
        }
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Keys present in `s` replace the corresponding settings of `self`;
    /// tables merge recursively.
    pub fn overlay_toml(&self, s: &str) -> Result<Self> {
        let patch: toml::Table = s.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        let mut base = toml::Table::try_from(self).map_err(|e| Error::Parse(e.to_string()))?;
        merge(&mut base, patch);
        let cfg: Self = base.try_into().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(&e) = self.epsilon.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
            return Err(Error::EpsilonOutOfRange(e));
        }
        if let Some(&t) = self.t_macro.iter().find(|&&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidTime(t));
        }
        if let Some(&u) = self.u.iter().find(|&&u| !(u >= 0.0 && u.is_finite())) {
            return Err(Error::InvalidArgument(format!("u = {u}")));
        }
        if !(self.ci_multiplier > 0.0) {
            return Err(Error::InvalidArgument(format!("CI multiplier {}", self.ci_multiplier)));
        }
        let events = predicted_events(self);
        if events > self.event_budget {
            return Err(Error::Budget(format!("{events:.3e} predicted events exceed the budget {:.3e}", self.event_budget)));
        }
        Ok(())
    }
}

fn merge(base: &mut toml::Table, patch: toml::Table) {
    for (k, v) in patch {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(p)) => merge(b, p),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Upper estimate of the active bonds times rate times duration for one
/// run from the empty half-line: the occupied region spreads no faster
/// than 2√t + 2 sites.
pub fn empty_ic_events(t_micro: f64) -> f64 {
    t_micro * (2.0 * t_micro.sqrt() + 2.0)
}

/// Bernoulli data keep every filled bond active.
pub fn bernoulli_ic_events(t_micro: f64, n_fill: usize) -> f64 {
    t_micro * (n_fill as f64 + 2.0 * t_micro.sqrt() + 2.0)
}

pub fn near_eq_fill(cfg: &ExperimentConfig, epsilon: f64) -> usize {
    let u_top = cfg.u.iter().cloned().fold(0.0, f64::max);
    let t_top = cfg.t_macro.iter().cloned().fold(0.0, f64::max);
    let gap = cfg.near_eq.holder_gaps.iter().cloned().fold(0.0, f64::max);
    ((u_top + gap + cfg.near_eq.fill_margin * t_top.sqrt() + 1.0) / (epsilon * epsilon)).ceil() as usize
}

/// Predicted number of simulated events for the whole configuration.
pub fn predicted_events(cfg: &ExperimentConfig) -> f64 {
    let r = cfg.replicas as f64;
    let t_top = cfg.t_macro.iter().cloned().fold(0.0, f64::max);
    match cfg.experiment {
        ExperimentKind::FirstMoment | ExperimentKind::SecondMoment => {
            cfg.epsilon.iter().map(|e| r * empty_ic_events(t_top / e.powi(4))).sum()
        }
        ExperimentKind::Martingale => {
            let Some(&e0) = cfg.epsilon.first() else { return 0.0 };
            let t_macro = cfg.martingale.t_micro * e0.powi(4);
            r * empty_ic_events(cfg.martingale.t_micro)
                + cfg
                    .martingale
                    .trend_epsilon
                    .iter()
                    .map(|e| cfg.martingale.trend_replicas as f64 * empty_ic_events(t_macro / e.powi(4)))
                    .sum::<f64>()
        }
        ExperimentKind::Intertwine => {
            let t = cfg.intertwine.times.iter().cloned().fold(0.0, f64::max);
            2.0 * r * empty_ic_events(t)
        }
        ExperimentKind::NearEq => {
            cfg.epsilon.iter().map(|&e| r * bernoulli_ic_events(t_top / e.powi(4), near_eq_fill(cfg, e))).sum()
        }
        ExperimentKind::KernelsSuite | ExperimentKind::SheValidate => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip() {
        for k in ExperimentKind::ALL {
            let cfg = ExperimentConfig::preset(k);
            cfg.validate().unwrap();
            let s = cfg.to_toml().unwrap();
            assert_eq!(ExperimentConfig::from_toml(&s).unwrap(), cfg, "{s}");
            assert_eq!(ExperimentKind::parse(k.name()).unwrap(), k);
        }
    }

    #[test]
    fn minimal_file_uses_defaults() {
        let s = "experiment = \"first-moment\"\nepsilon = [0.3]\nt_macro = [0.1]\nu = [1.0]\nreplicas = 10\nseed = 3\nout_dir = \"x\"\nci_multiplier = 3.0\nevent_budget = 1e9\n";
        let cfg = ExperimentConfig::from_toml(s).unwrap();
        assert_eq!(cfg.she, SheOpts::default());
    }

    #[test]
    fn overlay_keeps_unlisted_keys() {
        let base = ExperimentConfig::preset(ExperimentKind::SheValidate);
        let cfg = base.overlay_toml("replicas = 200\n[she]\ndx = 0.05\n").unwrap();
        assert_eq!(cfg.replicas, 200);
        assert_eq!(cfg.she.dx, 0.05);
        assert_eq!(cfg.she.dt, base.she.dt);
        assert_eq!(cfg.seed, base.seed);
        assert!(base.overlay_toml("replicas = \"many\"").is_err());
    }

    #[test]
    fn budget_refuses() {
        let mut cfg = ExperimentConfig::preset(ExperimentKind::FirstMoment);
        cfg.epsilon = vec![0.01];
        assert!(matches!(cfg.validate(), Err(Error::Budget(_))));
    }
}
