use crate::config::{FasepConfig, HalfLineConfig};
use crate::dynamics::WeakAsymParams;
use crate::error::{Error, Result};

/// What a single jump does.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransitionKind {
    /// Facilitated jump x → x+1.
    FasepRight(i64),
    /// Facilitated jump x → x−1.
    FasepLeft(i64),
    /// Half-line jump x → x+1.
    AsepRight(usize),
    /// Half-line jump x+1 → x (the bond is labelled by its left site).
    AsepLeft(usize),
    /// Reservoir injection at site 1.
    AsepInject,
}

/// Which of the two rates a transition carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RateKind {
    P,
    Q,
}

impl RateKind {
    pub fn value(self, params: &WeakAsymParams) -> f64 {
        match self {
            RateKind::P => params.p,
            RateKind::Q => params.q,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub kind: TransitionKind,
    pub rate_kind: RateKind,
    pub rate: f64,
}

impl Transition {
    fn new(kind: TransitionKind, rate_kind: RateKind, params: &WeakAsymParams) -> Self {
        Transition { kind, rate_kind, rate: rate_kind.value(params) }
    }
}

impl TransitionKind {
    /// One-byte code used by the binary trajectory format.
    pub fn code(self) -> u8 {
        match self {
            TransitionKind::FasepRight(_) => 0,
            TransitionKind::FasepLeft(_) => 1,
            TransitionKind::AsepRight(_) => 2,
            TransitionKind::AsepLeft(_) => 3,
            TransitionKind::AsepInject => 4,
        }
    }

    pub fn site(self) -> i64 {
        match self {
            TransitionKind::FasepRight(x) | TransitionKind::FasepLeft(x) => x,
            TransitionKind::AsepRight(x) | TransitionKind::AsepLeft(x) => x as i64,
            TransitionKind::AsepInject => 0,
        }
    }

    pub fn from_code(code: u8, site: i64) -> Result<Self> {
        let half = |s: i64| {
            usize::try_from(s).ok().filter(|&s| s >= 1).ok_or(Error::SiteOutOfRange(s))
        };
        match code {
            0 => Ok(TransitionKind::FasepRight(site)),
            1 => Ok(TransitionKind::FasepLeft(site)),
            2 => Ok(TransitionKind::AsepRight(half(site)?)),
            3 => Ok(TransitionKind::AsepLeft(half(site)?)),
            4 => Ok(TransitionKind::AsepInject),
            c => Err(Error::Parse(format!("unknown transition code {c}"))),
        }
    }

    pub fn rate_kind(self) -> RateKind {
        match self {
            TransitionKind::FasepLeft(_) | TransitionKind::AsepLeft(_) => RateKind::Q,
            _ => RateKind::P,
        }
    }
}

pub(crate) fn fasep_right_enabled(eta: impl Fn(i64) -> u8, x: i64) -> bool {
    eta(x - 1) == 1 && eta(x) == 1 && eta(x + 1) == 0
}

pub(crate) fn fasep_left_enabled(eta: impl Fn(i64) -> u8, x: i64) -> bool {
    eta(x + 1) == 1 && eta(x) == 1 && eta(x - 1) == 0
}

/// All enabled facilitated jumps of a regular configuration.
pub fn enabled_transitions_fasep(cfg: &FasepConfig, params: &WeakAsymParams) -> Result<Vec<Transition>> {
    if !cfg.validate_regular()?.is_regular {
        return Err(Error::NotRegular);
    }
    let eta = |x| cfg.eta(x);
    let mut out = Vec::new();
    for x in cfg.window_lo() - 1..=cfg.window_hi() + 1 {
        if fasep_right_enabled(eta, x) {
            out.push(Transition::new(TransitionKind::FasepRight(x), RateKind::P, params));
        }
        if fasep_left_enabled(eta, x) {
            out.push(Transition::new(TransitionKind::FasepLeft(x), RateKind::Q, params));
        }
    }
    Ok(out)
}

/// All enabled half-line jumps, treating the line as infinite beyond the
/// truncation.
pub fn enabled_transitions_asep(cfg: &HalfLineConfig, params: &WeakAsymParams) -> Vec<Transition> {
    let mut out = Vec::new();
    if cfg.sigma(1) == 0 {
        out.push(Transition::new(TransitionKind::AsepInject, RateKind::P, params));
    }
    for x in 1..=cfg.n_trunc() {
        let (a, b) = (cfg.sigma(x), cfg.sigma(x + 1));
        if a == 1 && b == 0 {
            out.push(Transition::new(TransitionKind::AsepRight(x), RateKind::P, params));
        }
        if a == 0 && b == 1 {
            out.push(Transition::new(TransitionKind::AsepLeft(x), RateKind::Q, params));
        }
    }
    out
}

/// Configuration after a facilitated jump; the window is grown explicitly
/// when the jump touches its edge.
pub fn apply_fasep(cfg: &FasepConfig, kind: TransitionKind) -> Result<FasepConfig> {
    let eta = |x| cfg.eta(x);
    let (from, to) = match kind {
        TransitionKind::FasepRight(x) if fasep_right_enabled(eta, x) => (x, x + 1),
        TransitionKind::FasepLeft(x) if fasep_left_enabled(eta, x) => (x, x - 1),
        _ => return Err(Error::InvalidArgument(format!("{kind:?} is not enabled in {cfg}"))),
    };
    let lo = from.min(to) - 1;
    let hi = from.max(to) + 1;
    let g = cfg.grown(lo, hi);
    let mut occ = g.occ().to_vec();
    occ[(from - g.window_lo()) as usize] = 0;
    occ[(to - g.window_lo()) as usize] = 1;
    FasepConfig::with_closures(g.window_lo(), occ, g.left_fill(), g.right_empty())
}

/// Configuration after a half-line jump.
pub fn apply_asep(cfg: &HalfLineConfig, kind: TransitionKind) -> Result<HalfLineConfig> {
    let mut next = cfg.clone();
    let n = cfg.n_trunc();
    let (from, to) = match kind {
        TransitionKind::AsepInject if cfg.sigma(1) == 0 => {
            let inj = cfg.injections() + 1;
            next.set_injections(inj);
            (None, 1)
        }
        TransitionKind::AsepRight(x) if cfg.sigma(x) == 1 && cfg.sigma(x + 1) == 0 => (Some(x), x + 1),
        TransitionKind::AsepLeft(x) if cfg.sigma(x) == 0 && cfg.sigma(x + 1) == 1 => (Some(x + 1), x),
        _ => return Err(Error::InvalidArgument(format!("{kind:?} is not enabled"))),
    };
    if to > n {
        return Err(Error::TruncationBreach { site: to, n_trunc: n });
    }
    let occ = next.occ_mut();
    if let Some(f) = from {
        occ[f - 1] = 0;
    }
    occ[to - 1] = 1;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::weak_asym_params;

    fn kinds(ts: &[Transition]) -> Vec<(TransitionKind, RateKind)> {
        let mut v: Vec<_> = ts.iter().map(|t| (t.kind, t.rate_kind)).collect();
        v.sort();
        v
    }

    #[test]
    fn step_has_one_jump() {
        let w = weak_asym_params(0.3).unwrap();
        let ts = enabled_transitions_fasep(&FasepConfig::step(0), &w).unwrap();
        assert_eq!(kinds(&ts), vec![(TransitionKind::FasepRight(0), RateKind::P)]);
        assert_eq!(ts[0].rate, w.p);
    }

    #[test]
    fn figure_one_transitions() {
        let w = weak_asym_params(0.3).unwrap();
        let cfg = FasepConfig::parse("@-9:111101011101011").unwrap();
        let mut expect = vec![
            (TransitionKind::FasepRight(5), RateKind::P),
            (TransitionKind::FasepRight(0), RateKind::P),
            (TransitionKind::FasepRight(-6), RateKind::P),
            (TransitionKind::FasepLeft(4), RateKind::Q),
            (TransitionKind::FasepLeft(-2), RateKind::Q),
        ];
        expect.sort();
        assert_eq!(kinds(&enabled_transitions_fasep(&cfg, &w).unwrap()), expect);

        let sigma = HalfLineConfig::from_sites(8, &[2, 3, 6, 7]).unwrap();
        let mut expect = vec![
            (TransitionKind::AsepInject, RateKind::P),
            (TransitionKind::AsepRight(3), RateKind::P),
            (TransitionKind::AsepRight(7), RateKind::P),
            (TransitionKind::AsepLeft(1), RateKind::Q),
            (TransitionKind::AsepLeft(5), RateKind::Q),
        ];
        expect.sort();
        assert_eq!(kinds(&enabled_transitions_asep(&sigma, &w)), expect);
    }

    #[test]
    fn packed_configuration_only_moves_front() {
        let w = weak_asym_params(0.3).unwrap();
        let cfg = FasepConfig::parse("@0:1111").unwrap();
        assert_eq!(kinds(&enabled_transitions_fasep(&cfg, &w).unwrap()), vec![(TransitionKind::FasepRight(3), RateKind::P)]);
        let full = HalfLineConfig::parse("11111").unwrap();
        assert_eq!(kinds(&enabled_transitions_asep(&full, &w)), vec![(TransitionKind::AsepRight(5), RateKind::P)]);
        assert!(matches!(apply_asep(&full, TransitionKind::AsepRight(5)), Err(Error::TruncationBreach { .. })));
    }

    #[test]
    fn empty_halfline_only_injects() {
        let w = weak_asym_params(0.3).unwrap();
        let e = HalfLineConfig::empty(6);
        assert_eq!(kinds(&enabled_transitions_asep(&e, &w)), vec![(TransitionKind::AsepInject, RateKind::P)]);
        let after = apply_asep(&e, TransitionKind::AsepInject).unwrap();
        assert_eq!(after.occupied_sites(), vec![1]);
        assert_eq!(after.injections(), 1);
    }

    #[test]
    fn irregular_rejected() {
        let w = weak_asym_params(0.3).unwrap();
        let cfg = FasepConfig::parse("@-1:1001").unwrap();
        assert_eq!(enabled_transitions_fasep(&cfg, &w).unwrap_err(), Error::NotRegular);
    }

    #[test]
    fn codes_roundtrip() {
        for k in [
            TransitionKind::FasepRight(-4),
            TransitionKind::FasepLeft(7),
            TransitionKind::AsepRight(3),
            TransitionKind::AsepLeft(1),
            TransitionKind::AsepInject,
        ] {
            assert_eq!(TransitionKind::from_code(k.code(), k.site()).unwrap(), k);
        }
        assert!(TransitionKind::from_code(9, 0).is_err());
        assert!(TransitionKind::from_code(2, 0).is_err());
    }

    #[test]
    fn fill_particle_jump_grows_window() {
        let cfg = FasepConfig::parse("@0:01").unwrap();
        let next = apply_fasep(&cfg, TransitionKind::FasepRight(-1)).unwrap();
        assert_eq!(next.eta(-1), 0);
        assert_eq!(next.eta(0), 1);
        assert!(next.window_lo() <= -2);
    }
}
