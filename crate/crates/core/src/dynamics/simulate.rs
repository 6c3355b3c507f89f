//! Event-driven sampling of both processes: one exponential clock with the
//! total rate, then a categorical pick among the enabled jumps. Enabled jumps
//! are kept in indexed sets that are patched locally after every event.

use rand::RngExt;
use rand_distr::{Distribution, Exp1};

use crate::config::{certified_trunc, FasepConfig, HalfLineConfig, LatticeConfig};
use crate::dynamics::transitions::{apply_asep, apply_fasep, fasep_left_enabled, fasep_right_enabled};
use crate::dynamics::{TransitionKind, WeakAsymParams};
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

/// Distance to the truncation at which a half-line run is aborted.
pub const SAFETY_MARGIN: usize = 4;

/// What to keep from a run.
#[derive(Clone, Debug, PartialEq)]
pub enum Record {
    Terminal,
    /// States at the given times (last event at or before each time).
    Snapshots(Vec<f64>),
    FullLog,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: TransitionKind,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub init: LatticeConfig,
    pub events: Option<Vec<Event>>,
    pub snapshots: Vec<(f64, LatticeConfig)>,
    pub terminal: LatticeConfig,
    pub t_end: f64,
    pub seed: u64,
    pub stream: u64,
    pub n_events: u64,
}

/// Set of small integers with O(1) insert, remove and indexed access.
#[derive(Clone, Debug)]
struct SiteSet {
    items: Vec<u32>,
    pos: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl SiteSet {
    fn new(capacity: usize) -> Self {
        SiteSet { items: Vec::new(), pos: vec![ABSENT; capacity] }
    }

    fn set(&mut self, x: usize, present: bool) {
        let here = self.pos[x] != ABSENT;
        if present && !here {
            self.pos[x] = self.items.len() as u32;
            self.items.push(x as u32);
        } else if !present && here {
            let i = self.pos[x] as usize;
            let last = self.items.pop().expect("non-empty");
            if last as usize != x {
                self.items[i] = last;
                self.pos[last as usize] = i as u32;
            }
            self.pos[x] = ABSENT;
        }
    }

    fn len(&self) -> usize {
        self.items.len()
    }

    fn get(&self, i: usize) -> usize {
        self.items[i] as usize
    }
}

trait Engine {
    fn total_rate(&self) -> f64;
    /// Choose a jump given `u` uniform on [0, total_rate).
    fn pick(&self, u: f64) -> TransitionKind;
    fn apply(&mut self, kind: TransitionKind) -> Result<()>;
    fn state(&self) -> LatticeConfig;
}

struct AsepEngine {
    /// occ[x] = σ(x) for x in 1..=n, with occ[0] and occ[n+1] as sentinels.
    occ: Vec<u8>,
    n: usize,
    injections: u64,
    right: SiteSet,
    left: SiteSet,
    p: f64,
    q: f64,
}

impl AsepEngine {
    fn new(cfg: &HalfLineConfig, params: &WeakAsymParams) -> Result<Self> {
        let n = cfg.n_trunc();
        if let Some(r) = cfg.rightmost() {
            if r + SAFETY_MARGIN >= n {
                return Err(Error::TruncationBreach { site: r, n_trunc: n });
            }
        }
        let mut occ = vec![0u8; n + 2];
        occ[1..=n].copy_from_slice(cfg.occ());
        let mut e = AsepEngine {
            occ,
            n,
            injections: cfg.injections(),
            right: SiteSet::new(n + 2),
            left: SiteSet::new(n + 2),
            p: params.p,
            q: params.q,
        };
        for b in 1..n {
            e.refresh(b);
        }
        Ok(e)
    }

    fn refresh(&mut self, b: usize) {
        if b == 0 || b >= self.n {
            return;
        }
        let (a, c) = (self.occ[b], self.occ[b + 1]);
        self.right.set(b, a == 1 && c == 0);
        self.left.set(b, a == 0 && c == 1);
    }

    fn touch(&mut self, site: usize) -> Result<()> {
        if site + SAFETY_MARGIN >= self.n {
            return Err(Error::TruncationBreach { site, n_trunc: self.n });
        }
        Ok(())
    }
}

impl Engine for AsepEngine {
    fn total_rate(&self) -> f64 {
        let inject = (self.occ[1] == 0) as usize;
        self.p * (self.right.len() + inject) as f64 + self.q * self.left.len() as f64
    }

    fn pick(&self, u: f64) -> TransitionKind {
        let r = self.p * self.right.len() as f64;
        if u < r {
            let i = ((u / self.p) as usize).min(self.right.len() - 1);
            return TransitionKind::AsepRight(self.right.get(i));
        }
        let u = u - r;
        let l = self.q * self.left.len() as f64;
        if u < l || self.occ[1] == 1 {
            let i = ((u / self.q) as usize).min(self.left.len() - 1);
            return TransitionKind::AsepLeft(self.left.get(i));
        }
        TransitionKind::AsepInject
    }

    fn apply(&mut self, kind: TransitionKind) -> Result<()> {
        match kind {
            TransitionKind::AsepInject => {
                self.occ[1] = 1;
                self.injections += 1;
                self.refresh(1);
                self.touch(1)
            }
            TransitionKind::AsepRight(x) => {
                self.occ[x] = 0;
                self.occ[x + 1] = 1;
                for b in x.saturating_sub(1)..=x + 1 {
                    self.refresh(b);
                }
                self.touch(x + 1)
            }
            TransitionKind::AsepLeft(x) => {
                self.occ[x] = 1;
                self.occ[x + 1] = 0;
                for b in x.saturating_sub(1)..=x + 1 {
                    self.refresh(b);
                }
                Ok(())
            }
            other => Err(Error::InvalidArgument(format!("{other:?} on the half-line"))),
        }
    }

    fn state(&self) -> LatticeConfig {
        let cfg = HalfLineConfig::from_occ(self.occ[1..=self.n].to_vec(), self.injections).expect("bits");
        LatticeConfig::HalfLine(cfg)
    }
}

struct FasepEngine {
    lo: i64,
    occ: Vec<u8>,
    right: SiteSet,
    left: SiteSet,
    p: f64,
    q: f64,
}

impl FasepEngine {
    /// The window is grown once, up front, by the certified displacement
    /// bound for the run; a jump within two sites of its edge is an error.
    fn new(cfg: &FasepConfig, params: &WeakAsymParams, t_end: f64) -> Result<Self> {
        if !cfg.validate_regular()?.is_regular {
            return Err(Error::NotRegular);
        }
        let margin = certified_trunc(0, t_end) as i64;
        let g = cfg.grown(cfg.window_lo() - margin, cfg.window_hi() + margin);
        let len = g.window_len();
        let mut e = FasepEngine {
            lo: g.window_lo(),
            occ: g.occ().to_vec(),
            right: SiteSet::new(len),
            left: SiteSet::new(len),
            p: params.p,
            q: params.q,
        };
        for i in 1..len - 1 {
            e.refresh(i);
        }
        Ok(e)
    }

    fn eta(&self, i: i64) -> u8 {
        if i < 0 {
            1
        } else {
            self.occ.get(i as usize).copied().unwrap_or(0)
        }
    }

    fn refresh(&mut self, i: usize) {
        if i == 0 || i + 1 >= self.occ.len() {
            return;
        }
        let eta = |x: i64| self.eta(x);
        let r = fasep_right_enabled(eta, i as i64);
        let l = fasep_left_enabled(eta, i as i64);
        self.right.set(i, r);
        self.left.set(i, l);
    }

    fn site_index(&self, x: i64) -> Result<usize> {
        let i = x - self.lo;
        if i < 2 || i + 2 >= self.occ.len() as i64 {
            return Err(Error::WindowTooSmall(format!("jump at {x} reached the window edge")));
        }
        Ok(i as usize)
    }
}

impl Engine for FasepEngine {
    fn total_rate(&self) -> f64 {
        self.p * self.right.len() as f64 + self.q * self.left.len() as f64
    }

    fn pick(&self, u: f64) -> TransitionKind {
        let r = self.p * self.right.len() as f64;
        if u < r || self.left.len() == 0 {
            let i = ((u / self.p) as usize).min(self.right.len() - 1);
            TransitionKind::FasepRight(self.lo + self.right.get(i) as i64)
        } else {
            let i = (((u - r) / self.q) as usize).min(self.left.len() - 1);
            TransitionKind::FasepLeft(self.lo + self.left.get(i) as i64)
        }
    }

    fn apply(&mut self, kind: TransitionKind) -> Result<()> {
        let (from, to) = match kind {
            TransitionKind::FasepRight(x) => (x, x + 1),
            TransitionKind::FasepLeft(x) => (x, x - 1),
            other => return Err(Error::InvalidArgument(format!("{other:?} on the facilitated lattice"))),
        };
        let fi = self.site_index(from)?;
        let ti = self.site_index(to)?;
        self.occ[fi] = 0;
        self.occ[ti] = 1;
        // the vacated site always keeps both neighbours occupied
        debug_assert!(self.occ[fi - 1] == 1 && self.occ[fi + 1] == 1);
        for i in fi.min(ti) - 1..=fi.max(ti) + 1 {
            self.refresh(i);
        }
        Ok(())
    }

    fn state(&self) -> LatticeConfig {
        LatticeConfig::Fasep(FasepConfig::new(self.lo, self.occ.clone()).expect("bits"))
    }
}

/// Sample one path on `[0, t_end]` from the replica stream 0 of `seed`.
pub fn simulate_ctmc(
    init: &LatticeConfig,
    params: &WeakAsymParams,
    t_end: f64,
    seed: u64,
    record: &Record,
) -> Result<Trajectory> {
    simulate_replica(init, params, t_end, seed, 0, record)
}

/// Sample one path using replica stream `stream` of `seed`.
pub fn simulate_replica(
    init: &LatticeConfig,
    params: &WeakAsymParams,
    t_end: f64,
    seed: u64,
    stream: u64,
    record: &Record,
) -> Result<Trajectory> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidTime(t_end));
    }
    let mut rng = rng::stream(seed, stream);
    match init {
        LatticeConfig::HalfLine(c) => {
            let mut e = AsepEngine::new(c, params)?;
            drive(&mut e, init, t_end, seed, stream, record, &mut rng)
        }
        LatticeConfig::Fasep(c) => {
            let mut e = FasepEngine::new(c, params, t_end)?;
            drive(&mut e, init, t_end, seed, stream, record, &mut rng)
        }
    }
}

fn drive<E: Engine>(
    engine: &mut E,
    init: &LatticeConfig,
    t_end: f64,
    seed: u64,
    stream: u64,
    record: &Record,
    rng: &mut StreamRng,
) -> Result<Trajectory> {
    let mut pending: Vec<f64> = match record {
        Record::Snapshots(ts) => {
            if let Some(bad) = ts.iter().find(|&&s| !(0.0..=t_end).contains(&s)) {
                return Err(Error::InvalidTime(*bad));
            }
            let mut ts = ts.clone();
            ts.sort_by(f64::total_cmp);
            ts.reverse();
            ts
        }
        _ => Vec::new(),
    };
    let mut snapshots = Vec::new();
    let mut events = matches!(record, Record::FullLog).then(Vec::new);
    let mut t = 0.0;
    let mut n_events = 0u64;
    loop {
        let total = engine.total_rate();
        if total <= 0.0 {
            break;
        }
        let hold: f64 = Exp1.sample(rng);
        let next = t + hold / total;
        if next > t_end {
            break;
        }
        while pending.last().is_some_and(|&s| s < next) {
            snapshots.push((pending.pop().unwrap(), engine.state()));
        }
        let kind = engine.pick(rng.random::<f64>() * total);
        engine.apply(kind)?;
        t = next;
        n_events += 1;
        if let Some(ev) = events.as_mut() {
            ev.push(Event { time: t, kind });
        }
    }
    let terminal = engine.state();
    while let Some(s) = pending.pop() {
        snapshots.push((s, terminal.clone()));
    }
    Ok(Trajectory { init: init.clone(), events, snapshots, terminal, t_end, seed, stream, n_events })
}

/// Apply the logged events to the initial state with the reference jump
/// rules.
pub fn replay(traj: &Trajectory) -> Result<LatticeConfig> {
    let events = traj.events.as_ref().ok_or(Error::MissingLog)?;
    let mut state = traj.init.clone();
    let mut last = 0.0;
    for ev in events {
        if ev.time <= last && last > 0.0 {
            return Err(Error::InvalidArgument("event times are not increasing".into()));
        }
        last = ev.time;
        state = match state {
            LatticeConfig::Fasep(c) => LatticeConfig::Fasep(apply_fasep(&c, ev.kind)?),
            LatticeConfig::HalfLine(c) => LatticeConfig::HalfLine(apply_asep(&c, ev.kind)?),
        };
    }
    Ok(state)
}

/// Two configurations describe the same particles (windows may differ).
pub fn same_state(a: &LatticeConfig, b: &LatticeConfig) -> bool {
    match (a, b) {
        (LatticeConfig::Fasep(x), LatticeConfig::Fasep(y)) => x.canonical() == y.canonical(),
        (LatticeConfig::HalfLine(x), LatticeConfig::HalfLine(y)) => {
            x.occupied_sites() == y.occupied_sites() && x.injections() == y.injections()
        }
        _ => false,
    }
}
