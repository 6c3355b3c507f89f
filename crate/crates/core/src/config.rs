//! Particle configurations for the facilitated process on a window of ℤ and
//! for the half-line exclusion process, the regular set, particle labels and
//! the mapping between the two.

use std::fmt;
use std::str::FromStr;

use rand::RngExt;

use crate::error::{Error, Result};
use crate::rng;

/// Largest window accepted by [`enumerate_window_configs`].
pub const MAX_ENUM_WINDOW: usize = 16;

/// Facilitated-process configuration stored on `[lo, lo+len)` with constant
/// closures outside the window.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FasepConfig {
    lo: i64,
    occ: Vec<u8>,
    left_fill: bool,
    right_empty: bool,
}

/// Result of [`FasepConfig::validate_regular`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Regularity {
    pub is_regular: bool,
    pub l: i64,
    pub r: i64,
}

/// Particle positions X₁ > X₂ > … read from right to left.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParticleLabels {
    pub positions: Vec<i64>,
}

fn check_bits(occ: &[u8]) -> Result<()> {
    match occ.iter().position(|&b| b > 1) {
        Some(i) => Err(Error::Parse(format!("occupation value {} at offset {i}", occ[i]))),
        None => Ok(()),
    }
}

impl FasepConfig {
    /// Window starting at `lo` with both closures set (filled on the left,
    /// empty on the right).
    pub fn new(lo: i64, occ: Vec<u8>) -> Result<Self> {
        Self::with_closures(lo, occ, true, true)
    }

    pub fn with_closures(lo: i64, occ: Vec<u8>, left_fill: bool, right_empty: bool) -> Result<Self> {
        check_bits(&occ)?;
        Ok(FasepConfig { lo, occ, left_fill, right_empty })
    }

    /// Step configuration η(x) = 1_{x ≤ x₀}.
    pub fn step(x0: i64) -> Self {
        FasepConfig { lo: x0, occ: vec![1, 0], left_fill: true, right_empty: true }
    }

    pub fn window_lo(&self) -> i64 {
        self.lo
    }

    pub fn window_hi(&self) -> i64 {
        self.lo + self.occ.len() as i64 - 1
    }

    pub fn window_len(&self) -> usize {
        self.occ.len()
    }

    pub fn occ(&self) -> &[u8] {
        &self.occ
    }

    pub fn left_fill(&self) -> bool {
        self.left_fill
    }

    pub fn right_empty(&self) -> bool {
        self.right_empty
    }

    /// η(x) on all of ℤ, using the closures outside the window.
    pub fn eta(&self, x: i64) -> u8 {
        if x < self.lo {
            self.left_fill as u8
        } else if x > self.window_hi() {
            (!self.right_empty) as u8
        } else {
            self.occ[(x - self.lo) as usize]
        }
    }

    /// Copy whose window covers `[lo, hi]` as well as the current window.
    pub fn grown(&self, lo: i64, hi: i64) -> Self {
        let new_lo = lo.min(self.lo);
        let new_hi = hi.max(self.window_hi());
        let occ = (new_lo..=new_hi).map(|x| self.eta(x)).collect();
        FasepConfig { lo: new_lo, occ, left_fill: self.left_fill, right_empty: self.right_empty }
    }

    /// Translate the configuration by `k` sites.
    pub fn shifted(&self, k: i64) -> Self {
        FasepConfig { lo: self.lo + k, ..self.clone() }
    }

    /// Smallest window representing the same configuration.
    pub fn canonical(&self) -> Self {
        let mut start = 0;
        if self.left_fill {
            while start < self.occ.len() && self.occ[start] == 1 {
                start += 1;
            }
        }
        let mut end = self.occ.len();
        if self.right_empty {
            while end > start && self.occ[end - 1] == 0 {
                end -= 1;
            }
        }
        FasepConfig {
            lo: self.lo + start as i64,
            occ: self.occ[start..end].to_vec(),
            left_fill: self.left_fill,
            right_empty: self.right_empty,
        }
    }

    /// Membership in the regular set, with the boundary sites L and R.
    pub fn validate_regular(&self) -> Result<Regularity> {
        if !self.left_fill || !self.right_empty {
            return Err(Error::WindowTooSmall(
                "closures do not certify the configuration outside the window".into(),
            ));
        }
        let r = match self.occ.iter().rposition(|&b| b == 1) {
            Some(i) => self.lo + i as i64 + 1,
            None => self.lo,
        };
        let l = match self.occ.iter().position(|&b| b == 0) {
            Some(i) => self.lo + i as i64 - 1,
            None => self.window_hi(),
        };
        let upto = (r - self.lo) as usize;
        let is_regular = !self.occ[..upto].windows(2).any(|w| w[0] == 0 && w[1] == 0);
        Ok(Regularity { is_regular, l, r })
    }

    fn require_regular(&self) -> Result<Regularity> {
        let reg = self.validate_regular()?;
        if reg.is_regular {
            Ok(reg)
        } else {
            Err(Error::NotRegular)
        }
    }

    /// Labels of the windowed particles (plus the fill particle at L when L
    /// sits just below the window), from right to left.
    pub fn label_particles(&self) -> Result<ParticleLabels> {
        let reg = self.require_regular()?;
        let bottom = self.lo.min(reg.l);
        let positions = (bottom..reg.r).rev().filter(|&x| self.eta(x) == 1).collect();
        Ok(ParticleLabels { positions })
    }

    /// The mapping σ(i) = 1 − η(X_i − 1).
    pub fn map_to_halfline(&self) -> Result<HalfLineConfig> {
        let labels = self.label_particles()?;
        let mut occ: Vec<u8> = labels.positions.iter().map(|&x| 1 - self.eta(x - 1)).collect();
        occ.push(0);
        Ok(HalfLineConfig { occ, injections: 0 })
    }

    /// Literal of the form `@lo:bits`.
    pub fn parse(s: &str) -> Result<Self> {
        let body = s.trim().strip_prefix('@').ok_or_else(|| Error::Parse(format!("missing '@' in {s:?}")))?;
        let (lo, bits) = body.split_once(':').ok_or_else(|| Error::Parse(format!("missing ':' in {s:?}")))?;
        let lo: i64 = lo.trim().parse().map_err(|_| Error::Parse(format!("bad offset in {s:?}")))?;
        let occ = parse_bits(bits)?;
        Self::new(lo, occ)
    }
}

fn parse_bits(bits: &str) -> Result<Vec<u8>> {
    bits.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::Parse(format!("unexpected character {c:?}"))),
        })
        .collect()
}

fn write_bits(f: &mut fmt::Formatter<'_>, occ: &[u8]) -> fmt::Result {
    for &b in occ {
        f.write_str(if b == 1 { "1" } else { "0" })?;
    }
    Ok(())
}

impl fmt::Display for FasepConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}:", self.lo)?;
        write_bits(f, &self.occ)
    }
}

impl FromStr for FasepConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Half-line exclusion configuration on sites 1..=n_trunc.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HalfLineConfig {
    occ: Vec<u8>,
    injections: u64,
}

impl HalfLineConfig {
    pub fn empty(n_trunc: usize) -> Self {
        HalfLineConfig { occ: vec![0; n_trunc], injections: 0 }
    }

    /// Occupation `occ[i]` is σ(i+1).
    pub fn from_occ(occ: Vec<u8>, injections: u64) -> Result<Self> {
        check_bits(&occ)?;
        Ok(HalfLineConfig { occ, injections })
    }

    pub fn from_sites(n_trunc: usize, sites: &[usize]) -> Result<Self> {
        let mut occ = vec![0; n_trunc];
        for &x in sites {
            if x == 0 || x > n_trunc {
                return Err(Error::SiteOutOfRange(x as i64));
            }
            occ[x - 1] = 1;
        }
        Ok(HalfLineConfig { occ, injections: 0 })
    }

    /// Bit string read as σ(1), σ(2), …
    pub fn parse(bits: &str) -> Result<Self> {
        Ok(HalfLineConfig { occ: parse_bits(bits)?, injections: 0 })
    }

    pub fn n_trunc(&self) -> usize {
        self.occ.len()
    }

    pub fn occ(&self) -> &[u8] {
        &self.occ
    }

    pub fn injections(&self) -> u64 {
        self.injections
    }

    pub fn with_injections(mut self, injections: u64) -> Self {
        self.injections = injections;
        self
    }

    /// σ(x) for x ≥ 1; zero beyond the truncation.
    pub fn sigma(&self, x: usize) -> u8 {
        if x == 0 {
            0
        } else {
            self.occ.get(x - 1).copied().unwrap_or(0)
        }
    }

    pub fn occupied_sites(&self) -> Vec<usize> {
        self.occ.iter().enumerate().filter(|(_, &b)| b == 1).map(|(i, _)| i + 1).collect()
    }

    pub fn particle_count(&self) -> usize {
        self.occ.iter().filter(|&&b| b == 1).count()
    }

    pub fn rightmost(&self) -> Option<usize> {
        self.occ.iter().rposition(|&b| b == 1).map(|i| i + 1)
    }

    /// Same occupation with storage extended (or shortened) to `n_trunc` sites.
    pub fn resized(&self, n_trunc: usize) -> Result<Self> {
        if self.rightmost().is_some_and(|r| r > n_trunc) {
            return Err(Error::InvalidArgument(format!("occupied site beyond {n_trunc}")));
        }
        let mut occ = self.occ.clone();
        occ.resize(n_trunc, 0);
        Ok(HalfLineConfig { occ, injections: self.injections })
    }

    pub(crate) fn occ_mut(&mut self) -> &mut Vec<u8> {
        &mut self.occ
    }

    pub(crate) fn set_injections(&mut self, n: u64) {
        self.injections = n;
    }
}

impl fmt::Display for HalfLineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bits(f, &self.occ)
    }
}

/// Truncation bound certified for a run of length `t_end` when the initial
/// occupation ends at site `extent`.
pub fn certified_trunc(extent: usize, t_end: f64) -> usize {
    extent + (1.5 * t_end + 12.0 * t_end.sqrt() + 64.0).ceil() as usize
}

/// Either lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticeConfig {
    Fasep(FasepConfig),
    HalfLine(HalfLineConfig),
}

/// Initial-condition generators.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialKind {
    /// η(x) = 1_{x ≤ x₀}.
    Step(i64),
    /// σ ≡ 0 with the given truncation.
    EmptyHalfline { n_trunc: usize },
    /// i.i.d. Bernoulli(ρ) on 1..=n_fill, stored up to n_trunc.
    Bernoulli { rho: f64, seed: u64, n_fill: usize, n_trunc: usize },
    /// `@lo:bits` for the facilitated process, plain bits for the half-line.
    Explicit(String),
}

pub fn make_initial(kind: &InitialKind) -> Result<LatticeConfig> {
    match kind {
        InitialKind::Step(x0) => Ok(LatticeConfig::Fasep(FasepConfig::step(*x0))),
        InitialKind::EmptyHalfline { n_trunc } => Ok(LatticeConfig::HalfLine(HalfLineConfig::empty(*n_trunc))),
        InitialKind::Bernoulli { rho, seed, n_fill, n_trunc } => {
            if !(0.0..=1.0).contains(rho) {
                return Err(Error::InvalidDensity(*rho));
            }
            if n_fill >= n_trunc {
                return Err(Error::InvalidArgument("fill region must end below the truncation".into()));
            }
            let mut r = rng::stream(*seed, 0);
            let mut occ: Vec<u8> = (0..*n_fill).map(|_| (r.random::<f64>() < *rho) as u8).collect();
            occ.resize(*n_trunc, 0);
            Ok(LatticeConfig::HalfLine(HalfLineConfig { occ, injections: 0 }))
        }
        InitialKind::Explicit(s) => {
            if s.trim_start().starts_with('@') {
                Ok(LatticeConfig::Fasep(FasepConfig::parse(s)?))
            } else {
                Ok(LatticeConfig::HalfLine(HalfLineConfig::parse(s)?))
            }
        }
    }
}

/// A windowed configuration with its regularity tag.
#[derive(Clone, Debug)]
pub struct TaggedConfig {
    pub config: FasepConfig,
    pub regularity: Regularity,
}

/// Every bit pattern on `[0, window_size)` with both closures, tagged.
pub fn enumerate_window_configs(window_size: usize) -> Result<Vec<TaggedConfig>> {
    if window_size > MAX_ENUM_WINDOW {
        return Err(Error::WindowTooLarge(window_size));
    }
    (0..1u32 << window_size)
        .map(|bits| {
            let occ = (0..window_size).map(|i| ((bits >> i) & 1) as u8).collect();
            let config = FasepConfig::new(0, occ)?;
            let regularity = config.validate_regular()?;
            Ok(TaggedConfig { config, regularity })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn figure_one() -> FasepConfig {
        FasepConfig::parse("@-9:111101011101011").unwrap()
    }

    #[test]
    fn step_is_regular() {
        let r = FasepConfig::step(0).validate_regular().unwrap();
        assert_eq!(r, Regularity { is_regular: true, l: 0, r: 1 });
    }

    #[test]
    fn figure_one_regularity_and_labels() {
        let cfg = figure_one();
        let r = cfg.validate_regular().unwrap();
        assert!(r.is_regular);
        assert_eq!((r.l, r.r), (-6, 6));
        let labels = cfg.label_particles().unwrap();
        assert_eq!(labels.positions, vec![5, 4, 2, 0, -1, -2, -4, -6, -7, -8, -9]);
    }

    #[test]
    fn figure_one_mapping() {
        let sigma = figure_one().map_to_halfline().unwrap();
        assert_eq!(sigma.occupied_sites(), vec![2, 3, 6, 7]);
        assert_eq!(sigma.injections(), 0);
    }

    #[test]
    fn adjacent_holes_are_irregular() {
        let cfg = FasepConfig::parse("@-1:1001").unwrap();
        assert!(!cfg.validate_regular().unwrap().is_regular);
        assert_eq!(cfg.label_particles(), Err(Error::NotRegular));
    }

    #[test]
    fn step_labels_are_consecutive() {
        let cfg = FasepConfig::step(0).grown(-5, 3);
        let labels = cfg.label_particles().unwrap();
        for (i, &x) in labels.positions.iter().enumerate() {
            assert_eq!(x, -(i as i64));
        }
        assert!(cfg.map_to_halfline().unwrap().occupied_sites().is_empty());
    }

    #[test]
    fn shift_moves_labels() {
        let a = figure_one().label_particles().unwrap().positions;
        let b = figure_one().shifted(3).label_particles().unwrap().positions;
        assert_eq!(a.iter().map(|x| x + 3).collect::<Vec<_>>(), b);
    }

    #[test]
    fn packed_with_one_hole() {
        // X₁ = 5 and the hole sits at X₁ − 1 = 4.
        let cfg = FasepConfig::parse("@0:111101").unwrap();
        let sigma = cfg.map_to_halfline().unwrap();
        assert_eq!(sigma.sigma(1), 1);
        assert!((2..=sigma.n_trunc()).all(|i| sigma.sigma(i) == 0));
    }

    #[test]
    fn literal_roundtrip() {
        let cfg = figure_one();
        assert_eq!(cfg.to_string().parse::<FasepConfig>().unwrap(), cfg);
        assert!(FasepConfig::parse("-6:11").is_err());
        assert!(FasepConfig::parse("@x:11").is_err());
        assert!(FasepConfig::parse("@0:12").is_err());
    }

    #[test]
    fn canonical_forgets_window() {
        let a = FasepConfig::step(2).grown(-4, 9).canonical();
        let b = FasepConfig::step(2).canonical();
        assert_eq!(a, b);
    }

    #[test]
    fn open_closures_cannot_be_certified() {
        let cfg = FasepConfig::with_closures(0, vec![1, 0], false, true).unwrap();
        assert!(matches!(cfg.validate_regular(), Err(Error::WindowTooSmall(_))));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_window_configs(2).unwrap().len(), 4);
        let three = enumerate_window_configs(3).unwrap();
        assert_eq!(three.len(), 8);
        // only patterns with a hole pair below the rightmost particle fail: 001
        let irregular: Vec<String> =
            three.iter().filter(|c| !c.regularity.is_regular).map(|c| c.config.to_string()).collect();
        assert_eq!(irregular, vec!["@0:001".to_string()]);
        assert_eq!(enumerate_window_configs(17).unwrap_err(), Error::WindowTooLarge(17));
    }

    #[test]
    fn bernoulli_initial_conditions() {
        let k = InitialKind::Bernoulli { rho: 0.0, seed: 4, n_fill: 50, n_trunc: 60 };
        match make_initial(&k).unwrap() {
            LatticeConfig::HalfLine(h) => assert_eq!(h.particle_count(), 0),
            _ => panic!(),
        }
        let n = 100_000;
        let k = InitialKind::Bernoulli { rho: 0.45, seed: 1, n_fill: n, n_trunc: n + 1 };
        let LatticeConfig::HalfLine(h) = make_initial(&k).unwrap() else { panic!() };
        let dens = h.particle_count() as f64 / n as f64;
        assert!((dens - 0.45).abs() <= 3.0 * (0.45f64 * 0.55 / n as f64).sqrt());
        let bad = InitialKind::Bernoulli { rho: 1.5, seed: 1, n_fill: 5, n_trunc: 9 };
        assert_eq!(make_initial(&bad), Err(Error::InvalidDensity(1.5)));
    }

    #[test]
    fn explicit_literals() {
        assert!(matches!(make_initial(&InitialKind::Explicit("@0:10".into())), Ok(LatticeConfig::Fasep(_))));
        let LatticeConfig::HalfLine(h) = make_initial(&InitialKind::Explicit("0110".into())).unwrap() else {
            panic!()
        };
        assert_eq!(h.occupied_sites(), vec![2, 3]);
    }
}
