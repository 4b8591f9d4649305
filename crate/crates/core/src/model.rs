//! Domain types and the coupling-point geometry.
//!
//! Natural units are used throughout: the delay between neighbouring coupling
//! points is `tau = 1` and the group velocity is `v = 1`, so frequencies are
//! `omega * tau`, positions are in units of `v * tau` and times in units of
//! `tau`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Arrangement of the two atoms' coupling points along the waveguide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// Atom 1 occupies the N leftmost points, atom 2 the N rightmost.
    Separate,
    /// Points alternate 1, 2, 1, 2, ... from left to right.
    Braided,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::Separate => write!(f, "separate"),
            Topology::Braided => write!(f, "braided"),
        }
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "separate" | "sep" | "s" => Ok(Topology::Separate),
            "braided" | "bra" | "b" => Ok(Topology::Braided),
            other => Err(Error::InvalidConfig(format!("unknown topology '{other}'"))),
        }
    }
}

/// Default threshold for the rotating-wave check `omega / (N^2 gamma)`.
pub const DEFAULT_RWA_THRESHOLD: f64 = 10.0;

/// Default threshold for the Markovian check `gamma * tau * N^3`.
pub const DEFAULT_MARKOV_THRESHOLD: f64 = 0.1;

/// One physical setup: topology, points per atom and the two dimensionless
/// rates `omega * tau` and `gamma * tau`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub topology: Topology,
    pub n_points: usize,
    pub omega_tau: f64,
    pub gamma_tau: f64,
}

impl SystemConfig {
    /// Validates and builds a configuration.
    ///
    /// `gamma_tau = 0` is accepted as the free-atom limit.
    pub fn new(topology: Topology, n_points: usize, omega_tau: f64, gamma_tau: f64) -> Result<Self> {
        if n_points == 0 {
            return Err(Error::InvalidConfig("n_points must be at least 1".into()));
        }
        if topology == Topology::Braided && n_points < 2 {
            return Err(Error::BraidedWithSinglePoint);
        }
        if !(omega_tau.is_finite() && omega_tau > 0.0) {
            return Err(Error::InvalidConfig(format!("omega_tau must be positive, got {omega_tau}")));
        }
        if !(gamma_tau.is_finite() && gamma_tau >= 0.0) {
            return Err(Error::InvalidConfig(format!("gamma_tau must be non-negative, got {gamma_tau}")));
        }
        Ok(Self { topology, n_points, omega_tau, gamma_tau })
    }

    /// Builds a configuration from `omega*tau/(2 pi)` and `gamma*tau/(2 pi)`.
    pub fn from_over_2pi(topology: Topology, n_points: usize, omega: f64, gamma: f64) -> Result<Self> {
        Self::new(topology, n_points, omega * TAU, gamma * TAU)
    }

    pub fn omega_over_2pi(&self) -> f64 {
        self.omega_tau / TAU
    }

    pub fn gamma_over_2pi(&self) -> f64 {
        self.gamma_tau / TAU
    }

    pub fn with_omega(&self, omega_tau: f64) -> Result<Self> {
        Self::new(self.topology, self.n_points, omega_tau, self.gamma_tau)
    }

    pub fn with_gamma(&self, gamma_tau: f64) -> Result<Self> {
        Self::new(self.topology, self.n_points, self.omega_tau, gamma_tau)
    }

    /// `omega / (N^2 gamma)`; infinite when `gamma = 0`.
    pub fn rwa_ratio(&self) -> f64 {
        let n = self.n_points as f64;
        self.omega_tau / (n * n * self.gamma_tau)
    }

    /// Rotating-wave validity. A failing check is a warning, never an error.
    pub fn rwa_valid(&self, threshold: f64) -> bool {
        self.rwa_ratio() > threshold
    }

    /// `gamma * tau * N^3` below `threshold`.
    pub fn is_markovian(&self, threshold: f64) -> bool {
        let n = self.n_points as f64;
        self.gamma_tau * n * n * n < threshold
    }

    pub fn layout(&self) -> CouplingLayout {
        CouplingLayout::new(self.topology, self.n_points).expect("validated at construction")
    }
}

/// Multiset of pairwise delays (integer multiples of tau) with multiplicities.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelayMultiset(BTreeMap<u32, u32>);

impl DelayMultiset {
    pub fn insert(&mut self, delay: u32) {
        *self.0.entry(delay).or_insert(0) += 1;
    }

    pub fn multiplicity(&self, delay: u32) -> u32 {
        self.0.get(&delay).copied().unwrap_or(0)
    }

    /// Sum of multiplicities.
    pub fn total(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn max_delay(&self) -> u32 {
        self.0.keys().next_back().copied().unwrap_or(0)
    }

    /// `(delay, multiplicity)` in increasing delay order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.0.iter().map(|(&d, &m)| (d, m))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(u32, u32)> for DelayMultiset {
    fn from_iter<I: IntoIterator<Item = (u32, u32)>>(iter: I) -> Self {
        let mut set = DelayMultiset::default();
        for (d, m) in iter {
            *set.0.entry(d).or_insert(0) += m;
        }
        set
    }
}

/// Coupling-point positions of both atoms.
///
/// Positions are stored doubled (`2x`), so every position is an odd integer
/// and every delay is an exact integer number of tau.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingLayout {
    pub topology: Topology,
    pub n_points: usize,
    twice_positions: [Vec<i64>; 2],
    same_atom: DelayMultiset,
    cross_atom: DelayMultiset,
}

impl CouplingLayout {
    pub fn new(topology: Topology, n_points: usize) -> Result<Self> {
        if n_points == 0 {
            return Err(Error::InvalidConfig("n_points must be at least 1".into()));
        }
        if topology == Topology::Braided && n_points < 2 {
            return Err(Error::BraidedWithSinglePoint);
        }
        let n = n_points as i64;
        // slot k in 0..2N sits at x = k - (2N-1)/2
        let twice = |k: i64| 2 * k - (2 * n - 1);
        let (atom1, atom2): (Vec<i64>, Vec<i64>) = match topology {
            Topology::Separate => ((0..n).map(twice).collect(), (n..2 * n).map(twice).collect()),
            Topology::Braided => (
                (0..n).map(|j| twice(2 * j)).collect(),
                (0..n).map(|j| twice(2 * j + 1)).collect(),
            ),
        };
        let pair_delays = |a: &[i64], b: &[i64]| {
            let mut set = DelayMultiset::default();
            for &xa in a {
                for &xb in b {
                    set.insert(((xa - xb).abs() / 2) as u32);
                }
            }
            set
        };
        let same_atom = pair_delays(&atom1, &atom1);
        let cross_atom = pair_delays(&atom1, &atom2);
        Ok(Self { topology, n_points, twice_positions: [atom1, atom2], same_atom, cross_atom })
    }

    /// Positions of `atom` (0 or 1) in units of `v*tau`, left to right.
    pub fn positions(&self, atom: usize) -> Vec<f64> {
        self.twice_positions[atom].iter().map(|&x| x as f64 / 2.0).collect()
    }

    pub fn twice_positions(&self, atom: usize) -> &[i64] {
        &self.twice_positions[atom]
    }

    /// Same-atom delay multiset `D_I` (ordered pairs, N^2 in total).
    pub fn same_atom_delays(&self) -> &DelayMultiset {
        &self.same_atom
    }

    /// Cross-atom delay multiset `D_II` (ordered pairs, N^2 in total).
    pub fn cross_atom_delays(&self) -> &DelayMultiset {
        &self.cross_atom
    }

    /// Delays between atom `i` and atom `j` coupling points.
    pub fn delays(&self, i: usize, j: usize) -> &DelayMultiset {
        if i == j {
            &self.same_atom
        } else {
            &self.cross_atom
        }
    }

    /// Outermost coupling point, `(2N-1)/2`.
    pub fn half_span(&self) -> f64 {
        (2 * self.n_points - 1) as f64 / 2.0
    }
}

/// Convenience alias for [`CouplingLayout::new`] on a validated config.
pub fn coupling_positions(config: &SystemConfig) -> CouplingLayout {
    config.layout()
}

/// Single-excitation atomic state `c1|eg> + c2|ge>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialAtomState {
    pub c1: C64,
    pub c2: C64,
}

/// Recognized special initial states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialKind {
    Plus,
    Minus,
    Eg,
    Ge,
}

impl InitialAtomState {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(c1: C64, c2: C64) -> Result<Self> {
        let norm = c1.norm_sqr() + c2.norm_sqr();
        if (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { c1, c2 })
    }

    pub fn plus() -> Self {
        Self { c1: C64::new(FRAC_1_SQRT_2, 0.0), c2: C64::new(FRAC_1_SQRT_2, 0.0) }
    }

    pub fn minus() -> Self {
        Self { c1: C64::new(FRAC_1_SQRT_2, 0.0), c2: C64::new(-FRAC_1_SQRT_2, 0.0) }
    }

    pub fn eg() -> Self {
        Self { c1: C64::new(1.0, 0.0), c2: C64::new(0.0, 0.0) }
    }

    pub fn ge() -> Self {
        Self { c1: C64::new(0.0, 0.0), c2: C64::new(1.0, 0.0) }
    }

    pub fn from_kind(kind: InitialKind) -> Self {
        match kind {
            InitialKind::Plus => Self::plus(),
            InitialKind::Minus => Self::minus(),
            InitialKind::Eg => Self::eg(),
            InitialKind::Ge => Self::ge(),
        }
    }

    pub fn c_plus(&self) -> C64 {
        (self.c1 + self.c2) * FRAC_1_SQRT_2
    }

    pub fn c_minus(&self) -> C64 {
        (self.c1 - self.c2) * FRAC_1_SQRT_2
    }

    pub fn coefficients(&self) -> [C64; 2] {
        [self.c1, self.c2]
    }

    /// Matches the state against |+>, |->, |eg>, |ge> up to a global phase.
    pub fn kind(&self) -> Option<InitialKind> {
        const TOL: f64 = 1e-12;
        [InitialKind::Plus, InitialKind::Minus, InitialKind::Eg, InitialKind::Ge]
            .into_iter()
            .find(|&k| {
                let r = Self::from_kind(k);
                let overlap = r.c1.conj() * self.c1 + r.c2.conj() * self.c2;
                (overlap.norm() - 1.0).abs() < TOL
            })
    }
}

impl FromStr for InitialAtomState {
    type Err = Error;

    /// Accepts `plus`, `minus`, `eg`, `ge` or `custom re1,im1,re2,im2`
    /// (also `custom:` and a two-value real form `custom c1,c2`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "plus" | "+" => return Ok(Self::plus()),
            "minus" | "-" => return Ok(Self::minus()),
            "eg" => return Ok(Self::eg()),
            "ge" => return Ok(Self::ge()),
            _ => {}
        }
        let rest = lower
            .strip_prefix("custom")
            .ok_or_else(|| Error::InvalidConfig(format!("unknown initial state '{s}'")))?
            .trim_start_matches([':', ' ', '='])
            .trim();
        let values: Vec<f64> = rest
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidConfig(format!("bad custom coefficients '{rest}': {e}")))?;
        match values.as_slice() {
            [a, b] => Self::new(C64::new(*a, 0.0), C64::new(*b, 0.0)),
            [a, b, c, d] => Self::new(C64::new(*a, *b), C64::new(*c, *d)),
            _ => Err(Error::InvalidConfig("custom state needs 2 or 4 numbers".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separate_two_points() {
        let l = CouplingLayout::new(Topology::Separate, 2).unwrap();
        assert_eq!(l.positions(0), vec![-1.5, -0.5]);
        assert_eq!(l.positions(1), vec![0.5, 1.5]);
        let d2: Vec<_> = l.cross_atom_delays().iter().collect();
        assert_eq!(d2, vec![(1, 1), (2, 2), (3, 1)]);
        let d1: Vec<_> = l.same_atom_delays().iter().collect();
        assert_eq!(d1, vec![(0, 2), (1, 2)]);
    }

    #[test]
    fn braided_two_points() {
        let l = CouplingLayout::new(Topology::Braided, 2).unwrap();
        assert_eq!(l.positions(0), vec![-1.5, 0.5]);
        assert_eq!(l.positions(1), vec![-0.5, 1.5]);
        let d2: Vec<_> = l.cross_atom_delays().iter().collect();
        assert_eq!(d2, vec![(1, 3), (3, 1)]);
    }

    #[test]
    fn separate_single_point() {
        let l = CouplingLayout::new(Topology::Separate, 1).unwrap();
        assert_eq!(l.positions(0), vec![-0.5]);
        assert_eq!(l.positions(1), vec![0.5]);
        assert_eq!(l.same_atom_delays().iter().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(l.cross_atom_delays().iter().collect::<Vec<_>>(), vec![(1, 1)]);
    }

    #[test]
    fn braided_single_point_rejected() {
        assert_eq!(CouplingLayout::new(Topology::Braided, 1), Err(Error::BraidedWithSinglePoint));
        assert_eq!(
            SystemConfig::new(Topology::Braided, 1, 1.0, 0.1),
            Err(Error::BraidedWithSinglePoint)
        );
    }

    #[test]
    fn multiplicities_and_mirror() {
        for topology in [Topology::Separate, Topology::Braided] {
            for n in 2..=7 {
                let l = CouplingLayout::new(topology, n).unwrap();
                let nn = (n * n) as u32;
                assert_eq!(l.same_atom_delays().total(), nn);
                assert_eq!(l.cross_atom_delays().total(), nn);
                let (a, b) = (l.twice_positions(0), l.twice_positions(1));
                for j in 0..n {
                    assert_eq!(a[j], -b[n - 1 - j]);
                }
                // global set is the equidistant grid centred on the origin
                let mut all: Vec<i64> = a.iter().chain(b).copied().collect();
                all.sort();
                let expected: Vec<i64> = (0..2 * n as i64).map(|k| 2 * k - (2 * n as i64 - 1)).collect();
                assert_eq!(all, expected);
            }
        }
    }

    #[test]
    fn braided_cross_delays_are_odd() {
        for n in 2..=6 {
            let l = CouplingLayout::new(Topology::Braided, n).unwrap();
            assert!(l.cross_atom_delays().iter().all(|(d, _)| d % 2 == 1));
            assert!(l.same_atom_delays().iter().all(|(d, _)| d % 2 == 0));
        }
    }

    #[test]
    fn config_validation() {
        assert!(SystemConfig::new(Topology::Separate, 0, 1.0, 0.1).is_err());
        assert!(SystemConfig::new(Topology::Separate, 2, -1.0, 0.1).is_err());
        assert!(SystemConfig::new(Topology::Separate, 2, 1.0, -0.1).is_err());
        assert!(SystemConfig::new(Topology::Separate, 1, 1.0, 0.1).is_ok());
        let c = SystemConfig::from_over_2pi(Topology::Separate, 2, 13.0, 0.25).unwrap();
        assert!((c.omega_tau - 26.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(c.rwa_valid(DEFAULT_RWA_THRESHOLD));
        let weak = SystemConfig::from_over_2pi(Topology::Separate, 2, 1.0, 0.25).unwrap();
        assert!(!weak.rwa_valid(DEFAULT_RWA_THRESHOLD));
    }

    #[test]
    fn initial_states() {
        let p = InitialAtomState::plus();
        assert!((p.c_plus() - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(p.c_minus().norm() < 1e-15);
        let eg = InitialAtomState::eg();
        assert!((eg.c_plus().re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((eg.c_minus().re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(eg.kind(), Some(InitialKind::Eg));
        let phased = InitialAtomState::new(C64::new(0.0, FRAC_1_SQRT_2), C64::new(0.0, -FRAC_1_SQRT_2)).unwrap();
        assert_eq!(phased.kind(), Some(InitialKind::Minus));
        assert!(InitialAtomState::new(C64::new(1.0, 0.0), C64::new(0.1, 0.0)).is_err());
        let custom: InitialAtomState = "custom 0.6,0,0,0.8".parse().unwrap();
        assert_eq!(custom.kind(), None);
        assert!("custom:0.6,0.8".parse::<InitialAtomState>().is_ok());
        assert!("bogus".parse::<InitialAtomState>().is_err());
    }
}
