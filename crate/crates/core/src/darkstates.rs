//! Dark-mode frequencies, the dark-state lines in the (Omega, gamma) plane,
//! their intersections and the classification of oscillating bound states.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{InitialAtomState, InitialKind, SystemConfig, Topology};
use crate::selfenergy::{BranchSign, SelfEnergy};
use crate::C64;

/// Tolerance on the line equation when deciding whether a point lies on a line.
pub const LINE_TOL: f64 = 1e-9;

/// Exact integer or half-odd integer, stored doubled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const fn from_int(v: i64) -> Self {
        HalfInt(2 * v)
    }

    pub const fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// Integer value, if integral.
    pub const fn as_int(self) -> Option<i64> {
        if self.0 % 2 == 0 {
            Some(self.0 / 2)
        } else {
            None
        }
    }

    pub const fn is_odd_integer(self) -> bool {
        self.0.rem_euclid(4) == 2
    }

    pub const fn is_even_integer(self) -> bool {
        self.0.rem_euclid(4) == 0
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `26`, `51/2` or `25.5`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidConfig(format!("'{s}' is not an integer or half-integer"));
        if let Some(num) = s.strip_suffix("/2") {
            let n: i64 = num.trim().parse().map_err(|_| bad())?;
            return Ok(HalfInt(n));
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        let twice = 2.0 * v;
        if (twice - twice.round()).abs() > 1e-9 {
            return Err(bad());
        }
        Ok(HalfInt(twice.round() as i64))
    }
}

impl Serialize for HalfInt {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(de)?;
        let twice = 2.0 * v;
        if (twice - twice.round()).abs() > 1e-9 {
            return Err(serde::de::Error::custom("expected an integer or half-integer"));
        }
        Ok(HalfInt(twice.round() as i64))
    }
}

/// Geometric kind of a dark-state line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    Sloped,
    /// `q = N`: vertical at `Omega*tau = m pi`.
    VerticalQn,
    /// Antisymmetric separate modes with `n/N` even: vertical at `Omega*tau = m pi`
    /// with a different amplitude law.
    VerticalSpecial,
}

/// One dark-state line `Omega + (N gamma/2) cot(omega_q tau / 2) = omega_n`.
///
/// Along a sloped line `gamma = K_q (omega_n - Omega)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DarkLine {
    pub n: u64,
    pub branch: BranchSign,
    pub topology: Topology,
    pub n_points: usize,
    pub q: u32,
    pub omega_n_tau: f64,
    /// `(2/N) tan(q pi / 2N)`; infinite for vertical lines.
    pub slope_kq: f64,
    pub kind: LineKind,
}

/// Result of solving a line for gamma at a given Omega.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LineGamma {
    Gamma(f64),
    /// The line is vertical; it only constrains `Omega*tau`.
    Vertical { omega_tau: f64 },
}

impl DarkLine {
    /// The line for `(n, branch)`, or `None` if `n` is not admissible.
    pub fn new(topology: Topology, n_points: usize, branch: BranchSign, n: u64) -> Option<Self> {
        if n == 0 || n_points == 0 {
            return None;
        }
        let nn = n_points as u64;
        let two_n = 2 * nn;
        let multiple = n % nn == 0;
        let ratio = n / nn;
        let (q, kind) = match (topology, branch) {
            (_, BranchSign::Plus) => {
                if multiple && ratio % 2 == 0 {
                    return None;
                }
                (n % two_n, LineKind::Sloped)
            }
            (Topology::Separate, BranchSign::Minus) => {
                if n % 2 == 1 {
                    return None;
                }
                if multiple && ratio % 2 == 0 {
                    (0, LineKind::VerticalSpecial)
                } else {
                    (n % two_n, LineKind::Sloped)
                }
            }
            (Topology::Braided, BranchSign::Minus) => {
                if multiple && ratio % 2 == 1 {
                    return None;
                }
                ((n + nn) % two_n, LineKind::Sloped)
            }
        };
        let kind = if kind == LineKind::Sloped && q == nn { LineKind::VerticalQn } else { kind };
        let slope_kq = match kind {
            LineKind::Sloped => (2.0 / n_points as f64) * (q as f64 * PI / (2.0 * n_points as f64)).tan(),
            _ => f64::INFINITY,
        };
        Some(Self {
            n,
            branch,
            topology,
            n_points,
            q: q as u32,
            omega_n_tau: n as f64 * PI / n_points as f64,
            slope_kq,
            kind,
        })
    }

    pub fn is_vertical(&self) -> bool {
        self.kind != LineKind::Sloped
    }

    /// `omega_q tau / 2 = q pi / 2N`.
    fn half_omega_q(&self) -> f64 {
        self.q as f64 * PI / (2.0 * self.n_points as f64)
    }

    /// `(N/2) cot(omega_q tau/2)`, the Omega-shift per unit gamma.
    fn shift_per_gamma(&self) -> f64 {
        match self.kind {
            LineKind::Sloped => 0.5 * self.n_points as f64 / self.half_omega_q().tan(),
            _ => 0.0,
        }
    }

    /// `Omega*tau` on the line at a given `gamma*tau`.
    pub fn omega_at(&self, gamma_tau: f64) -> f64 {
        self.omega_n_tau - gamma_tau * self.shift_per_gamma()
    }

    /// Solves the line for `gamma*tau` at `omega_tau`.
    pub fn gamma_at(&self, omega_tau: f64) -> Result<LineGamma> {
        if self.is_vertical() {
            return Ok(LineGamma::Vertical { omega_tau: self.omega_n_tau });
        }
        let gamma = (self.omega_n_tau - omega_tau) / self.shift_per_gamma();
        if gamma > 0.0 {
            Ok(LineGamma::Gamma(gamma))
        } else {
            Err(Error::NonPositiveGamma { n: self.n, omega_tau, gamma_tau: gamma })
        }
    }

    /// Line equation residual `Omega + (N gamma/2) cot(omega_q/2) - omega_n`.
    pub fn line_residual(&self, omega_tau: f64, gamma_tau: f64) -> f64 {
        omega_tau + gamma_tau * self.shift_per_gamma() - self.omega_n_tau
    }

    pub fn contains(&self, omega_tau: f64, gamma_tau: f64, tol: f64) -> bool {
        self.line_residual(omega_tau, gamma_tau).abs() < tol
    }

    /// Amplitude of the dark mode at `gamma*tau`.
    pub fn amplitude(&self, gamma_tau: f64) -> f64 {
        let n = self.n_points as f64;
        match self.kind {
            LineKind::VerticalSpecial => 1.0 / (1.0 + n * (2.0 * n * n + 1.0) * gamma_tau / 6.0),
            _ => {
                let s = self.half_omega_q().sin();
                1.0 / (1.0 + 0.5 * n * gamma_tau / (s * s))
            }
        }
    }

    /// `m` such that `omega_n tau = m pi`, for vertical lines.
    pub fn vertical_m(&self) -> Option<u64> {
        if self.is_vertical() {
            Some(self.n / self.n_points as u64)
        } else {
            None
        }
    }
}

/// Pole-equation residual `|-i omega_n + i Omega + Sigma(-i omega_n)|`.
pub fn pole_residual(config: &SystemConfig, branch: BranchSign, omega_n_tau: f64) -> f64 {
    let se = SelfEnergy::new(config);
    let s = C64::new(0.0, -omega_n_tau);
    (s + C64::new(0.0, config.omega_tau) + se.pm(s, branch)).norm()
}

/// All admissible lines of `branch` whose intercept lies in `[lo, hi]`.
pub fn dark_mode_indices(
    topology: Topology,
    n_points: usize,
    branch: BranchSign,
    omega_window: (f64, f64),
) -> Vec<DarkLine> {
    let (lo, hi) = omega_window;
    if !(hi >= lo) || n_points == 0 {
        return Vec::new();
    }
    let nf = n_points as f64;
    let eps = 1e-9;
    let first = ((lo * nf / PI) - eps).ceil().max(1.0) as u64;
    let last_f = (hi * nf / PI) + eps;
    if last_f < 1.0 {
        return Vec::new();
    }
    let last = last_f.floor() as u64;
    (first..=last).filter_map(|n| DarkLine::new(topology, n_points, branch, n)).collect()
}

/// `gamma*tau` on line `(n, branch)` at `omega_tau`.
pub fn gamma_on_line(
    n: u64,
    branch: BranchSign,
    omega_tau: f64,
    topology: Topology,
    n_points: usize,
) -> Result<LineGamma> {
    DarkLine::new(topology, n_points, branch, n)
        .ok_or_else(|| Error::InvalidConfig(format!("n={n} is not an admissible {branch} dark mode")))?
        .gamma_at(omega_tau)
}

/// Amplitude of the `(n, branch)` dark mode at a configuration on its line.
pub fn dark_amplitude(n: u64, branch: BranchSign, config: &SystemConfig) -> Result<f64> {
    let line = DarkLine::new(config.topology, config.n_points, branch, n)
        .ok_or_else(|| Error::InvalidConfig(format!("n={n} is not an admissible {branch} dark mode")))?;
    let residual = pole_residual(config, branch, line.omega_n_tau);
    if residual > LINE_TOL {
        return Err(Error::NotOnDarkLine { n, residual });
    }
    Ok(line.amplitude(config.gamma_tau))
}

/// A dark mode supported at a specific configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DarkModeAt {
    pub n: u64,
    pub branch: BranchSign,
    pub q: u32,
    pub omega_n_tau: f64,
    pub amplitude: f64,
    pub kind: LineKind,
}

/// Every dark mode (both branches) supported at `config`.
///
/// Lines through `(Omega, gamma)` have `|omega_n - Omega| <= N^2 gamma / pi`,
/// which bounds the scan.
pub fn dark_modes_at(config: &SystemConfig) -> Vec<DarkModeAt> {
    let n = config.n_points as f64;
    let half_width = n * n * config.gamma_tau / PI * (1.0 + 1e-9) + 1e-6;
    let window = (config.omega_tau - half_width, config.omega_tau + half_width);
    let mut out = Vec::new();
    for branch in BranchSign::BOTH {
        for line in dark_mode_indices(config.topology, config.n_points, branch, window) {
            if line.contains(config.omega_tau, config.gamma_tau, LINE_TOL) {
                out.push(DarkModeAt {
                    n: line.n,
                    branch,
                    q: line.q,
                    omega_n_tau: line.omega_n_tau,
                    amplitude: line.amplitude(config.gamma_tau),
                    kind: line.kind,
                });
            }
        }
    }
    out.sort_by(|a, b| a.n.cmp(&b.n).then(a.branch.cmp(&b.branch)));
    out
}

/// Intersection of two opposite-slope lines at `Omega = m pi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObsPoint {
    pub topology: Topology,
    pub n_points: usize,
    pub m: HalfInt,
    pub p: HalfInt,
    pub q_tilde: u32,
    pub omega_tau: f64,
    pub gamma_tau: f64,
    /// `p pi - q_tilde pi / N`, half the splitting of the pair.
    pub omega_tilde_tau: f64,
    pub n1: u64,
    pub n2: u64,
    pub branch1: BranchSign,
    pub branch2: BranchSign,
    pub omega_n1_tau: f64,
    pub omega_n2_tau: f64,
    /// Full dark-mode inventory at the point, including `n1` and `n2`.
    pub modes: Vec<DarkModeAt>,
}

impl ObsPoint {
    /// Validates `(m, p, q_tilde)` against the admissible index sets and builds the point.
    pub fn new(topology: Topology, n_points: usize, m: HalfInt, p: HalfInt, q_tilde: u32) -> Result<Self> {
        let invalid = |why: &str| Error::InvalidConfig(format!("(m={m}, p={p}, q~={q_tilde}): {why}"));
        if topology == Topology::Braided && n_points < 2 {
            return Err(Error::BraidedWithSinglePoint);
        }
        if m.is_integer() != p.is_integer() {
            return Err(invalid("m and p must both be integers or both half-odd"));
        }
        if p.twice() <= 0 || p > m {
            return Err(invalid("need 0 < p <= m"));
        }
        if q_tilde == 0 || q_tilde as usize >= n_points {
            return Err(invalid("q~ must lie in 1..N-1"));
        }
        let diff = (m.twice() - p.twice()) / 2;
        let (branch1, branch2) = match (topology, m.is_integer()) {
            (Topology::Separate, false) => return Err(invalid("separate points need integer m")),
            (Topology::Separate, true) => {
                if diff % 2 == 0 {
                    return Err(invalid("m - p must be odd"));
                }
                (BranchSign::Plus, BranchSign::Plus)
            }
            (Topology::Braided, true) => {
                if diff % 2 == 1 {
                    (BranchSign::Plus, BranchSign::Plus)
                } else {
                    (BranchSign::Minus, BranchSign::Minus)
                }
            }
            (Topology::Braided, false) => {
                if p.twice() == 1 && 2 * q_tilde as usize > n_points {
                    return Err(invalid("p = 1/2 needs q~ <= N/2"));
                }
                if diff % 2 == 1 {
                    (BranchSign::Plus, BranchSign::Minus)
                } else {
                    (BranchSign::Minus, BranchSign::Plus)
                }
            }
        };
        let nn = n_points as i64;
        let n1 = (m.twice() - p.twice()) / 2 * nn + q_tilde as i64;
        let n2 = (m.twice() + p.twice()) / 2 * nn - q_tilde as i64;
        let omega_q = q_tilde as f64 * PI / n_points as f64;
        let omega_tilde = p.value() * PI - omega_q;
        let gamma = 2.0 * omega_tilde / n_points as f64 / (0.5 * omega_q).tan();
        if !(gamma > 0.0) {
            return Err(invalid("intersection at non-positive gamma"));
        }
        let line1 = DarkLine::new(topology, n_points, branch1, n1 as u64);
        let line2 = DarkLine::new(topology, n_points, branch2, n2 as u64);
        let (Some(line1), Some(line2)) = (line1, line2) else {
            return Err(invalid("indices are not admissible dark modes"));
        };
        let omega_tau = m.value() * PI;
        let config = SystemConfig::new(topology, n_points, omega_tau, gamma)?;
        let modes = dark_modes_at(&config);
        Ok(Self {
            topology,
            n_points,
            m,
            p,
            q_tilde,
            omega_tau,
            gamma_tau: gamma,
            omega_tilde_tau: omega_tilde,
            n1: n1 as u64,
            n2: n2 as u64,
            branch1,
            branch2,
            omega_n1_tau: line1.omega_n_tau,
            omega_n2_tau: line2.omega_n_tau,
            modes,
        })
    }

    pub fn config(&self) -> SystemConfig {
        SystemConfig::new(self.topology, self.n_points, self.omega_tau, self.gamma_tau)
            .expect("validated at construction")
    }

    pub fn omega_over_2pi(&self) -> f64 {
        self.omega_tau / (2.0 * PI)
    }

    pub fn gamma_over_2pi(&self) -> f64 {
        self.gamma_tau / (2.0 * PI)
    }

    /// Modes through the point other than the `(n1, n2)` pair.
    pub fn extra_modes(&self) -> Vec<DarkModeAt> {
        self.modes
            .iter()
            .filter(|d| !((d.n == self.n1 && d.branch == self.branch1) || (d.n == self.n2 && d.branch == self.branch2)))
            .copied()
            .collect()
    }

    /// `[1 + 2 w~ csc(omega_q~)]^-1`, shared by `n1` and `n2`.
    pub fn amplitude_pair(&self) -> f64 {
        let wq = self.q_tilde as f64 * PI / self.n_points as f64;
        1.0 / (1.0 + 2.0 * self.omega_tilde_tau / wq.sin())
    }

    /// `[1 + w~ cot(omega_q~/2)]^-1`, the `q = N` mode at `Omega`.
    pub fn amplitude_center(&self) -> f64 {
        let wq = self.q_tilde as f64 * PI / self.n_points as f64;
        1.0 / (1.0 + self.omega_tilde_tau / (0.5 * wq).tan())
    }

    /// `[1 + (2N^2+1) w~ cot(omega_q~/2) / 3]^-1`, the special antisymmetric mode at `Omega`.
    pub fn amplitude_special(&self) -> f64 {
        let n = self.n_points as f64;
        let wq = self.q_tilde as f64 * PI / n;
        1.0 / (1.0 + (2.0 * n * n + 1.0) * self.omega_tilde_tau / (0.5 * wq).tan() / 3.0)
    }
}

fn half_int_range(lo: HalfInt, hi: HalfInt) -> impl Iterator<Item = HalfInt> {
    (lo.twice()..=hi.twice()).map(HalfInt::from_twice)
}

/// Every opposite-slope intersection with `m` in `[1/2, m_max]`, ordered by `(m, p, q~)`.
pub fn obs_points(topology: Topology, n_points: usize, m_max: HalfInt) -> Vec<ObsPoint> {
    let mut out = Vec::new();
    if topology == Topology::Braided && n_points < 2 {
        return out;
    }
    for m in half_int_range(HalfInt::from_twice(1), m_max) {
        if topology == Topology::Separate && !m.is_integer() {
            continue;
        }
        let start = if m.is_integer() { 2 } else { 1 };
        for p_twice in (start..=m.twice()).step_by(2) {
            let p = HalfInt::from_twice(p_twice);
            for q_tilde in 1..n_points as u32 {
                if let Ok(pt) = ObsPoint::new(topology, n_points, m, p, q_tilde) {
                    out.push(pt);
                }
            }
        }
    }
    out.sort_by(|a, b| a.m.cmp(&b.m).then(a.p.cmp(&b.p)).then(a.q_tilde.cmp(&b.q_tilde)));
    out
}

/// Intersection of two arbitrary dark lines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub n1: u64,
    pub branch1: BranchSign,
    pub n2: u64,
    pub branch2: BranchSign,
    pub omega_tau: f64,
    pub gamma_tau: f64,
    /// Bookkeeping indices with `omega_bar = r pi + omega_q_bar` and
    /// `omega_tilde = p pi - omega_q_tilde`; absent for vertical lines and
    /// mixed separate pairs.
    pub r: Option<HalfInt>,
    pub p: Option<HalfInt>,
    pub q_bar: f64,
    pub q_tilde: f64,
}

fn floor_div(a: u64, b: u64) -> i64 {
    (a / b) as i64
}

/// Intersection of lines `(n1, b1)` and `(n2, b2)` at positive gamma.
pub fn general_intersection(
    topology: Topology,
    n_points: usize,
    a: (u64, BranchSign),
    b: (u64, BranchSign),
) -> Result<Intersection> {
    let (lo, hi) = if a.0 <= b.0 { (a, b) } else { (b, a) };
    let not_admissible =
        |n: u64, br: BranchSign| Error::InvalidConfig(format!("n={n} is not an admissible {br} dark mode"));
    let l1 = DarkLine::new(topology, n_points, lo.1, lo.0).ok_or_else(|| not_admissible(lo.0, lo.1))?;
    let l2 = DarkLine::new(topology, n_points, hi.1, hi.0).ok_or_else(|| not_admissible(hi.0, hi.1))?;
    let none = Error::NoPositiveGammaIntersection { n1: lo.0, n2: hi.0 };
    let nn = n_points as f64;
    let q_bar = 0.5 * (l1.q as f64 + l2.q as f64);
    let q_tilde = 0.5 * (l1.q as f64 - l2.q as f64);

    let special = |l: &DarkLine| l.kind == LineKind::VerticalSpecial;
    if special(&l1) || special(&l2) {
        let (vert, other) = if special(&l1) { (&l1, &l2) } else { (&l2, &l1) };
        if other.is_vertical() {
            return Err(none);
        }
        let omega = vert.omega_n_tau;
        let gamma = match other.gamma_at(omega) {
            Ok(LineGamma::Gamma(g)) => g,
            _ => return Err(none),
        };
        return Ok(Intersection {
            n1: lo.0,
            branch1: lo.1,
            n2: hi.0,
            branch2: hi.1,
            omega_tau: omega,
            gamma_tau: gamma,
            r: None,
            p: None,
            q_bar,
            q_tilde,
        });
    }
    if l1.q <= l2.q || lo.0 == hi.0 {
        return Err(none);
    }
    let two_n = 2 * n_points as u64;
    let big_l = |n: u64| floor_div(n, two_n);
    let big_lt = |n: u64| floor_div(n + n_points as u64, two_n);
    let (r, p) = match (topology, lo.1, hi.1) {
        (Topology::Braided, BranchSign::Minus, BranchSign::Minus) => {
            let (a1, a2) = (big_lt(lo.0), big_lt(hi.0));
            (Some(HalfInt::from_int(a1 + a2 - 1)), Some(HalfInt::from_int(a2 - a1)))
        }
        (Topology::Braided, BranchSign::Plus, BranchSign::Minus) => {
            let (a1, a2) = (big_l(lo.0), big_lt(hi.0));
            (Some(HalfInt::from_twice(2 * (a1 + a2) - 1)), Some(HalfInt::from_twice(2 * (a2 - a1) - 1)))
        }
        (Topology::Braided, BranchSign::Minus, BranchSign::Plus) => {
            let (a1, a2) = (big_lt(lo.0), big_l(hi.0));
            (Some(HalfInt::from_twice(2 * (a1 + a2) - 1)), Some(HalfInt::from_twice(2 * (a2 - a1) + 1)))
        }
        (_, x, y) if x == y => {
            let (a1, a2) = (big_l(lo.0), big_l(hi.0));
            (Some(HalfInt::from_int(a1 + a2)), Some(HalfInt::from_int(a2 - a1)))
        }
        _ => (None, None),
    };
    let w_qbar = q_bar * PI / nn;
    let w_qt = q_tilde * PI / nn;
    let omega_bar = 0.5 * (l1.omega_n_tau + l2.omega_n_tau);
    let omega_tilde = 0.5 * (l2.omega_n_tau - l1.omega_n_tau);
    let omega = omega_bar - w_qbar.sin() / w_qt.sin() * omega_tilde;
    let gamma = 2.0 * omega_tilde / nn * (w_qt.cos() - w_qbar.cos()) / w_qt.sin();
    if !(gamma > 0.0) {
        return Err(none);
    }
    Ok(Intersection {
        n1: lo.0,
        branch1: lo.1,
        n2: hi.0,
        branch2: hi.1,
        omega_tau: omega,
        gamma_tau: gamma,
        r,
        p,
        q_bar,
        q_tilde,
    })
}

/// Intersections for a list of index pairs; failures are kept per pair.
pub fn general_intersections(
    topology: Topology,
    n_points: usize,
    pairs: &[((u64, BranchSign), (u64, BranchSign))],
) -> Vec<Result<Intersection>> {
    pairs.iter().map(|&(a, b)| general_intersection(topology, n_points, a, b)).collect()
}

/// Long-time behaviour labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundStateClass {
    S1,
    S2,
    #[serde(rename = "H2-0")]
    H20,
    #[serde(rename = "H2-1")]
    H21,
    E1,
    E2,
    SingleAtom,
    Static,
    None,
}

impl fmt::Display for BoundStateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundStateClass::S1 => "S1",
            BoundStateClass::S2 => "S2",
            BoundStateClass::H20 => "H2-0",
            BoundStateClass::H21 => "H2-1",
            BoundStateClass::E1 => "E1",
            BoundStateClass::E2 => "E2",
            BoundStateClass::SingleAtom => "SingleAtom",
            BoundStateClass::Static => "Static",
            BoundStateClass::None => "None",
        })
    }
}

/// Harmonic content of one atom's long-time probability on the grid
/// `Omega - w~, Omega, Omega + w~`:
///
/// `p(t) = b0 + 2 Re[half e^{-i W t / 2}] + 2 Re[full e^{-i W t}]` with `W = 2 w~`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Harmonics {
    pub b0: f64,
    pub half: C64,
    pub full: C64,
}

impl Harmonics {
    pub fn zero() -> Self {
        Self { b0: 0.0, half: C64::new(0.0, 0.0), full: C64::new(0.0, 0.0) }
    }

    /// Builds from the complex weights at the left, centre and right frequency.
    pub fn from_weights(l: C64, c: C64, r: C64) -> Self {
        Self {
            b0: l.norm_sqr() + c.norm_sqr() + r.norm_sqr(),
            half: c * l.conj() + r * c.conj(),
            full: r * l.conj(),
        }
    }

    pub fn eval(&self, t: f64, omega_tilde_full: f64) -> f64 {
        let h = 2.0 * (self.half * C64::from_polar(1.0, -0.5 * omega_tilde_full * t)).re;
        let f = 2.0 * (self.full * C64::from_polar(1.0, -omega_tilde_full * t)).re;
        self.b0 + h + f
    }

    /// `B1` coefficient of `cos(W t/2)` when the weights are real.
    pub fn b1(&self) -> f64 {
        2.0 * self.half.re
    }

    /// `B2` coefficient of `cos(W t)` when the weights are real.
    pub fn b2(&self) -> f64 {
        2.0 * self.full.re
    }
}

/// Atom-resolved harmonic content of a mode inventory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeHarmonics {
    /// Distinct frequencies carrying weight, ascending.
    pub frequencies: Vec<f64>,
    /// `W`: the full oscillation frequency (`0` if fewer than two frequencies).
    pub omega_tilde_tau: f64,
    pub atoms: [Harmonics; 2],
}

const WEIGHT_TOL: f64 = 1e-12;

/// Per-atom weights `alpha_i(omega) = (c_+ A_+(omega) +- c_- A_-(omega)) / sqrt 2`.
pub fn atom_weights(modes: &[DarkModeAt], initial: &InitialAtomState) -> Vec<(f64, [C64; 2])> {
    let mut groups: Vec<(f64, [C64; 2])> = Vec::new();
    let (cp, cm) = (initial.c_plus(), initial.c_minus());
    for d in modes {
        let (w_plus, w_minus) = match d.branch {
            BranchSign::Plus => (cp * d.amplitude, C64::new(0.0, 0.0)),
            BranchSign::Minus => (C64::new(0.0, 0.0), cm * d.amplitude),
        };
        let a1 = (w_plus + w_minus) * std::f64::consts::FRAC_1_SQRT_2;
        let a2 = (w_plus - w_minus) * std::f64::consts::FRAC_1_SQRT_2;
        match groups.iter_mut().find(|(w, _)| (w - d.omega_n_tau).abs() < 1e-9) {
            Some((_, acc)) => {
                acc[0] += a1;
                acc[1] += a2;
            }
            None => groups.push((d.omega_n_tau, [a1, a2])),
        }
    }
    groups.retain(|(_, a)| a[0].norm() > WEIGHT_TOL || a[1].norm() > WEIGHT_TOL);
    groups.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    groups
}

fn cell_error(point: Option<&ObsPoint>) -> Error {
    match point {
        Some(p) => Error::UnclassifiedCell {
            m: p.m.to_string(),
            p: p.p.to_string(),
            n_points: p.n_points,
            q_tilde: p.q_tilde,
        },
        None => Error::UnclassifiedCell { m: "?".into(), p: "?".into(), n_points: 0, q_tilde: 0 },
    }
}

/// Harmonic decomposition of the long-time atomic probabilities.
///
/// Fails when the weighted frequencies do not fit an equally spaced
/// three-point grid.
pub fn mode_harmonics(modes: &[DarkModeAt], initial: &InitialAtomState) -> Result<ModeHarmonics> {
    let groups = atom_weights(modes, initial);
    let frequencies: Vec<f64> = groups.iter().map(|g| g.0).collect();
    let zero = C64::new(0.0, 0.0);
    let (omega_tilde, slots): (f64, [[C64; 2]; 3]) = match groups.as_slice() {
        [] => (0.0, [[zero; 2]; 3]),
        [c] => (0.0, [[zero; 2], c.1, [zero; 2]]),
        [l, r] => (r.0 - l.0, [l.1, [zero; 2], r.1]),
        [l, c, r] => {
            if ((c.0 - l.0) - (r.0 - c.0)).abs() > 1e-9 {
                return Err(cell_error(None));
            }
            (r.0 - l.0, [l.1, c.1, r.1])
        }
        _ => return Err(cell_error(None)),
    };
    let atoms = [0, 1].map(|i| Harmonics::from_weights(slots[0][i], slots[1][i], slots[2][i]));
    Ok(ModeHarmonics { frequencies, omega_tilde_tau: omega_tilde, atoms })
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum AtomPattern {
    Zero,
    Const,
    Single,
    Double,
}

fn pattern(h: &Harmonics) -> AtomPattern {
    let tol = 1e-12;
    if h.half.norm() > tol {
        AtomPattern::Double
    } else if h.full.norm() > tol {
        AtomPattern::Single
    } else if h.b0 > tol {
        AtomPattern::Const
    } else {
        AtomPattern::Zero
    }
}

fn close(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-12 * (1.0 + a.norm() + b.norm())
}

/// Label derived from the harmonic structure alone.
pub fn classify_by_harmonics(h: &ModeHarmonics) -> Option<BoundStateClass> {
    use AtomPattern::*;
    if h.frequencies.is_empty() {
        return Some(BoundStateClass::None);
    }
    if h.frequencies.len() == 1 {
        return Some(BoundStateClass::Static);
    }
    let [a, b] = &h.atoms;
    let (pa, pb) = (pattern(a), pattern(b));
    let identical = (a.b0 - b.b0).abs() < 1e-12 && close(a.half, b.half) && close(a.full, b.full);
    match (pa, pb) {
        (Single, Single) if identical => Some(BoundStateClass::S1),
        (Double, Double) if identical => Some(BoundStateClass::S2),
        (Double, Double) if close(a.half, -b.half) && close(a.full, b.full) => Some(BoundStateClass::E2),
        (Single, Single) if close(a.full, -b.full) => Some(BoundStateClass::E1),
        (Double, Const) | (Const, Double) => Some(BoundStateClass::H20),
        (Double, Single) | (Single, Double) => Some(BoundStateClass::H21),
        (Double, Zero) | (Zero, Double) => Some(BoundStateClass::SingleAtom),
        (Const, Const) | (Const, Zero) | (Zero, Const) => Some(BoundStateClass::Static),
        (Zero, Zero) => Some(BoundStateClass::None),
        _ => None,
    }
}

/// Label from the classification tables for `|+>`, `|->` and `|eg>` (`|ge>`
/// is treated as the mirror of `|eg>`). `None` for cells the tables do not list.
pub fn table_class(point: &ObsPoint, kind: InitialKind) -> Option<BoundStateClass> {
    use BoundStateClass::*;
    let n_odd = point.n_points % 2 == 1;
    let q_odd = point.q_tilde % 2 == 1;
    let m = point.m;
    let p = point.p;
    match point.topology {
        Topology::Separate => {
            let m_even = m.is_even_integer();
            match kind {
                InitialKind::Plus => Some(if m_even { S1 } else { S2 }),
                InitialKind::Minus => match (m_even, n_odd, q_odd) {
                    (true, true, true) | (true, false, false) => Some(S2),
                    (false, true, true) => Some(S1),
                    (false, false, false) => Some(S2),
                    _ => Option::None,
                },
                InitialKind::Eg | InitialKind::Ge => Some(match (m_even, n_odd, q_odd) {
                    (true, true, true) => H20,
                    (true, true, false) => E2,
                    (true, false, true) => E2,
                    (true, false, false) => H20,
                    (false, true, true) => H20,
                    (false, true, false) => S2,
                    (false, false, true) => H21,
                    (false, false, false) => SingleAtom,
                }),
            }
        }
        Topology::Braided => {
            if !m.is_integer() {
                return match kind {
                    InitialKind::Eg | InitialKind::Ge => Some(E1),
                    _ => Option::None,
                };
            }
            match kind {
                InitialKind::Plus => match (m.is_even_integer(), p.is_odd_integer()) {
                    (true, true) => Some(S1),
                    (false, false) => Some(S2),
                    _ => Option::None,
                },
                InitialKind::Minus => match (m.is_odd_integer(), p.is_odd_integer()) {
                    (true, true) => Some(S1),
                    (false, false) => Some(S2),
                    _ => Option::None,
                },
                InitialKind::Eg | InitialKind::Ge => Some(if p.is_odd_integer() { E2 } else { S2 }),
            }
        }
    }
}

/// Classification of the long-time state at an OBS point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    /// `None` for general superpositions, where only the inventory is reported.
    pub label: Option<BoundStateClass>,
    pub modes: Vec<DarkModeAt>,
    pub harmonics: Option<ModeHarmonics>,
}

/// Classifies the long-time behaviour at `point` for `initial`.
///
/// Table cells are used for `|+>`, `|->`, `|eg>`, `|ge>`; cells absent from
/// the tables fall back to the harmonic structure of the mode inventory.
pub fn classify(point: &ObsPoint, initial: &InitialAtomState) -> Result<Classification> {
    let harmonics = mode_harmonics(&point.modes, initial).ok();
    let Some(kind) = initial.kind() else {
        return Ok(Classification { label: None, modes: point.modes.clone(), harmonics });
    };
    let label = match table_class(point, kind) {
        Some(label) => label,
        None => harmonics.as_ref().and_then(classify_by_harmonics).ok_or_else(|| cell_error(Some(point)))?,
    };
    Ok(Classification { label: Some(label), modes: point.modes.clone(), harmonics })
}

/// Line entry of the JSON atlas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtlasLine {
    pub n: u64,
    pub branch: BranchSign,
    pub q: u32,
    /// `null` for vertical lines.
    pub slope: Option<f64>,
    pub intercept: f64,
    pub kind: LineKind,
}

/// Point entry of the JSON atlas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtlasPoint {
    pub m: HalfInt,
    pub p: HalfInt,
    pub q_tilde: u32,
    pub omega_tau: f64,
    pub gamma_tau: f64,
    pub n1: u64,
    pub n2: u64,
    pub class_by_initial_state: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atlas {
    pub topology: Topology,
    pub n_points: usize,
    pub lines: Vec<AtlasLine>,
    pub points: Vec<AtlasPoint>,
}

impl AtlasLine {
    pub fn from_line(l: &DarkLine) -> Self {
        Self {
            n: l.n,
            branch: l.branch,
            q: l.q,
            slope: if l.is_vertical() { None } else { Some(l.slope_kq) },
            intercept: l.omega_n_tau,
            kind: l.kind,
        }
    }
}

impl AtlasPoint {
    pub fn from_point(pt: &ObsPoint) -> Self {
        let mut classes = BTreeMap::new();
        for (name, kind) in [("plus", InitialKind::Plus), ("minus", InitialKind::Minus), ("eg", InitialKind::Eg)] {
            let label = match classify(pt, &InitialAtomState::from_kind(kind)) {
                Ok(c) => c.label.map(|l| l.to_string()).unwrap_or_default(),
                Err(e) => format!("error: {e}"),
            };
            classes.insert(name.to_string(), label);
        }
        Self {
            m: pt.m,
            p: pt.p,
            q_tilde: pt.q_tilde,
            omega_tau: pt.omega_tau,
            gamma_tau: pt.gamma_tau,
            n1: pt.n1,
            n2: pt.n2,
            class_by_initial_state: classes,
        }
    }
}

/// Lines with intercepts in `omega_window` and OBS points up to `m_max`.
pub fn atlas(topology: Topology, n_points: usize, omega_window: (f64, f64), m_max: HalfInt) -> Atlas {
    let mut lines = Vec::new();
    for branch in BranchSign::BOTH {
        lines.extend(dark_mode_indices(topology, n_points, branch, omega_window).iter().map(AtlasLine::from_line));
    }
    lines.sort_by(|a, b| a.n.cmp(&b.n).then(a.branch.cmp(&b.branch)));
    let points = obs_points(topology, n_points, m_max).iter().map(AtlasPoint::from_point).collect();
    Atlas { topology, n_points, lines, points }
}
