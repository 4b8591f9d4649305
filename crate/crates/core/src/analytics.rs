//! Closed-form long-time observables.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::darkstates::{
    atom_weights, classify, dark_amplitude, BoundStateClass, DarkLine, DarkModeAt, LineKind, ModeHarmonics, ObsPoint,
};
use crate::dynamics::{fmt17, TRAJECTORY_HEADER};
use crate::error::{Error, Result};
use crate::model::{InitialAtomState, InitialKind, SystemConfig, Topology, DEFAULT_MARKOV_THRESHOLD};
use crate::poles::{Mode, ModeKind};
use crate::selfenergy::BranchSign;
use crate::C64;

/// Shape of the real piecewise stationary wave.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveForm {
    /// `L sin(k|x| - theta)`, symmetric modes.
    Sine,
    /// `-sgn(x) L sin(k|x| - theta)`, separate antisymmetric modes.
    SignedSine,
    /// `sgn(x) L' cos(k|x| - theta')`, braided antisymmetric modes.
    SignedCosine,
    /// `sgn(x) L~ sin(k|x|)` at `omega_n tau = m pi`, `m` even.
    SpecialSine,
}

/// Amplitude and phase on the shell `x_l < |x| < x_{l+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub amplitude: f64,
    pub theta: f64,
}

/// Bound-photon wave function of one dark mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryWave {
    pub n: u64,
    pub branch: BranchSign,
    pub topology: Topology,
    pub n_points: usize,
    pub gamma_tau: f64,
    pub k_n: f64,
    pub amplitude: f64,
    pub form: WaveForm,
    pub shells: Vec<Shell>,
    positions: [Vec<f64>; 2],
}

impl StationaryWave {
    pub fn new(n: u64, branch: BranchSign, config: &SystemConfig) -> Result<Self> {
        let a = dark_amplitude(n, branch, config)?;
        let line = DarkLine::new(config.topology, config.n_points, branch, n).expect("checked by dark_amplitude");
        let nn = config.n_points;
        let w = line.omega_n_tau;
        let sg = config.gamma_tau.sqrt();
        let sign_n = if n % 2 == 0 { 1.0 } else { -1.0 };
        let form = match (branch, config.topology, line.kind) {
            (BranchSign::Plus, _, _) => WaveForm::Sine,
            (BranchSign::Minus, Topology::Separate, LineKind::VerticalSpecial) => WaveForm::SpecialSine,
            (BranchSign::Minus, Topology::Separate, _) => WaveForm::SignedSine,
            (BranchSign::Minus, Topology::Braided, _) => WaveForm::SignedCosine,
        };
        let shells = (0..nn)
            .map(|l| {
                let ln = (l + nn) as f64;
                match form {
                    WaveForm::Sine | WaveForm::SignedSine => {
                        let theta = ln * w / 2.0;
                        Shell { amplitude: sign_n * sg * theta.sin() / (w / 2.0).sin() * a, theta }
                    }
                    WaveForm::SignedCosine => {
                        let theta = ln * (w + PI) / 2.0;
                        Shell { amplitude: sign_n * sg * theta.sin() / (w / 2.0).cos() * a, theta }
                    }
                    WaveForm::SpecialSine => {
                        let m = n / nn as u64;
                        let sign_m = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
                        Shell { amplitude: sign_m * sg * (nn - l) as f64 * a, theta: 0.0 }
                    }
                }
            })
            .collect();
        let layout = config.layout();
        Ok(Self {
            n,
            branch,
            topology: config.topology,
            n_points: nn,
            gamma_tau: config.gamma_tau,
            k_n: w,
            amplitude: a,
            form,
            shells,
            positions: [layout.positions(0), layout.positions(1)],
        })
    }

    /// Outermost coupling point `x_N = N - 1/2`.
    pub fn half_span(&self) -> f64 {
        self.n_points as f64 - 0.5
    }

    /// Shell index of `x`, `None` outside the coupling span.
    fn shell_of(&self, x: f64) -> Option<usize> {
        let ax = x.abs();
        if ax > self.half_span() {
            return None;
        }
        Some(if ax < 0.5 { 0 } else { ((ax - 0.5).floor() as usize + 1).min(self.n_points - 1) })
    }

    /// The real piecewise form.
    pub fn piecewise(&self, x: f64) -> f64 {
        let Some(l) = self.shell_of(x) else {
            return 0.0;
        };
        let sh = self.shells[l];
        let kx = self.k_n * x.abs();
        let sgn = if x > 0.0 {
            1.0
        } else if x < 0.0 {
            -1.0
        } else {
            0.0
        };
        match self.form {
            WaveForm::Sine => sh.amplitude * (kx - sh.theta).sin(),
            WaveForm::SignedSine => -sgn * sh.amplitude * (kx - sh.theta).sin(),
            WaveForm::SignedCosine => sgn * sh.amplitude * (kx - sh.theta).cos(),
            WaveForm::SpecialSine => sgn * sh.amplitude * kx.sin(),
        }
    }

    /// `(phi_1 +- phi_2)/sqrt 2` with `phi_i = -i sqrt(gamma/2) A sum_j exp(i k |x - x_ij|)`.
    pub fn direct_sum(&self, x: f64) -> C64 {
        let per_atom = |pts: &[f64]| -> C64 { pts.iter().map(|&p| C64::from_polar(1.0, self.k_n * (x - p).abs())).sum() };
        let (s1, s2) = (per_atom(&self.positions[0]), per_atom(&self.positions[1]));
        let pref = C64::new(0.0, -(self.gamma_tau / 2.0).sqrt() * self.amplitude) * FRAC_1_SQRT_2;
        pref * (s1 + s2 * self.branch.sign())
    }

    /// Unit phase `g` minimising `sum |piecewise - g direct_sum|^2` over `samples` points.
    pub fn gauge_phase(&self, samples: usize) -> C64 {
        let h = self.half_span();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..samples {
            let x = -h + 2.0 * h * (i as f64 + 0.5) / samples as f64;
            acc += self.direct_sum(x).conj() * self.piecewise(x);
        }
        if acc.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            acc / acc.norm()
        }
    }
}

/// Piecewise value of the `(n, branch)` stationary wave at `x`.
pub fn stationary_wavefunction(n: u64, branch: BranchSign, config: &SystemConfig, x: f64) -> Result<C64> {
    Ok(C64::new(StationaryWave::new(n, branch, config)?.piecewise(x), 0.0))
}

/// `(I_n, I~_n)` with `I~_n = A(1-A)` and `I_n = [1 + sigma sin(w)/(2w)] I~_n`.
///
/// The `sin` term is the interference of right- and left-moving light;
/// `sigma = -1` for braided antisymmetric modes, whose cosine-type wave
/// flips it, and `+1` otherwise.
pub fn photon_excitation(n: u64, branch: BranchSign, config: &SystemConfig) -> Result<(f64, f64)> {
    let a = dark_amplitude(n, branch, config)?;
    let w = n as f64 * PI / config.n_points as f64;
    Ok(photon_from_amplitude(a, w, interference_sign(config.topology, branch)))
}

fn interference_sign(topology: Topology, branch: BranchSign) -> f64 {
    match (topology, branch) {
        (Topology::Braided, BranchSign::Minus) => -1.0,
        _ => 1.0,
    }
}

fn photon_from_amplitude(a: f64, omega_n_tau: f64, sigma: f64) -> (f64, f64) {
    let it = a * (1.0 - a);
    ((1.0 + sigma * omega_n_tau.sin() / (2.0 * omega_n_tau)) * it, it)
}

/// Per-atom constants of `B0 + B1 cos(W t/2) + B2 cos(W t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BConstants {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
}

impl BConstants {
    pub fn eval(&self, t: f64, omega_tilde: f64) -> f64 {
        self.b0 + self.b1 * (0.5 * omega_tilde * t).cos() + self.b2 * (omega_tilde * t).cos()
    }
}

/// Long-time closed form at an OBS point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObsClosedForm {
    pub class: Option<BoundStateClass>,
    /// Pair amplitude `A`.
    pub a: f64,
    /// Centre amplitude `A'` (`q = N` mode).
    pub a_prime: f64,
    /// Special antisymmetric amplitude `A~`.
    pub a_tilde: f64,
    /// Full frequency `W = 2 w~`.
    pub omega_tilde_tau: f64,
    /// `Arg(c_+^* c_-)`.
    pub phase: f64,
    pub eta: f64,
    /// The class-specific constants written out for the cited cases.
    pub table_constants: Option<[BConstants; 2]>,
    pub harmonics: Option<ModeHarmonics>,
    /// `(omega, [alpha_1, alpha_2])` for every weighted frequency.
    pub weights: Vec<(f64, [C64; 2])>,
    modes: Vec<DarkModeAt>,
    c_sq: [f64; 2],
    topology: Topology,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

impl ObsClosedForm {
    /// Long-time amplitudes `beta_i(t) = sum alpha_i(omega) exp(-i omega t)`.
    pub fn amplitudes(&self, t: f64) -> [C64; 2] {
        let mut out = [zero(); 2];
        for (w, a) in &self.weights {
            let e = C64::from_polar(1.0, -w * t);
            out[0] += a[0] * e;
            out[1] += a[1] * e;
        }
        out
    }

    /// `|beta_1|^2, |beta_2|^2` from the full mode sum.
    pub fn probabilities(&self, t: f64) -> [f64; 2] {
        self.amplitudes(t).map(|b| b.norm_sqr())
    }

    /// The class law written with the tabulated constants, where cited.
    pub fn table_probabilities(&self, t: f64) -> Option<[f64; 2]> {
        self.table_constants.map(|b| b.map(|c| c.eval(t, self.omega_tilde_tau)))
    }

    fn by_branch(&self) -> [Vec<&DarkModeAt>; 2] {
        let plus = self.modes.iter().filter(|d| d.branch == BranchSign::Plus).collect();
        let minus = self.modes.iter().filter(|d| d.branch == BranchSign::Minus).collect();
        [plus, minus]
    }

    /// `I_a = sum_lambda |c_lambda|^2 sum_{n n'} A_n A_n' cos(w_nn' t)`.
    pub fn atomic_excitation(&self, t: f64) -> f64 {
        let mut total = 0.0;
        for (c2, group) in self.c_sq.iter().zip(self.by_branch()) {
            for a in &group {
                for b in &group {
                    total += c2 * a.amplitude * b.amplitude * ((a.omega_n_tau - b.omega_n_tau) * t).cos();
                }
            }
        }
        total
    }

    fn photon(&self, t: f64, exact: bool) -> f64 {
        let mut total = 0.0;
        for (c2, group) in self.c_sq.iter().zip(self.by_branch()) {
            let mut s = 0.0;
            for a in &group {
                let (i_n, i_tilde) = photon_from_amplitude(a.amplitude, a.omega_n_tau, interference_sign(self.topology, a.branch));
                s += if exact { i_n } else { i_tilde };
                for b in &group {
                    if a.n != b.n {
                        s -= a.amplitude * b.amplitude * ((a.omega_n_tau - b.omega_n_tau) * t).cos();
                    }
                }
            }
            total += c2 * s;
        }
        total
    }

    /// `I_p` with the exact `I_n`.
    pub fn photon_excitation(&self, t: f64) -> f64 {
        self.photon(t, true)
    }

    /// `I_p` with `I_n` replaced by `A(1-A)`.
    pub fn photon_excitation_approx(&self, t: f64) -> f64 {
        self.photon(t, false)
    }

    /// `I_t = sum_lambda |c_lambda|^2 sum_n (A_n^2 + I_n)`, time independent.
    pub fn total_excitation(&self) -> f64 {
        self.c_sq
            .iter()
            .zip(self.by_branch())
            .map(|(c2, g)| c2 * g.iter().map(|d| d.amplitude.powi(2) + photon_from_amplitude(d.amplitude, d.omega_n_tau, interference_sign(self.topology, d.branch)).0).sum::<f64>())
            .sum()
    }
}

fn table_constants(point: &ObsPoint, class: BoundStateClass, kind: InitialKind) -> Option<[BConstants; 2]> {
    use BoundStateClass::*;
    let (a, ap, at) = (point.amplitude_pair(), point.amplitude_center(), point.amplitude_special());
    let bc = |b0, b1, b2| BConstants { b0, b1, b2 };
    let n_even = point.n_points % 2 == 0;
    let q_odd = point.q_tilde % 2 == 1;
    let mirror = |pair: [BConstants; 2]| if kind == InitialKind::Ge { [pair[1], pair[0]] } else { pair };
    match (point.topology, class, kind) {
        (_, S1, InitialKind::Plus | InitialKind::Minus) => Some([bc(a * a, 0.0, a * a); 2]),
        (Topology::Separate, S2, InitialKind::Plus) => Some([bc(a * a + ap * ap / 2.0, 2.0 * a * ap, a * a); 2]),
        (Topology::Separate, H21, InitialKind::Eg | InitialKind::Ge) => {
            Some(mirror([bc(a * a / 2.0 + ap * ap, 2.0 * ap * a, a * a / 2.0), bc(a * a / 2.0, 0.0, a * a / 2.0)]))
        }
        (Topology::Separate, H20, InitialKind::Eg | InitialKind::Ge) if point.m.is_odd_integer() => {
            Some(mirror([bc(2.0 * a * a + ap * ap / 4.0, 2.0 * a * ap, 2.0 * a * a), bc(ap * ap / 4.0, 0.0, 0.0)]))
        }
        (Topology::Separate, SingleAtom, InitialKind::Eg | InitialKind::Ge) => {
            Some(mirror([bc(2.0 * a * a + ap * ap, 4.0 * a * ap, 2.0 * a * a), bc(0.0, 0.0, 0.0)]))
        }
        (Topology::Separate, E2, InitialKind::Eg | InitialKind::Ge) if n_even && q_odd => {
            let b0 = a * a / 2.0 + at * at / 4.0;
            Some(mirror([bc(b0, a * at, a * a / 2.0), bc(b0, -a * at, a * a / 2.0)]))
        }
        (Topology::Braided, E2, InitialKind::Eg | InitialKind::Ge) => {
            let b0 = a * a / 2.0 + ap * ap / 4.0;
            Some(mirror([bc(b0, a * ap, a * a / 2.0), bc(b0, -a * ap, a * a / 2.0)]))
        }
        (Topology::Braided, E1, InitialKind::Eg | InitialKind::Ge) => {
            Some(mirror([bc(a * a / 2.0, 0.0, a * a / 2.0), bc(a * a / 2.0, 0.0, -a * a / 2.0)]))
        }
        _ => Option::None,
    }
}

/// Closed-form long-time trajectory at `point` for `initial`.
pub fn obs_trajectory(point: &ObsPoint, initial: &InitialAtomState) -> Result<ObsClosedForm> {
    let cls = classify(point, initial)?;
    let (cp, cm) = (initial.c_plus(), initial.c_minus());
    let cross = cp.conj() * cm;
    let table = match (cls.label, initial.kind()) {
        (Some(label), Some(kind)) => table_constants(point, label, kind),
        _ => None,
    };
    Ok(ObsClosedForm {
        class: cls.label,
        a: point.amplitude_pair(),
        a_prime: point.amplitude_center(),
        a_tilde: point.amplitude_special(),
        omega_tilde_tau: 2.0 * point.omega_tilde_tau,
        phase: cross.arg(),
        eta: cross.norm(),
        table_constants: table,
        harmonics: cls.harmonics,
        weights: atom_weights(&point.modes, initial),
        modes: point.modes.clone(),
        c_sq: [cp.norm_sqr(), cm.norm_sqr()],
        topology: point.topology,
    })
}

/// Markovian quantities at `s = -i Omega` for braided atoms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DfiQuantities {
    pub lamb_shift: f64,
    pub gamma_eff: f64,
    pub exchange: f64,
    pub gamma_coll: f64,
    /// Approximate poles `s_pm`.
    pub s_plus: C64,
    pub s_minus: C64,
    pub markovian: bool,
}

pub fn dfi_quantities(config: &SystemConfig) -> Result<DfiQuantities> {
    if config.topology != Topology::Braided {
        return Err(Error::RequiresBraided);
    }
    let w = config.omega_tau;
    let r = w / PI;
    if (r - r.round()).abs() < 1e-12 {
        return Err(Error::DivergentAtResonance(w));
    }
    let n = config.n_points as f64;
    let g = config.gamma_tau;
    let den = 1.0 - (2.0 * w).cos();
    let lamb_shift = 0.5 * g * (n * (2.0 * w).sin() - (2.0 * n * w).sin()) / den;
    let gamma_eff = g * (1.0 - (2.0 * n * w).cos()) / den;
    let exchange = 0.5 * g * (2.0 * n * w.sin() - w.cos() * (2.0 * n * w).sin()) / den;
    let gamma_coll = g * w.cos() * (1.0 - (2.0 * n * w).cos()) / den;
    let pole = |sg: f64| {
        C64::new(-0.5 * (gamma_eff + sg * gamma_coll), -(w + lamb_shift + sg * exchange))
    };
    Ok(DfiQuantities {
        lamb_shift,
        gamma_eff,
        exchange,
        gamma_coll,
        s_plus: pole(1.0),
        s_minus: pole(-1.0),
        markovian: config.is_markovian(DEFAULT_MARKOV_THRESHOLD),
    })
}

/// Tolerance on `Omega tau N / pi` being an integer.
pub const DFI_TOL: f64 = 1e-9;

/// Ideal exchange law `(1/2)[1 +- cos(2 G t)]` at a decoherence-free point.
pub fn dfi_dynamics(config: &SystemConfig, t: f64) -> Result<(f64, f64)> {
    let q = dfi_quantities(config)?;
    let k = config.omega_tau * config.n_points as f64 / PI;
    let on_grid = (k - k.round()).abs() < DFI_TOL && k.round() as i64 % config.n_points as i64 != 0;
    if !on_grid {
        return Err(Error::NotDfiPoint(format!("omega*tau*N/pi = {k} is not a non-multiple-of-N integer")));
    }
    if !q.markovian {
        return Err(Error::NotDfiPoint(format!("gamma*tau = {} violates the Markovian condition", config.gamma_tau)));
    }
    let c = (2.0 * q.exchange * t).cos();
    Ok((0.5 * (1.0 + c), 0.5 * (1.0 - c)))
}

/// Parameters of the four-mode interference law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiObsLaw {
    pub a: f64,
    pub omega_tilde: f64,
    pub omega_tilde_qs: f64,
    pub gamma_qs: f64,
    /// Residue of the lower-frequency quasi-dark pole.
    pub a_qs: C64,
}

impl QuasiObsLaw {
    pub fn new(dark: &[Mode], quasi: &[Mode]) -> Result<Self> {
        let dark: Vec<&Mode> = dark.iter().filter(|m| m.kind == ModeKind::Dark).collect();
        let quasi: Vec<&Mode> = quasi.iter().filter(|m| m.kind == ModeKind::QuasiDark).collect();
        if dark.len() != 2 || quasi.len() != 2 {
            return Err(Error::ModeCountMismatch { dark: dark.len(), quasi: quasi.len() });
        }
        let freq = |m: &Mode| -m.s_tau.im;
        let (d_lo, d_hi) = if freq(dark[0]) < freq(dark[1]) { (dark[0], dark[1]) } else { (dark[1], dark[0]) };
        let (q_lo, q_hi) = if freq(quasi[0]) < freq(quasi[1]) { (quasi[0], quasi[1]) } else { (quasi[1], quasi[0]) };
        Ok(Self {
            a: 0.5 * (d_lo.amplitude.re + d_hi.amplitude.re),
            omega_tilde: freq(d_hi) - freq(d_lo),
            omega_tilde_qs: freq(q_hi) - freq(q_lo),
            gamma_qs: -0.5 * (q_lo.s_tau.re + q_hi.s_tau.re),
            a_qs: q_lo.amplitude,
        })
    }

    /// `2 [A cos(W t/2) + |a| exp(-g t) cos(W' t/2 + delta)]^2`.
    pub fn eval(&self, t: f64) -> f64 {
        let s = self.a * (0.5 * self.omega_tilde * t).cos()
            + self.a_qs.norm() * (-self.gamma_qs * t).exp() * (0.5 * self.omega_tilde_qs * t + self.a_qs.arg()).cos();
        2.0 * s * s
    }
}

/// Four-mode law for initial `|+>`; both atoms share it.
pub fn quasi_obs_trajectory(
    config: &SystemConfig,
    dark_modes: &[Mode],
    quasi_modes: &[Mode],
    initial: &InitialAtomState,
    t: f64,
) -> Result<(f64, f64)> {
    let _ = config;
    if initial.kind() != Some(InitialKind::Plus) {
        return Err(Error::UnsupportedInitialState("the four-mode law is stated for |+>".into()));
    }
    let p = QuasiObsLaw::new(dark_modes, quasi_modes)?.eval(t);
    Ok((p, p))
}

/// Writes closed-form series in the trajectory CSV layout; amplitude columns
/// are `NaN` where only probabilities are known.
pub fn write_closed_form_csv<W: Write>(
    out: &mut W,
    times: &[f64],
    mut sample: impl FnMut(f64) -> (Option<[C64; 2]>, [f64; 2]),
) -> std::io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for &t in times {
        let (amp, p) = sample(t);
        let [b1, b2] = amp.unwrap_or([C64::new(f64::NAN, f64::NAN); 2]);
        let row = [t, b1.re, b1.im, b2.re, b2.im, p[0], p[1], p[0] + p[1]].map(fmt17);
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Closed-form series for an OBS point.
pub fn write_obs_csv<W: Write>(out: &mut W, form: &ObsClosedForm, times: &[f64]) -> std::io::Result<()> {
    write_closed_form_csv(out, times, |t| {
        let amp = form.amplitudes(t);
        (Some(amp), amp.map(|b| b.norm_sqr()))
    })
}
