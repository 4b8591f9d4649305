//! Time-domain integration of the delay equations and the emitted field.
//!
//! The amplitudes are integrated in the frame rotating at `Omega`,
//! `beta_i(t) = exp(-i Omega t) b_i(t)`, where the delayed terms carry the
//! exact phase `exp(i Omega d)`. All delays are integers and the step is
//! `1/M`, so delayed samples fall on grid points or interval midpoints.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{InitialAtomState, SystemConfig};
use crate::selfenergy::SelfEnergy;
use crate::C64;

pub const DEFAULT_SUBSTEPS: usize = 80;
pub const MIN_SUBSTEPS: usize = 20;
/// Largest allowed `h N^2 gamma / 2`.
pub const STEP_GUARD: f64 = 0.1;
pub const MIN_POINTS_PER_WAVELENGTH: f64 = 40.0;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Sampled amplitudes on the grid `t_k = k / M`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt: f64,
    pub steps: usize,
    pub substeps_per_tau: usize,
    pub omega_tau: f64,
    pub beta1: Vec<C64>,
    pub beta2: Vec<C64>,
    rot: Vec<[C64; 2]>,
    d_left: Vec<[C64; 2]>,
    d_right: Vec<[C64; 2]>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn duration(&self) -> f64 {
        self.steps as f64 / self.substeps_per_tau as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.substeps_per_tau as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn p1(&self) -> Vec<f64> {
        self.beta1.iter().map(|b| b.norm_sqr()).collect()
    }

    pub fn p2(&self) -> Vec<f64> {
        self.beta2.iter().map(|b| b.norm_sqr()).collect()
    }

    /// `I_a(t) = |beta_1|^2 + |beta_2|^2`.
    pub fn atomic_excitation(&self) -> Vec<f64> {
        self.beta1.iter().zip(&self.beta2).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect()
    }

    /// Index of the first sample with `t >= t0`.
    pub fn index_at(&self, t0: f64) -> usize {
        ((t0 * self.substeps_per_tau as f64).ceil().max(0.0) as usize).min(self.steps)
    }

    /// Lab-frame amplitudes at arbitrary `t` by cubic Hermite interpolation;
    /// zero for `t < 0`.
    pub fn beta_at(&self, t: f64) -> Result<[C64; 2]> {
        if t < 0.0 {
            return Ok([ZERO; 2]);
        }
        let m = self.substeps_per_tau as f64;
        let end = self.duration();
        if t > end * (1.0 + 1e-14) + 1e-14 {
            return Err(Error::HistoryExhausted { t, t_end: end });
        }
        let x = t * m;
        let j = (x.floor() as usize).min(self.steps.saturating_sub(1));
        let b = if self.steps == 0 {
            self.rot[0]
        } else {
            let u = (x - j as f64).clamp(0.0, 1.0);
            let h = self.dt;
            let (h00, h10, h01, h11) = hermite_basis(u);
            [0, 1].map(|i| {
                self.rot[j][i] * h00
                    + self.d_right[j][i] * (h10 * h)
                    + self.rot[j + 1][i] * h01
                    + self.d_left[j + 1][i] * (h11 * h)
            })
        };
        let phase = C64::from_polar(1.0, -self.omega_tau * t);
        Ok([b[0] * phase, b[1] * phase])
    }
}

fn hermite_basis(u: f64) -> (f64, f64, f64, f64) {
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0, u3 - 2.0 * u2 + u, -2.0 * u3 + 3.0 * u2, u3 - u2)
}

#[derive(Clone, Copy, PartialEq)]
enum Stage {
    Start,
    Mid,
    End,
}

struct Rhs {
    /// `(same, cross)` coefficients times `exp(i Omega d)`, for delays `d >= 1`.
    delayed: Vec<(usize, C64, C64)>,
    same0: f64,
    cross0: f64,
    m: usize,
    h: f64,
}

impl Rhs {
    fn new(config: &SystemConfig, m: usize) -> Self {
        let se = SelfEnergy::new(config);
        let (same, cross) = (se.same_coefficients(), se.cross_coefficients());
        let delayed = (1..same.len())
            .filter(|&d| same[d] != 0.0 || cross[d] != 0.0)
            .map(|d| {
                let ph = C64::from_polar(1.0, config.omega_tau * d as f64);
                (d, ph * same[d], ph * cross[d])
            })
            .collect();
        Self { delayed, same0: same[0], cross0: cross[0], m, h: 1.0 / m as f64 }
    }

    /// Right-hand side during step `k` at the given stage, with `now` the
    /// current (stage) value. A delayed term is active on the whole step iff
    /// its delayed interval starts at `t >= 0`.
    fn eval(&self, k: usize, stage: Stage, now: [C64; 2], tr: &Partial) -> [C64; 2] {
        let mut out = [
            -(now[0] * self.same0 + now[1] * self.cross0),
            -(now[1] * self.same0 + now[0] * self.cross0),
        ];
        for &(d, cs, cc) in &self.delayed {
            let shift = d * self.m;
            if k < shift {
                continue;
            }
            let j = k - shift;
            let past = match stage {
                Stage::Start => tr.rot[j],
                Stage::End => tr.rot[j + 1],
                Stage::Mid => {
                    let (a, b) = (tr.rot[j], tr.rot[j + 1]);
                    let (da, db) = (tr.d_right[j], tr.d_left[j + 1]);
                    [0, 1].map(|i| (a[i] + b[i]) * 0.5 + (da[i] - db[i]) * (self.h / 8.0))
                }
            };
            out[0] -= cs * past[0] + cc * past[1];
            out[1] -= cs * past[1] + cc * past[0];
        }
        out
    }
}

struct Partial {
    rot: Vec<[C64; 2]>,
    d_left: Vec<[C64; 2]>,
    d_right: Vec<[C64; 2]>,
}

fn axpy(a: [C64; 2], s: f64, b: [C64; 2]) -> [C64; 2] {
    [a[0] + b[0] * s, a[1] + b[1] * s]
}

/// Smallest admissible substep count, rounded up to a multiple of 20 and
/// at least [`DEFAULT_SUBSTEPS`].
pub fn substeps_for(config: &SystemConfig) -> usize {
    let n = config.n_points as f64;
    let need = (n * n * config.gamma_tau / 2.0 / STEP_GUARD).ceil() as usize;
    (need.div_ceil(20).max(1) * 20).max(DEFAULT_SUBSTEPS)
}

/// Integrates the two-atom delay equations up to `t_max` with step `1/M`.
pub fn evolve(config: &SystemConfig, initial: &InitialAtomState, t_max: f64, substeps_per_tau: usize) -> Result<Trajectory> {
    let m = substeps_per_tau;
    if m < MIN_SUBSTEPS {
        return Err(Error::InvalidConfig(format!("substeps per tau must be at least {MIN_SUBSTEPS}, got {m}")));
    }
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::InvalidConfig(format!("t_max must be finite and non-negative, got {t_max}")));
    }
    let h = 1.0 / m as f64;
    let n = config.n_points as f64;
    let stiffness = h * n * n * config.gamma_tau / 2.0;
    if stiffness > STEP_GUARD {
        return Err(Error::StepTooCoarse(stiffness));
    }
    let steps = (t_max * m as f64 - 1e-9).ceil().max(0.0) as usize;
    let rhs = Rhs::new(config, m);
    let mut tr = Partial {
        rot: Vec::with_capacity(steps + 1),
        d_left: Vec::with_capacity(steps + 1),
        d_right: Vec::with_capacity(steps + 1),
    };
    let c0 = initial.coefficients();
    tr.rot.push(c0);
    let f0 = rhs.eval(0, Stage::Start, c0, &tr);
    tr.d_right.push(f0);
    tr.d_left.push(f0);

    for k in 0..steps {
        let y = tr.rot[k];
        let k1 = tr.d_right[k];
        let k2 = rhs.eval(k, Stage::Mid, axpy(y, h / 2.0, k1), &tr);
        let k3 = rhs.eval(k, Stage::Mid, axpy(y, h / 2.0, k2), &tr);
        let k4 = rhs.eval(k, Stage::End, axpy(y, h, k3), &tr);
        let next = [0, 1].map(|i| y[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0));
        tr.rot.push(next);
        let left = rhs.eval(k, Stage::End, next, &tr);
        tr.d_left.push(left);
        let right = if (k + 1) % m == 0 {
            rhs.eval(k + 1, Stage::Start, next, &tr)
        } else {
            left
        };
        tr.d_right.push(right);
    }

    let (beta1, beta2) = tr
        .rot
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let ph = C64::from_polar(1.0, -config.omega_tau * k as f64 * h);
            (b[0] * ph, b[1] * ph)
        })
        .unzip();
    Ok(Trajectory {
        dt: h,
        steps,
        substeps_per_tau: m,
        omega_tau: config.omega_tau,
        beta1,
        beta2,
        rot: tr.rot,
        d_left: tr.d_left,
        d_right: tr.d_right,
    })
}

/// Field amplitude on a spatial grid at one instant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSnapshot {
    pub t: f64,
    pub x_grid: Vec<f64>,
    pub phi: Vec<C64>,
}

impl FieldSnapshot {
    pub fn intensity(&self) -> Vec<f64> {
        self.phi.iter().map(|p| p.norm_sqr()).collect()
    }
}

struct FieldEval {
    points: [Vec<f64>; 2],
    prefactor: C64,
}

impl FieldEval {
    fn new(config: &SystemConfig) -> Self {
        let layout = config.layout();
        Self {
            points: [layout.positions(0), layout.positions(1)],
            prefactor: C64::new(0.0, -(config.gamma_tau / 2.0).sqrt()),
        }
    }

    /// Right- and left-moving parts; `phi = R + L`. Uses `Theta(0) = 0`,
    /// so the field vanishes identically at `t = 0`.
    fn split(&self, traj: &Trajectory, x: f64, t: f64) -> Result<(C64, C64)> {
        let (mut r, mut l) = (ZERO, ZERO);
        for (i, pts) in self.points.iter().enumerate() {
            for &xij in pts {
                let tr = t - (x - xij).abs();
                if tr > 0.0 {
                    let b = traj.beta_at(tr)?[i];
                    if x >= xij {
                        r += b;
                    } else {
                        l += b;
                    }
                }
            }
        }
        Ok((r * self.prefactor, l * self.prefactor))
    }

    fn at(&self, traj: &Trajectory, x: f64, t: f64) -> Result<C64> {
        let (r, l) = self.split(traj, x, t)?;
        Ok(r + l)
    }
}

/// `phi(x, t)` on `x_grid`, reading the amplitude history from `traj`.
pub fn field_snapshot(config: &SystemConfig, traj: &Trajectory, t: f64, x_grid: &[f64]) -> Result<FieldSnapshot> {
    if x_grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidConfig("x grid must be finite".into()));
    }
    let fe = FieldEval::new(config);
    let phi = x_grid.iter().map(|&x| fe.at(traj, x, t)).collect::<Result<Vec<_>>>()?;
    Ok(FieldSnapshot { t, x_grid: x_grid.to_vec(), phi })
}

/// Atomic, photonic and total excitation probabilities.
///
/// `ip = int |phi|^2` includes the interference of right- and left-moving
/// light, which oscillates like `exp(2 i Omega x)` and makes `it` constant
/// only up to `O(1 / Omega tau)`. `ip_directional = int |R|^2 + |L|^2` is the
/// photon number proper; `ia + ip_directional` is conserved exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Excitations {
    pub ia: f64,
    pub ip: f64,
    pub it: f64,
    pub ip_directional: f64,
}

/// As [`excitations_with`] at the default sampling density.
pub fn excitations(config: &SystemConfig, traj: &Trajectory, t: f64, window: (f64, f64)) -> Result<Excitations> {
    excitations_with(config, traj, t, window, MIN_POINTS_PER_WAVELENGTH)
}

/// `I_p` is integrated by composite Simpson between the points where the
/// field is discontinuous or kinked: coupling points and the wavefronts
/// `x_ij +- (t - k)` for integer `k`.
pub fn excitations_with(
    config: &SystemConfig,
    traj: &Trajectory,
    t: f64,
    window: (f64, f64),
    points_per_wavelength: f64,
) -> Result<Excitations> {
    let layout = config.layout();
    let span = layout.half_span();
    let (lo, hi) = window;
    if !(lo <= -span && hi >= span) {
        return Err(Error::InvalidConfig(format!(
            "window [{lo}, {hi}] does not cover the coupling span [{}, {span}]",
            -span
        )));
    }
    if points_per_wavelength < MIN_POINTS_PER_WAVELENGTH {
        log::warn!("grid too coarse: {points_per_wavelength} points per wavelength (< {MIN_POINTS_PER_WAVELENGTH})");
    }
    let b = traj.beta_at(t)?;
    let ia = b[0].norm_sqr() + b[1].norm_sqr();

    let fe = FieldEval::new(config);
    let mut breaks = vec![lo, hi];
    let fronts = t.max(0.0).floor() as usize;
    for pts in &fe.points {
        for &xij in pts {
            breaks.push(xij);
            for k in 0..=fronts {
                let r = t - k as f64;
                if r >= 0.0 {
                    breaks.push(xij - r);
                    breaks.push(xij + r);
                }
            }
        }
    }
    breaks.retain(|x| *x >= lo && *x <= hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let wavelength = if config.omega_tau > 0.0 { std::f64::consts::TAU / config.omega_tau } else { f64::INFINITY };
    let max_panel = (wavelength / points_per_wavelength).min(0.05);
    let mut ip = 0.0;
    let mut ip_dir = 0.0;
    for w in breaks.windows(2) {
        let (a, bnd) = (w[0], w[1]);
        let len = bnd - a;
        if len <= 0.0 {
            continue;
        }
        let mut panels = ((len / max_panel).ceil() as usize).max(2);
        panels += panels % 2;
        let dx = len / panels as f64;
        // shrink the ends by a hair so that one-sided limits are sampled
        let eps = 1e-12 * (1.0 + a.abs().max(bnd.abs()));
        let mut sum = 0.0;
        let mut sum_dir = 0.0;
        for i in 0..=panels {
            let x = if i == 0 {
                a + eps
            } else if i == panels {
                bnd - eps
            } else {
                a + i as f64 * dx
            };
            let wgt = if i == 0 || i == panels {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let (r, l) = fe.split(traj, x, t)?;
            sum += wgt * (r + l).norm_sqr();
            sum_dir += wgt * (r.norm_sqr() + l.norm_sqr());
        }
        ip += sum * dx / 3.0;
        ip_dir += sum_dir * dx / 3.0;
    }
    Ok(Excitations { ia, ip, it: ia + ip, ip_directional: ip_dir })
}

/// Floats at 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub const TRAJECTORY_HEADER: &str = "t_over_tau,re_b1,im_b1,re_b2,im_b2,p1,p2,Ia";
pub const FIELD_HEADER: &str = "t_over_tau,x_over_vtau,intensity";

/// Writes every `stride`-th sample as CSV.
pub fn write_trajectory_csv<W: Write>(out: &mut W, traj: &Trajectory, stride: usize) -> std::io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for k in (0..traj.len()).step_by(stride.max(1)) {
        let (b1, b2) = (traj.beta1[k], traj.beta2[k]);
        let (p1, p2) = (b1.norm_sqr(), b2.norm_sqr());
        let row = [traj.time(k), b1.re, b1.im, b2.re, b2.im, p1, p2, p1 + p2].map(fmt17);
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_field_csv<W: Write>(out: &mut W, snapshots: &[FieldSnapshot]) -> std::io::Result<()> {
    writeln!(out, "{FIELD_HEADER}")?;
    for s in snapshots {
        for (x, p) in s.x_grid.iter().zip(&s.phi) {
            writeln!(out, "{},{},{}", fmt17(s.t), fmt17(*x), fmt17(p.norm_sqr()))?;
        }
    }
    Ok(())
}
