//! Poles of `E_pm(s) = 1 / (s + i Omega + Sigma_pm(s))` and their residues.
//!
//! Roots are found by Newton's method from a uniform seed grid and audited
//! with an argument-principle count on the boundary of the search region.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{InitialAtomState, SystemConfig};
use crate::selfenergy::{BranchSign, SelfEnergy};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Dark,
    QuasiDark,
    Lossy,
}

/// A pole `s` with residue weight `A = 1 / (1 + Sigma'(s))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub s_tau: C64,
    pub amplitude: C64,
    pub branch: BranchSign,
    pub kind: ModeKind,
}

impl Mode {
    /// `-Im(s tau) / 2 pi`, the mode frequency in caption units.
    pub fn freq_over_2pi(&self) -> f64 {
        -self.s_tau.im / TAU
    }

    /// `-Re(s tau) / 2 pi`.
    pub fn decay_over_2pi(&self) -> f64 {
        -self.s_tau.re / TAU
    }
}

/// Axis-aligned rectangle in the `s tau` plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    pub fn contains(&self, s: C64) -> bool {
        s.re >= self.re_min && s.re <= self.re_max && s.im >= self.im_min && s.im <= self.im_max
    }

    fn distance_to_boundary(&self, s: C64) -> f64 {
        (s.re - self.re_min)
            .abs()
            .min((s.re - self.re_max).abs())
            .min((s.im - self.im_min).abs())
            .min((s.im - self.im_max).abs())
    }
}

/// Default region: `Re in [-min(max(4 N^2 gamma, 2), 4 pi), 0]`,
/// `Im` within three free spectral ranges of `-Omega`.
pub fn default_region(config: &SystemConfig) -> Region {
    region_with_span(config, 3.0)
}

/// As [`default_region`] with `fsr` free spectral ranges (`2 pi`) on each side.
pub fn region_with_span(config: &SystemConfig, fsr: f64) -> Region {
    let n = config.n_points as f64;
    let depth = (4.0 * n * n * config.gamma_tau).max(2.0).min(4.0 * PI);
    Region {
        re_min: -depth,
        re_max: 0.0,
        im_min: -config.omega_tau - TAU * fsr,
        im_max: -config.omega_tau + TAU * fsr,
    }
}

/// Search settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleSearch {
    /// Seeds per side of a `2 pi x 2 pi` cell.
    pub seeds_per_2pi: usize,
    pub merge_tol: f64,
    pub residual_tol: f64,
    pub eps_dark: f64,
    /// Quasi-dark threshold as a fraction of `gamma tau`.
    pub kappa: f64,
    pub max_refinements: usize,
    /// The audit contour's right edge sits this far right of `re_max`, so
    /// that purely imaginary roots are strictly inside it.
    pub audit_margin: f64,
}

impl Default for PoleSearch {
    fn default() -> Self {
        Self {
            seeds_per_2pi: 40,
            merge_tol: 1e-8,
            residual_tol: 1e-11,
            eps_dark: 1e-9,
            kappa: 0.05,
            max_refinements: 3,
            audit_margin: 0.05,
        }
    }
}

struct PoleFn<'a> {
    se: &'a SelfEnergy,
    branch: BranchSign,
    i_omega: C64,
}

impl PoleFn<'_> {
    fn eval(&self, s: C64) -> (C64, C64) {
        let (sig, dsig) = self.se.pm_with_deriv(s, self.branch);
        (s + self.i_omega + sig, dsig + 1.0)
    }

    fn newton(&self, mut s: C64, tol: f64) -> Option<C64> {
        for _ in 0..80 {
            let (f, df) = self.eval(s);
            if !(f.re.is_finite() && f.im.is_finite()) || df.norm() == 0.0 {
                return None;
            }
            let mut step = f / df;
            let len = step.norm();
            if len > 1.0 {
                step /= len;
            }
            s -= step;
            if len < 1e-14 * (1.0 + s.norm()) {
                break;
            }
        }
        // two polishing steps, then accept on the residual
        for _ in 0..2 {
            let (f, df) = self.eval(s);
            s -= f / df;
        }
        let (f, df) = self.eval(s);
        (f.norm() < tol + residual_floor(s, df)).then_some(s)
    }

    /// Winding number of `f` around the rectangle, tracked with adaptive steps.
    fn winding(&self, r: &Region) -> Option<i64> {
        let corners = [
            C64::new(r.re_min, r.im_min),
            C64::new(r.re_max, r.im_min),
            C64::new(r.re_max, r.im_max),
            C64::new(r.re_min, r.im_max),
        ];
        let mut total = 0.0;
        for k in 0..4 {
            total += self.edge_phase(corners[k], corners[(k + 1) % 4])?;
        }
        let w = total / TAU;
        ((w - w.round()).abs() < 0.05).then_some(w.round() as i64)
    }

    fn edge_phase(&self, a: C64, b: C64) -> Option<f64> {
        let len = (b - a).norm();
        let pieces = (len / 0.02).ceil().max(1.0) as usize;
        let mut acc = 0.0;
        let mut prev = a;
        let mut fprev = self.eval(a);
        for k in 1..=pieces {
            let next = a + (b - a) * (k as f64 / pieces as f64);
            let fnext = self.eval(next);
            acc += self.segment_phase(prev, fprev, next, fnext, 0)?;
            prev = next;
            fprev = fnext;
        }
        Some(acc)
    }

    fn segment_phase(&self, a: C64, fa: (C64, C64), b: C64, fb: (C64, C64), depth: u32) -> Option<f64> {
        if fa.0.norm() == 0.0 || fb.0.norm() == 0.0 {
            return None;
        }
        let d = (fb.0 / fa.0).arg();
        let h = (b - a).norm();
        let rate = (fa.1 / fa.0).norm().max((fb.1 / fb.0).norm());
        if d.abs() < 0.3 && h * rate < 0.5 {
            return Some(d);
        }
        if depth > 40 {
            return None;
        }
        let mid = (a + b) * 0.5;
        let fm = self.eval(mid);
        Some(self.segment_phase(a, fa, mid, fm, depth + 1)? + self.segment_phase(mid, fm, b, fb, depth + 1)?)
    }
}

impl PoleSearch {
    fn classify(&self, s: C64, gamma_tau: f64) -> ModeKind {
        let re = s.re.abs();
        if re < self.eps_dark {
            ModeKind::Dark
        } else if re < self.kappa * gamma_tau {
            ModeKind::QuasiDark
        } else {
            ModeKind::Lossy
        }
    }

    fn seed_roots(&self, pf: &PoleFn<'_>, r: &Region, density: usize, roots: &mut Vec<C64>) {
        let nx = (((r.re_max - r.re_min) / TAU) * density as f64).ceil().max(2.0) as usize;
        let ny = (((r.im_max - r.im_min) / TAU) * density as f64).ceil().max(2.0) as usize;
        for i in 0..nx {
            let re = r.re_min + (i as f64 + 0.5) * (r.re_max - r.re_min) / nx as f64;
            for j in 0..ny {
                let im = r.im_min + (j as f64 + 0.5) * (r.im_max - r.im_min) / ny as f64;
                if let Some(s) = pf.newton(C64::new(re, im), self.residual_tol) {
                    if !roots.iter().any(|x| (x - s).norm() < self.merge_tol) {
                        roots.push(s);
                    }
                }
            }
        }
    }

    /// All poles of the `branch` propagator inside `region`.
    pub fn find(&self, config: &SystemConfig, branch: BranchSign, region: &Region) -> Result<Vec<Mode>> {
        let se = SelfEnergy::new(config);
        let pf = PoleFn { se: &se, branch, i_omega: C64::new(0.0, config.omega_tau) };
        let mut audit = *region;
        audit.re_max = region.re_max + self.audit_margin;

        let mut roots: Vec<C64> = Vec::new();
        let mut density = self.seeds_per_2pi;
        let mut last_mismatch = String::new();
        for attempt in 0..=self.max_refinements {
            // seed a little beyond the audit contour so that nothing just inside it is missed
            let pad = 0.1;
            let seed_region = Region {
                re_min: audit.re_min - pad,
                re_max: audit.re_max,
                im_min: audit.im_min - pad,
                im_max: audit.im_max + pad,
            };
            self.seed_roots(&pf, &seed_region, density, &mut roots);
            let contour = nudge_contour(&audit, &roots);
            let inside = roots.iter().filter(|s| contour.contains(**s)).count() as i64;
            match pf.winding(&contour) {
                Some(w) if w == inside => {
                    let mut modes: Vec<Mode> = roots
                        .iter()
                        .filter(|s| region.contains(C64::new(s.re.min(region.re_max), s.im)))
                        .filter(|s| s.re <= region.re_max + self.eps_dark)
                        .map(|&s| {
                            if region.distance_to_boundary(s) < 1e-6 && s.re.abs() > self.eps_dark {
                                log::warn!("pole at {s} lies within 1e-6 of the search boundary");
                            }
                            let (_, d) = pf.eval(s);
                            Mode {
                                s_tau: s,
                                amplitude: C64::new(1.0, 0.0) / d,
                                branch,
                                kind: self.classify(s, config.gamma_tau),
                            }
                        })
                        .collect();
                    modes.sort_by(|a, b| {
                        a.s_tau
                            .im
                            .total_cmp(&b.s_tau.im)
                            .then(a.s_tau.re.total_cmp(&b.s_tau.re))
                    });
                    return Ok(modes);
                }
                Some(w) => {
                    last_mismatch = format!(
                        "attempt {attempt}: winding number {w} but {inside} roots found (seed density {density})"
                    );
                }
                None => {
                    last_mismatch = format!("attempt {attempt}: winding number undetermined on the contour");
                }
            }
            log::debug!("{last_mismatch}");
            density *= 2;
        }
        Err(Error::NonConvergence(format!(
            "{last_mismatch}; region re [{}, {}], im [{}, {}]",
            region.re_min, region.re_max, region.im_min, region.im_max
        )))
    }

    /// Argument-principle zero count for `region` (right edge extended by the audit margin).
    pub fn count_zeros(&self, config: &SystemConfig, branch: BranchSign, region: &Region) -> Option<i64> {
        let se = SelfEnergy::new(config);
        let pf = PoleFn { se: &se, branch, i_omega: C64::new(0.0, config.omega_tau) };
        let mut audit = *region;
        audit.re_max += self.audit_margin;
        pf.winding(&audit)
    }
}

/// Smallest residual attainable in double precision at a root with
/// derivative `df`: the rounding of `s` itself, amplified by `|df|`.
pub fn residual_floor(s: C64, df: C64) -> f64 {
    8.0 * f64::EPSILON * (1.0 + s.norm()) * df.norm()
}

/// Moves each edge outward until no known root is close to it.
fn nudge_contour(r: &Region, roots: &[C64]) -> Region {
    let mut out = *r;
    let gap = 1e-3;
    for _ in 0..50 {
        let mut moved = false;
        for s in roots {
            let near_im = s.im > out.im_min - gap && s.im < out.im_max + gap;
            let near_re = s.re > out.re_min - gap && s.re < out.re_max + gap;
            if near_im && (s.re - out.re_min).abs() < gap {
                out.re_min -= 2.0 * gap;
                moved = true;
            }
            if near_im && (s.re - out.re_max).abs() < gap {
                out.re_max += 2.0 * gap;
                moved = true;
            }
            if near_re && (s.im - out.im_min).abs() < gap {
                out.im_min -= 2.0 * gap;
                moved = true;
            }
            if near_re && (s.im - out.im_max).abs() < gap {
                out.im_max += 2.0 * gap;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    out
}

/// Poles in `region` with default search settings.
pub fn find_poles(config: &SystemConfig, branch: BranchSign, region: &Region) -> Result<Vec<Mode>> {
    PoleSearch::default().find(config, branch, region)
}

/// Modes weighted per atom: `beta_i(t) = sum weight_i * exp(s t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedMode {
    pub mode: Mode,
    /// `(c_+ A)/sqrt 2` or `+-(c_- A)/sqrt 2` for atoms 1 and 2.
    pub weights: [C64; 2],
}

/// Pole expansion of both atoms' amplitudes over `region`.
///
/// Branches with zero initial weight are skipped.
pub fn mode_decomposition_in(
    config: &SystemConfig,
    initial: &InitialAtomState,
    region: &Region,
    search: &PoleSearch,
) -> Result<Vec<WeightedMode>> {
    let mut out = Vec::new();
    for (branch, c) in [(BranchSign::Plus, initial.c_plus()), (BranchSign::Minus, initial.c_minus())] {
        if c.norm() == 0.0 {
            continue;
        }
        for mode in search.find(config, branch, region)? {
            let w = c * mode.amplitude * std::f64::consts::FRAC_1_SQRT_2;
            let sign = branch.sign();
            out.push(WeightedMode { mode, weights: [w, w * sign] });
        }
    }
    Ok(out)
}

pub fn mode_decomposition(config: &SystemConfig, initial: &InitialAtomState) -> Result<Vec<WeightedMode>> {
    mode_decomposition_in(config, initial, &default_region(config), &PoleSearch::default())
}

/// Evaluates `beta_1, beta_2` at `t` from a mode expansion.
pub fn reconstruct(modes: &[WeightedMode], t: f64) -> [C64; 2] {
    let mut b = [C64::new(0.0, 0.0); 2];
    for m in modes {
        let e = (m.mode.s_tau * t).exp();
        b[0] += m.weights[0] * e;
        b[1] += m.weights[1] * e;
    }
    b
}
