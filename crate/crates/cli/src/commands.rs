use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use giant_bic::analytics::{dfi_dynamics, dfi_quantities, obs_trajectory, write_closed_form_csv, DfiQuantities};
use giant_bic::darkstates::{
    classify, classify_by_harmonics, dark_mode_indices, dark_modes_at, mode_harmonics, obs_points, pole_residual,
    AtlasLine, AtlasPoint, DarkModeAt, HalfInt, ObsPoint,
};
use giant_bic::dynamics::{
    evolve, field_snapshot, fmt17, substeps_for, write_field_csv, write_trajectory_csv, FieldSnapshot, Trajectory,
    FIELD_HEADER, TRAJECTORY_HEADER,
};
use giant_bic::model::{InitialKind, DEFAULT_RWA_THRESHOLD};
use giant_bic::poles::{default_region, find_poles, Mode};
use giant_bic::{BranchSign, InitialAtomState, SystemConfig, Topology};
use rayon::prelude::*;
use serde::Serialize;

use crate::angle::{parse_grid, parse_window, Grid};
use crate::failure::{Failure, Result};
use crate::output::{csv_header, open, write_json, Format, OutputArgs};
use crate::scenario::{InitialArgs, SystemArgs};

pub struct Ctx {
    pub hash: String,
}

fn header(ctx: &Ctx, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "{}", csv_header(&ctx.hash))?;
    Ok(())
}

fn warn_rwa(cfg: &SystemConfig) {
    if !cfg.rwa_valid(DEFAULT_RWA_THRESHOLD) {
        eprintln!(
            "warning: omega/(N^2 gamma) = {:.3} is below {DEFAULT_RWA_THRESHOLD}; the rotating-wave model is marginal",
            cfg.rwa_ratio()
        );
    }
}

// ---------------------------------------------------------------- dark-lines

#[derive(Args, Debug)]
pub struct DarkLinesArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Omega*tau window `lo:hi`, e.g. `0:10pi`.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    pub omega_window: (f64, f64),
    /// gamma*tau window `lo:hi`; lines are kept if they cross the window.
    /// Without it lines are selected by their gamma -> 0 intercept.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    pub gamma_window: Option<(f64, f64)>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Serialize)]
struct LineAtlas {
    topology: Topology,
    n_points: usize,
    omega_window: (f64, f64),
    gamma_window: Option<(f64, f64)>,
    lines: Vec<AtlasLine>,
    points: Vec<AtlasPoint>,
}

pub fn dark_lines(ctx: &Ctx, a: &DarkLinesArgs) -> Result<()> {
    let (top, n) = a.system.geometry()?;
    let (lo, hi) = a.omega_window;
    let nf = n as f64;
    let mut lines = Vec::new();
    let mut points = Vec::new();
    if hi >= lo {
        let (glo, ghi) = a.gamma_window.unwrap_or((0.0, 0.0));
        let reach = nf * nf * ghi.max(0.0) / PI;
        for b in BranchSign::BOTH {
            for l in dark_mode_indices(top, n, b, (lo - reach, hi + reach)) {
                let (w1, w2) = (l.omega_at(glo), l.omega_at(ghi));
                if w1.min(w2) <= hi && w1.max(w2) >= lo {
                    lines.push(AtlasLine::from_line(&l));
                }
            }
        }
        lines.sort_by(|x, y| x.n.cmp(&y.n).then(x.branch.cmp(&y.branch)));
        let m_max = HalfInt::from_twice((2.0 * hi.max(0.0) / PI + 1e-9).floor() as i64);
        let gwin = a.gamma_window.unwrap_or((0.0, f64::INFINITY));
        points = obs_points(top, n, m_max)
            .iter()
            .filter(|p| p.omega_tau >= lo - 1e-12 && p.omega_tau <= hi + 1e-12)
            .filter(|p| p.gamma_tau >= gwin.0 && p.gamma_tau <= gwin.1)
            .map(AtlasPoint::from_point)
            .collect();
    }
    let mut out = open(a.output.out.as_deref())?;
    match a.output.format_or(Format::Json) {
        Format::Json => {
            let atlas = LineAtlas { topology: top, n_points: n, omega_window: a.omega_window, gamma_window: a.gamma_window, lines, points };
            write_json(&mut *out, &ctx.hash, &atlas)?;
        }
        Format::Csv => {
            header(ctx, &mut *out)?;
            writeln!(out, "n,branch,q,kind,slope_kq,intercept_omega_tau,intercept_omega_over_2pi")?;
            for l in &lines {
                let slope = l.slope.map(fmt17).unwrap_or_else(|| "inf".into());
                let kind = serde_json::to_value(l.kind)?.as_str().unwrap_or_default().to_string();
                writeln!(out, "{},{},{},{kind},{slope},{},{}", l.n, l.branch, l.q, fmt17(l.intercept), fmt17(l.intercept / TAU))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

// ---------------------------------------------------------------- modes

#[derive(Args, Debug)]
pub struct ModesArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Serialize)]
struct ModeRow {
    branch: BranchSign,
    kind: giant_bic::poles::ModeKind,
    re_s_tau: f64,
    im_s_tau: f64,
    freq_over_2pi: f64,
    decay_over_2pi: f64,
    re_amplitude: f64,
    im_amplitude: f64,
}

impl From<&Mode> for ModeRow {
    fn from(m: &Mode) -> Self {
        Self {
            branch: m.branch,
            kind: m.kind,
            re_s_tau: m.s_tau.re,
            im_s_tau: m.s_tau.im,
            freq_over_2pi: m.freq_over_2pi(),
            decay_over_2pi: m.decay_over_2pi(),
            re_amplitude: m.amplitude.re,
            im_amplitude: m.amplitude.im,
        }
    }
}

pub fn modes(ctx: &Ctx, a: &ModesArgs) -> Result<()> {
    let cfg = a.system.system()?;
    warn_rwa(&cfg);
    let region = default_region(&cfg);
    let mut rows = Vec::new();
    for b in BranchSign::BOTH {
        let mut found = find_poles(&cfg, b, &region)?;
        found.sort_by(|x, y| x.s_tau.im.total_cmp(&y.s_tau.im).reverse().then(x.s_tau.re.total_cmp(&y.s_tau.re)));
        rows.extend(found.iter().map(ModeRow::from));
    }
    let mut out = open(a.output.out.as_deref())?;
    match a.output.format_or(Format::Csv) {
        Format::Json => write_json(&mut *out, &ctx.hash, &rows)?,
        Format::Csv => {
            header(ctx, &mut *out)?;
            writeln!(out, "branch,kind,re_s_tau,im_s_tau,freq_over_2pi,decay_over_2pi,re_amplitude,im_amplitude")?;
            for r in &rows {
                let kind = serde_json::to_value(r.kind)?.as_str().unwrap_or_default().to_string();
                let nums = [r.re_s_tau, r.im_s_tau, r.freq_over_2pi, r.decay_over_2pi, r.re_amplitude, r.im_amplitude].map(fmt17);
                writeln!(out, "{},{kind},{}", r.branch, nums.join(","))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

// ---------------------------------------------------------------- evolve / field

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub initial: InitialArgs,
    /// Final time in units of tau.
    #[arg(long)]
    pub t_max: f64,
    /// Integration substeps per tau; chosen from the decay rate when absent.
    #[arg(long)]
    pub substeps: Option<usize>,
}

impl RunArgs {
    fn run(&self) -> Result<Option<(SystemConfig, InitialAtomState, Trajectory)>> {
        let cfg = self.system.system()?;
        let init = self.system.initial(&self.initial)?;
        if !(self.t_max.is_finite() && self.t_max >= 0.0) {
            return Err(Failure::usage(format!("--t-max must be non-negative, got {}", self.t_max)));
        }
        warn_rwa(&cfg);
        if self.t_max == 0.0 {
            return Ok(None);
        }
        let m = self.substeps.unwrap_or_else(|| substeps_for(&cfg));
        let tr = evolve(&cfg, &init, self.t_max, m)?;
        Ok(Some((cfg, init, tr)))
    }
}

#[derive(Args, Debug, Clone)]
pub struct FieldGrid {
    /// Positions `lo:hi:count` in units of v*tau; defaults to the light cone at t_max.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub x_grid: Option<Grid>,
    /// Snapshot spacing in tau.
    #[arg(long, default_value_t = 1.0)]
    pub t_stride: f64,
}

impl FieldGrid {
    fn snapshots(&self, cfg: &SystemConfig, tr: &Trajectory) -> Result<Vec<FieldSnapshot>> {
        if !(self.t_stride > 0.0) {
            return Err(Failure::usage("--t-stride must be positive"));
        }
        let edge = cfg.layout().half_span() + tr.duration();
        let grid = self.x_grid.clone().map(|g| g.0).unwrap_or_else(|| {
            let n = (2.0 * edge / 0.05).ceil() as usize + 1;
            (0..n).map(|i| -edge + 2.0 * edge * i as f64 / (n - 1) as f64).collect()
        });
        let count = (tr.duration() / self.t_stride + 1e-9).floor() as usize;
        (0..=count).map(|k| Ok(field_snapshot(cfg, tr, k as f64 * self.t_stride, &grid)?)).collect()
    }
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Write every `stride`-th integration step.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Also write the field intensity to this file.
    #[arg(long)]
    pub field: Option<PathBuf>,
    #[command(flatten)]
    pub grid: FieldGrid,
    /// Also write the long-time closed form at the same times to this file,
    /// when the configuration is an oscillating-bound-state point.
    #[arg(long)]
    pub analytic: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// The tabulated intersection at `cfg`, if any.
fn obs_point_at(cfg: &SystemConfig) -> Option<ObsPoint> {
    let twice_m = 2.0 * cfg.omega_tau / PI;
    if (twice_m - twice_m.round()).abs() > 1e-9 || twice_m.round() < 1.0 {
        return None;
    }
    let m = HalfInt::from_twice(twice_m.round() as i64);
    obs_points(cfg.topology, cfg.n_points, m)
        .into_iter()
        .find(|p| p.m == m && (p.gamma_tau - cfg.gamma_tau).abs() <= 1e-9 * cfg.gamma_tau.max(1.0))
}

pub fn evolve_cmd(ctx: &Ctx, a: &EvolveArgs) -> Result<()> {
    if a.output.format == Some(Format::Json) {
        return Err(Failure::usage("evolve writes CSV only"));
    }
    let result = a.run.run()?;
    let mut out = open(a.output.out.as_deref())?;
    header(ctx, &mut *out)?;
    let Some((cfg, init, tr)) = result else {
        writeln!(out, "{TRAJECTORY_HEADER}")?;
        out.flush()?;
        for path in [&a.field, &a.analytic].into_iter().flatten() {
            let mut f = open(Some(path))?;
            header(ctx, &mut *f)?;
            writeln!(f, "{}", if Some(path) == a.field.as_ref() { FIELD_HEADER } else { TRAJECTORY_HEADER })?;
            f.flush()?;
        }
        return Ok(());
    };
    let stride = a.stride.max(1);
    write_trajectory_csv(&mut out, &tr, stride)?;
    out.flush()?;
    if let Some(path) = &a.field {
        let snaps = a.grid.snapshots(&cfg, &tr)?;
        let mut f = open(Some(path))?;
        header(ctx, &mut *f)?;
        write_field_csv(&mut f, &snaps)?;
        f.flush()?;
    }
    if let Some(path) = &a.analytic {
        let Some(pt) = obs_point_at(&cfg) else {
            return Err(Failure::usage("--analytic needs a configuration at a dark-line intersection"));
        };
        let form = obs_trajectory(&pt, &init)?;
        let times: Vec<f64> = (0..tr.len()).step_by(stride).map(|k| tr.time(k)).collect();
        let mut f = open(Some(path))?;
        header(ctx, &mut *f)?;
        write_closed_form_csv(&mut f, &times, |t| {
            let amp = form.amplitudes(t);
            (Some(amp), amp.map(|b| b.norm_sqr()))
        })?;
        f.flush()?;
        if let Some(c) = form.class {
            eprintln!("closed form: class {c}");
        }
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct FieldArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub grid: FieldGrid,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Serialize)]
struct FieldJson {
    t: f64,
    x: Vec<f64>,
    intensity: Vec<f64>,
}

pub fn field(ctx: &Ctx, a: &FieldArgs) -> Result<()> {
    let result = a.run.run()?;
    let mut out = open(a.output.out.as_deref())?;
    let snaps = match &result {
        Some((cfg, _, tr)) => a.grid.snapshots(cfg, tr)?,
        None => Vec::new(),
    };
    match a.output.format_or(Format::Csv) {
        Format::Csv => {
            header(ctx, &mut *out)?;
            write_field_csv(&mut out, &snaps)?;
        }
        Format::Json => {
            let rows: Vec<FieldJson> =
                snaps.iter().map(|s| FieldJson { t: s.t, x: s.x_grid.clone(), intensity: s.intensity() }).collect();
            write_json(&mut *out, &ctx.hash, &rows)?;
        }
    }
    out.flush()?;
    Ok(())
}

// ---------------------------------------------------------------- classify

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub initial: InitialArgs,
    /// Intersection index m (integer or `k/2`); with --p and --q replaces --omega/--gamma.
    #[arg(long)]
    pub m: Option<HalfInt>,
    /// Intersection index p (integer or `k/2`).
    #[arg(long)]
    pub p: Option<HalfInt>,
    /// q~ in 1..N-1.
    #[arg(long = "q")]
    pub q_tilde: Option<u32>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Serialize)]
struct ClassRow {
    initial: String,
    class: String,
}

#[derive(Serialize)]
struct ClassReport {
    omega_tau: f64,
    gamma_tau: f64,
    omega_over_2pi: f64,
    gamma_over_2pi: f64,
    intersection: Option<AtlasPoint>,
    dark_modes: Vec<DarkModeAt>,
    classes: Vec<ClassRow>,
}

fn label_at(cfg: &SystemConfig, pt: Option<&ObsPoint>, init: &InitialAtomState) -> Result<String> {
    let label = match pt {
        Some(p) => classify(p, init)?.label,
        None => mode_harmonics(&dark_modes_at(cfg), init).ok().as_ref().and_then(classify_by_harmonics),
    };
    Ok(label.map(|l| l.to_string()).unwrap_or_else(|| "unclassified".into()))
}

fn initial_name(init: &InitialAtomState) -> String {
    match init.kind() {
        Some(InitialKind::Plus) => "plus".into(),
        Some(InitialKind::Minus) => "minus".into(),
        Some(InitialKind::Eg) => "eg".into(),
        Some(InitialKind::Ge) => "ge".into(),
        None => {
            let [a, b] = init.coefficients();
            format!("custom {},{},{},{}", a.re, a.im, b.re, b.im)
        }
    }
}

pub fn classify_cmd(ctx: &Ctx, a: &ClassifyArgs) -> Result<()> {
    let (top, n) = a.system.geometry()?;
    let (cfg, pt) = match (a.m, a.p, a.q_tilde) {
        (Some(m), Some(p), Some(q)) => {
            let pt = ObsPoint::new(top, n, m, p, q)?;
            (pt.config(), Some(pt))
        }
        (None, None, None) => {
            let cfg = a.system.system()?;
            (cfg, obs_point_at(&cfg))
        }
        _ => return Err(Failure::usage("give all of --m, --p, --q or none of them")),
    };
    let explicit = a.initial.initial.is_some() || a.system.resolve()?.file.initial_state.is_some();
    let states: Vec<InitialAtomState> = if explicit {
        vec![a.system.initial(&a.initial)?]
    } else {
        [InitialKind::Plus, InitialKind::Minus, InitialKind::Eg, InitialKind::Ge].map(InitialAtomState::from_kind).to_vec()
    };
    let classes = states
        .iter()
        .map(|s| Ok(ClassRow { initial: initial_name(s), class: label_at(&cfg, pt.as_ref(), s)? }))
        .collect::<Result<Vec<_>>>()?;
    let report = ClassReport {
        omega_tau: cfg.omega_tau,
        gamma_tau: cfg.gamma_tau,
        omega_over_2pi: cfg.omega_over_2pi(),
        gamma_over_2pi: cfg.gamma_over_2pi(),
        intersection: pt.as_ref().map(AtlasPoint::from_point),
        dark_modes: dark_modes_at(&cfg),
        classes,
    };
    let mut out = open(a.output.out.as_deref())?;
    match a.output.format_or(Format::Json) {
        Format::Json => write_json(&mut *out, &ctx.hash, &report)?,
        Format::Csv => {
            header(ctx, &mut *out)?;
            writeln!(out, "omega_over_2pi,gamma_over_2pi,initial,class")?;
            for r in &report.classes {
                writeln!(out, "{},{},{},{}", fmt17(report.omega_over_2pi), fmt17(report.gamma_over_2pi), r.initial, r.class)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

// ---------------------------------------------------------------- sweep

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Smallest pole-equation residual over nearby dark lines.
    Residual,
    /// Mean atomic excitation over the last 10% of the run.
    LongTimeIa,
    /// Bound-state class for the initial state.
    Class,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub initial: InitialArgs,
    /// Omega*tau values, `lo:hi:count` or a comma list.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub omega_grid: Grid,
    /// gamma*tau values, `lo:hi:count` or a comma list.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub gamma_grid: Grid,
    #[arg(long, value_enum)]
    pub metric: Metric,
    /// Run length for `long-time-ia`.
    #[arg(long, default_value_t = 200.0)]
    pub t_max: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Serialize)]
struct SweepRow {
    omega_tau: f64,
    gamma_tau: f64,
    omega_over_2pi: f64,
    gamma_over_2pi: f64,
    value: Option<f64>,
    class: Option<String>,
    error: Option<String>,
}

#[derive(Serialize)]
struct SweepReport {
    metric: Metric,
    topology: Topology,
    n_points: usize,
    failures: usize,
    rows: Vec<SweepRow>,
}

fn darkness_residual(cfg: &SystemConfig) -> f64 {
    let n = cfg.n_points as f64;
    let reach = n * n * cfg.gamma_tau / PI + 2.0 * PI / n;
    let window = (cfg.omega_tau - reach, cfg.omega_tau + reach);
    BranchSign::BOTH
        .iter()
        .flat_map(|&b| dark_mode_indices(cfg.topology, cfg.n_points, b, window).into_iter().map(move |l| (b, l)))
        .map(|(b, l)| pole_residual(cfg, b, l.omega_n_tau))
        .fold(f64::INFINITY, f64::min)
}

fn sweep_point(a: &SweepArgs, top: Topology, n: usize, init: &InitialAtomState, w: f64, g: f64) -> SweepRow {
    let mut row = SweepRow {
        omega_tau: w,
        gamma_tau: g,
        omega_over_2pi: w / TAU,
        gamma_over_2pi: g / TAU,
        value: None,
        class: None,
        error: None,
    };
    let outcome: Result<()> = (|| {
        let cfg = SystemConfig::new(top, n, w, g)?;
        match a.metric {
            Metric::Residual => row.value = Some(darkness_residual(&cfg)),
            Metric::LongTimeIa => {
                let tr = evolve(&cfg, init, a.t_max, substeps_for(&cfg))?;
                let ia = tr.atomic_excitation();
                let tail = &ia[tr.index_at(0.9 * a.t_max)..];
                row.value = Some(tail.iter().sum::<f64>() / tail.len() as f64);
            }
            Metric::Class => row.class = Some(label_at(&cfg, obs_point_at(&cfg).as_ref(), init)?),
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        row.error = Some(e.message);
    }
    row
}

pub fn sweep(ctx: &Ctx, a: &SweepArgs) -> Result<()> {
    let (top, n) = a.system.geometry()?;
    let init = if a.metric == Metric::Residual {
        InitialAtomState::eg()
    } else {
        a.system.initial(&a.initial).unwrap_or_else(|_| InitialAtomState::eg())
    };
    if a.metric == Metric::LongTimeIa && !(a.t_max > 0.0) {
        return Err(Failure::usage("--t-max must be positive"));
    }
    let grid: Vec<(f64, f64)> = a.omega_grid.0.iter().flat_map(|&w| a.gamma_grid.0.iter().map(move |&g| (w, g))).collect();
    let rows: Vec<SweepRow> = grid.par_iter().map(|&(w, g)| sweep_point(a, top, n, &init, w, g)).collect();
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    let report = SweepReport { metric: a.metric, topology: top, n_points: n, failures, rows };
    let mut out = open(a.output.out.as_deref())?;
    match a.output.format_or(Format::Json) {
        Format::Json => write_json(&mut *out, &ctx.hash, &report)?,
        Format::Csv => {
            header(ctx, &mut *out)?;
            writeln!(out, "omega_tau,gamma_tau,omega_over_2pi,gamma_over_2pi,value,class,error")?;
            for r in &report.rows {
                let nums = [r.omega_tau, r.gamma_tau, r.omega_over_2pi, r.gamma_over_2pi].map(fmt17).join(",");
                let value = r.value.map(fmt17).unwrap_or_default();
                let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
                writeln!(out, "{nums},{value},{},{err}", r.class.as_deref().unwrap_or(""))?;
            }
        }
    }
    out.flush()?;
    if failures > 0 {
        return Err(Failure::numerical(format!("{failures} of {} grid points failed", report.rows.len())));
    }
    Ok(())
}

// ---------------------------------------------------------------- dfi

#[derive(Args, Debug)]
pub struct DfiArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// With CSV output, tabulate the ideal exchange law on [0, t_max].
    #[arg(long, default_value_t = 0.0)]
    pub t_max: f64,
    /// Sample spacing of the tabulated law, in tau.
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Serialize)]
struct DfiReport {
    omega_over_2pi: f64,
    gamma_over_2pi: f64,
    quantities: DfiQuantities,
    exchange_period: f64,
}

pub fn dfi(ctx: &Ctx, a: &DfiArgs) -> Result<()> {
    let cfg = a.system.system()?;
    let q = dfi_quantities(&cfg)?;
    let mut out = open(a.output.out.as_deref())?;
    match a.output.format_or(Format::Json) {
        Format::Json => {
            let report = DfiReport {
                omega_over_2pi: cfg.omega_over_2pi(),
                gamma_over_2pi: cfg.gamma_over_2pi(),
                quantities: q,
                exchange_period: PI / q.exchange.abs(),
            };
            write_json(&mut *out, &ctx.hash, &report)?;
        }
        Format::Csv => {
            if !(a.dt > 0.0 && a.t_max >= 0.0) {
                return Err(Failure::usage("need --dt > 0 and --t-max >= 0"));
            }
            dfi_dynamics(&cfg, 0.0)?;
            let count = (a.t_max / a.dt + 1e-9).floor() as usize;
            let times: Vec<f64> = if a.t_max > 0.0 { (0..=count).map(|k| k as f64 * a.dt).collect() } else { Vec::new() };
            header(ctx, &mut *out)?;
            write_closed_form_csv(&mut out, &times, |t| {
                let (p1, p2) = dfi_dynamics(&cfg, t).expect("validated above");
                (None, [p1, p2])
            })?;
        }
    }
    out.flush()?;
    Ok(())
}
