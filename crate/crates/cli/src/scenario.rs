//! Scenario assembly: scenario file first, command-line flags on top.

use std::f64::consts::TAU;
use std::path::PathBuf;

use clap::Args;
use giant_bic::config_file::{self, ScenarioFile};
use giant_bic::{InitialAtomState, SystemConfig, Topology};

use crate::angle::parse_angle;
use crate::failure::{Failure, Result};

#[derive(Args, Clone, Debug, Default)]
pub struct SystemArgs {
    /// Scenario file with `key = value` lines; flags given here win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// separate | braided
    #[arg(long)]
    pub topology: Option<Topology>,
    /// Coupling points per atom.
    #[arg(long = "n")]
    pub n_points: Option<usize>,
    /// Omega*tau; accepts suffixes like `13x2pi` or `9pi`.
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    /// gamma*tau; accepts suffixes like `0.25x2pi`.
    #[arg(long, value_parser = parse_angle)]
    pub gamma: Option<f64>,
}

#[derive(Args, Clone, Debug, Default)]
pub struct InitialArgs {
    /// plus | minus | eg | ge | "custom re1,im1,re2,im2"
    #[arg(long)]
    pub initial: Option<InitialAtomState>,
}

fn load(path: &Option<PathBuf>) -> Result<ScenarioFile> {
    let Some(path) = path else { return Ok(ScenarioFile::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    config_file::parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

pub struct Resolved {
    pub file: ScenarioFile,
    pub topology: Option<Topology>,
    pub n_points: Option<usize>,
    pub omega_tau: Option<f64>,
    pub gamma_tau: Option<f64>,
}

impl SystemArgs {
    pub fn resolve(&self) -> Result<Resolved> {
        let file = load(&self.config)?;
        Ok(Resolved {
            topology: self.topology.or(file.topology),
            n_points: self.n_points.or(file.n_points),
            omega_tau: self.omega.or(file.omega_tau_over_2pi.map(|v| v * TAU)),
            gamma_tau: self.gamma.or(file.gamma_tau_over_2pi.map(|v| v * TAU)),
            file,
        })
    }

    /// Topology and point count, required by every command.
    pub fn geometry(&self) -> Result<(Topology, usize)> {
        let r = self.resolve()?;
        let top = r.topology.ok_or_else(|| Failure::usage("missing --topology"))?;
        let n = r.n_points.ok_or_else(|| Failure::usage("missing --n"))?;
        if n == 0 {
            return Err(Failure::usage("--n must be at least 1"));
        }
        if top == Topology::Braided && n < 2 {
            return Err(giant_bic::Error::BraidedWithSinglePoint.into());
        }
        Ok((top, n))
    }

    pub fn system(&self) -> Result<SystemConfig> {
        let (top, n) = self.geometry()?;
        let r = self.resolve()?;
        let omega = r.omega_tau.ok_or_else(|| Failure::usage("missing --omega"))?;
        let gamma = r.gamma_tau.ok_or_else(|| Failure::usage("missing --gamma"))?;
        Ok(SystemConfig::new(top, n, omega, gamma)?)
    }

    pub fn initial(&self, args: &InitialArgs) -> Result<InitialAtomState> {
        let file = load(&self.config)?;
        args.initial.or(file.initial_state).ok_or_else(|| Failure::usage("missing --initial"))
    }
}
