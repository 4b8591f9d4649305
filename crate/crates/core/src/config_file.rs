//! Flat `key = value` scenario files.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! # comment
//! topology            = separate | braided
//! n_points            = <integer>
//! omega_tau_over_2pi  = <float>
//! gamma_tau_over_2pi  = <float>
//! initial_state       = plus | minus | eg | ge | custom c1,c2 | custom re1,im1,re2,im2
//! ```
//!
//! Blank lines and text after `#` are ignored. `:` is accepted in place of
//! `=`. Every key is optional; unknown keys are an error.

use crate::error::{Error, Result};
use crate::model::{InitialAtomState, Topology};

/// Values read from a scenario file. Missing keys stay `None`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScenarioFile {
    pub topology: Option<Topology>,
    pub n_points: Option<usize>,
    pub omega_tau_over_2pi: Option<f64>,
    pub gamma_tau_over_2pi: Option<f64>,
    pub initial_state: Option<InitialAtomState>,
}

pub fn parse(text: &str) -> Result<ScenarioFile> {
    let mut out = ScenarioFile::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .or_else(|| line.split_once(':'))
            .ok_or_else(|| Error::ConfigSyntax { line: line_no, msg: "expected key = value".into() })?;
        let key = key.trim();
        let value = value.trim();
        let syntax = |msg: String| Error::ConfigSyntax { line: line_no, msg };
        match key {
            "topology" => out.topology = Some(value.parse().map_err(|e: Error| syntax(e.to_string()))?),
            "n_points" => {
                out.n_points = Some(value.parse().map_err(|e| syntax(format!("n_points: {e}")))?)
            }
            "omega_tau_over_2pi" => {
                out.omega_tau_over_2pi =
                    Some(value.parse().map_err(|e| syntax(format!("omega_tau_over_2pi: {e}")))?)
            }
            "gamma_tau_over_2pi" => {
                out.gamma_tau_over_2pi =
                    Some(value.parse().map_err(|e| syntax(format!("gamma_tau_over_2pi: {e}")))?)
            }
            "initial_state" => {
                out.initial_state = Some(value.parse().map_err(|e: Error| syntax(e.to_string()))?)
            }
            other => return Err(syntax(format!("unknown key '{other}'"))),
        }
    }
    Ok(out)
}
