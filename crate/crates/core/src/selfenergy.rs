//! Self-energies `Sigma_I`, `Sigma_II` and `Sigma_pm = Sigma_I +- Sigma_II`.
//!
//! Each is a finite exponential sum `(gamma/2) sum_d mult(d) exp(-s d)`, i.e. a
//! polynomial in `z = exp(-s)`, so they are entire in `s`. The closed forms in
//! [`closed_form`] have removable singularities at `exp(s) = +-1` and are only
//! meant as independent checks.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DelayMultiset, SystemConfig, Topology};
use crate::C64;

/// Symmetric (`Plus`) or antisymmetric (`Minus`) collective branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchSign {
    Plus,
    Minus,
}

impl BranchSign {
    pub fn sign(self) -> f64 {
        match self {
            BranchSign::Plus => 1.0,
            BranchSign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            BranchSign::Plus => BranchSign::Minus,
            BranchSign::Minus => BranchSign::Plus,
        }
    }

    pub const BOTH: [BranchSign; 2] = [BranchSign::Plus, BranchSign::Minus];
}

impl fmt::Display for BranchSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BranchSign::Plus => "+",
            BranchSign::Minus => "-",
        })
    }
}

impl FromStr for BranchSign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "plus" | "p" => Ok(BranchSign::Plus),
            "-" | "minus" | "m" => Ok(BranchSign::Minus),
            other => Err(Error::InvalidConfig(format!("unknown branch '{other}'"))),
        }
    }
}

/// Dense coefficient tables for one configuration.
///
/// `same[d]` and `cross[d]` hold `(gamma/2) * mult(d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SelfEnergy {
    same: Vec<f64>,
    cross: Vec<f64>,
}

fn dense(set: &DelayMultiset, len: usize, half_gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (d, m) in set.iter() {
        out[d as usize] = half_gamma * m as f64;
    }
    out
}

/// `sum_d c[d] z^d` and `sum_d (-d) c[d] z^d` by Horner.
fn poly_and_deriv(c: &[f64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for (d, &cd) in c.iter().enumerate().rev() {
        p = p * z + cd;
        dp = dp * z - cd * d as f64;
    }
    (p, dp)
}

impl SelfEnergy {
    pub fn new(config: &SystemConfig) -> Self {
        let layout = config.layout();
        let len = layout.same_atom_delays().max_delay().max(layout.cross_atom_delays().max_delay()) as usize + 1;
        let hg = 0.5 * config.gamma_tau;
        Self {
            same: dense(layout.same_atom_delays(), len, hg),
            cross: dense(layout.cross_atom_delays(), len, hg),
        }
    }

    /// `(gamma/2) mult(d)` for same-atom pairs, indexed by delay.
    pub fn same_coefficients(&self) -> &[f64] {
        &self.same
    }

    /// `(gamma/2) mult(d)` for cross-atom pairs, indexed by delay.
    pub fn cross_coefficients(&self) -> &[f64] {
        &self.cross
    }

    /// Coefficients of `Sigma_pm` as a polynomial in `exp(-s)`.
    pub fn branch_coefficients(&self, branch: BranchSign) -> Vec<f64> {
        let sg = branch.sign();
        self.same.iter().zip(&self.cross).map(|(a, b)| a + sg * b).collect()
    }

    pub fn max_delay(&self) -> usize {
        self.same.len() - 1
    }

    pub fn same_atom(&self, s: C64) -> C64 {
        poly_and_deriv(&self.same, (-s).exp()).0
    }

    pub fn cross_atom(&self, s: C64) -> C64 {
        poly_and_deriv(&self.cross, (-s).exp()).0
    }

    pub fn pm(&self, s: C64, branch: BranchSign) -> C64 {
        self.pm_with_deriv(s, branch).0
    }

    pub fn pm_deriv(&self, s: C64, branch: BranchSign) -> C64 {
        self.pm_with_deriv(s, branch).1
    }

    /// `(Sigma_pm(s), d Sigma_pm / ds)` in one pass.
    pub fn pm_with_deriv(&self, s: C64, branch: BranchSign) -> (C64, C64) {
        let z = (-s).exp();
        let sg = branch.sign();
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for d in (0..self.same.len()).rev() {
            let cd = self.same[d] + sg * self.cross[d];
            p = p * z + cd;
            dp = dp * z - cd * d as f64;
        }
        (p, dp)
    }
}

pub fn sigma_same_atom(s: C64, config: &SystemConfig) -> C64 {
    SelfEnergy::new(config).same_atom(s)
}

pub fn sigma_cross_atom(s: C64, config: &SystemConfig) -> C64 {
    SelfEnergy::new(config).cross_atom(s)
}

pub fn sigma_pm(s: C64, branch: BranchSign, config: &SystemConfig) -> C64 {
    SelfEnergy::new(config).pm(s, branch)
}

pub fn sigma_pm_deriv(s: C64, branch: BranchSign, config: &SystemConfig) -> C64 {
    SelfEnergy::new(config).pm_deriv(s, branch)
}

/// Closed-form sums with `(e^s - 1)^2` or `(e^s + 1)^2` denominators.
///
/// Singular (0/0) where `e^s = +-1`; use the finite sums there.
pub mod closed_form {
    use super::*;

    /// `Sigma_+`, identical for both topologies.
    pub fn sigma_plus(s: C64, n: usize, gamma: f64) -> C64 {
        let nf = n as f64;
        let e = s.exp();
        let num = nf * (e * e - 1.0) - e * (1.0 - (-2.0 * nf * s).exp());
        num * gamma / (2.0 * (e - 1.0) * (e - 1.0))
    }

    pub fn sigma_minus(s: C64, n: usize, gamma: f64, topology: Topology) -> C64 {
        let nf = n as f64;
        let e = s.exp();
        match topology {
            Topology::Separate => {
                let num = nf * (e * e - 1.0) - e * (3.0 - 4.0 * (-nf * s).exp() + (-2.0 * nf * s).exp());
                num * gamma / (2.0 * (e - 1.0) * (e - 1.0))
            }
            Topology::Braided => {
                let num = nf * (e * e - 1.0) + e * (1.0 - (-2.0 * nf * s).exp());
                num * gamma / (2.0 * (e + 1.0) * (e + 1.0))
            }
        }
    }

    pub fn sigma_pm(s: C64, branch: BranchSign, n: usize, gamma: f64, topology: Topology) -> C64 {
        match branch {
            BranchSign::Plus => sigma_plus(s, n, gamma),
            BranchSign::Minus => sigma_minus(s, n, gamma, topology),
        }
    }
}
