//! Two identical giant atoms coupled to a one-dimensional waveguide at
//! equidistant points, in the single-excitation sector.
//!
//! The crate covers the exact delay equations of motion, the Laplace-domain
//! pole structure (dark, quasi-dark and lossy modes), the dark-state
//! parameter lines with their intersections, and closed-form long-time
//! observables used to cross-check the numerics.

pub mod analytics;
pub mod config_file;
pub mod darkstates;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod poles;
pub mod selfenergy;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use model::{CouplingLayout, DelayMultiset, InitialAtomState, InitialKind, SystemConfig, Topology};
pub use selfenergy::{BranchSign, SelfEnergy};
