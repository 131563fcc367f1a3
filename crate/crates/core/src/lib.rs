//! Two identical charged particles in a three-dimensional axially symmetric
//! parabolic trap, interacting through `α_M r^(−M)`, in a magnetic field
//! along the symmetry axis.
//!
//! The crate works in the dimensionless variables `u = ω_L/ω_ρ`,
//! `v = ω_z/ω_ρ` and `q⋄ = ħ/L⋄` and provides
//!
//! * [`units`]: physical inputs to dimensionless scales and back,
//! * [`scaling_groups`]: the effective-mass rescaling and the map between
//!   interaction exponents,
//! * [`equilibria`]: asymmetric and symmetric equilibrium families,
//!   minimal states and the phase boundary,
//! * [`inversion`]: series reversion and the closed inverse forms used to
//!   express the symmetric-family parameter `v*`,
//! * [`modes`]: harmonic normal modes and stability classes,
//! * [`spectra`]: quantized levels, additional energies and ground-state scans,
//! * [`oracle`]: brute-force minimization and finite differences used to
//!   verify everything above.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod equilibria;
pub mod error;
pub mod exec;
pub mod inversion;
pub mod modes;
#[doc(hidden)]
pub mod oracle;
pub mod scaling_groups;
pub mod spectra;
pub mod units;

pub use error::{Error, Result};
pub use exec::Execution;
