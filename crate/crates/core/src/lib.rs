//! Nonspreading relativistic electron wavepackets.
//!
//! Everything is expressed in Compton units: lengths in hbar/(m c), times in
//! hbar/(m c^2), field strengths as eA/m.  The library provides
//!
//! * complex-order modified Bessel and Struve evaluation plus the rapidity-line
//!   quadrature that every wavepacket superposition reduces to (`specfun`),
//! * a pinned chiral gamma-matrix algebra with boosts, currents, the
//!   trace-formula vierbein and its finite-difference spinor connection
//!   (`algebra`),
//! * plane-wave laser profiles, accumulated phase, light-cone shifted
//!   coordinates and Rindler-chart maps (`fields`),
//! * the spinor constructors themselves: Rindler eigenstate, free and
//!   laser-dressed nonspreading packets, Volkov states, and the pointwise
//!   Lorentz map to the local rest frame (`states`),
//! * finite-difference Dirac residuals and an oracle-comparison harness
//!   (`verify`),
//! * density grids, asymmetry, variances, lifetime and collider estimates
//!   (`analytics`).

pub mod algebra;
pub mod analytics;
pub mod cli;
pub mod dd;
pub mod error;
pub mod fields;
pub mod quad;
pub mod specfun;
pub mod states;
pub mod verify;

pub use error::Error;

/// Compton time hbar/(m_e c^2) in seconds; converts dimensionless times to SI.
pub const COMPTON_TIME_S: f64 = 1.288e-21;

/// Electron rest energy in MeV.
pub const ELECTRON_MASS_MEV: f64 = 0.511;

/// Fine-structure constant.
pub const ALPHA_FS: f64 = 1.0 / 137.035999;
