//! Pseudo-spectral solver for the dissipative quasi-geostrophic equation with
//! fractional dissipation `κ(-Δ)^α`, plus tools that measure the regularity
//! mechanisms of its solutions: the weighted harmonic extension, level-set
//! energies, oscillation decay and Hölder fits.

pub mod error;
pub mod degiorgi;
pub mod diagnostics;
pub mod extension;
pub mod io;
mod linalg;
pub mod solver;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::LineFit;
