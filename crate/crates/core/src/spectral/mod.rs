//! Fields on the doubly periodic square and the Fourier multipliers acting on them.

mod fft;
mod field;
mod grid;
mod operators;
mod velocity;

pub use field::{forward_transform, PhysicalField, SpectralField, VelocityField};
pub use grid::Grid;
pub use operators::{
    dealias, fractional_laplacian, gradient, gradient_physical, riesz_velocity, sobolev_seminorm,
    velocity, velocity_spectral,
};
pub(crate) use operators::{lambda_power, sobolev_seminorm_sq};
pub use velocity::{MultiplierTable, VelocityLaw};

pub use rustfft::num_complex::Complex64;
