//! Oscillation, Hölder and zoom diagnostics.
mod center;
mod holder;
mod oscillation;
mod sampling;
mod zoom;

pub use center::{advected_center, CenterPath};
pub use holder::{holder_seminorm, velocity_holder_norm, VelocityNormReport};
pub use oscillation::{
    advected_oscillation_profile, extension_oscillation_profile, holder_fit, oscillation_profile,
    time_oscillation_profile, Frame, HolderEstimate, OscillationProfile, OscillationSpec, DEFAULT_MU,
};
pub use zoom::{smallness_guard, zoom_sequence, ZoomLevel, ZoomSequence, ZoomSpec, DEGENERATE_OSC};
