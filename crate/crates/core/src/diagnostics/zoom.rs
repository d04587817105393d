//! Rescaled zoom sequence around an advected point.
//!
//! Level `k` looks at `θ` through the map `y ↦ X_k(t) + r0 μ^k y` on the time window
//! `[t̄, t̄ + ρ τ0 μ^{2αk}]`, `τ0 = r0^{2α}`, and multiplies by `μ^{(2α-1)k}`, which is
//! the scaling that leaves the equation invariant. Boxes are sampled on the
//! trigonometric interpolant, so levels below the grid scale stay exact for the
//! stored field; they are flagged `subgrid`.

use super::center::advected_center;
use super::holder::velocity_holder_norm;
use super::oscillation::PATH_STEPS;
use super::sampling::{box_extrema_spectral, Extrema};
use crate::error::{check_range, Error, Result};
use crate::solver::{SimConfig, TrajectoryStore};
use crate::spectral::velocity;

/// Oscillations below this are treated as a flat field and end the sequence.
pub const DEGENERATE_OSC: f64 = 1e-12;
/// Outer box, in units of the level scale.
const OUTER: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZoomSpec {
    pub center: (f64, f64),
    pub t_start: f64,
    pub mu: f64,
    pub r0: f64,
    pub levels: usize,
    /// Refuse a `μ` that fails the smallness condition.
    pub enforce_guard: bool,
}

impl ZoomSpec {
    pub fn new(center: (f64, f64), t_start: f64, levels: usize) -> Self {
        Self {
            center,
            t_start,
            mu: super::oscillation::DEFAULT_MU,
            r0: 0.25,
            levels,
            enforce_guard: true,
        }
    }

    pub fn with_mu(self, mu: f64) -> Self {
        Self { mu, ..self }
    }

    pub fn with_r0(self, r0: f64) -> Self {
        Self { r0, ..self }
    }

    pub fn with_guard(self, enforce_guard: bool) -> Self {
        Self { enforce_guard, ..self }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZoomLevel {
    pub k: usize,
    /// `r0 μ^k`.
    pub scale: f64,
    /// Length of the unit time window, `τ0 μ^{2αk}`.
    pub window: f64,
    /// Centre at the end of the outer window.
    pub center_end: (f64, f64),
    /// Oscillation of the rescaled field over the outer and unit cylinders.
    pub osc_outer: f64,
    pub osc_unit: f64,
    /// Affine normalization mapping the outer range onto `[-2, 2]`.
    pub shift: f64,
    pub norm_scale: f64,
    /// `osc_unit / osc_outer`.
    pub within: f64,
    /// `osc_unit(k) / (μ^{2α-1} osc_unit(k-1))`, absent at the first level.
    pub contraction: Option<f64>,
    pub error: f64,
    /// Unit box narrower than four grid cells.
    pub subgrid: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZoomSequence {
    pub levels: Vec<ZoomLevel>,
    /// `4μ + C μ^{2α}`, where it applies.
    pub guard: Option<f64>,
    /// Stopped early on a flat level.
    pub degenerate: bool,
}

impl ZoomSequence {
    /// Levels with a contraction below one, counted from level 1 until the first failure.
    pub fn contracting_levels(&self) -> usize {
        self.levels
            .iter()
            .skip(1)
            .take_while(|l| l.contraction.is_some_and(|c| c < 1.0))
            .count()
    }
}

/// `4μ + C μ^{2α}` with `C` the velocity's `C^{1-2α}` seminorm (α < 1/2) or sup
/// norm (α = 1/2) at `t`; `None` for α > 1/2.
pub fn smallness_guard(traj: &TrajectoryStore, t: f64, mu: f64, cfg: &SimConfig) -> Result<Option<f64>> {
    let a = cfg.alpha;
    if a > 0.5 + 1e-12 {
        return Ok(None);
    }
    let u = velocity(&traj.interpolate(t)?, &cfg.velocity_law);
    let c = if (a - 0.5).abs() <= 1e-12 {
        u.max_speed()
    } else {
        velocity_holder_norm(&u, 1.0 - 2.0 * a)?.holder_seminorm
    };
    Ok(Some(OUTER * mu + c * mu.powf(2.0 * a)))
}

pub fn zoom_sequence(traj: &TrajectoryStore, spec: &ZoomSpec, cfg: &SimConfig) -> Result<ZoomSequence> {
    check_range("mu", spec.mu, "(0, 1]", spec.mu > 0.0 && spec.mu <= 1.0)?;
    let g = cfg.grid;
    check_range("r0", spec.r0, "(0, L/8)", spec.r0 > 0.0 && OUTER * spec.r0 < 0.5 * g.length())?;
    let a = cfg.alpha;
    let guard = smallness_guard(traj, spec.t_start, spec.mu, cfg)?;
    if spec.enforce_guard {
        if let Some(v) = guard.filter(|&v| v >= 1.0) {
            return Err(Error::OutOfRange {
                name: "zoom guard 4mu + C mu^(2 alpha)",
                value: v,
                range: "[0, 1)",
            });
        }
    }
    let tau0 = spec.r0.powf(2.0 * a);
    let end = spec.t_start + OUTER * tau0;
    if spec.t_start < traj.start_time() - 1e-12 || end > traj.end_time() + 1e-12 {
        return Err(Error::Trajectory(format!(
            "zoom window [{}, {end}] outside [{}, {}]",
            spec.t_start,
            traj.start_time(),
            traj.end_time()
        )));
    }
    let h = g.spacing();
    let unit_nodes = PATH_STEPS / OUTER as usize;
    let mut out: Vec<ZoomLevel> = Vec::new();
    let mut degenerate = false;
    for k in 0..=spec.levels {
        let w = spec.r0 * spec.mu.powi(k as i32);
        let window = tau0 * spec.mu.powf(2.0 * a * k as f64);
        let path = advected_center(
            traj,
            spec.center,
            OUTER * w,
            spec.t_start,
            spec.t_start + OUTER * window,
            PATH_STEPS,
            cfg,
        )?;
        let amp = spec.mu.powf((2.0 * a - 1.0) * k as f64);
        let (mut outer, mut unit) = (Extrema::empty(), Extrema::empty());
        for (i, (&t, &c)) in path.times.iter().zip(&path.points).enumerate() {
            let hat = traj.interpolate(t)?;
            let theta = hat.inverse();
            outer.merge(&box_extrema_spectral(&hat, &theta, c, OUTER * w));
            if i <= unit_nodes {
                let e = box_extrema_spectral(&hat, &theta, c, w);
                unit.merge(&e);
                outer.merge(&e);
            }
        }
        let (osc_outer, osc_unit) = (amp * outer.osc(), amp * unit.osc());
        if osc_outer < DEGENERATE_OSC {
            degenerate = true;
            break;
        }
        let contraction = out
            .last()
            .map(|p| osc_unit / (spec.mu.powf(2.0 * a - 1.0) * p.osc_unit));
        out.push(ZoomLevel {
            k,
            scale: w,
            window,
            center_end: *path.points.last().unwrap(),
            osc_outer,
            osc_unit,
            shift: amp * 0.5 * (outer.sup + outer.inf),
            norm_scale: OUTER / osc_outer,
            within: osc_unit / osc_outer,
            contraction,
            error: amp * outer.err.max(unit.err),
            subgrid: 2.0 * w < 4.0 * h * (1.0 - 1e-12),
        });
    }
    Ok(ZoomSequence {
        levels: out,
        guard,
        degenerate,
    })
}
