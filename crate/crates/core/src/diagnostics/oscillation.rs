//! Oscillation over nested boxes and the Hölder exponent it implies.

use std::fmt::Write as _;

use super::center::advected_center;
use super::sampling::{box_extrema, Extrema};
use crate::error::{check_range, Error, Result};
use crate::extension::{extend_to_heights, ExtensionConfig};
use crate::linalg::line_fit;
use crate::solver::{SimConfig, TrajectoryStore};
use crate::spectral::{PhysicalField, SpectralField};

/// Default ratio between consecutive scales.
pub const DEFAULT_MU: f64 = 0.125;
/// Number of finest scales sampled with bicubic refinement.
const REFINED_SCALES: usize = 2;
/// Finest admissible box: this many grid cells across.
const MIN_CELLS: f64 = 4.0;
/// RK4 steps for each advected centre.
pub(crate) const PATH_STEPS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Fixed,
    Advected,
}

/// Boxes of half width `r0 μ^k` around `center`, `k = 0..=levels`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillationSpec {
    pub center: (f64, f64),
    pub mu: f64,
    pub levels: usize,
    pub r0: f64,
}

impl OscillationSpec {
    pub fn new(center: (f64, f64), mu: f64, levels: usize, r0: f64) -> Result<Self> {
        check_range("mu", mu, "(0, 1/2]", mu > 0.0 && mu <= 0.5)?;
        check_range("r0", r0, "(0, inf)", r0 > 0.0 && r0.is_finite())?;
        if !center.0.is_finite() || !center.1.is_finite() {
            return Err(Error::Invalid("oscillation centre must be finite".into()));
        }
        Ok(Self { center, mu, levels, r0 })
    }

    pub fn scale(&self, k: usize) -> f64 {
        self.r0 * self.mu.powi(k as i32)
    }

    /// Levels whose boxes span at least four cells of spacing `h`.
    fn resolved_levels(&self, h: f64) -> usize {
        (0..=self.levels)
            .take_while(|&k| 2.0 * self.scale(k) >= MIN_CELLS * h * (1.0 - 1e-12))
            .count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OscillationProfile {
    /// Half widths `r0 μ^k` (or time spans for a time profile).
    pub scales: Vec<f64>,
    pub osc: Vec<f64>,
    /// Resolution error bar per scale.
    pub error: Vec<f64>,
    pub mu: f64,
    pub frame: Frame,
    /// Set when the finest requested scales were dropped as unresolved.
    pub truncated: bool,
}

impl OscillationProfile {
    /// `scale,osc,error` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("scale,osc,error\n");
        for ((a, b), c) in self.scales.iter().zip(&self.osc).zip(&self.error) {
            let _ = writeln!(s, "{a:.17e},{b:.17e},{c:.17e}");
        }
        s
    }
}

/// Extrema per scale, finest first refined; coarser boxes inherit the extrema of the
/// boxes nested inside them so that the profile is exactly monotone.
fn nested(count: usize, extrema: impl Fn(usize, bool) -> Extrema) -> Vec<Extrema> {
    let mut out: Vec<Extrema> = (0..count)
        .map(|k| extrema(k, k + REFINED_SCALES >= count))
        .collect();
    for k in (0..count.saturating_sub(1)).rev() {
        let inner = Extrema { err: out[k].err, ..out[k + 1] };
        out[k].merge(&inner);
    }
    out
}

fn from_extrema(spec: &OscillationSpec, e: &[Extrema], frame: Frame, truncated: bool) -> OscillationProfile {
    OscillationProfile {
        scales: (0..e.len()).map(|k| spec.scale(k)).collect(),
        osc: e.iter().map(Extrema::osc).collect(),
        error: e.iter().map(|x| x.err).collect(),
        mu: spec.mu,
        frame,
        truncated,
    }
}

/// Oscillation of `θ` over boxes around a fixed centre.
pub fn oscillation_profile(theta: &PhysicalField, spec: &OscillationSpec) -> Result<OscillationProfile> {
    let g = theta.grid();
    if spec.r0 >= 0.5 * g.length() {
        return Err(Error::OutOfRange {
            name: "r0",
            value: spec.r0,
            range: "(0, L/2)",
        });
    }
    let count = spec.resolved_levels(g.spacing());
    if count == 0 {
        return Err(Error::Invalid("coarsest box spans fewer than four cells".into()));
    }
    let e = nested(count, |k, refine| box_extrema(theta, spec.center, spec.scale(k), refine));
    Ok(from_extrema(spec, &e, Frame::Fixed, count <= spec.levels))
}

/// Oscillation at time `t` with each box centred where its own advected centre,
/// started at `spec.center` at `t_start`, has moved to.
pub fn advected_oscillation_profile(
    traj: &TrajectoryStore,
    spec: &OscillationSpec,
    t_start: f64,
    t: f64,
    cfg: &SimConfig,
) -> Result<OscillationProfile> {
    let theta = traj.theta_at(t)?;
    let g = cfg.grid;
    let count = spec.resolved_levels(g.spacing());
    if count == 0 {
        return Err(Error::Invalid("coarsest box spans fewer than four cells".into()));
    }
    let centers = (0..count)
        .map(|k| Ok(*advected_center(traj, spec.center, spec.scale(k), t_start, t, PATH_STEPS, cfg)?.points.last().unwrap()))
        .collect::<Result<Vec<_>>>()?;
    // Advected boxes need not nest, so each scale stands alone.
    let e: Vec<Extrema> = (0..count)
        .map(|k| box_extrema(&theta, centers[k], spec.scale(k), k + REFINED_SCALES >= count))
        .collect();
    Ok(from_extrema(spec, &e, Frame::Advected, count <= spec.levels))
}

/// Oscillation of the extension over `B_{r} × [0, r]` for each scale.
pub fn extension_oscillation_profile(
    theta: &SpectralField,
    ext: &ExtensionConfig,
    spec: &OscillationSpec,
    rows_per_box: usize,
) -> Result<OscillationProfile> {
    let g = *theta.grid();
    let count = spec.resolved_levels(g.spacing());
    if count == 0 || rows_per_box < 2 {
        return Err(Error::Invalid("need a resolved coarsest box and at least two rows".into()));
    }
    let mut z: Vec<f64> = vec![0.0];
    for k in 0..count {
        let w = spec.scale(k);
        z.extend((1..=rows_per_box).map(|j| w * j as f64 / rows_per_box as f64));
    }
    z.sort_by(f64::total_cmp);
    z.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1e-300));
    let field = extend_to_heights(theta, ext, &z)?;
    let e = nested(count, |k, refine| {
        let w = spec.scale(k);
        let mut acc = Extrema::empty();
        for (j, &zj) in z.iter().enumerate() {
            if zj <= w * (1.0 + 1e-12) {
                acc.merge(&box_extrema(field.layer(j), spec.center, w, refine));
            }
        }
        acc
    });
    Ok(from_extrema(spec, &e, Frame::Fixed, count <= spec.levels))
}

/// Oscillation of `θ(x, ·)` over `[t - τ μ^{2αk}, t]`, sampled at 33 times per window.
pub fn time_oscillation_profile(
    traj: &TrajectoryStore,
    x: (f64, f64),
    t: f64,
    tau: f64,
    mu: f64,
    levels: usize,
    alpha: f64,
) -> Result<OscillationProfile> {
    check_range("mu", mu, "(0, 1/2]", mu > 0.0 && mu <= 0.5)?;
    if t - tau < traj.start_time() - 1e-12 || !(tau > 0.0) {
        return Err(Error::Trajectory(format!("window [{}, {t}] precedes the trajectory", t - tau)));
    }
    let nu = mu.powf(2.0 * alpha);
    let mut scales = Vec::new();
    let mut osc = Vec::new();
    let mut error = Vec::new();
    for k in 0..=levels {
        let span = tau * nu.powi(k as i32);
        let vals = (0..=32)
            .map(|i| Ok(traj.interpolate(t - span * i as f64 / 32.0)?.eval_at(x.0, x.1)))
            .collect::<Result<Vec<f64>>>()?;
        let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let jump = vals.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        scales.push(span);
        osc.push(hi - lo);
        error.push(0.5 * jump);
    }
    Ok(OscillationProfile {
        scales,
        osc,
        error,
        mu: nu,
        frame: Frame::Fixed,
        truncated: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderEstimate {
    pub delta: f64,
    pub fit_r2: f64,
    /// First and last level used.
    pub scale_range: (usize, usize),
}

/// Least-squares slope of `ln osc_k` against `k ln μ`.
pub fn holder_fit(profile: &OscillationProfile) -> Result<HolderEstimate> {
    let pts: Vec<(usize, f64)> = profile
        .osc
        .iter()
        .enumerate()
        .filter(|(_, &o)| o > 0.0 && o.is_finite())
        .map(|(k, &o)| (k, o))
        .collect();
    if pts.len() < 4 {
        return Err(Error::Degenerate(format!(
            "{} scales with positive oscillation, need 4",
            pts.len()
        )));
    }
    let lm = profile.mu.ln();
    let x: Vec<f64> = pts.iter().map(|p| p.0 as f64 * lm).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let fit = line_fit(&x, &y).ok_or_else(|| Error::Degenerate("Hölder fit".into()))?;
    Ok(HolderEstimate {
        delta: fit.slope,
        fit_r2: fit.r2,
        scale_range: (pts[0].0, pts[pts.len() - 1].0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    fn prototype(n: usize, delta: f64) -> PhysicalField {
        PhysicalField::from_fn(Grid::periodic(n).unwrap(), |x, _| x.sin().abs().powf(delta))
    }

    #[test]
    fn constant_has_zero_oscillation() {
        let g = Grid::periodic(64).unwrap();
        let spec = OscillationSpec::new((1.0, 1.0), 0.5, 4, 1.0).unwrap();
        let p = oscillation_profile(&PhysicalField::constant(g, 2.0), &spec).unwrap();
        assert!(p.osc.iter().all(|&o| o == 0.0));
        assert!(holder_fit(&p).is_err());
    }

    #[test]
    fn linear_ramp_has_ratio_mu() {
        // A sawtooth in x1, linear away from the jump at 0.
        let g = Grid::periodic(256).unwrap();
        let f = PhysicalField::from_fn(g, |x, _| x);
        let spec = OscillationSpec::new((PI, PI), 0.5, 5, 1.0).unwrap();
        let p = oscillation_profile(&f, &spec).unwrap();
        for w in p.osc.windows(2) {
            assert!((w[1] / w[0] - 0.5).abs() < 0.05, "{:?}", p.osc);
        }
        let h = holder_fit(&p).unwrap();
        assert!((h.delta - 1.0).abs() < 0.02 && h.fit_r2 > 0.999, "{h:?}");
        assert!(p.to_csv().lines().count() == p.osc.len() + 1);
    }

    #[test]
    fn holder_prototypes() {
        let n = 512;
        let h = 2.0 * PI / n as f64;
        for &d in &[0.3, 0.6, 1.0] {
            let spec = OscillationSpec::new((0.0, 1.0), 0.5, 8, 64.0 * h).unwrap();
            let p = oscillation_profile(&prototype(n, d), &spec).unwrap();
            assert!(p.osc.windows(2).all(|w| w[1] <= w[0]));
            let est = holder_fit(&p).unwrap();
            assert!((est.delta - d).abs() < 0.03, "delta0={d}: {est:?}");
            // Scale-free: multiplying θ leaves δ alone.
            let q = oscillation_profile(&prototype(n, d).map(|v| 7.0 * v), &spec).unwrap();
            assert!((holder_fit(&q).unwrap().delta - est.delta).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_profiles_are_fitted_exactly() {
        let p = OscillationProfile {
            scales: vec![1.0; 6],
            osc: (0..6).map(|k| 0.3 * 0.25f64.powf(0.42 * k as f64)).collect(),
            error: vec![0.0; 6],
            mu: 0.25,
            frame: Frame::Fixed,
            truncated: false,
        };
        let h = holder_fit(&p).unwrap();
        assert!((h.delta - 0.42).abs() < 1e-12 && (h.fit_r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unresolved_scales_are_dropped() {
        let g = Grid::periodic(32).unwrap();
        let spec = OscillationSpec::new((1.0, 1.0), 0.5, 10, 1.0).unwrap();
        let p = oscillation_profile(&PhysicalField::from_fn(g, |x, y| x.sin() + y.cos()), &spec).unwrap();
        assert!(p.truncated && p.osc.len() < 11);
        assert!(2.0 * p.scales.last().unwrap() >= 4.0 * g.spacing() * (1.0 - 1e-12));
    }

    #[test]
    fn extension_profile_of_a_harmonic_mode() {
        // At α = 1/2 the extension of cos x is e^{-z} cos x. On boxes where cos x > 0
        // the sup sits on the trace and the inf at the far corner z = r.
        let g = Grid::periodic(64).unwrap();
        let th = PhysicalField::from_fn(g, |x, _| x.cos());
        let ext = ExtensionConfig::for_grid(0.5, &g).unwrap();
        let (c, r0) = (0.5, 0.8);
        let spec = OscillationSpec::new((c, c), 0.5, 3, r0).unwrap();
        let p = extension_oscillation_profile(&th.forward(), &ext, &spec, 4).unwrap();
        assert_eq!(p.osc.len(), 3);
        for (k, (&o, &e)) in p.osc.iter().zip(&p.error).enumerate() {
            let w = spec.scale(k);
            let want = (c - w).max(0.0).cos() - (-w).exp() * (c + w).cos();
            let tol = if k == 0 { e } else { 1e-4 };
            assert!((o - want).abs() <= tol, "k={k}: {o} vs {want}");
        }
    }
}
