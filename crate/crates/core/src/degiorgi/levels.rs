use rayon::prelude::*;

use super::quadrature::TimeGrid;
use crate::error::{Error, Result};
use crate::solver::{SimConfig, TrajectoryStore};
use crate::spectral::{PhysicalField, SpectralField};

/// Spatial dimension of the torus.
pub const DIM: f64 = 2.0;

/// `(θ - λ)_+`.
pub fn truncate(theta: &PhysicalField, lambda: f64) -> PhysicalField {
    theta.map(|v| (v - lambda).max(0.0))
}

fn seminorm_sq(f: &PhysicalField, alpha: f64) -> f64 {
    crate::spectral::sobolev_seminorm_sq(&f.forward(), alpha)
}

/// `∫θ_λ²(t1) - ∫θ_λ²(t2) - 2κ ∫∫ |Λ^α θ_λ|²`; non-negative up to quadrature error.
pub fn level_set_energy_check(traj: &TrajectoryStore, lambda: f64, t1: f64, t2: f64, cfg: &SimConfig) -> Result<f64> {
    let tg = TimeGrid::new(traj, t1, t2, &[])?;
    let fields = tg.fields(traj)?;
    let per: Vec<(f64, f64)> = fields
        .par_iter()
        .map(|h| {
            let t = truncate(&h.inverse(), lambda);
            (t.l2_norm_sq(), seminorm_sq(&t, cfg.alpha))
        })
        .collect();
    let diss: Vec<f64> = per.iter().map(|p| p.1).collect();
    let last = tg.times.len() - 1;
    Ok(per[0].0 - per[last].0 - 2.0 * cfg.kappa * tg.integrate(&diss))
}

/// Levels `C_k = M(1 - 2^{-k})` and times `t_k = t0(1 - 2^{-k})`, `k = 0..=k_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelSetFamily {
    pub m: f64,
    pub t0: f64,
    pub k_max: usize,
    pub q: f64,
    pub sigma: f64,
    pub gamma: f64,
}

impl LevelSetFamily {
    pub fn new(m: f64, t0: f64, k_max: usize, alpha: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) || !(t0 > 0.0 && t0.is_finite()) || k_max == 0 {
            return Err(Error::Invalid(format!("level family M = {m}, t0 = {t0}, k_max = {k_max}")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::OutOfRange {
                name: "alpha",
                value: alpha,
                range: "(0, 1]",
            });
        }
        let q = 2.0 + 4.0 * alpha / DIM;
        Ok(Self {
            m,
            t0,
            k_max,
            q,
            sigma: 2.0 * alpha / (DIM + 2.0 * alpha),
            gamma: 2.0 * (q - 1.0) / (q - 2.0),
        })
    }

    pub fn with_m(&self, m: f64) -> Self {
        Self { m, ..*self }
    }

    pub fn level(&self, k: usize) -> f64 {
        self.m * (1.0 - 0.5f64.powi(k as i32))
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 * (1.0 - 0.5f64.powi(k as i32))
    }

    /// `U_k ↦ V_k`, the normalization under which the recursion reads `V_k <= V_{k-1}^{q/2}`.
    pub fn normalize(&self, k: usize, u: f64) -> f64 {
        let (q, g) = (self.q, self.gamma);
        let c = 2f64.powf((g * q + 2.0) / (q - 2.0)) / (self.t0.powf(2.0 / (q - 2.0)) * self.m * self.m);
        c * 2f64.powf(g * k as f64) * u
    }
}

/// Relative size of `U_{k_max}` below which the levels are taken to have converged.
pub const LEVEL_CONVERGENCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct LevelEnergyReport {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// `V_k / V_{k-1}^{q/2}` for `k >= 1`; at most 1 when the recursion holds.
    pub recursion_ratio: Vec<f64>,
    /// `U_{k_max} <= 1e-8 U_0`.
    pub converged: bool,
    /// Smallest `M` with `U_{k_max} <= 1e-8 U_0`.
    pub m_star: f64,
}

/// Physical `θ` at every node of `[0, end]`, broken at the family's times.
struct LevelData {
    tg: TimeGrid,
    theta: Vec<PhysicalField>,
    kappa: f64,
    alpha: f64,
}

impl LevelData {
    fn new(traj: &TrajectoryStore, family: &LevelSetFamily, cfg: &SimConfig) -> Result<Self> {
        if traj.start_time() > 0.0 || traj.end_time() < family.t0 {
            return Err(Error::Trajectory(format!(
                "need [0, {}], trajectory covers [{}, {}]",
                family.t0,
                traj.start_time(),
                traj.end_time()
            )));
        }
        let extra: Vec<f64> = (0..=family.k_max).map(|k| family.time(k)).collect();
        let tg = TimeGrid::new(traj, 0.0, traj.end_time(), &extra)?;
        let theta = tg.fields(traj)?.par_iter().map(SpectralField::inverse).collect();
        Ok(Self {
            tg,
            theta,
            kappa: cfg.kappa,
            alpha: cfg.alpha,
        })
    }

    /// `sup_{t >= t_k} ∫θ_k² + 2κ ∫_{t_k} ∫ |Λ^α θ_k|²` at level `c`.
    fn u(&self, c: f64, tk: f64) -> f64 {
        let nodes: Vec<usize> = self.tg.nodes_from(tk).collect();
        let per: Vec<(usize, f64, f64)> = nodes
            .par_iter()
            .map(|&i| {
                let t = truncate(&self.theta[i], c);
                if t.max() <= 0.0 {
                    (i, 0.0, 0.0)
                } else {
                    (i, t.l2_norm_sq(), seminorm_sq(&t, self.alpha))
                }
            })
            .collect();
        let mut diss = vec![0.0; self.tg.times.len()];
        let mut sup: f64 = 0.0;
        for (i, e, d) in per {
            diss[i] = d;
            sup = sup.max(e);
        }
        sup + 2.0 * self.kappa * self.tg.integrate_from(&diss, tk)
    }
}

/// `U_k`, `V_k` and the fitted `M*` of the level-set iteration.
pub fn level_energy_sequence(traj: &TrajectoryStore, family: &LevelSetFamily, cfg: &SimConfig) -> Result<LevelEnergyReport> {
    let data = LevelData::new(traj, family, cfg)?;
    let u: Vec<f64> = (0..=family.k_max)
        .map(|k| data.u(family.level(k), family.time(k)))
        .collect();
    let v: Vec<f64> = u.iter().enumerate().map(|(k, &x)| family.normalize(k, x)).collect();
    let recursion_ratio = (1..v.len())
        .map(|k| {
            let den = v[k - 1].powf(family.q / 2.0);
            if den > 0.0 {
                v[k] / den
            } else if v[k] == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let u0 = u[0];
    let converged = u[family.k_max] <= LEVEL_CONVERGENCE * u0;

    // Bisection on M; U_{k_max} only grows as M falls.
    let top_level = |m: f64| data.u(family.with_m(m).level(family.k_max), family.time(family.k_max));
    let sup = data.theta.iter().map(PhysicalField::max).fold(0.0, f64::max);
    let m_star = if u0 == 0.0 || sup <= 0.0 {
        0.0
    } else {
        let kfac = 1.0 - 0.5f64.powi(family.k_max as i32);
        let (mut lo, mut hi) = (0.0, sup / kfac);
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if top_level(mid) <= LEVEL_CONVERGENCE * u0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-10 * hi {
                break;
            }
        }
        hi
    };
    Ok(LevelEnergyReport {
        u,
        v,
        recursion_ratio,
        converged,
        m_star,
    })
}

/// Ratio of `‖θ‖²_{L^q}` to `(sup ∫θ²)^σ (∫∫ |Λ^α θ|²)^{1-σ}` over a space-time window.
fn interpolation_ratio_nodes(tg: &TimeGrid, fields: &[PhysicalField], from: f64, q: f64, sigma: f64, alpha: f64) -> Option<f64> {
    let nodes: Vec<usize> = tg.nodes_from(from).collect();
    let mut lq = vec![0.0; tg.times.len()];
    let mut diss = vec![0.0; tg.times.len()];
    let mut sup: f64 = 0.0;
    for &i in &nodes {
        let f = &fields[i];
        lq[i] = f.lp_norm(q).powf(q);
        diss[i] = seminorm_sq(f, alpha);
        sup = sup.max(f.l2_norm_sq());
    }
    let lhs = tg.integrate_from(&lq, from).powf(2.0 / q);
    let rhs = sup.powf(sigma) * tg.integrate_from(&diss, from).powf(1.0 - sigma);
    (rhs > 0.0 && lhs.is_finite()).then(|| lhs / rhs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterpolationReport {
    /// Ratio for `θ_{k-1}` on `[t_{k-1}, end]`, `k = 1..=k_max`; `None` when the field vanishes.
    pub per_level: Vec<Option<f64>>,
    pub max: f64,
}

pub fn interpolation_check(traj: &TrajectoryStore, family: &LevelSetFamily, cfg: &SimConfig) -> Result<InterpolationReport> {
    let data = LevelData::new(traj, family, cfg)?;
    let per_level: Vec<Option<f64>> = (1..=family.k_max)
        .map(|k| {
            let c = family.level(k - 1);
            let fields: Vec<PhysicalField> = data.theta.iter().map(|t| truncate(t, c)).collect();
            interpolation_ratio_nodes(&data.tg, &fields, family.time(k - 1), family.q, family.sigma, cfg.alpha)
        })
        .collect();
    let max = per_level.iter().flatten().copied().fold(0.0, f64::max);
    Ok(InterpolationReport { per_level, max })
}

/// The same ratio for a field held constant over a unit time interval.
pub fn interpolation_ratio(theta: &PhysicalField, alpha: f64) -> Option<f64> {
    let q = 2.0 + 4.0 * alpha / DIM;
    let sigma = 2.0 * alpha / (DIM + 2.0 * alpha);
    let lhs = theta.lp_norm(q).powi(2);
    let rhs = theta.l2_norm_sq().powf(sigma) * seminorm_sq(theta, alpha).powf(1.0 - sigma);
    (rhs > 0.0).then(|| lhs / rhs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinfDecayReport {
    /// `(t, t^{n/4α} ‖θ(t)‖_∞ / ‖θ0‖₂)` at snapshots inside the window.
    pub series: Vec<(f64, f64)>,
    /// Empirical constant: the series maximum.
    pub sup: f64,
}

/// Normalized sup-norm decay over snapshots with `t` in `[t_min, t_max]`.
pub fn linf_decay_check(traj: &TrajectoryStore, cfg: &SimConfig, t_min: f64, t_max: f64) -> Result<LinfDecayReport> {
    let first = traj.first().ok_or_else(|| Error::Trajectory("empty trajectory".into()))?;
    if first.time != 0.0 {
        return Err(Error::Trajectory("decay check needs the initial state at t = 0".into()));
    }
    let l2 = first.theta_hat.l2_norm();
    let expo = DIM / (4.0 * cfg.alpha);
    let series: Vec<(f64, f64)> = traj
        .states()
        .par_iter()
        .filter(|s| s.time >= t_min && s.time <= t_max && s.time > 0.0)
        .map(|s| {
            let v = if l2 == 0.0 {
                0.0
            } else {
                s.time.powf(expo) * s.theta().linf_norm() / l2
            };
            (s.time, v)
        })
        .collect();
    let sup = series.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(LinfDecayReport { series, sup })
}
