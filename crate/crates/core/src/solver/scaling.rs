use rustfft::num_complex::Complex64;

use super::config::SimConfig;
use super::integrator::SimState;
use super::trajectory::TrajectoryStore;
use crate::error::{Error, Result};
use crate::spectral::{gradient, lambda_power, velocity_spectral, Grid, PhysicalField, SpectralField};

/// `μ^{2α-1} θ(μx)` on the same grid: mode `k` moves to `μk`, modes that no
/// longer fit below the Nyquist index are dropped.
pub fn rescale_field(theta: &SpectralField, mu: u32, alpha: f64) -> SpectralField {
    let g = *theta.grid();
    let n = g.n();
    let half = (n / 2) as i64;
    let amp = (mu as f64).powf(2.0 * alpha - 1.0);
    let m = mu as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
    for (i, c) in theta.coeffs().iter().enumerate() {
        let (a, b) = (g.mode_index(i / n) * m, g.mode_index(i % n) * m);
        if a.abs() >= half || b.abs() >= half {
            continue;
        }
        if let (Some(sa), Some(sb)) = (g.slot(a), g.slot(b)) {
            out[sa * n + sb] = c * amp;
        }
    }
    SpectralField::from_raw(g, out)
}

/// The family `μ^{2α-1} θ(μx, μ^{2α} t)` sampled at the stored times `τ / μ^{2α}`.
pub fn rescale_solution(traj: &TrajectoryStore, mu: u32, cfg: &SimConfig) -> Result<TrajectoryStore> {
    if mu == 0 {
        return Err(Error::Invalid("rescaling factor must be >= 1".into()));
    }
    let tf = (mu as f64).powf(2.0 * cfg.alpha);
    let mut out_cfg = cfg.clone();
    out_cfg.dt = cfg.dt / tf;
    out_cfg.t_end = cfg.t_end / tf;
    let states = traj
        .states()
        .iter()
        .map(|s| SimState::new(s.time / tf, rescale_field(&s.theta_hat, mu, cfg.alpha)))
        .collect();
    TrajectoryStore::from_states(out_cfg, states)
}

/// Rescaled fields at arbitrary requested times (in the rescaled clock).
pub fn rescale_solution_at(
    traj: &TrajectoryStore,
    mu: u32,
    times: &[f64],
    cfg: &SimConfig,
) -> Result<Vec<SpectralField>> {
    if mu == 0 {
        return Err(Error::Invalid("rescaling factor must be >= 1".into()));
    }
    let tf = (mu as f64).powf(2.0 * cfg.alpha);
    times
        .iter()
        .map(|&t| Ok(rescale_field(&traj.interpolate(t * tf)?, mu, cfg.alpha)))
        .collect()
}

/// `u·∇θ` without truncation: the product is formed on a doubled grid, so it
/// is exact for the stored trigonometric polynomial, then cut back to `n`.
fn transport_exact(theta: &SpectralField, cfg: &SimConfig) -> Result<SpectralField> {
    let g = *theta.grid();
    let fine = Grid::new(2 * g.n(), g.length())?;
    let (u1, u2) = velocity_spectral(theta, &cfg.velocity_law);
    let (d0, d1) = gradient(theta);
    let up = |f: &SpectralField| f.resample(fine).inverse();
    let (u1, u2, d0, d1) = (up(&u1), up(&u2), up(&d0), up(&d1));
    let prod: Vec<f64> = (0..fine.len())
        .map(|i| u1.values()[i] * d0.values()[i] + u2.values()[i] * d1.values()[i])
        .collect();
    Ok(PhysicalField::new(fine, prod)?.forward().resample(g))
}

/// Relative residual of the equation at every interior snapshot.
///
/// `∂t θ` is a second-order three-point difference on the (possibly uneven)
/// snapshot times; the result is `‖∂t θ + u·∇θ + κΛ^{2α}θ‖₂ / ‖κΛ^{2α}θ‖₂`.
pub fn pde_residual(traj: &TrajectoryStore, cfg: &SimConfig) -> Result<Vec<(f64, f64)>> {
    if traj.len() < 3 {
        return Err(Error::Trajectory("residual needs three snapshots".into()));
    }
    let s = traj.states();
    let mut out = Vec::with_capacity(s.len() - 2);
    for w in s.windows(3) {
        let (t0, t1, t2) = (w[0].time, w[1].time, w[2].time);
        let (h0, h1) = (t1 - t0, t2 - t1);
        let c0 = -h1 / (h0 * (h0 + h1));
        let c1 = (h1 - h0) / (h0 * h1);
        let c2 = h0 / (h1 * (h0 + h1));
        let dt = w[0]
            .theta_hat
            .scale(c0)
            .axpy(c1, &w[1].theta_hat)?
            .axpy(c2, &w[2].theta_hat)?;
        let diss = lambda_power(&w[1].theta_hat, 2.0 * cfg.alpha).scale(cfg.kappa);
        let adv = transport_exact(&w[1].theta_hat, cfg)?;
        let r = dt.axpy(1.0, &adv)?.axpy(1.0, &diss)?;
        let scale = diss.l2_norm();
        out.push((t1, if scale > 0.0 { r.l2_norm() / scale } else { r.l2_norm() }));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::run;
    use crate::spectral::VelocityLaw;

    #[test]
    fn identity_at_unit_factor() {
        let g = Grid::periodic(16).unwrap();
        let cfg = SimConfig::new(g, 0.1, 0.4, 0.01, 0.05).unwrap();
        let t = run(&cfg, &PhysicalField::from_fn(g, |x, y| x.sin() + y.cos())).unwrap();
        let r = rescale_solution(&t, 1, &cfg).unwrap();
        assert_eq!(r.states(), t.states());
    }

    #[test]
    fn rescaled_mode_lands_on_multiple() {
        let g = Grid::periodic(16).unwrap();
        let th = PhysicalField::from_fn(g, |x, y| (x + 2.0 * y).cos()).forward();
        let r = rescale_field(&th, 3, 0.25).inverse();
        let want = PhysicalField::from_fn(g, |x, y| 3f64.powf(-0.5) * (3.0 * x + 6.0 * y).cos());
        let err = r.zip_with(&want, |a, b| (a - b).abs()).unwrap().linf_norm();
        assert!(err < 1e-14);
        // 3*3 = 9 >= 8 is dropped
        let th = PhysicalField::from_fn(g, |x, _| (3.0 * x).cos()).forward();
        assert!(rescale_field(&th, 3, 0.25).l2_norm() < 1e-13);
    }

    #[test]
    fn requested_times_must_be_in_range() {
        let g = Grid::periodic(16).unwrap();
        let cfg = SimConfig::new(g, 1.0, 0.5, 0.1, 0.5)
            .unwrap()
            .with_velocity(VelocityLaw::Zero);
        let t = run(&cfg, &PhysicalField::from_fn(g, |x, _| x.cos())).unwrap();
        assert!(rescale_solution_at(&t, 2, &[0.1], &cfg).is_ok());
        assert!(rescale_solution_at(&t, 2, &[0.3], &cfg).is_err());
    }
}
