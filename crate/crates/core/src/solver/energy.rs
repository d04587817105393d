use super::config::SimConfig;
use super::integrator::time_derivative;
use super::trajectory::TrajectoryStore;
use crate::error::{Error, Result};

/// Largest `2κ|k|^{2α} h` for which a mode is integrated with the exponential weight.
const WEIGHTED_LIMIT: f64 = 0.5;

/// `∫_0^1 e^{-βu} h00(u) du` and `∫_0^1 e^{-βu} h10(u) du` for the cubic Hermite basis.
fn hermite_exp_moments(beta: f64) -> (f64, f64) {
    let (mut i00, mut i10) = (0.0, 0.0);
    let mut term = 1.0;
    for j in 0..40 {
        let jf = j as f64;
        i00 += term * (1.0 / (jf + 1.0) - 3.0 / (jf + 3.0) + 2.0 / (jf + 4.0));
        i10 += term * (1.0 / (jf + 2.0) - 2.0 / (jf + 3.0) + 1.0 / (jf + 4.0));
        term *= -beta / (jf + 1.0);
    }
    (i00, i10)
}

/// `∫ |θ̂_k|² dt` over one interval.
///
/// Writing `|θ̂_k|² = e^{-c s} G(s)` with `c = 2κ|k|^{2α}` and fitting `G` by a
/// cubic Hermite polynomial makes the rule exact for linear decay; stiff modes
/// fall back to the end-corrected trapezoid rule.
fn mode_integral(a0: f64, d0: f64, a1: f64, d1: f64, c: f64, h: f64) -> f64 {
    let beta = c * h;
    if beta > WEIGHTED_LIMIT {
        return 0.5 * h * (a0 + a1) + h * h / 12.0 * (d0 - d1);
    }
    let (p, q) = hermite_exp_moments(beta);
    let (pm, qm) = hermite_exp_moments(-beta);
    h * (a0 * p + h * (d0 + c * a0) * q + a1 * pm - h * (d1 + c * a1) * qm)
}

/// Per snapshot interval, `|Δ‖θ‖² + 2κ ∫ ‖Λ^α θ‖² dt| / (‖θ0‖² Δt)`.
///
/// The time derivative of every coefficient comes from the equation itself,
/// so the quadrature is fourth order and exact when the velocity is off.
pub fn energy_balance_residual(traj: &TrajectoryStore, cfg: &SimConfig) -> Result<Vec<f64>> {
    if traj.len() < 2 {
        return Err(Error::Trajectory("energy balance needs two snapshots".into()));
    }
    let states = traj.states();
    let e0 = states[0].theta_hat.l2_norm_sq();
    if e0 == 0.0 {
        return Ok(vec![0.0; states.len() - 1]);
    }
    let g = cfg.grid;
    let l2 = g.length() * g.length();
    let rates = cfg.decay_rates();
    let weights: Vec<f64> = (0..g.len())
        .map(|i| (g.mode_norm_sq(i) as f64 * g.k0() * g.k0()).powf(cfg.alpha) * l2)
        .collect();
    // Per snapshot: energy, then |θ̂_k|² and its time derivative for every mode.
    let per: Vec<(f64, Vec<(f64, f64)>)> = states
        .iter()
        .map(|s| {
            let dt = time_derivative(&s.theta_hat, cfg, &rates);
            let modes = s
                .theta_hat
                .coeffs()
                .iter()
                .zip(dt.coeffs())
                .map(|(c, d)| (c.norm_sqr(), 2.0 * (c.conj() * d).re))
                .collect();
            (s.theta_hat.l2_norm_sq(), modes)
        })
        .collect();
    Ok(states
        .windows(2)
        .zip(per.windows(2))
        .map(|(s, p)| {
            let h = s[1].time - s[0].time;
            let integral: f64 = (1..g.len())
                .map(|i| {
                    let (a0, d0) = p[0].1[i];
                    let (a1, d1) = p[1].1[i];
                    weights[i] * mode_integral(a0, d0, a1, d1, 2.0 * rates[i], h)
                })
                .sum();
            (p[1].0 - p[0].0 + 2.0 * cfg.kappa * integral).abs() / (e0 * h)
        })
        .collect())
}

/// `(t, ‖θ(t)‖₂)` at every snapshot.
pub fn l2_series(traj: &TrajectoryStore) -> Vec<(f64, f64)> {
    traj.states().iter().map(|s| (s.time, s.theta_hat.l2_norm())).collect()
}

/// `(t, ‖θ(t)‖_∞)` at every snapshot (grid maximum).
pub fn linf_series(traj: &TrajectoryStore) -> Vec<(f64, f64)> {
    traj.states().iter().map(|s| (s.time, s.theta().linf_norm())).collect()
}

/// Largest increase between consecutive entries of a series, `max(0, max_i f_{i+1} - f_i)`.
pub fn max_increase(series: &[(f64, f64)]) -> f64 {
    series.windows(2).fold(0.0, |m, w| m.max(w[1].1 - w[0].1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::run;
    use crate::spectral::{Grid, PhysicalField, VelocityLaw};

    #[test]
    fn linear_mode_balances_exactly() {
        let g = Grid::periodic(16).unwrap();
        let cfg = SimConfig::new(g, 0.7, 0.3, 0.01, 1.0)
            .unwrap()
            .with_velocity(VelocityLaw::Zero)
            .with_stride(5);
        let t = run(&cfg, &PhysicalField::from_fn(g, |x, y| x.cos() + (2.0 * y).sin())).unwrap();
        let r = energy_balance_residual(&t, &cfg).unwrap();
        assert!(r.iter().all(|&v| v <= 1e-10), "{r:?}");
    }

    #[test]
    fn weighted_rule_limits() {
        // β = 0 reduces to the end-corrected trapezoid rule.
        let (p, q) = hermite_exp_moments(0.0);
        assert!((p - 0.5).abs() < 1e-15 && (q - 1.0 / 12.0).abs() < 1e-15);
        // exact on a decaying exponential
        let (c, h, a0): (f64, f64, f64) = (0.37, 0.9, 2.0);
        let a1 = a0 * (-c * h).exp();
        let got = mode_integral(a0, -c * a0, a1, -c * a1, c, h);
        let want = a0 * (1.0 - (-c * h).exp()) / c;
        assert!((got - want).abs() < 1e-15 * want.max(1.0));
    }

    #[test]
    fn constant_has_no_residual() {
        let g = Grid::periodic(16).unwrap();
        let cfg = SimConfig::new(g, 0.7, 0.3, 0.01, 0.1).unwrap();
        let t = run(&cfg, &PhysicalField::constant(g, 3.0)).unwrap();
        assert!(energy_balance_residual(&t, &cfg).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn nonlinear_small_run_balances() {
        let g = Grid::periodic(32).unwrap();
        let cfg = SimConfig::new(g, 0.1, 0.5, 2e-3, 0.2).unwrap().with_stride(5);
        let th = PhysicalField::from_fn(g, |x, y| x.cos() + 0.5 * (x + 2.0 * y).sin() + 0.2 * (3.0 * y).cos());
        let t = run(&cfg, &th).unwrap();
        let r = energy_balance_residual(&t, &cfg).unwrap();
        assert!(r.iter().all(|&v| v <= 1e-8), "{r:?}");
        let l2 = l2_series(&t);
        assert!(max_increase(&l2) <= 0.0);
    }
}
