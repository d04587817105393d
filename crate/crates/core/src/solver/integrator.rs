use rustfft::num_complex::Complex64;

use super::config::SimConfig;
use crate::error::{Error, Result};
use crate::spectral::{dealias, gradient, velocity_spectral, PhysicalField, SpectralField};

/// Solution at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub time: f64,
    pub theta_hat: SpectralField,
}

impl SimState {
    pub fn new(time: f64, theta_hat: SpectralField) -> Self {
        Self { time, theta_hat }
    }

    pub fn from_physical(time: f64, theta: &PhysicalField) -> Result<Self> {
        Ok(Self {
            time,
            theta_hat: crate::spectral::forward_transform(theta)?,
        })
    }

    pub fn theta(&self) -> PhysicalField {
        self.theta_hat.inverse()
    }
}

pub(crate) const CFL_LIMIT: f64 = 0.5;
const MAX_HALVINGS: u32 = 24;

/// `-u·∇θ` in spectral form (dealiased when configured) and `max |u|`.
pub(crate) fn nonlinear(theta: &SpectralField, cfg: &SimConfig) -> (SpectralField, f64) {
    let g = *theta.grid();
    let (u1, u2) = velocity_spectral(theta, &cfg.velocity_law);
    let (u1, u2) = (u1.inverse(), u2.inverse());
    let (d0, d1) = gradient(theta);
    let (d0, d1) = (d0.inverse(), d1.inverse());
    let mut umax: f64 = 0.0;
    let prod: Vec<f64> = (0..g.len())
        .map(|i| {
            let (a, b) = (u1.values()[i], u2.values()[i]);
            umax = umax.max(a.hypot(b));
            -(a * d0.values()[i] + b * d1.values()[i])
        })
        .collect();
    let mut out = PhysicalField::from_raw(g, prod).forward();
    if cfg.dealias {
        out = dealias(&out);
    }
    out.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    (out, umax)
}

/// Full right-hand side `-u·∇θ - κΛ^{2α}θ`.
pub(crate) fn time_derivative(theta: &SpectralField, cfg: &SimConfig, rates: &[f64]) -> SpectralField {
    let (nl, _) = nonlinear(theta, cfg);
    let mut out = nl;
    for ((o, c), r) in out.coeffs_mut().iter_mut().zip(theta.coeffs()).zip(rates) {
        *o -= c * r;
    }
    out
}

/// One integrating-factor RK4 substep of length `h`, given `nv = N(v)`.
fn if_rk4(v: &SpectralField, nv: &SpectralField, h: f64, cfg: &SimConfig, rates: &[f64]) -> SpectralField {
    let g = *v.grid();
    let e: Vec<f64> = rates.iter().map(|r| (-r * h).exp()).collect();
    let e2: Vec<f64> = rates.iter().map(|r| (-r * h * 0.5).exp()).collect();
    let v = v.coeffs();
    let stage = |f: &dyn Fn(usize) -> Complex64| -> Vec<Complex64> {
        let s = SpectralField::from_raw(g, (0..g.len()).map(f).collect());
        nonlinear(&s, cfg).0.coeffs().iter().map(|x| x * h).collect()
    };
    let a: Vec<Complex64> = nv.coeffs().iter().map(|x| x * h).collect();
    let b = stage(&|i| (v[i] + a[i] * 0.5) * e2[i]);
    let c = stage(&|i| v[i] * e2[i] + b[i] * 0.5);
    let d = stage(&|i| v[i] * e[i] + c[i] * e2[i]);
    let out = (0..g.len())
        .map(|i| v[i] * e[i] + (a[i] * e[i] + (b[i] + c[i]) * (2.0 * e2[i]) + d[i]) / 6.0)
        .collect();
    SpectralField::from_raw(g, out)
}

/// Advances by exactly `cfg.dt`, halving internally while the CFL guard fails.
pub fn step(state: &SimState, cfg: &SimConfig) -> Result<SimState> {
    let rates = cfg.decay_rates();
    step_with_rates(state, cfg, &rates)
}

pub(crate) fn step_with_rates(state: &SimState, cfg: &SimConfig, rates: &[f64]) -> Result<SimState> {
    let g = cfg.grid;
    if *state.theta_hat.grid() != g {
        return Err(Error::GridMismatch);
    }
    let blow = |reason: &str| Error::BlowUp {
        time: state.time,
        reason: reason.to_string(),
        last_good: Box::new(state.clone()),
    };
    if !state.theta_hat.is_finite() {
        return Err(blow("non-finite input state"));
    }
    let mut level = 0u32;
    let mut done = 0u64;
    let mut v = state.theta_hat.clone();
    while done < (1u64 << level) {
        let h = cfg.dt / (1u64 << level) as f64;
        let (nv, umax) = nonlinear(&v, cfg);
        if h * umax * g.n() as f64 / g.length() > CFL_LIMIT {
            if level == MAX_HALVINGS {
                return Err(blow("CFL guard unsatisfiable"));
            }
            level += 1;
            done *= 2;
            continue;
        }
        v = if_rk4(&v, &nv, h, cfg, rates);
        if !v.is_finite() {
            return Err(blow("non-finite values"));
        }
        done += 1;
    }
    Ok(SimState {
        time: state.time + cfg.dt,
        theta_hat: v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Grid, VelocityLaw};
    use std::f64::consts::PI;

    fn smooth(g: Grid) -> PhysicalField {
        PhysicalField::from_fn(g, |x, y| x.cos() + 0.5 * (x + 2.0 * y).sin() - 0.3 * (2.0 * y).cos())
    }

    #[test]
    fn linear_single_mode_is_exact() {
        let g = Grid::periodic(16).unwrap();
        let cfg = SimConfig::new(g, 1.0, 0.5, 0.1, 1.0).unwrap().with_velocity(VelocityLaw::Zero);
        let mut s = SimState::from_physical(0.0, &PhysicalField::from_fn(g, |x, _| x.cos())).unwrap();
        for _ in 0..10 {
            s = step(&s, &cfg).unwrap();
        }
        let want = PhysicalField::from_fn(g, |x, _| (-1.0f64).exp() * x.cos());
        let err = s.theta().zip_with(&want, |a, b| (a - b).abs()).unwrap().linf_norm();
        assert!(err < 1e-14, "{err}");
        assert!((s.time - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_stays_zero() {
        let g = Grid::periodic(16).unwrap();
        let cfg = SimConfig::new(g, 0.1, 0.3, 0.01, 1.0).unwrap();
        let s = SimState::from_physical(0.0, &PhysicalField::zeros(g)).unwrap();
        let s = step(&step(&s, &cfg).unwrap(), &cfg).unwrap();
        assert_eq!(s.theta().linf_norm(), 0.0);
    }

    #[test]
    fn fourth_order_in_time() {
        let g = Grid::new(32, 2.0 * PI).unwrap();
        let th = smooth(g);
        let run = |dt: f64| {
            let cfg = SimConfig::new(g, 0.1, 0.4, dt, 0.4).unwrap();
            let mut s = SimState::from_physical(0.0, &th).unwrap();
            for _ in 0..cfg.n_steps() {
                s = step(&s, &cfg).unwrap();
            }
            s.theta_hat
        };
        let (a, b, c) = (run(0.04), run(0.02), run(0.01));
        let e1 = a.axpy(-1.0, &b).unwrap().l2_norm();
        let e2 = b.axpy(-1.0, &c).unwrap().l2_norm();
        let order = (e1 / e2).log2();
        assert!(order > 3.7 && order < 4.4, "observed order {order}");
    }

    #[test]
    fn cfl_halving_lands_on_dt() {
        let g = Grid::periodic(32).unwrap();
        let th = smooth(g).map(|v| 40.0 * v);
        let cfg = SimConfig::new(g, 0.1, 0.5, 0.05, 0.05).unwrap();
        let s = step(&SimState::from_physical(0.0, &th).unwrap(), &cfg).unwrap();
        assert_eq!(s.time, 0.05);
        assert!(s.theta().linf_norm().is_finite());
    }

    #[test]
    fn blow_up_carries_state() {
        let g = Grid::periodic(16).unwrap();
        let cfg = SimConfig::new(g, 0.1, 0.5, 0.05, 0.05).unwrap();
        let mut hat = SpectralField::zeros(g);
        hat.coeffs_mut()[3] = Complex64::new(f64::INFINITY, 0.0);
        let st = SimState::new(0.25, hat);
        match step(&st, &cfg) {
            Err(Error::BlowUp { time, last_good, .. }) => {
                assert_eq!(time, 0.25);
                assert_eq!(last_good.time, 0.25);
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }
}
