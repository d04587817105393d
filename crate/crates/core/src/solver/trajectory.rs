use rustfft::num_complex::Complex64;

use super::config::SimConfig;
use super::integrator::{step_with_rates, time_derivative, SimState};
use crate::error::{Error, Result};
use crate::spectral::{dealias, PhysicalField, SpectralField};

/// Blow-up threshold on `‖θ‖_∞` relative to the initial value.
pub const GROWTH_LIMIT: f64 = 10.0;

/// Snapshots of one run, with strictly increasing times.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryStore {
    config: SimConfig,
    states: Vec<SimState>,
}

impl TrajectoryStore {
    pub fn new(config: SimConfig) -> Self {
        Self {
            config,
            states: Vec::new(),
        }
    }

    pub fn from_states(config: SimConfig, states: Vec<SimState>) -> Result<Self> {
        let mut t = Self::new(config);
        for s in states {
            t.push(s)?;
        }
        Ok(t)
    }

    pub fn push(&mut self, state: SimState) -> Result<()> {
        if *state.theta_hat.grid() != self.config.grid {
            return Err(Error::GridMismatch);
        }
        if !state.time.is_finite() {
            return Err(Error::Trajectory("non-finite snapshot time".into()));
        }
        if let Some(last) = self.states.last() {
            if state.time <= last.time {
                return Err(Error::Trajectory(format!(
                    "time {} does not follow {}",
                    state.time, last.time
                )));
            }
        }
        self.states.push(state);
        Ok(())
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn states(&self) -> &[SimState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.time).collect()
    }

    pub fn first(&self) -> Option<&SimState> {
        self.states.first()
    }

    pub fn last(&self) -> Option<&SimState> {
        self.states.last()
    }

    pub fn start_time(&self) -> f64 {
        self.states.first().map_or(f64::NAN, |s| s.time)
    }

    pub fn end_time(&self) -> f64 {
        self.states.last().map_or(f64::NAN, |s| s.time)
    }

    /// Index of the snapshot at `t`, allowing a relative slack of `1e-9` of the span.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * (self.end_time() - self.start_time()).abs().max(1e-300);
        let i = self.states.partition_point(|s| s.time < t - tol);
        (i < self.states.len() && (self.states[i].time - t).abs() <= tol).then_some(i)
    }

    /// Interval `[i, i+1]` bracketing `t`.
    fn bracket(&self, t: f64) -> Result<usize> {
        if self.states.len() < 2 {
            return Err(Error::Trajectory("need at least two snapshots".into()));
        }
        let tol = 1e-12 * (self.end_time() - self.start_time());
        if t < self.start_time() - tol || t > self.end_time() + tol {
            return Err(Error::Trajectory(format!(
                "time {t} outside [{}, {}]",
                self.start_time(),
                self.end_time()
            )));
        }
        let i = self.states.partition_point(|s| s.time <= t);
        Ok(i.saturating_sub(1).min(self.states.len() - 2))
    }

    /// Cubic Hermite interpolation in time, using the equation for `∂t θ̂`.
    pub fn interpolate(&self, t: f64) -> Result<SpectralField> {
        if let Some(i) = self.index_at(t) {
            return Ok(self.states[i].theta_hat.clone());
        }
        let i = self.bracket(t)?;
        let rates = self.config.decay_rates();
        let (s0, s1) = (&self.states[i], &self.states[i + 1]);
        let d0 = time_derivative(&s0.theta_hat, &self.config, &rates);
        let d1 = time_derivative(&s1.theta_hat, &self.config, &rates);
        let h = s1.time - s0.time;
        let u = (t - s0.time) / h;
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        let g = self.config.grid;
        let out: Vec<Complex64> = (0..g.len())
            .map(|k| {
                s0.theta_hat.coeffs()[k] * h00
                    + d0.coeffs()[k] * (h10 * h)
                    + s1.theta_hat.coeffs()[k] * h01
                    + d1.coeffs()[k] * (h11 * h)
            })
            .collect();
        SpectralField::new(g, out)
    }

    pub fn theta_at(&self, t: f64) -> Result<PhysicalField> {
        Ok(self.interpolate(t)?.inverse())
    }
}

/// Integrates from `θ0` to `t_end`, keeping every `snapshot_stride`-th state and the last.
pub fn run(cfg: &SimConfig, theta0: &PhysicalField) -> Result<TrajectoryStore> {
    cfg.validate()?;
    if *theta0.grid() != cfg.grid {
        return Err(Error::GridMismatch);
    }
    let mut hat = crate::spectral::forward_transform(theta0)?;
    if cfg.dealias {
        hat = dealias(&hat);
    }
    let mut store = TrajectoryStore::new(cfg.clone());
    let mut state = SimState::new(0.0, hat);
    let limit = GROWTH_LIMIT * state.theta().linf_norm();
    store.push(state.clone())?;
    let rates = cfg.decay_rates();
    let steps = cfg.n_steps();
    for k in 1..=steps {
        let mut next = step_with_rates(&state, cfg, &rates)?;
        next.time = k as f64 * cfg.dt;
        let sup = next.theta().linf_norm();
        if sup > limit && sup > 0.0 {
            return Err(Error::BlowUp {
                time: next.time,
                reason: format!("sup norm {sup:e} exceeds {GROWTH_LIMIT}x the initial value"),
                last_good: Box::new(state),
            });
        }
        state = next;
        if k % cfg.snapshot_stride == 0 || k == steps {
            store.push(state.clone())?;
        }
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Grid, VelocityLaw};

    #[test]
    fn zero_horizon_keeps_only_initial() {
        let g = Grid::periodic(16).unwrap();
        let cfg = SimConfig::new(g, 0.1, 0.5, 0.01, 0.0).unwrap();
        let t = run(&cfg, &PhysicalField::from_fn(g, |x, _| x.sin())).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.start_time(), 0.0);
    }

    #[test]
    fn stride_and_final_snapshot() {
        let g = Grid::periodic(16).unwrap();
        let cfg = SimConfig::new(g, 0.1, 0.5, 0.1, 1.05).unwrap().with_stride(4);
        let t = run(&cfg, &PhysicalField::from_fn(g, |x, y| x.sin() * y.cos())).unwrap();
        let times = t.times();
        assert_eq!(times.len(), 4);
        assert!((times[1] - 0.4).abs() < 1e-12);
        assert!(*times.last().unwrap() >= 1.05 - 0.1);
        assert!(t.index_at(0.8).is_some());
        assert!(t.index_at(0.5).is_none());
    }

    #[test]
    fn rejects_non_monotone_times() {
        let g = Grid::periodic(8).unwrap();
        let cfg = SimConfig::new(g, 0.1, 0.5, 0.1, 1.0).unwrap();
        let mut t = TrajectoryStore::new(cfg);
        t.push(SimState::new(1.0, SpectralField::zeros(g))).unwrap();
        assert!(t.push(SimState::new(1.0, SpectralField::zeros(g))).is_err());
        assert!(t.push(SimState::new(0.5, SpectralField::zeros(g))).is_err());
    }

    #[test]
    fn hermite_interpolation_is_accurate() {
        let g = Grid::periodic(16).unwrap();
        let cfg = SimConfig::new(g, 1.0, 0.5, 0.05, 1.0)
            .unwrap()
            .with_velocity(VelocityLaw::Zero)
            .with_stride(2);
        let t = run(&cfg, &PhysicalField::from_fn(g, |x, _| x.cos())).unwrap();
        let f = t.theta_at(0.33).unwrap();
        let want = (-0.33f64).exp();
        assert!((f.at(0, 0) - want).abs() < 1e-6);
        assert!(t.theta_at(1.5).is_err());
    }
}
