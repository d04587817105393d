use crate::error::{check_range, Error, Result};
use crate::spectral::{Grid, VelocityLaw};

/// Parameters of one simulation of `∂t θ + u·∇θ + κ Λ^{2α} θ = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub grid: Grid,
    pub kappa: f64,
    pub alpha: f64,
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
    pub velocity_law: VelocityLaw,
    pub snapshot_stride: usize,
}

impl SimConfig {
    pub fn new(grid: Grid, kappa: f64, alpha: f64, dt: f64, t_end: f64) -> Result<Self> {
        let cfg = Self {
            grid,
            kappa,
            alpha,
            dt,
            t_end,
            dealias: true,
            velocity_law: VelocityLaw::Sqg,
            snapshot_stride: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_velocity(mut self, law: VelocityLaw) -> Self {
        self.velocity_law = law;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn with_dealias(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_range("kappa", self.kappa, "(0, inf)", self.kappa > 0.0)?;
        check_range("alpha", self.alpha, "(0, 1]", self.alpha > 0.0 && self.alpha <= 1.0)?;
        check_range("dt", self.dt, "(0, inf)", self.dt > 0.0)?;
        check_range("t_end", self.t_end, "[0, inf)", self.t_end >= 0.0)?;
        if self.snapshot_stride == 0 {
            return Err(Error::Invalid("snapshot_stride must be positive".into()));
        }
        Ok(())
    }

    /// Number of steps a run takes to reach `t_end`.
    pub fn n_steps(&self) -> usize {
        let r = self.t_end / self.dt;
        let k = r.round();
        if (r - k).abs() <= 1e-9 * r.max(1.0) {
            k as usize
        } else {
            r.ceil() as usize
        }
    }

    /// `κ |k|^{2α}` for every coefficient slot.
    pub(crate) fn decay_rates(&self) -> Vec<f64> {
        let g = &self.grid;
        (0..g.len())
            .map(|i| {
                let m2 = g.mode_norm_sq(i) as f64 * g.k0() * g.k0();
                self.kappa * m2.powf(self.alpha)
            })
            .collect()
    }
}
