//! Centre of a box carried by the box-averaged velocity.

use crate::error::{check_range, Result};
use crate::solver::{SimConfig, TrajectoryStore};
use crate::spectral::{velocity_spectral, SpectralField};

/// `x(t)` at the RK4 nodes, with the velocity used at each node.
#[derive(Clone, Debug, PartialEq)]
pub struct CenterPath {
    pub times: Vec<f64>,
    pub points: Vec<(f64, f64)>,
    pub velocities: Vec<(f64, f64)>,
}

impl CenterPath {
    /// Cubic Hermite interpolation between nodes.
    pub fn at(&self, t: f64) -> (f64, f64) {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return self.points[0];
        }
        if t >= self.times[n - 1] {
            return self.points[n - 1];
        }
        let i = self.times.partition_point(|&s| s <= t).saturating_sub(1).min(n - 2);
        let h = self.times[i + 1] - self.times[i];
        let u = (t - self.times[i]) / h;
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        let (p0, p1, v0, v1) = (self.points[i], self.points[i + 1], self.velocities[i], self.velocities[i + 1]);
        (
            h00 * p0.0 + h10 * h * v0.0 + h01 * p1.0 + h11 * h * v1.0,
            h00 * p0.1 + h10 * h * v0.1 + h01 * p1.1 + h11 * h * v1.1,
        )
    }

    /// Largest distance from the starting point.
    pub fn max_displacement(&self) -> f64 {
        let p0 = self.points[0];
        self.points
            .iter()
            .map(|p| (p.0 - p0.0).hypot(p.1 - p0.1))
            .fold(0.0, f64::max)
    }
}

/// Average of the spectral velocity over `x + [-w, w]²`.
pub(crate) fn box_average(u: &[SpectralField; 2], x: (f64, f64), w: f64) -> (f64, f64) {
    let g = *u[0].grid();
    let n = g.n();
    let sinc = |k: f64| if k == 0.0 { 1.0 } else { (k * w).sin() / (k * w) };
    let phase: Vec<(f64, f64, f64, f64)> = (0..n)
        .map(|j| {
            let k = g.wavenumber(j);
            let nyq = g.is_nyquist(j);
            // The Nyquist slot is real: cos only.
            let (c0, s0) = ((k * x.0).cos(), if nyq { 0.0 } else { (k * x.0).sin() });
            let (c1, s1) = ((k * x.1).cos(), if nyq { 0.0 } else { (k * x.1).sin() });
            (c0 * sinc(k), s0 * sinc(k), c1 * sinc(k), s1 * sinc(k))
        })
        .collect();
    let mut out = [0.0; 2];
    for (comp, field) in u.iter().enumerate() {
        let c = field.coeffs();
        let mut s = 0.0;
        for i0 in 0..n {
            let (a0, b0, _, _) = phase[i0];
            for i1 in 0..n {
                let (_, _, a1, b1) = phase[i1];
                let z = c[i0 * n + i1];
                // Re(z e^{i(k0 x0 + k1 x1)}) with the sinc damping folded in.
                let (er, ei) = (a0 * a1 - b0 * b1, a0 * b1 + b0 * a1);
                s += z.re * er - z.im * ei;
            }
        }
        out[comp] = s;
    }
    (out[0], out[1])
}

/// RK4 for `x' = v(t, x)` over `[t0, t1]` in `steps` equal steps.
pub(crate) fn integrate_path(
    v: &dyn Fn(f64, (f64, f64)) -> Result<(f64, f64)>,
    x0: (f64, f64),
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<CenterPath> {
    let h = (t1 - t0) / steps as f64;
    let mut times = vec![t0];
    let mut points = vec![x0];
    let mut velocities = vec![v(t0, x0)?];
    let mut x = x0;
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        let k1 = *velocities.last().unwrap();
        let k2 = v(t + 0.5 * h, (x.0 + 0.5 * h * k1.0, x.1 + 0.5 * h * k1.1))?;
        let k3 = v(t + 0.5 * h, (x.0 + 0.5 * h * k2.0, x.1 + 0.5 * h * k2.1))?;
        let k4 = v(t + h, (x.0 + h * k3.0, x.1 + h * k3.1))?;
        x = (
            x.0 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            x.1 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        );
        let tn = if s + 1 == steps { t1 } else { t + h };
        times.push(tn);
        points.push(x);
        velocities.push(v(tn, x)?);
    }
    Ok(CenterPath {
        times,
        points,
        velocities,
    })
}

/// Path of a box of half width `radius` moved by its own average velocity, from
/// `x_start` at `t_start` to `t_end`, in `steps` RK4 steps.
pub fn advected_center(
    traj: &TrajectoryStore,
    x_start: (f64, f64),
    radius: f64,
    t_start: f64,
    t_end: f64,
    steps: usize,
    cfg: &SimConfig,
) -> Result<CenterPath> {
    let l = cfg.grid.length();
    check_range("radius", radius, "(0, L/2)", radius > 0.0 && radius < 0.5 * l)?;
    check_range("steps", steps as f64, "[1, inf)", steps >= 1)?;
    if !(t_end >= t_start) {
        return Err(crate::error::Error::Invalid(format!("path window [{t_start}, {t_end}]")));
    }
    let v = |t: f64, x: (f64, f64)| -> Result<(f64, f64)> {
        let hat = traj.interpolate(t)?;
        let (a, b) = velocity_spectral(&hat, &cfg.velocity_law);
        Ok(box_average(&[a, b], x, radius))
    };
    if t_end == t_start {
        let u = v(t_start, x_start)?;
        return Ok(CenterPath {
            times: vec![t_start],
            points: vec![x_start],
            velocities: vec![u],
        });
    }
    integrate_path(&v, x_start, t_start, t_end, steps)
}
