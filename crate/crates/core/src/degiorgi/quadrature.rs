use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::solver::TrajectoryStore;
use crate::spectral::SpectralField;

/// Composite Simpson nodes over `[t1, t2]`, broken at every snapshot and at `extra` times.
pub(crate) struct TimeGrid {
    pub times: Vec<f64>,
    /// `(left, mid, right)` node indices per interval.
    pub intervals: Vec<[usize; 3]>,
}

impl TimeGrid {
    pub fn new(traj: &TrajectoryStore, t1: f64, t2: f64, extra: &[f64]) -> Result<Self> {
        if !(t2 > t1) {
            return Err(Error::Invalid(format!("empty time window [{t1}, {t2}]")));
        }
        let tol = 1e-9 * (traj.end_time() - traj.start_time()).abs().max(1e-300);
        if traj.len() < 2 || t1 < traj.start_time() - tol || t2 > traj.end_time() + tol {
            return Err(Error::Trajectory(format!(
                "window [{t1}, {t2}] not covered by [{}, {}]",
                traj.start_time(),
                traj.end_time()
            )));
        }
        let mut breaks: Vec<f64> = traj
            .times()
            .into_iter()
            .chain(extra.iter().copied())
            .filter(|&t| t > t1 + tol && t < t2 - tol)
            .collect();
        breaks.push(t1);
        breaks.push(t2);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= tol);
        let mut times = vec![breaks[0]];
        let mut intervals = Vec::with_capacity(breaks.len() - 1);
        for w in breaks.windows(2) {
            let l = times.len() - 1;
            times.push(0.5 * (w[0] + w[1]));
            times.push(w[1]);
            intervals.push([l, l + 1, l + 2]);
        }
        Ok(Self { times, intervals })
    }

    /// `Σ w_i f_i` over the intervals whose left end is at least `from`.
    pub fn integrate_from(&self, values: &[f64], from: f64) -> f64 {
        let tol = 1e-12 * self.times.last().unwrap().abs().max(1.0);
        self.intervals
            .iter()
            .filter(|iv| self.times[iv[0]] >= from - tol)
            .map(|iv| {
                let h = self.times[iv[2]] - self.times[iv[0]];
                h / 6.0 * (values[iv[0]] + 4.0 * values[iv[1]] + values[iv[2]])
            })
            .sum()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.integrate_from(values, f64::NEG_INFINITY)
    }

    /// Node indices at or after `from`.
    pub fn nodes_from(&self, from: f64) -> impl Iterator<Item = usize> + '_ {
        let tol = 1e-12 * self.times.last().unwrap().abs().max(1.0);
        (0..self.times.len()).filter(move |&i| self.times[i] >= from - tol)
    }

    /// `θ̂` at every node, interpolating between snapshots.
    pub fn fields(&self, traj: &TrajectoryStore) -> Result<Vec<SpectralField>> {
        self.times.par_iter().map(|&t| traj.interpolate(t)).collect()
    }
}
