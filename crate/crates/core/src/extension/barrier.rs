//! The two barrier functions of the oscillation argument.
//!
//! `f1` lives on `[-4, 4] × [0, 4]` with value 2 on the walls and lid and 0 on `z = 0`;
//! its margin below 2 on `[-2, 2] × [0, 2]` is the `λ` of the oscillation decrease.
//! `f2` lives on the strip `x >= 0`, `0 <= z <= 1`, equals 2 at `x = 0` and vanishes on
//! both horizontal edges; it decays like `e^{-β0 x}`.

use super::elliptic::{solve_weighted_laplace, BoundarySpec, BoxSolution};
use crate::error::{Error, Result};
use crate::linalg::line_fit;

/// Where the semi-infinite strip is truncated for `f2`.
pub const STRIP_LENGTH: f64 = 6.0;
/// Range of `x` used in the decay fit.
pub const FIT_RANGE: (f64, f64) = (1.0, 3.0);

#[derive(Clone, Debug, PartialEq)]
pub struct F1Report {
    pub h: f64,
    /// `max f1` over `[-2, 2] × [0, 2]`.
    pub max_inner: f64,
    /// `(2 - max_inner) / 4`.
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct F2Report {
    pub h: f64,
    pub beta0: f64,
    /// Smallest `C̄` with `max_z |f2(x, z)| <= C̄ e^{-β0 x}` on the fit range.
    pub cbar: f64,
    pub fit_r2: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BarrierReport {
    pub b: f64,
    pub f1: Vec<F1Report>,
    pub f2: F2Report,
    /// Margin at the finest `f1` resolution.
    pub lambda_margin: f64,
    pub beta0_fit: f64,
    pub cbar_fit: f64,
    /// Whether `λ` moves monotonically as `h` shrinks.
    pub lambda_monotone: bool,
}

pub fn f1_spec() -> BoundarySpec {
    BoundarySpec {
        x_range: (-4.0, 4.0),
        z_top: 4.0,
        left: 2.0,
        right: 2.0,
        bottom: 0.0,
        top: 2.0,
    }
}

pub fn f2_spec() -> BoundarySpec {
    BoundarySpec {
        x_range: (0.0, STRIP_LENGTH),
        z_top: 1.0,
        left: 2.0,
        right: 0.0,
        bottom: 0.0,
        top: 0.0,
    }
}

pub fn f1_solution(b: f64, h: f64) -> Result<BoxSolution> {
    solve_weighted_laplace(&f1_spec(), b, h)
}

pub fn f2_solution(b: f64, h: f64) -> Result<BoxSolution> {
    solve_weighted_laplace(&f2_spec(), b, h)
}

pub fn f1_report(b: f64, h: f64) -> Result<F1Report> {
    let s = f1_solution(b, h)?;
    let max_inner = s.max_over((-2.0, 2.0), (0.0, 2.0));
    Ok(F1Report {
        h,
        max_inner,
        lambda: (2.0 - max_inner) / 4.0,
        residual: s.residual,
        iterations: s.iterations,
    })
}

pub fn f2_report(b: f64, h: f64) -> Result<F2Report> {
    let s = f2_solution(b, h)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..=s.nx {
        let x = s.x(i);
        if x < FIT_RANGE.0 - 1e-9 || x > FIT_RANGE.1 + 1e-9 {
            continue;
        }
        let m = (0..=s.nz).map(|j| s.at(i, j).abs()).fold(0.0, f64::max);
        if m <= 0.0 {
            return Err(Error::Degenerate("f2 vanishes inside the fit range".into()));
        }
        xs.push(x);
        ys.push(m.ln());
    }
    let fit = line_fit(&xs, &ys).ok_or_else(|| Error::Degenerate("decay fit".into()))?;
    let beta0 = -fit.slope;
    let cbar = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y + beta0 * x).exp())
        .fold(0.0, f64::max);
    Ok(F2Report {
        h,
        beta0,
        cbar,
        fit_r2: fit.r2,
        residual: s.residual,
        iterations: s.iterations,
    })
}

/// `f1` at each spacing in `f1_spacings` (coarse to fine) and `f2` at `f2_spacing`.
pub fn barrier_report(b: f64, f1_spacings: &[f64], f2_spacing: f64) -> Result<BarrierReport> {
    if f1_spacings.is_empty() {
        return Err(Error::Invalid("no f1 resolutions".into()));
    }
    let f1 = f1_spacings
        .iter()
        .map(|&h| f1_report(b, h))
        .collect::<Result<Vec<_>>>()?;
    let f2 = f2_report(b, f2_spacing)?;
    let lambdas: Vec<f64> = f1.iter().map(|r| r.lambda).collect();
    let up = lambdas.windows(2).all(|w| w[1] >= w[0]);
    let down = lambdas.windows(2).all(|w| w[1] <= w[0]);
    Ok(BarrierReport {
        b,
        lambda_margin: *lambdas.last().unwrap(),
        beta0_fit: f2.beta0,
        cbar_fit: f2.cbar,
        lambda_monotone: up || down,
        f1,
        f2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::elliptic::satisfies_maximum_principle;
    use std::f64::consts::PI;

    /// Separation of variables at `b = 0` on the half strip.
    fn f2_series(x: f64, z: f64) -> f64 {
        (0..2000)
            .map(|k| {
                let m = (2 * k + 1) as f64;
                8.0 / (m * PI) * (m * PI * z).sin() * (-m * PI * x).exp()
            })
            .sum()
    }

    fn series_error(h: f64) -> f64 {
        let s = f2_solution(0.0, h).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=s.nx {
            for j in 1..s.nz {
                let (x, z) = (s.x(i), s.z(j));
                if (0.5..=3.0).contains(&x) && ((x * 4.0).fract() == 0.0) && ((z * 8.0).fract() == 0.0) {
                    let want = f2_series(x, z);
                    worst = worst.max((s.at(i, j) - want).abs() / want.abs());
                }
            }
        }
        worst
    }

    #[test]
    fn f2_matches_series_at_b_zero() {
        // Second-order convergence to the separated solution.
        let (e1, e2) = (series_error(1.0 / 16.0), series_error(1.0 / 32.0));
        assert!(e2 < 1e-2, "{e2}");
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.3, "order {order}");
        let r = f2_report(0.0, 1.0 / 32.0).unwrap();
        assert!((r.beta0 - PI).abs() < 0.02 * PI, "{}", r.beta0);
        assert!(r.fit_r2 > 0.999);
        assert!((r.cbar - 8.0 / PI).abs() < 0.05 * 8.0 / PI, "{}", r.cbar);
    }

    #[test]
    fn barriers_obey_maximum_principle() {
        for &b in &[0.0, 0.4, -0.4] {
            assert!(satisfies_maximum_principle(&f1_solution(b, 0.25).unwrap(), 1e-12));
            assert!(satisfies_maximum_principle(&f2_solution(b, 0.125).unwrap(), 1e-12));
        }
    }

    #[test]
    fn f1_margin_positive() {
        let r = barrier_report(0.0, &[0.25, 0.125], 0.0625).unwrap();
        assert!(r.lambda_margin > 0.0 && r.f1.iter().all(|f| f.lambda > 0.0));
        assert!(r.f1.iter().all(|f| f.residual < 1e-10));
    }
}
