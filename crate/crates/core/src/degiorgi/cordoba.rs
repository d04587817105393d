//! Pointwise convexity inequality `f'(θ) Λ^{2α}θ >= Λ^{2α} f(θ)`.

use crate::error::{check_range, Error, Result};
use crate::spectral::{lambda_power, gradient_physical, Grid, PhysicalField};

/// Factor by which `f(θ)` is oversampled before it is transformed.
const OVERSAMPLE: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConvexFn {
    /// `a s + c`; equality holds.
    Affine { slope: f64, offset: f64 },
    /// `a s²` with `a >= 0`.
    Quadratic { a: f64 },
    /// `ε ln(1 + e^{(s-λ)/ε})`, a smooth `(s - λ)_+`.
    SmoothPositivePart { level: f64, width: f64 },
}

impl ConvexFn {
    pub fn square() -> Self {
        Self::Quadratic { a: 1.0 }
    }

    /// Mollified `(s - level)_+` with width three grid spacings of the steepest slope of `θ`.
    pub fn positive_part_for(theta: &PhysicalField, level: f64) -> Self {
        let (g0, g1) = gradient_physical(&theta.forward());
        let slope = g0
            .values()
            .iter()
            .zip(g1.values())
            .map(|(a, b)| a.hypot(*b))
            .fold(0.0, f64::max);
        let width = (3.0 * theta.grid().spacing() * slope).max(1e-12 * (1.0 + theta.linf_norm()));
        Self::SmoothPositivePart { level, width }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Affine { slope, offset } if slope.is_finite() && offset.is_finite() => Ok(()),
            Self::Affine { .. } => Err(Error::Invalid("affine coefficients must be finite".into())),
            Self::Quadratic { a } => check_range("a", a, "[0, inf)", a >= 0.0 && a.is_finite()),
            Self::SmoothPositivePart { level, width } => {
                check_range("width", width, "(0, inf)", width > 0.0 && width.is_finite())?;
                check_range("level", level, "finite", level.is_finite())
            }
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        match *self {
            Self::Affine { slope, offset } => slope * s + offset,
            Self::Quadratic { a } => a * s * s,
            Self::SmoothPositivePart { level, width } => {
                let y = (s - level) / width;
                width * (y.max(0.0) + (-y.abs()).exp().ln_1p())
            }
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match *self {
            Self::Affine { slope, .. } => slope,
            Self::Quadratic { a } => 2.0 * a * s,
            Self::SmoothPositivePart { level, width } => {
                let y = (s - level) / width;
                if y >= 0.0 {
                    1.0 / (1.0 + (-y).exp())
                } else {
                    let e = y.exp();
                    e / (1.0 + e)
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CordobaReport {
    /// `min_x (f'(θ) Λ^{2α}θ - Λ^{2α} f(θ))`.
    pub min_slack: f64,
    /// `max|f'(θ) Λ^{2α}θ| + max|Λ^{2α} f(θ)|`, the size the slack is measured against.
    pub scale: f64,
}

/// Slack of the inequality, minimized over the nodes of a grid four times finer.
///
/// On the fine grid `θ` is its own trigonometric interpolant and `f(θ)` keeps the
/// modes a truncation to the original band would drop, so the square of any
/// band-limited field is exact.
pub fn cordoba_check(theta: &PhysicalField, f: &ConvexFn, alpha: f64) -> Result<CordobaReport> {
    f.validate()?;
    check_range("alpha", alpha, "(0, 1]", alpha > 0.0 && alpha <= 1.0)?;
    let g = *theta.grid();
    let fine = Grid::new(g.n() * OVERSAMPLE, g.length())?;
    let hat = theta.forward().resample(fine);
    let theta = hat.inverse();
    let lap = lambda_power(&hat, 2.0 * alpha).inverse();
    let lap_f = lambda_power(&theta.map(|s| f.value(s)).forward(), 2.0 * alpha).inverse();
    let mut min_slack = f64::INFINITY;
    let (mut s1, mut s2): (f64, f64) = (0.0, 0.0);
    for ((&t, &l), &lf) in theta.values().iter().zip(lap.values()).zip(lap_f.values()) {
        let lhs = f.derivative(t) * l;
        min_slack = min_slack.min(lhs - lf);
        s1 = s1.max(lhs.abs());
        s2 = s2.max(lf.abs());
    }
    Ok(CordobaReport {
        min_slack,
        scale: s1 + s2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::random_band_limited;
    use proptest::prelude::*;

    fn grid() -> Grid {
        Grid::periodic(32).unwrap()
    }

    #[test]
    fn affine_is_equality() {
        let th = random_band_limited(grid(), 7.0, 1.0, 1.0, 3).unwrap();
        let r = cordoba_check(&th, &ConvexFn::Affine { slope: 2.5, offset: -1.0 }, 0.4).unwrap();
        assert!(r.min_slack.abs() < 1e-12 * r.scale, "{r:?}");
    }

    #[test]
    fn constant_has_zero_slack() {
        let th = PhysicalField::constant(grid(), 0.7);
        for f in [ConvexFn::square(), ConvexFn::SmoothPositivePart { level: 0.5, width: 0.1 }] {
            let r = cordoba_check(&th, &f, 0.3).unwrap();
            assert!(r.min_slack.abs() < 1e-14, "{r:?}");
        }
    }

    #[test]
    fn rejects_nonconvex() {
        let th = PhysicalField::constant(grid(), 1.0);
        assert!(cordoba_check(&th, &ConvexFn::Quadratic { a: -1.0 }, 0.5).is_err());
        assert!(cordoba_check(&th, &ConvexFn::SmoothPositivePart { level: 0.0, width: 0.0 }, 0.5).is_err());
    }

    #[test]
    fn square_slack_is_the_kernel_form() {
        // θ = cos x, α = 1/2: 2cos²x - Λ(cos²x) = 1 + cos 2x - cos 2x.
        let th = PhysicalField::from_fn(grid(), |x, _| x.cos());
        let r = cordoba_check(&th, &ConvexFn::square(), 0.5).unwrap();
        assert!((r.min_slack - 1.0).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn smooth_positive_part_matches_kink_away_from_level() {
        let f = ConvexFn::SmoothPositivePart { level: 0.2, width: 0.01 };
        assert!((f.value(1.2) - 1.0).abs() < 1e-12 && f.value(-0.8) < 1e-40);
        assert!((f.derivative(1.2) - 1.0).abs() < 1e-12 && (f.derivative(0.2) - 0.5).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn square_and_positive_part_hold(seed in 0u64..10_000, level in -0.5f64..0.5) {
            let th = random_band_limited(grid(), 15.0, 1.0, 1.0, seed).unwrap();
            for f in [ConvexFn::square(), ConvexFn::positive_part_for(&th, level)] {
                let r = cordoba_check(&th, &f, 0.4).unwrap();
                prop_assert!(r.min_slack >= -1e-8 * r.scale, "{:?} {:?}", f, r);
            }
        }
    }
}
