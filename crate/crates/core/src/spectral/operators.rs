use rustfft::num_complex::Complex64;

use super::field::{PhysicalField, SpectralField, VelocityField};
use super::velocity::VelocityLaw;
use crate::error::{check_range, Result};

/// `Λ^{s} f` for any real `s >= 0`; the zero mode is sent to 0.
pub(crate) fn lambda_power(field: &SpectralField, s: f64) -> SpectralField {
    let g = *field.grid();
    field.apply_real(|i| {
        if i == 0 {
            0.0
        } else {
            g.wavenumber_magnitude(i).powf(s)
        }
    })
}

/// `(-Δ)^α f`, the multiplier `|k|^{2α}`.
pub fn fractional_laplacian(field: &SpectralField, alpha: f64) -> Result<SpectralField> {
    check_range("alpha", alpha, "(0, 1]", alpha > 0.0 && alpha <= 1.0)?;
    Ok(lambda_power(field, 2.0 * alpha))
}

/// `‖Λ^α θ‖_{L^2}`. At `α = 0` this is the norm of the mean-free part.
pub fn sobolev_seminorm(theta: &SpectralField, alpha: f64) -> Result<f64> {
    check_range("alpha", alpha, "[0, 1]", (0.0..=1.0).contains(&alpha))?;
    Ok(sobolev_seminorm_sq(theta, alpha).sqrt())
}

pub(crate) fn sobolev_seminorm_sq(theta: &SpectralField, alpha: f64) -> f64 {
    let g = *theta.grid();
    let l = g.length();
    theta
        .coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| (g.mode_norm_sq(i) as f64 * g.k0() * g.k0()).powf(alpha) * c.norm_sqr())
        .sum::<f64>()
        * l
        * l
}

/// 2/3-rule truncation.
pub fn dealias(field: &SpectralField) -> SpectralField {
    let g = *field.grid();
    field.apply_real(|i| if g.keeps_mode(i) { 1.0 } else { 0.0 })
}

/// Spectral gradient `(∂1 f, ∂2 f)` with Nyquist slots zeroed.
pub fn gradient(field: &SpectralField) -> (SpectralField, SpectralField) {
    let g = *field.grid();
    let n = g.n();
    let d0 = field.apply(|i| Complex64::new(0.0, g.derivative_wavenumber(i / n)));
    let d1 = field.apply(|i| Complex64::new(0.0, g.derivative_wavenumber(i % n)));
    (d0, d1)
}

/// Physical-space gradient components.
pub fn gradient_physical(field: &SpectralField) -> (PhysicalField, PhysicalField) {
    let (a, b) = gradient(field);
    (a.inverse(), b.inverse())
}

/// SQG velocity `u = (-∂2, ∂1) Λ^{-1} θ`.
pub fn riesz_velocity(theta: &SpectralField) -> VelocityField {
    let (a, b) = riesz_velocity_spectral(theta);
    VelocityField {
        u1: a.inverse(),
        u2: b.inverse(),
    }
}

pub(crate) fn riesz_velocity_spectral(theta: &SpectralField) -> (SpectralField, SpectralField) {
    let g = *theta.grid();
    let n = g.n();
    let inv = |i: usize| {
        if i == 0 {
            0.0
        } else {
            1.0 / g.wavenumber_magnitude(i)
        }
    };
    let u1 = theta.apply(|i| Complex64::new(0.0, -g.derivative_wavenumber(i % n) * inv(i)));
    let u2 = theta.apply(|i| Complex64::new(0.0, g.derivative_wavenumber(i / n) * inv(i)));
    (u1, u2)
}

/// Velocity in spectral form under the chosen law.
pub fn velocity_spectral(theta: &SpectralField, law: &VelocityLaw) -> (SpectralField, SpectralField) {
    match law {
        VelocityLaw::Sqg => riesz_velocity_spectral(theta),
        VelocityLaw::Zero => (
            SpectralField::zeros(*theta.grid()),
            SpectralField::zeros(*theta.grid()),
        ),
        VelocityLaw::Custom(table) => table.apply(theta),
    }
}

pub fn velocity(theta: &SpectralField, law: &VelocityLaw) -> VelocityField {
    let (a, b) = velocity_spectral(theta, law);
    VelocityField {
        u1: a.inverse(),
        u2: b.inverse(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn random(g: Grid, seed: u64) -> PhysicalField {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        PhysicalField::new(g, (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    fn max_diff(a: &PhysicalField, b: &PhysicalField) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn eigenfunction_and_constant() {
        let g = Grid::periodic(32).unwrap();
        let f = PhysicalField::from_fn(g, |x, _| (3.0 * x).cos());
        let out = fractional_laplacian(&f.forward(), 0.25).unwrap().inverse();
        let want = f.map(|v| 3f64.sqrt() * v);
        assert!(max_diff(&out, &want) < 1e-13);
        let c = PhysicalField::constant(g, 4.0).forward();
        assert!(fractional_laplacian(&c, 0.7).unwrap().inverse().linf_norm() < 1e-15);
        assert!(fractional_laplacian(&c, 0.0).is_err());
        assert!(fractional_laplacian(&c, 1.5).is_err());
    }

    #[test]
    fn riesz_single_modes() {
        let g = Grid::periodic(32).unwrap();
        let u = riesz_velocity(&PhysicalField::from_fn(g, |x, _| x.cos()).forward());
        assert!(u.u1.linf_norm() < 1e-14);
        assert!(max_diff(&u.u2, &PhysicalField::from_fn(g, |x, _| -x.sin())) < 1e-14);
        let u = riesz_velocity(&PhysicalField::from_fn(g, |_, y| y.cos()).forward());
        assert!(max_diff(&u.u1, &PhysicalField::from_fn(g, |_, y| y.sin())) < 1e-14);
        assert!(u.u2.linf_norm() < 1e-14);
    }

    #[test]
    fn seminorm_unit_mode() {
        let g = Grid::periodic(16).unwrap();
        let s = PhysicalField::from_fn(g, |x, _| x.cos()).forward();
        for a in [0.1, 0.5, 1.0] {
            let v = sobolev_seminorm(&s, a).unwrap();
            assert!((v - (2.0 * PI * PI).sqrt()).abs() < 1e-12);
        }
        assert_eq!(sobolev_seminorm(&PhysicalField::constant(g, 1.0).forward(), 0.5).unwrap(), 0.0);
    }

    #[test]
    fn dealias_mask() {
        let g = Grid::periodic(24).unwrap();
        let f = random(g, 1).forward();
        let d = dealias(&f);
        for (i, (a, b)) in f.coeffs().iter().zip(d.coeffs()).enumerate() {
            if g.keeps_mode(i) {
                assert_eq!(a, b);
            } else {
                assert_eq!(b.norm(), 0.0);
            }
        }
        assert_eq!(dealias(&d), d);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn multiplier_composition(seed in any::<u64>(), a1 in 0.01f64..0.5, a2 in 0.01f64..0.5) {
            let g = Grid::new(16, 3.0).unwrap();
            let s = random(g, seed).forward();
            let two = fractional_laplacian(&fractional_laplacian(&s, a1).unwrap(), a2).unwrap();
            let one = fractional_laplacian(&s, a1 + a2).unwrap();
            let scale = one.l2_norm().max(1e-300);
            prop_assert!(two.axpy(-1.0, &one).unwrap().l2_norm() <= 1e-11 * scale);
        }

        #[test]
        fn velocity_is_divergence_free_and_transport_neutral(seed in any::<u64>()) {
            let g = Grid::periodic(32).unwrap();
            let th = random(g, seed);
            let s = th.forward();
            let u = riesz_velocity(&s);
            prop_assert!(u.divergence().l2_norm() <= 1e-10 * u.l2_norm());
            // ∫ u·∇(θ^2/2) = 0; a quarter band keeps the cubic integrand alias-free.
            let q = s.apply_real(|i| {
                let (a, b) = (g.mode_index(i / 32).abs(), g.mode_index(i % 32).abs());
                if a <= 8 && b <= 8 { 1.0 } else { 0.0 }
            });
            let (d0, d1) = gradient_physical(&q);
            let t = q.inverse();
            let u = riesz_velocity(&q);
            let flux: f64 = (0..g.len())
                .map(|i| t.values()[i] * (u.u1.values()[i] * d0.values()[i] + u.u2.values()[i] * d1.values()[i]))
                .sum::<f64>() * g.cell_area();
            let scale = u.l2_norm() * t.l2_norm() * 10.0;
            prop_assert!(flux.abs() <= 1e-11 * scale);
        }

        #[test]
        fn alpha_zero_seminorm_is_mean_free_l2(seed in any::<u64>()) {
            let g = Grid::periodic(16).unwrap();
            let f = random(g, seed);
            let m = f.mean();
            let centered = f.map(|v| v - m);
            let s = sobolev_seminorm(&f.forward(), 0.0).unwrap();
            prop_assert!((s - centered.l2_norm()).abs() <= 1e-12 * centered.l2_norm());
        }
    }
}
