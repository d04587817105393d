use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use crate::error::{check_range, Result};
use crate::spectral::{Grid, PhysicalField, SpectralField};

/// Mean-zero random field with modes `0 < |m| <= kmax` (integer units) and
/// amplitudes decaying like `|m|^{-slope}`, scaled so that `max |θ| = amplitude`.
pub fn random_band_limited(grid: Grid, kmax: f64, slope: f64, amplitude: f64, seed: u64) -> Result<PhysicalField> {
    check_range("kmax", kmax, "[1, n/2)", kmax >= 1.0 && kmax < (grid.n() / 2) as f64)?;
    check_range("amplitude", amplitude, "[0, inf)", amplitude >= 0.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (i, c) in coeffs.iter_mut().enumerate() {
        let r = (grid.mode_norm_sq(i) as f64).sqrt();
        let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if r > 0.0 && r <= kmax && !grid.is_nyquist(i / n) && !grid.is_nyquist(i % n) {
            *c = Complex64::new(a, b) * r.powf(-slope);
        }
    }
    // The real part of the inverse transform symmetrizes the spectrum.
    let raw = SpectralField::new(grid, coeffs)?.inverse();
    let sup = raw.linf_norm();
    if sup == 0.0 || amplitude == 0.0 {
        return Ok(PhysicalField::zeros(grid));
    }
    let mean = raw.mean();
    let centered = raw.map(|v| v - mean);
    let sup = centered.linf_norm();
    Ok(centered.map(|v| v * amplitude / sup))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_and_normalization() {
        let g = Grid::periodic(32).unwrap();
        let f = random_band_limited(g, 5.0, 1.0, 2.0, 11).unwrap();
        assert!((f.linf_norm() - 2.0).abs() < 1e-12);
        assert!(f.mean().abs() < 1e-14);
        let s = f.forward();
        for (i, c) in s.coeffs().iter().enumerate() {
            if (g.mode_norm_sq(i) as f64).sqrt() > 5.0 {
                assert!(c.norm() < 1e-15);
            }
        }
        assert_eq!(f, random_band_limited(g, 5.0, 1.0, 2.0, 11).unwrap());
        assert_ne!(f, random_band_limited(g, 5.0, 1.0, 2.0, 12).unwrap());
    }
}
