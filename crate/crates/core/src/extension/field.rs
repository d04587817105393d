use rayon::prelude::*;

use super::config::{ExtensionConfig, ExtensionMethod};
use super::kernel::KernelProfile;
use crate::error::{Error, Result};
use crate::linalg::solve_dense;
use crate::special::ExtensionMultiplier;
use crate::spectral::{gradient_physical, Grid, PhysicalField, SpectralField};

/// Per-mode profile `φ(s)` and `φ'(s)` for one evaluation route.
enum Profile {
    Bessel(ExtensionMultiplier),
    Kernel(KernelProfile),
}

impl Profile {
    fn new(cfg: &ExtensionConfig) -> Self {
        match cfg.method {
            ExtensionMethod::BesselMultiplier => Self::Bessel(ExtensionMultiplier::new(cfg.alpha)),
            ExtensionMethod::KernelQuadrature => Self::Kernel(KernelProfile::new(cfg.alpha)),
        }
    }

    /// `(φ(s), φ'(s), clamped)`.
    fn eval(&self, s: f64) -> (f64, f64, bool) {
        match self {
            Self::Bessel(m) => {
                let (v, c1) = m.value(s);
                let (d, c2) = m.derivative(s);
                (v, d, c1 || c2)
            }
            Self::Kernel(k) => (k.value(s), k.derivative(s), false),
        }
    }
}

/// `θ*` sampled on the rows of an extension grid.
#[derive(Clone, Debug)]
pub struct ExtensionField {
    grid: Grid,
    alpha: f64,
    z: Vec<f64>,
    hats: Vec<SpectralField>,
    values: Vec<PhysicalField>,
    /// `∂zθ*` on the rows with `z > 0`.
    dz: Vec<PhysicalField>,
    clamped: bool,
}

impl ExtensionField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn b(&self) -> f64 {
        1.0 - 2.0 * self.alpha
    }

    /// Row heights; `z()[0] == 0`.
    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn rows(&self) -> usize {
        self.z.len()
    }

    pub fn layer(&self, j: usize) -> &PhysicalField {
        &self.values[j]
    }

    pub fn layer_hat(&self, j: usize) -> &SpectralField {
        &self.hats[j]
    }

    pub fn layers(&self) -> &[PhysicalField] {
        &self.values
    }

    /// `∂zθ*` at row `j >= 1`.
    pub fn dz(&self, j: usize) -> Option<&PhysicalField> {
        j.checked_sub(1).and_then(|i| self.dz.get(i))
    }

    pub fn grad_x(&self, j: usize) -> (PhysicalField, PhysicalField) {
        gradient_physical(&self.hats[j])
    }

    /// True when some mode was beyond the multiplier's overflow clamp.
    pub fn clamped(&self) -> bool {
        self.clamped
    }
}

/// Extends `θ` to every row of `cfg.z_grid()`, mode by mode.
pub fn extend(theta: &SpectralField, cfg: &ExtensionConfig) -> Result<ExtensionField> {
    extend_to_heights(theta, cfg, &cfg.z_grid())
}

/// Extends `θ` to the given rows; `z[0]` must be 0 and `z` strictly increasing.
/// The geometric parameters of `cfg` are ignored.
pub fn extend_to_heights(theta: &SpectralField, cfg: &ExtensionConfig, z: &[f64]) -> Result<ExtensionField> {
    cfg.validate()?;
    if !theta.is_finite() {
        return Err(Error::NonFinite(0));
    }
    if z.first() != Some(&0.0) || z.windows(2).any(|w| !(w[1] > w[0])) || !z.iter().all(|v| v.is_finite()) {
        return Err(Error::Invalid("heights must start at 0 and increase".into()));
    }
    let grid = *theta.grid();
    let z = z.to_vec();
    let norms: Vec<u64> = (0..grid.len()).map(|i| grid.mode_norm_sq(i)).collect();
    let mut distinct = norms.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let slot: Vec<usize> = norms.iter().map(|m| distinct.binary_search(m).unwrap()).collect();
    let profile = Profile::new(cfg);
    let k0 = grid.k0();

    let rows: Vec<(SpectralField, SpectralField, bool)> = z
        .par_iter()
        .map(|&zj| {
            let table: Vec<(f64, f64, bool)> = distinct
                .iter()
                .map(|&m2| {
                    if m2 == 0 {
                        return (1.0, 0.0, false);
                    }
                    let k = k0 * (m2 as f64).sqrt();
                    let (v, d, c) = profile.eval(k * zj);
                    (v, k * d, c)
                })
                .collect();
            let clamped = table.iter().any(|t| t.2);
            let value = theta.apply_real(|i| table[slot[i]].0);
            let deriv = theta.apply_real(|i| table[slot[i]].1);
            (value, deriv, clamped)
        })
        .collect();

    let mut hats = Vec::with_capacity(z.len());
    let mut dz = Vec::with_capacity(z.len() - 1);
    let mut clamped = false;
    for (j, (v, d, c)) in rows.into_iter().enumerate() {
        clamped |= c;
        if j > 0 {
            dz.push(d);
        }
        hats.push(v);
    }
    let values = hats.par_iter().map(|h| h.inverse()).collect();
    let dz = dz.par_iter().map(|h| h.inverse()).collect();
    Ok(ExtensionField {
        grid,
        alpha: cfg.alpha,
        z,
        hats,
        values,
        dz,
        clamped,
    })
}

/// Number of rows above `z = 0` entering the extrapolation.
const LIMIT_ROWS: usize = 4;
/// Relative agreement required between the 3- and 4-row extrapolants.
pub const LIMIT_TOLERANCE: f64 = 1e-3;

/// Boundary flux `lim -z^b ∂zθ*` divided by its calibration constant.
#[derive(Clone, Debug)]
pub struct NormalLimit {
    pub field: PhysicalField,
    /// Calibration constant measured on the mode `k = (1, 0)`.
    pub calibration: f64,
    /// Max difference between the 3- and 4-row extrapolants, before calibration.
    pub spread: f64,
    pub converged: bool,
}

/// Extrapolation weights for `F(0)` from `F(z_i)`, `F = Σ a_r z^{p_r}`.
fn richardson_weights(z: &[f64], exponents: &[f64]) -> Result<Vec<f64>> {
    let a = exponents
        .iter()
        .map(|&p| z.iter().map(|&zi| (zi / z[0]).powf(p)).collect())
        .collect();
    let mut e0 = vec![0.0; z.len()];
    e0[0] = 1.0;
    solve_dense(a, e0).ok_or_else(|| Error::Degenerate("singular extrapolation system".into()))
}

/// `-z^b ∂zθ*` extrapolated to the boundary, in units of `Λ^{2α}θ`.
pub fn normal_derivative_limit(ext: &ExtensionField, cfg: &ExtensionConfig) -> Result<NormalLimit> {
    if (cfg.alpha - ext.alpha).abs() > 0.0 {
        return Err(Error::Invalid("extension built with a different alpha".into()));
    }
    if ext.rows() < LIMIT_ROWS + 1 {
        return Err(Error::Invalid(format!(
            "need {} rows above z = 0, have {}",
            LIMIT_ROWS,
            ext.rows() - 1
        )));
    }
    let a = cfg.alpha;
    let b = cfg.b();
    let z = &ext.z[1..=LIMIT_ROWS];
    let p = [0.0, 2.0 - 2.0 * a, 2.0, 4.0 - 2.0 * a];
    let w3 = richardson_weights(&z[..3], &p[..3])?;
    let w4 = richardson_weights(z, &p)?;

    // The same pipeline applied to the scalar profile of k = (1, 0).
    let profile = Profile::new(cfg);
    let k0 = ext.grid.k0();
    let f_scalar: Vec<f64> = z.iter().map(|&zj| -zj.powf(b) * k0 * profile.eval(k0 * zj).1).collect();
    let flux0: f64 = w4.iter().zip(&f_scalar).map(|(w, f)| w * f).sum();
    let calibration = flux0 / k0.powf(2.0 * a);
    if !(calibration.is_finite() && calibration > 0.0) {
        return Err(Error::Degenerate(format!("calibration constant {calibration}")));
    }

    let g = ext.grid;
    let rows: Vec<&[f64]> = (1..=LIMIT_ROWS).map(|j| ext.dz[j - 1].values()).collect();
    let scale: Vec<f64> = z.iter().map(|zj| -zj.powf(b)).collect();
    let mut spread: f64 = 0.0;
    let mut fmax: f64 = 0.0;
    let out: Vec<f64> = (0..g.len())
        .map(|i| {
            let f: Vec<f64> = (0..LIMIT_ROWS).map(|r| scale[r] * rows[r][i]).collect();
            let e3: f64 = w3.iter().zip(&f).map(|(w, v)| w * v).sum();
            let e4: f64 = w4.iter().zip(&f).map(|(w, v)| w * v).sum();
            spread = spread.max((e4 - e3).abs());
            fmax = fmax.max(e4.abs());
            e4 / calibration
        })
        .collect();
    let field = PhysicalField::new(g, out)?;
    Ok(NormalLimit {
        field,
        calibration,
        spread,
        converged: spread <= LIMIT_TOLERANCE * fmax,
    })
}

/// `2^{1-2α} Γ(1-α)/Γ(α)`, the flux of the unit mode per `|k|^{2α}`.
pub fn flux_constant(alpha: f64) -> f64 {
    use statrs::function::gamma::gamma;
    2f64.powf(1.0 - 2.0 * alpha) * gamma(1.0 - alpha) / gamma(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::random_band_limited;
    use crate::spectral::fractional_laplacian;

    fn cfg(alpha: f64, g: &Grid) -> ExtensionConfig {
        ExtensionConfig::for_grid(alpha, g).unwrap()
    }

    #[test]
    fn constant_extends_to_constant() {
        let g = Grid::periodic(16).unwrap();
        let th = PhysicalField::constant(g, 1.7).forward();
        let e = extend(&th, &cfg(0.3, &g)).unwrap();
        for layer in e.layers() {
            assert!(layer.values().iter().all(|v| (v - 1.7).abs() < 1e-14));
        }
        let nl = normal_derivative_limit(&e, &cfg(0.3, &g)).unwrap();
        assert!(nl.field.linf_norm() < 1e-14 && nl.converged);
    }

    #[test]
    fn harmonic_case_decays_exponentially() {
        let g = Grid::periodic(16).unwrap();
        let th = PhysicalField::from_fn(g, |x, _| (3.0 * x).cos()).forward();
        let c = cfg(0.5, &g);
        let e = extend(&th, &c).unwrap();
        for (j, &z) in e.z().iter().enumerate() {
            let want = PhysicalField::from_fn(g, |x, _| (-3.0 * z).exp() * (3.0 * x).cos());
            let err = e.layer(j).zip_with(&want, |a, b| (a - b).abs()).unwrap().linf_norm();
            assert!(err < 1e-13, "z={z}: {err}");
        }
        let nl = normal_derivative_limit(&e, &c).unwrap();
        let want = PhysicalField::from_fn(g, |x, _| 3.0 * (3.0 * x).cos());
        let err = nl.field.zip_with(&want, |a, b| (a - b).abs()).unwrap().linf_norm();
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn semigroup_at_half() {
        let g = Grid::periodic(32).unwrap();
        let th = random_band_limited(g, 10.0, -1.0, 1.0, 3).unwrap().forward();
        let c = ExtensionConfig::new(0.5, 0.01, 1.5, 8).unwrap();
        let e = extend(&th, &c).unwrap();
        let (j1, j2) = (3, 5);
        let (z1, z2) = (e.z()[j1], e.z()[j2]);
        let again = extend(e.layer_hat(j1), &ExtensionConfig::new(0.5, z2, 1.5, 3).unwrap()).unwrap();
        let direct = extend(&th, &ExtensionConfig::new(0.5, z1 + z2, 1.5, 3).unwrap()).unwrap();
        let err = again
            .layer(1)
            .zip_with(direct.layer(1), |a, b| (a - b).abs())
            .unwrap()
            .linf_norm();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn contraction_and_top_layer_mean() {
        let g = Grid::periodic(32).unwrap();
        let th = random_band_limited(g, 8.0, -1.0, 1.0, 11).unwrap().map(|v| v + 0.4);
        let (lo, hi) = (th.min(), th.max());
        let e = extend(&th.forward(), &cfg(0.3, &g)).unwrap();
        for layer in e.layers() {
            assert!(layer.min() >= lo - 1e-12 && layer.max() <= hi + 1e-12);
        }
        let top = e.layer(e.rows() - 1);
        assert!((top.max() - th.mean()).abs() <= 0.1 * th.mean().abs());
        assert!(e.clamped());
    }

    #[test]
    fn methods_agree_on_layers() {
        let g = Grid::periodic(16).unwrap();
        let th = random_band_limited(g, 5.0, -1.0, 1.0, 8).unwrap().forward();
        let c = ExtensionConfig::new(0.3, 1e-3, 1.6, 12).unwrap();
        let a = extend(&th, &c).unwrap();
        let b = extend(&th, &c.with_method(ExtensionMethod::KernelQuadrature)).unwrap();
        for j in 0..a.rows() {
            let err = a.layer(j).zip_with(b.layer(j), |x, y| (x - y).abs()).unwrap().linf_norm();
            assert!(err < 1e-6, "row {j}: {err}");
        }
    }

    #[test]
    fn calibration_matches_closed_form() {
        let g = Grid::periodic(16).unwrap();
        for &a in &[0.2, 0.25, 0.4, 0.5, 0.7] {
            let e = extend(&SpectralField::zeros(g), &cfg(a, &g)).unwrap();
            let nl = normal_derivative_limit(&e, &cfg(a, &g)).unwrap();
            let d = flux_constant(a);
            assert!((nl.calibration - d).abs() < 1e-8 * d, "alpha={a}: {} vs {d}", nl.calibration);
        }
    }

    #[test]
    fn limit_reproduces_fractional_laplacian() {
        let g = Grid::periodic(32).unwrap();
        let th = random_band_limited(g, 10.0, 0.0, 1.0, 5).unwrap().forward();
        let c = cfg(0.3, &g);
        let nl = normal_derivative_limit(&extend(&th, &c).unwrap(), &c).unwrap();
        assert!(nl.converged);
        let want = fractional_laplacian(&th, 0.3).unwrap().inverse();
        let err = nl.field.zip_with(&want, |a, b| a - b).unwrap().l2_norm() / want.l2_norm();
        assert!(err < 1e-3, "{err}");
    }
}
