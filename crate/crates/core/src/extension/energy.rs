use super::field::ExtensionField;
use crate::error::{Error, Result};
use crate::spectral::{gradient_physical, PhysicalField};

/// Smooth `C^∞` step from 1 (at `s <= 0`) to 0 (at `s >= 1`), and its derivative.
pub fn smooth_step(s: f64) -> (f64, f64) {
    if s <= 0.0 {
        return (1.0, 0.0);
    }
    if s >= 1.0 {
        return (0.0, 0.0);
    }
    let f = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let df = |t: f64| if t > 0.0 { (-1.0 / t).exp() / (t * t) } else { 0.0 };
    let (a, b) = (f(1.0 - s), f(s));
    let (da, db) = (-df(1.0 - s), df(s));
    let v = a / (a + b);
    (v, (da * (a + b) - a * (da + db)) / ((a + b) * (a + b)))
}

/// Cutoff `η(x) χ(z)`, with `χ` equal to 1 below `z_flat` and 0 above `z_zero`.
#[derive(Clone, Debug)]
pub struct Cutoff {
    pub x: PhysicalField,
    pub z: Option<(f64, f64)>,
}

impl Cutoff {
    pub fn new(x: PhysicalField) -> Self {
        Self { x, z: None }
    }

    pub fn with_z(mut self, z_flat: f64, z_zero: f64) -> Result<Self> {
        if !(z_flat >= 0.0 && z_zero > z_flat) {
            return Err(Error::Invalid(format!("z cutoff [{z_flat}, {z_zero}]")));
        }
        self.z = Some((z_flat, z_zero));
        Ok(self)
    }

    /// `(χ(z), χ'(z))`.
    pub fn z_factor(&self, z: f64) -> (f64, f64) {
        match self.z {
            None => (1.0, 0.0),
            Some((a, b)) => {
                let (v, d) = smooth_step((z - a) / (b - a));
                (v, d / (b - a))
            }
        }
    }
}

/// `∫_0^∞ z^p h(z) dz` from samples `h_j` on the positive rows of a geometric grid.
///
/// The substitution `z = e^u` makes the integrand smooth and decaying in `u`, so the
/// trapezoid rule over the whole geometric ladder is spectrally accurate; the rungs below
/// the first row are summed with `h` frozen at its first value.
pub fn log_trapezoid(z: &[f64], p: f64, h: &[f64]) -> Result<f64> {
    if z.len() != h.len() || z.len() < 2 {
        return Err(Error::Invalid("log_trapezoid needs matching samples".into()));
    }
    if p <= -1.0 {
        return Err(Error::Invalid(format!("z^{p} is not integrable at 0")));
    }
    let du = (z[1] / z[0]).ln();
    let r = (z[1] / z[0]).powf(-(p + 1.0));
    let below = z[0].powf(p + 1.0) * h[0] * r / (1.0 - r);
    let body: f64 = z.iter().zip(h).map(|(zj, hj)| zj.powf(p + 1.0) * hj).sum();
    Ok(du * (body + below))
}

pub(crate) fn check_geometric(z: &[f64]) -> Result<()> {
    if z.len() < 2 {
        return Err(Error::Invalid("need at least two rows above z = 0".into()));
    }
    let r = z[1] / z[0];
    if z.windows(2).any(|w| ((w[1] / w[0]) / r - 1.0).abs() > 1e-9) {
        return Err(Error::Invalid("rows above z = 0 must form a geometric ladder".into()));
    }
    Ok(())
}

/// `∫∫ z^b |∇(η θ*)|² dx dz` over the torus times the half line.
pub fn weighted_dirichlet_energy(ext: &ExtensionField, cutoff: Option<&Cutoff>) -> Result<f64> {
    let g = *ext.grid();
    if let Some(c) = cutoff {
        if *c.x.grid() != g {
            return Err(Error::GridMismatch);
        }
    }
    let b = ext.b();
    let z = &ext.z()[1..];
    check_geometric(z)?;
    let area = g.cell_area();
    let mut hx = Vec::with_capacity(z.len());
    let mut hz = Vec::with_capacity(z.len());
    for (i, &zj) in z.iter().enumerate() {
        let j = i + 1;
        let theta = ext.layer(j);
        let dz = ext.dz(j).expect("positive row");
        match cutoff {
            None => {
                let (gx, gy) = ext.grad_x(j);
                hx.push(gx.l2_norm_sq() + gy.l2_norm_sq());
                hz.push(zj.powf(2.0 * b) * dz.l2_norm_sq());
            }
            Some(c) => {
                let (chi, dchi) = c.z_factor(zj);
                let eta = c.x.values();
                let prod: Vec<f64> = theta.values().iter().zip(eta).map(|(t, e)| t * e * chi).collect();
                let prod = PhysicalField::new(g, prod)?;
                let (gx, gy) = gradient_physical(&prod.forward());
                hx.push(gx.l2_norm_sq() + gy.l2_norm_sq());
                let zb = zj.powf(b);
                let s: f64 = (0..g.len())
                    .map(|k| {
                        let v = zb * eta[k] * (chi * dz.values()[k] + dchi * theta.values()[k]);
                        v * v
                    })
                    .sum();
                hz.push(s * area);
            }
        }
    }
    Ok(log_trapezoid(z, b, &hx)? + log_trapezoid(z, -b, &hz)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::{extend, flux_constant, ExtensionConfig};
    use crate::solver::random_band_limited;
    use crate::spectral::{sobolev_seminorm, Grid};
    use rand::{Rng, SeedableRng};

    #[test]
    fn smooth_step_is_smooth_and_monotone() {
        let mut prev = 1.0;
        for i in 0..=100 {
            let s = i as f64 / 100.0;
            let (v, d) = smooth_step(s);
            assert!(v <= prev + 1e-15 && d <= 0.0);
            prev = v;
            if s > 0.05 && s < 0.95 {
                let h = 1e-6;
                let fd = (smooth_step(s + h).0 - smooth_step(s - h).0) / (2.0 * h);
                assert!((fd - d).abs() < 1e-6 * (1.0 + d.abs()));
            }
        }
        assert_eq!(smooth_step(0.5).0, 0.5);
    }

    #[test]
    fn log_trapezoid_weight_integral() {
        // ∫ z^p e^{-z} dz = Γ(p+1).
        let z: Vec<f64> = (0..120).map(|j| 1e-5 * 1.25f64.powi(j)).collect();
        for &p in &[-0.6, 0.0, 0.4] {
            let h: Vec<f64> = z.iter().map(|v| (-v).exp()).collect();
            let got = log_trapezoid(&z, p, &h).unwrap();
            let want = statrs::function::gamma::gamma(p + 1.0);
            assert!((got - want).abs() < 1e-5 * want, "p={p}: {got} vs {want}");
        }
    }

    #[test]
    fn harmonic_energy_equals_half_seminorm() {
        let g = Grid::periodic(16).unwrap();
        let th = PhysicalField::from_fn(g, |x, _| x.cos()).forward();
        let c = ExtensionConfig::for_grid(0.5, &g).unwrap();
        let e = weighted_dirichlet_energy(&extend(&th, &c).unwrap(), None).unwrap();
        let s = sobolev_seminorm(&th, 0.5).unwrap().powi(2);
        assert!((e - s).abs() < 1e-4 * s, "{e} vs {s}");
    }

    #[test]
    fn energy_matches_flux_constant() {
        let g = Grid::periodic(32).unwrap();
        for &a in &[0.3, 0.7] {
            let th = random_band_limited(g, 8.0, -1.0, 1.0, 2).unwrap().forward();
            let c = ExtensionConfig::for_grid(a, &g).unwrap();
            let e = weighted_dirichlet_energy(&extend(&th, &c).unwrap(), None).unwrap();
            let s = flux_constant(a) * sobolev_seminorm(&th, a).unwrap().powi(2);
            assert!((e - s).abs() < 1e-3 * s, "alpha={a}: {e} vs {s}");
        }
    }

    #[test]
    fn constant_has_no_energy() {
        let g = Grid::periodic(16).unwrap();
        let th = PhysicalField::constant(g, 3.0).forward();
        let c = ExtensionConfig::for_grid(0.4, &g).unwrap();
        let ext = extend(&th, &c).unwrap();
        assert!(weighted_dirichlet_energy(&ext, None).unwrap() < 1e-20);
        let eta = Cutoff::new(PhysicalField::constant(g, 1.0));
        assert!(weighted_dirichlet_energy(&ext, Some(&eta)).unwrap() < 1e-20);
    }

    #[test]
    fn trace_inequality_on_random_pairs() {
        let g = Grid::periodic(32).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for case in 0..50u64 {
            let a = rng.gen_range(0.2..0.8);
            let c = ExtensionConfig::for_grid(a, &g).unwrap();
            let th = random_band_limited(g, 6.0, -1.0, 1.0, 100 + case).unwrap();
            let (cx, cy, w) = (rng.gen_range(2.0..4.0), rng.gen_range(2.0..4.0), rng.gen_range(1.0..2.0));
            let eta = PhysicalField::from_fn(g, |x, y| {
                let r = ((x - cx).powi(2) + (y - cy).powi(2)).sqrt() / w;
                smooth_step(r - 1.0).0
            });
            let competitor = weighted_dirichlet_energy(
                &extend(&th.forward(), &c).unwrap(),
                Some(&Cutoff::new(eta.clone())),
            )
            .unwrap();
            let prod = th.zip_with(&eta, |a, b| a * b).unwrap();
            let harmonic = weighted_dirichlet_energy(&extend(&prod.forward(), &c).unwrap(), None).unwrap();
            assert!(competitor >= harmonic * (1.0 - 1e-6), "case {case}: {competitor} < {harmonic}");
        }
    }
}
