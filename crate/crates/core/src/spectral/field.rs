use rustfft::num_complex::Complex64;

use super::fft::fft2;
use super::grid::Grid;
use crate::error::{Error, Result};

/// Real samples of a scalar on the grid nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField {
    grid: Grid,
    values: Vec<f64>,
}

/// Fourier coefficients, normalized so that a constant `c` has zero mode `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VelocityField {
    pub u1: PhysicalField,
    pub u2: PhysicalField,
}

impl PhysicalField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Unchecked constructor for internal pipelines that test finiteness later.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f(x1, x2)` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let values = (0..grid.len())
            .map(|idx| f(grid.coord(idx / n), grid.coord(idx % n)))
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i0: usize, i1: usize) -> f64 {
        let n = self.grid.n();
        self.values[(i0 % n) * n + (i1 % n)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `∫ f dx` by the (spectrally exact) rectangle rule.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_area()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        (s * self.grid.cell_area()).powf(1.0 / p)
    }

    pub fn forward(&self) -> SpectralField {
        let n = self.grid.n();
        let mut data: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2(&mut data, n, false);
        let scale = 1.0 / (n * n) as f64;
        for c in &mut data {
            *c *= scale;
        }
        SpectralField {
            grid: self.grid,
            coeffs: data,
        }
    }
}

/// Forward transform with finiteness validation.
pub fn forward_transform(field: &PhysicalField) -> Result<SpectralField> {
    if let Some(i) = field.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(field.forward())
}

impl SpectralField {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        if let Some(i) = coeffs.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub(crate) fn from_raw(grid: Grid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self { grid, coeffs }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of the signed mode `(m0, m1)`, zero if not representable.
    pub fn mode(&self, m0: i64, m1: i64) -> Complex64 {
        match (self.grid.slot(m0), self.grid.slot(m1)) {
            (Some(a), Some(b)) => self.coeffs[a * self.grid.n() + b],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn inverse(&self) -> PhysicalField {
        let n = self.grid.n();
        let mut data = self.coeffs.clone();
        fft2(&mut data, n, true);
        PhysicalField {
            grid: self.grid,
            values: data.into_iter().map(|c| c.re).collect(),
        }
    }

    /// Multiplies every coefficient by `m(idx)`.
    pub fn apply(&self, m: impl Fn(usize) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| c * m(i))
                .collect(),
        }
    }

    pub fn apply_real(&self, m: impl Fn(usize) -> f64) -> Self {
        self.apply(|i| Complex64::new(m(i), 0.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.apply_real(|_| s)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| a + b * s)
                .collect(),
        })
    }

    /// `∫ |f|^2 dx` via Parseval.
    pub fn l2_norm_sq(&self) -> f64 {
        let l = self.grid.length();
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * l * l
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Moves the coefficients onto another grid by integer mode index.
    ///
    /// Refining splits a Nyquist coefficient evenly between `±n/2`; coarsening
    /// drops everything at or beyond the coarse Nyquist index.
    pub fn resample(&self, target: Grid) -> SpectralField {
        let (n, m) = (self.grid.n() as i64, target.n() as i64);
        let mut out = vec![Complex64::new(0.0, 0.0); target.len()];
        for (i, slot) in out.iter_mut().enumerate() {
            let a = target.mode_index(i / target.n());
            let b = target.mode_index(i % target.n());
            let weight = |x: i64| {
                if m < n && x.abs() == m / 2 {
                    None
                } else if x.abs() < n / 2 {
                    Some(1.0)
                } else if x.abs() == n / 2 && m > n {
                    Some(0.5)
                } else {
                    None
                }
            };
            let (Some(wa), Some(wb)) = (weight(a), weight(b)) else {
                continue;
            };
            // On refinement both fine indices ±n/2 draw on the coarse Nyquist slot.
            let (Some(sa), Some(sb)) = (self.grid.slot(a), self.grid.slot(b)) else {
                continue;
            };
            *slot = self.coeffs[sa * self.grid.n() + sb] * (wa * wb);
        }
        SpectralField {
            grid: target,
            coeffs: out,
        }
    }

    /// Largest `|c(k) - conj(c(-k))|` over all modes.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst: f64 = 0.0;
        for i0 in 0..n {
            for i1 in 0..n {
                let j0 = (n - i0) % n;
                let j1 = (n - i1) % n;
                let d = self.coeffs[i0 * n + i1] - self.coeffs[j0 * n + j1].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// Trigonometric interpolant evaluated at an arbitrary point.
    ///
    /// Nyquist slots contribute `cos(k x)` so the interpolant stays real.
    fn phases(&self, x: f64) -> Vec<Complex64> {
        (0..self.grid.n())
            .map(|j| {
                let kx = self.grid.wavenumber(j) * x;
                if self.grid.is_nyquist(j) {
                    Complex64::new(kx.cos(), 0.0)
                } else {
                    Complex64::new(kx.cos(), kx.sin())
                }
            })
            .collect()
    }

    /// Trigonometric interpolant on the lattice `xs × ys`, row-major in `xs`.
    pub fn eval_lattice(&self, xs: &[f64], ys: &[f64]) -> Vec<f64> {
        let n = self.grid.n();
        let e1: Vec<Vec<Complex64>> = ys.iter().map(|&y| self.phases(y)).collect();
        let mut out = Vec::with_capacity(xs.len() * ys.len());
        for &x in xs {
            let e0 = self.phases(x);
            let mut a = vec![Complex64::new(0.0, 0.0); n];
            for (row, &e) in self.coeffs.chunks_exact(n).zip(&e0) {
                for (acc, &c) in a.iter_mut().zip(row) {
                    *acc += c * e;
                }
            }
            out.extend(e1.iter().map(|e| a.iter().zip(e).map(|(&p, &q)| (p * q).re).sum::<f64>()));
        }
        out
    }

    pub fn eval_at(&self, x1: f64, x2: f64) -> f64 {
        let n = self.grid.n();
        let e0 = self.phases(x1);
        let e1 = self.phases(x2);
        let mut total = Complex64::new(0.0, 0.0);
        for (i0, row) in self.coeffs.chunks_exact(n).enumerate() {
            let inner: Complex64 = row.iter().zip(&e1).map(|(&c, &e)| c * e).sum();
            total += inner * e0[i0];
        }
        total.re
    }
}

impl VelocityField {
    pub fn grid(&self) -> &Grid {
        self.u1.grid()
    }

    /// Pointwise `max |u|`.
    pub fn max_speed(&self) -> f64 {
        self.u1
            .values()
            .iter()
            .zip(self.u2.values())
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    /// `‖u‖_{L^p}` of the speed.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let g = self.grid();
        let s: f64 = self
            .u1
            .values()
            .iter()
            .zip(self.u2.values())
            .map(|(a, b)| a.hypot(*b).powf(p))
            .sum();
        (s * g.cell_area()).powf(1.0 / p)
    }

    pub fn l2_norm(&self) -> f64 {
        (self.u1.l2_norm_sq() + self.u2.l2_norm_sq()).sqrt()
    }

    /// Spectral divergence `∂1 u1 + ∂2 u2`.
    pub fn divergence(&self) -> PhysicalField {
        let g = *self.grid();
        let n = g.n();
        let a = self.u1.forward();
        let b = self.u2.forward();
        let coeffs = (0..g.len())
            .map(|i| {
                let k0 = g.derivative_wavenumber(i / n);
                let k1 = g.derivative_wavenumber(i % n);
                Complex64::new(0.0, 1.0) * (a.coeffs[i] * k0 + b.coeffs[i] * k1)
            })
            .collect();
        SpectralField { grid: g, coeffs }.inverse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rough(grid: Grid, seed: u64) -> PhysicalField {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let v = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        PhysicalField::new(grid, v).unwrap()
    }

    #[test]
    fn constant_maps_to_zero_mode() {
        let g = Grid::periodic(16).unwrap();
        let s = PhysicalField::constant(g, 2.5).forward();
        assert!((s.coeffs()[0].re - 2.5).abs() < 1e-14);
        assert!(s.coeffs()[1..].iter().all(|c| c.norm() < 1e-14));
    }

    #[test]
    fn cosine_has_half_coefficients() {
        let g = Grid::periodic(64).unwrap();
        let s = PhysicalField::from_fn(g, |x, _| x.cos()).forward();
        for (m0, m1, want) in [(1, 0, 0.5), (-1, 0, 0.5), (0, 1, 0.0), (2, 0, 0.0)] {
            assert!((s.mode(m0, m1) - Complex64::new(want, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_finite() {
        let g = Grid::periodic(8).unwrap();
        let mut v = vec![0.0; 64];
        v[5] = f64::NAN;
        assert!(matches!(PhysicalField::new(g, v), Err(Error::NonFinite(5))));
    }

    #[test]
    fn interpolant_reproduces_nodes_and_modes() {
        let g = Grid::periodic(16).unwrap();
        let f = rough(g, 3);
        let s = f.forward();
        for &(i0, i1) in &[(0, 0), (3, 7), (8, 8), (15, 1)] {
            let x = s.eval_at(g.coord(i0), g.coord(i1));
            assert!((x - f.at(i0, i1)).abs() < 1e-12);
        }
        let c = PhysicalField::from_fn(g, |x, y| (3.0 * x).cos() * y.sin()).forward();
        let (x, y) = (0.3, 1.7);
        assert!((c.eval_at(x, y) - (3.0 * x).cos() * y.sin()).abs() < 1e-13);
        let (xs, ys) = ([0.3, 2.0, 5.9], [1.7, 0.1]);
        let lat = s.eval_lattice(&xs, &ys);
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in ys.iter().enumerate() {
                assert!((lat[i * 2 + j] - s.eval_at(x, y)).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn parseval_and_round_trip(seed in any::<u64>(), half in 4usize..12, len in 0.5f64..10.0) {
            let g = Grid::new(2 * half, len).unwrap();
            let f = rough(g, seed);
            let s = f.forward();
            let p = f.l2_norm_sq();
            prop_assert!((s.l2_norm_sq() - p).abs() <= 1e-12 * p);
            prop_assert!(s.hermitian_defect() < 1e-14);
            let back = s.inverse();
            let err = back.values().iter().zip(f.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            prop_assert!(err <= 1e-12 * f.linf_norm());
        }
    }

    #[test]
    fn resample_preserves_interpolant() {
        let g = Grid::periodic(16).unwrap();
        let f = rough(g, 9).forward();
        let fine = f.resample(Grid::periodic(40).unwrap());
        assert!(fine.hermitian_defect() < 1e-15);
        for &(x, y) in &[(0.1, 0.2), (2.0, 5.5), (4.4, 0.0)] {
            assert!((fine.eval_at(x, y) - f.eval_at(x, y)).abs() < 1e-12);
        }
        let back = fine.resample(g);
        for (i, (a, b)) in back.coeffs().iter().zip(f.coeffs()).enumerate() {
            if g.is_nyquist(i / 16) || g.is_nyquist(i % 16) {
                assert_eq!(a.norm(), 0.0);
            } else {
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn integral_of_cos_squared() {
        let g = Grid::periodic(32).unwrap();
        let f = PhysicalField::from_fn(g, |x, _| x.cos());
        assert!((f.l2_norm_sq() - 2.0 * PI * PI).abs() < 1e-12);
    }
}
