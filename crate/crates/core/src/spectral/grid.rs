use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform periodic grid on the square torus `[0, L)^2`.
///
/// Samples are stored row-major with axis 0 (the `x1` direction) as the row
/// index, so node `(i0, i1)` lives at `i0 * n + i1`. Spectral coefficients use
/// the same layout with FFT ordering along each axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even and >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "domain length must be positive, got {length}"
            )));
        }
        Ok(Self { n, length })
    }

    /// Grid on the standard `2π` torus.
    pub fn periodic(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of nodes, `n^2`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Area element of one cell.
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    /// Fundamental wavenumber `2π / L`.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Signed integer mode index for FFT slot `j`. The Nyquist slot maps to `-n/2`.
    pub fn mode_index(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// FFT slot holding signed mode `m`, if representable.
    pub fn slot(&self, m: i64) -> Option<usize> {
        let n = self.n as i64;
        if m >= -n / 2 && m < n / 2 {
            Some(m.rem_euclid(n) as usize)
        } else if m == n / 2 {
            Some((n / 2) as usize)
        } else {
            None
        }
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        j == self.n / 2
    }

    pub fn wavenumber(&self, j: usize) -> f64 {
        self.k0() * self.mode_index(j) as f64
    }

    /// Wavenumber used by first-derivative multipliers: zero at the Nyquist slot.
    pub fn derivative_wavenumber(&self, j: usize) -> f64 {
        if self.is_nyquist(j) {
            0.0
        } else {
            self.wavenumber(j)
        }
    }

    /// `|k|` for the flat coefficient index `idx`.
    pub fn wavenumber_magnitude(&self, idx: usize) -> f64 {
        self.k0() * (self.mode_norm_sq(idx) as f64).sqrt()
    }

    /// `m0^2 + m1^2` in integer mode units for flat index `idx`.
    pub fn mode_norm_sq(&self, idx: usize) -> u64 {
        let m0 = self.mode_index(idx / self.n);
        let m1 = self.mode_index(idx % self.n);
        (m0 * m0 + m1 * m1) as u64
    }

    /// 2/3-rule mask: true when both integer modes satisfy `|m| <= n/3`.
    pub fn keeps_mode(&self, idx: usize) -> bool {
        let n = self.n as i64;
        let m0 = self.mode_index(idx / self.n).abs();
        let m1 = self.mode_index(idx % self.n).abs();
        3 * m0 <= n && 3 * m1 <= n
    }
}
