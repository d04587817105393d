use std::collections::BTreeMap;
use std::fmt;

use rustfft::num_complex::Complex64;

use super::field::SpectralField;
use crate::error::{Error, Result};

/// How the velocity is obtained from the active scalar.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum VelocityLaw {
    /// `u = (-∂2, ∂1) Λ^{-1} θ`.
    #[default]
    Sqg,
    /// Velocity switched off (pure fractional heat flow).
    Zero,
    Custom(MultiplierTable),
}

impl fmt::Display for VelocityLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VelocityLaw::Sqg => write!(f, "sqg"),
            VelocityLaw::Zero => write!(f, "zero"),
            VelocityLaw::Custom(t) => write!(f, "custom({} modes)", t.len()),
        }
    }
}

/// Sparse per-mode multipliers `û_i(k) = m_i(k) θ̂(k)`, keyed by integer mode.
///
/// Modes absent from the table get zero velocity.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct MultiplierTable {
    entries: BTreeMap<(i64, i64), [Complex64; 2]>,
}

const TABLE_TOL: f64 = 1e-12;

impl MultiplierTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, m0: i64, m1: i64) -> Option<[Complex64; 2]> {
        self.entries.get(&(m0, m1)).copied()
    }

    /// Validates divergence-freeness `k·m(k) = 0` and the reality condition
    /// `m(-k) = conj(m(k))`.
    pub fn from_entries(entries: impl IntoIterator<Item = ((i64, i64), [Complex64; 2])>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, m) in entries {
            if m.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
                return Err(Error::Format(format!("non-finite multiplier at {k:?}")));
            }
            if map.insert(k, m).is_some() {
                return Err(Error::Format(format!("duplicate mode {k:?}")));
            }
        }
        for (&(a, b), m) in &map {
            let scale = m[0].norm().max(m[1].norm());
            let div = m[0] * a as f64 + m[1] * b as f64;
            if div.norm() > TABLE_TOL * scale * ((a * a + b * b) as f64).sqrt().max(1.0) {
                return Err(Error::Format(format!("mode ({a}, {b}) is not divergence-free")));
            }
            let mirror = map.get(&(-a, -b)).ok_or_else(|| {
                Error::Format(format!("mode ({a}, {b}) lacks its conjugate partner"))
            })?;
            if (mirror[0] - m[0].conj()).norm() > TABLE_TOL * scale.max(1.0)
                || (mirror[1] - m[1].conj()).norm() > TABLE_TOL * scale.max(1.0)
            {
                return Err(Error::Format(format!("mode ({a}, {b}) breaks Hermitian symmetry")));
            }
        }
        Ok(Self { entries: map })
    }

    /// Parses lines `m0 m1 re1 im1 re2 im2`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() != 6 {
                return Err(Error::Format(format!(
                    "line {}: expected 6 fields, got {}",
                    lineno + 1,
                    tok.len()
                )));
            }
            let bad = |what: &str| Error::Format(format!("line {}: bad {what}", lineno + 1));
            let m0: i64 = tok[0].parse().map_err(|_| bad("mode"))?;
            let m1: i64 = tok[1].parse().map_err(|_| bad("mode"))?;
            if m0.unsigned_abs() > 1 << 20 || m1.unsigned_abs() > 1 << 20 {
                return Err(bad("mode"));
            }
            let mut v = [0.0; 4];
            for (slot, t) in v.iter_mut().zip(&tok[2..]) {
                *slot = t.parse().map_err(|_| bad("number"))?;
            }
            entries.push((
                (m0, m1),
                [Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])],
            ));
        }
        Self::from_entries(entries)
    }

    /// The SQG law restricted to `|m| <= radius`, useful as a reference table.
    pub fn sqg(radius: i64) -> Self {
        let mut entries = BTreeMap::new();
        for a in -radius..=radius {
            for b in -radius..=radius {
                if a == 0 && b == 0 {
                    continue;
                }
                let r = ((a * a + b * b) as f64).sqrt();
                entries.insert(
                    (a, b),
                    [
                        Complex64::new(0.0, -(b as f64) / r),
                        Complex64::new(0.0, a as f64 / r),
                    ],
                );
            }
        }
        Self { entries }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (&(a, b), m) in &self.entries {
            s.push_str(&format!(
                "{a} {b} {:.16e} {:.16e} {:.16e} {:.16e}\n",
                m[0].re, m[0].im, m[1].re, m[1].im
            ));
        }
        s
    }

    pub(crate) fn apply(&self, theta: &SpectralField) -> (SpectralField, SpectralField) {
        let g = *theta.grid();
        let n = g.n();
        let pick = |i: usize, c: usize| {
            let (j0, j1) = (i / n, i % n);
            if g.is_nyquist(j0) || g.is_nyquist(j1) {
                return Complex64::new(0.0, 0.0);
            }
            self.entries
                .get(&(g.mode_index(j0), g.mode_index(j1)))
                .map_or(Complex64::new(0.0, 0.0), |m| m[c])
        };
        (theta.apply(|i| pick(i, 0)), theta.apply(|i| pick(i, 1)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::operators::riesz_velocity_spectral;
    use crate::spectral::{Grid, PhysicalField};

    #[test]
    fn sqg_table_matches_builtin_law() {
        let g = Grid::periodic(16).unwrap();
        let th = PhysicalField::from_fn(g, |x, y| (x + 2.0 * y).sin() + (3.0 * x).cos() * y.cos()).forward();
        let t = MultiplierTable::parse(&MultiplierTable::sqg(7).to_text()).unwrap();
        let (a, b) = t.apply(&th);
        let (c, d) = riesz_velocity_spectral(&th);
        assert!(a.axpy(-1.0, &c).unwrap().l2_norm() < 1e-13);
        assert!(b.axpy(-1.0, &d).unwrap().l2_norm() < 1e-13);
    }

    #[test]
    fn rejects_compressible_or_unpaired() {
        assert!(MultiplierTable::parse("1 0 1 0 0 0\n-1 0 1 0 0 0\n").is_err());
        assert!(MultiplierTable::parse("1 0 0 0 0 1\n").is_err());
        assert!(MultiplierTable::parse("1 0 0 0 0 1\n-1 0 0 0 0 1\n").is_err());
        assert!(MultiplierTable::parse("1 0 0 0 0 1\n-1 0 0 0 0 -1\n").is_ok());
        assert!(MultiplierTable::parse("1 0 0 0 0\n").is_err());
        assert!(MultiplierTable::parse("# only a comment\n\n").unwrap().is_empty());
    }
}
