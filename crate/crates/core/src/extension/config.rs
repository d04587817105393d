use crate::error::{check_range, Result};
use crate::spectral::Grid;

/// How the per-mode extension profile is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ExtensionMethod {
    /// Closed form through the modified Bessel function `K_α`.
    #[default]
    BesselMultiplier,
    /// Direct quadrature of the Poisson kernel against a plane wave.
    KernelQuadrature,
}

impl std::str::FromStr for ExtensionMethod {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bessel_multiplier" | "bessel" => Ok(Self::BesselMultiplier),
            "kernel_quadrature" | "kernel" => Ok(Self::KernelQuadrature),
            other => Err(crate::Error::Config(format!("unknown extension method '{other}'"))),
        }
    }
}

impl std::fmt::Display for ExtensionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::BesselMultiplier => "bessel_multiplier",
            Self::KernelQuadrature => "kernel_quadrature",
        })
    }
}

/// Extension parameters: layers sit at `z = 0` and `z_min ρ^j`, `j = 0..=layers`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtensionConfig {
    pub alpha: f64,
    pub z_min: f64,
    pub rho: f64,
    pub layers: usize,
    pub method: ExtensionMethod,
}

impl ExtensionConfig {
    pub fn new(alpha: f64, z_min: f64, rho: f64, layers: usize) -> Result<Self> {
        let c = Self {
            alpha,
            z_min,
            rho,
            layers,
            method: ExtensionMethod::BesselMultiplier,
        };
        c.validate()?;
        Ok(c)
    }

    /// `z_min = 1e-4 L`, `ρ = 1.25`, 60 geometric layers.
    pub fn for_grid(alpha: f64, grid: &Grid) -> Result<Self> {
        Self::new(alpha, 1e-4 * grid.length(), 1.25, 60)
    }

    pub fn with_method(mut self, method: ExtensionMethod) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_range("alpha", self.alpha, "(0, 1)", self.alpha > 0.0 && self.alpha < 1.0)?;
        check_range("z_min", self.z_min, "(0, inf)", self.z_min > 0.0)?;
        check_range("rho", self.rho, "(1, inf)", self.rho > 1.0)?;
        check_range("layers", self.layers as f64, ">= 3", self.layers >= 3)?;
        Ok(())
    }

    /// Weight exponent `b = 1 - 2α`.
    pub fn b(&self) -> f64 {
        1.0 - 2.0 * self.alpha
    }

    /// Heights of all rows, starting with the boundary row `z = 0`.
    pub fn z_grid(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain((0..=self.layers).map(|j| self.z_min * self.rho.powi(j as i32)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_validation() {
        let c = ExtensionConfig::new(0.3, 1e-3, 2.0, 4).unwrap();
        assert_eq!(c.z_grid(), vec![0.0, 1e-3, 2e-3, 4e-3, 8e-3, 16e-3]);
        assert!((c.b() - 0.4).abs() < 1e-15);
        assert!(ExtensionConfig::new(1.0, 1e-3, 2.0, 4).is_err());
        assert!(ExtensionConfig::new(0.3, 0.0, 2.0, 4).is_err());
        assert!(ExtensionConfig::new(0.3, 1e-3, 1.0, 4).is_err());
        assert!(ExtensionConfig::new(0.3, 1e-3, 2.0, 2).is_err());
        assert_eq!("kernel".parse::<ExtensionMethod>().unwrap(), ExtensionMethod::KernelQuadrature);
    }
}
