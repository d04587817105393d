//! Flat `key=value` experiment files.
//!
//! Simulation keys are the `SimConfig` field names. Extension and initial-data keys
//! are prefixed `extension.` and `init.`; per-check overrides are `check.<name>.<param>`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::checks::check_def;
use super::text::fmt_f64;
use crate::error::{Error, Result};
use crate::extension::{ExtensionConfig, ExtensionMethod};
use crate::solver::{random_band_limited, SimConfig};
use crate::spectral::{Grid, MultiplierTable, PhysicalField, VelocityLaw};

/// Band-limited random initial data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitSpec {
    pub kmax: f64,
    pub slope: f64,
    pub amplitude: f64,
}

impl Default for InitSpec {
    fn default() -> Self {
        Self {
            kmax: 8.0,
            slope: 1.0,
            amplitude: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRequest {
    pub name: String,
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub sim: SimConfig,
    pub extension: ExtensionConfig,
    pub init: InitSpec,
    pub checks: Vec<CheckRequest>,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    /// `velocity_law` as written, so that the echo names the table file.
    pub velocity_source: String,
}

impl ExperimentSpec {
    pub fn new(sim: SimConfig, seed: u64) -> Result<Self> {
        let a = sim.alpha.min(0.999);
        let extension = ExtensionConfig::for_grid(a, &sim.grid)?;
        let velocity_source = match &sim.velocity_law {
            VelocityLaw::Custom(_) => return Err(Error::Config("custom laws need a table path".into())),
            law => law.to_string(),
        };
        Ok(Self {
            sim,
            extension,
            init: InitSpec::default(),
            checks: Vec::new(),
            seed,
            output_dir: None,
            velocity_source,
        })
    }

    pub fn with_check(mut self, name: &str, params: &[(&str, f64)]) -> Result<Self> {
        let req = CheckRequest {
            name: name.to_string(),
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        };
        validate_check(&req)?;
        self.checks.push(req);
        Ok(self)
    }

    pub fn initial_field(&self) -> Result<PhysicalField> {
        random_band_limited(self.sim.grid, self.init.kmax, self.init.slope, self.init.amplitude, self.seed)
    }

    /// Parses a config; `custom:<path>` tables are read relative to `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", no + 1)));
            }
            if kv.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Config(format!("duplicate key '{k}'")));
            }
        }
        let mut take = |k: &str| kv.remove(k);
        let num = |k: &str, v: Option<String>, d: f64| -> Result<f64> {
            match v {
                None => Ok(d),
                Some(s) => s
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::Config(format!("{k}: not a finite number: '{s}'"))),
            }
        };
        let int = |k: &str, v: Option<String>, d: u64| -> Result<u64> {
            match v {
                None => Ok(d),
                Some(s) => s.parse().map_err(|_| Error::Config(format!("{k}: not an integer: '{s}'"))),
            }
        };
        let grid = match take("grid") {
            None => Grid::periodic(64)?,
            Some(s) => {
                let parts: Vec<&str> = s.split_whitespace().collect();
                let n = match parts.first().map(|p| p.parse::<usize>()) {
                    Some(Ok(n)) if parts.len() <= 2 => n,
                    _ => return Err(Error::Config(format!("grid: expected 'N [L]', got '{s}'"))),
                };
                let l = num("grid", parts.get(1).map(|p| p.to_string()), std::f64::consts::TAU)?;
                Grid::new(n, l).map_err(|e| Error::Config(format!("grid: {e}")))?
            }
        };
        let kappa = num("kappa", take("kappa"), 0.1)?;
        let alpha = num("alpha", take("alpha"), 0.5)?;
        let dt = num("dt", take("dt"), 1e-3)?;
        let t_end = num("t_end", take("t_end"), 1.0)?;
        let dealias = match take("dealias").as_deref() {
            None | Some("true") => true,
            Some("false") => false,
            Some(o) => return Err(Error::Config(format!("dealias: expected true or false, got '{o}'"))),
        };
        let velocity_source = take("velocity_law").unwrap_or_else(|| "sqg".into());
        let law = match velocity_source.as_str() {
            "sqg" => VelocityLaw::Sqg,
            "zero" => VelocityLaw::Zero,
            s => match s.strip_prefix("custom:") {
                Some(p) if !p.trim().is_empty() => {
                    let text = std::fs::read_to_string(base.join(p.trim()))?;
                    VelocityLaw::Custom(MultiplierTable::parse(&text)?)
                }
                _ => return Err(Error::Config(format!("velocity_law: unknown '{s}'"))),
            },
        };
        let stride = int("snapshot_stride", take("snapshot_stride"), 10)?;
        let sim = SimConfig::new(grid, kappa, alpha, dt, t_end)
            .map_err(|e| Error::Config(e.to_string()))?
            .with_dealias(dealias)
            .with_velocity(law)
            .with_stride(stride as usize);
        sim.validate().map_err(|e| Error::Config(e.to_string()))?;

        let d = ExtensionConfig::for_grid(alpha.min(0.999), &grid)?;
        let method = match take("extension.method") {
            None => d.method,
            Some(s) => s.parse::<ExtensionMethod>()?,
        };
        let layers = int("extension.layers", take("extension.layers"), d.layers as u64)?;
        let extension = ExtensionConfig::new(
            alpha.min(0.999),
            num("extension.z_min", take("extension.z_min"), d.z_min)?,
            num("extension.rho", take("extension.rho"), d.rho)?,
            usize::try_from(layers).map_err(|_| Error::Config("extension.layers too large".into()))?,
        )
        .map_err(|e| Error::Config(e.to_string()))?
        .with_method(method);

        let di = InitSpec::default();
        let init = InitSpec {
            kmax: num("init.kmax", take("init.kmax"), di.kmax)?,
            slope: num("init.slope", take("init.slope"), di.slope)?,
            amplitude: num("init.amplitude", take("init.amplitude"), di.amplitude)?,
        };
        let seed = int("seed", take("seed"), 0)?;
        let output_dir = take("output_dir").filter(|s| !s.is_empty()).map(PathBuf::from);

        let mut checks: Vec<CheckRequest> = Vec::new();
        if let Some(list) = take("checks") {
            for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                if checks.iter().any(|c| c.name == name) {
                    return Err(Error::Config(format!("check '{name}' listed twice")));
                }
                checks.push(CheckRequest {
                    name: name.to_string(),
                    params: BTreeMap::new(),
                });
            }
        }
        for (k, v) in std::mem::take(&mut kv) {
            let rest = k
                .strip_prefix("check.")
                .ok_or_else(|| Error::Config(format!("unknown key '{k}'")))?;
            let (name, param) = rest
                .split_once('.')
                .ok_or_else(|| Error::Config(format!("expected check.<name>.<param>, got '{k}'")))?;
            let c = checks
                .iter_mut()
                .find(|c| c.name == name)
                .ok_or_else(|| Error::Config(format!("override for unlisted check '{name}'")))?;
            c.params.insert(param.to_string(), num(&k, Some(v), 0.0)?);
        }
        for c in &checks {
            validate_check(c)?;
        }
        Ok(Self {
            sim,
            extension,
            init,
            checks,
            seed,
            output_dir,
            velocity_source,
        })
    }

    /// Canonical config text; parsing it gives back the same spec.
    pub fn to_text(&self) -> String {
        let s = &self.sim;
        let e = &self.extension;
        let mut out = vec![
            format!("grid = {} {}", s.grid.n(), fmt_f64(s.grid.length())),
            format!("kappa = {}", fmt_f64(s.kappa)),
            format!("alpha = {}", fmt_f64(s.alpha)),
            format!("dt = {}", fmt_f64(s.dt)),
            format!("t_end = {}", fmt_f64(s.t_end)),
            format!("dealias = {}", s.dealias),
            format!("velocity_law = {}", self.velocity_source),
            format!("snapshot_stride = {}", s.snapshot_stride),
            format!("extension.z_min = {}", fmt_f64(e.z_min)),
            format!("extension.rho = {}", fmt_f64(e.rho)),
            format!("extension.layers = {}", e.layers),
            format!("extension.method = {}", e.method),
            format!("init.kmax = {}", fmt_f64(self.init.kmax)),
            format!("init.slope = {}", fmt_f64(self.init.slope)),
            format!("init.amplitude = {}", fmt_f64(self.init.amplitude)),
            format!("seed = {}", self.seed),
        ];
        if let Some(d) = &self.output_dir {
            out.push(format!("output_dir = {}", d.display()));
        }
        let names: Vec<&str> = self.checks.iter().map(|c| c.name.as_str()).collect();
        out.push(format!("checks = {}", names.join(", ")));
        for c in &self.checks {
            for (k, v) in &c.params {
                out.push(format!("check.{}.{} = {}", c.name, k, fmt_f64(*v)));
            }
        }
        out.join("\n") + "\n"
    }
}

fn validate_check(c: &CheckRequest) -> Result<()> {
    let def = check_def(&c.name).ok_or_else(|| {
        let known: Vec<&str> = super::checks::CHECKS.iter().map(|d| d.name).collect();
        Error::Config(format!("unknown check '{}' (known: {})", c.name, known.join(", ")))
    })?;
    for k in c.params.keys() {
        if !def.params.contains(&k.as_str()) {
            return Err(Error::Config(format!(
                "check '{}' has no parameter '{k}' (known: {})",
                c.name,
                def.params.join(", ")
            )));
        }
    }
    Ok(())
}
