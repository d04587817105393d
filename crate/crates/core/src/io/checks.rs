//! Named checks runnable from a config, and the records they emit.

use std::collections::BTreeMap;

use super::config::CheckRequest;
use super::record::Record;
use crate::degiorgi::{
    change_of_variables_check, cordoba_check, default_p, interpolation_check, interpolation_ratio,
    isoperimetric_check, level_energy_sequence, level_set_energy_check, linf_decay_check, local_energy_check,
    BoxSample, BoxSpec, ConvexFn, EtaSpec, LevelSetFamily,
};
use crate::diagnostics::{holder_fit, oscillation_profile, zoom_sequence, OscillationSpec, ZoomSpec, DEFAULT_MU};
use crate::error::{Error, Result};
use crate::extension::{barrier_report, extend, normal_derivative_limit, ExtensionConfig};
use crate::solver::{
    energy_balance_residual, l2_series, linf_series, max_increase, pde_residual, rescale_solution, SimConfig,
    SimState, TrajectoryStore,
};
use crate::spectral::{fractional_laplacian, SpectralField};

pub struct CheckDef {
    pub name: &'static str,
    pub params: &'static [&'static str],
    /// Needs a time series rather than a single field.
    pub trajectory: bool,
}

const fn def(name: &'static str, params: &'static [&'static str], trajectory: bool) -> CheckDef {
    CheckDef { name, params, trajectory }
}

pub const CHECKS: &[CheckDef] = &[
    def("energy_balance", &[], true),
    def("max_principle", &[], true),
    def("l2_decay", &[], true),
    def("linf_decay", &["t_min", "t_max"], true),
    def("level_set_energy", &["lambda_frac", "t1", "t2"], true),
    def("level_energy_sequence", &["t0", "k_max"], true),
    def("interpolation", &["t0", "k_max"], false),
    def("cordoba", &["time", "level_frac"], false),
    def("local_energy", &["x1", "x2", "radius", "z_flat", "z_zero", "t1", "t2"], true),
    def("isoperimetric", &["time", "r_cells", "nz"], false),
    def("change_of_variables", &["time", "r_cells", "nz"], false),
    def("extension_identity", &["time"], false),
    def("barriers", &["h"], false),
    def("scaling", &["mu"], true),
    def("holder", &["x1", "x2", "time", "mu", "r0", "levels"], false),
    def("zoom", &["x1", "x2", "t_start", "mu", "r0", "levels"], true),
];

pub fn check_def(name: &str) -> Option<&'static CheckDef> {
    CHECKS.iter().find(|d| d.name == name)
}

/// What a check runs against: a whole trajectory, or one stored field.
pub struct CheckContext<'a> {
    pub cfg: &'a SimConfig,
    pub ext: &'a ExtensionConfig,
    pub traj: Option<&'a TrajectoryStore>,
    pub field: Option<(f64, SpectralField)>,
    pub seed: u64,
}

impl CheckContext<'_> {
    fn end_time(&self) -> f64 {
        match (self.traj, &self.field) {
            (Some(t), _) => t.end_time(),
            (None, Some((t, _))) => *t,
            _ => 0.0,
        }
    }

    fn hat_at(&self, t: f64) -> Result<SpectralField> {
        match (self.traj, &self.field) {
            (Some(tr), _) => tr.interpolate(t),
            (None, Some((_, f))) => Ok(f.clone()),
            _ => Err(Error::Invalid("check context holds no data".into())),
        }
    }

    fn traj(&self, name: &str) -> Result<&TrajectoryStore> {
        self.traj
            .ok_or_else(|| Error::Invalid(format!("check '{name}' needs a trajectory, not a single snapshot")))
    }
}

/// Parameters with defaults filled in; the record echoes all of them.
struct Params<'a> {
    given: &'a BTreeMap<String, f64>,
    used: BTreeMap<String, f64>,
}

impl Params<'_> {
    fn get(&mut self, k: &str, default: f64) -> f64 {
        let v = self.given.get(k).copied().unwrap_or(default);
        self.used.insert(k.to_string(), v);
        v
    }

    fn count(&mut self, k: &str, default: usize) -> Result<usize> {
        let v = self.get(k, default as f64);
        if v < 0.0 || v.fract() != 0.0 || v > 1e6 {
            return Err(Error::Invalid(format!("{k} must be a small non-negative integer, got {v}")));
        }
        Ok(v as usize)
    }
}

pub fn run_check(req: &CheckRequest, ctx: &CheckContext<'_>) -> Result<Vec<Record>> {
    let def = check_def(&req.name).ok_or_else(|| Error::Invalid(format!("unknown check '{}'", req.name)))?;
    let cfg = ctx.cfg;
    let g = cfg.grid;
    let (l, h) = (g.length(), g.spacing());
    let mut p = Params {
        given: &req.params,
        used: BTreeMap::new(),
    };
    let mut out: Vec<(String, f64, BTreeMap<String, f64>)> = Vec::new();
    let name = def.name;
    match name {
        "energy_balance" => {
            let r = energy_balance_residual(ctx.traj(name)?, cfg)?;
            out.push(("max_residual_per_time".into(), r.iter().copied().fold(0.0, f64::max), BTreeMap::new()));
        }
        "max_principle" | "l2_decay" => {
            let tr = ctx.traj(name)?;
            let (s, q) = if name == "max_principle" {
                (linf_series(tr), "max_linf_increase")
            } else {
                (l2_series(tr), "max_l2_increase")
            };
            let v0 = s.first().map_or(0.0, |x| x.1);
            let inc = max_increase(&s);
            out.push((q.into(), if v0 > 0.0 { inc / v0 } else { inc }, BTreeMap::new()));
        }
        "linf_decay" => {
            let tr = ctx.traj(name)?;
            let t_min = p.get("t_min", 0.01f64.min(tr.end_time()));
            let t_max = p.get("t_max", tr.end_time());
            out.push(("sup_normalized".into(), linf_decay_check(tr, cfg, t_min, t_max)?.sup, p.used.clone()));
        }
        "level_set_energy" => {
            let tr = ctx.traj(name)?;
            let t1 = p.get("t1", tr.start_time());
            let t2 = p.get("t2", tr.end_time());
            let theta0 = tr.first().unwrap().theta();
            let e0 = theta0.l2_norm_sq();
            let fracs = match req.params.get("lambda_frac") {
                Some(&f) => vec![f],
                None => vec![0.0, 0.25, 0.5, 0.75],
            };
            for f in fracs {
                let slack = level_set_energy_check(tr, f * theta0.max(), t1, t2, cfg)?;
                let mut used = p.used.clone();
                used.insert("lambda_frac".into(), f);
                out.push(("relative_slack".into(), if e0 > 0.0 { slack / e0 } else { slack }, used));
            }
        }
        "level_energy_sequence" => {
            let tr = ctx.traj(name)?;
            let t0 = p.get("t0", tr.end_time());
            let k_max = p.count("k_max", 6)?;
            let at_t0 = tr.theta_at(t0)?;
            let mut worst = f64::INFINITY;
            let mut increase: f64 = 0.0;
            for sign in [1.0f64, -1.0] {
                let sup = if sign > 0.0 { at_t0.max() } else { -at_t0.min() };
                if sup <= 0.0 {
                    continue;
                }
                let flipped;
                let t = if sign > 0.0 {
                    tr
                } else {
                    let states = tr
                        .states()
                        .iter()
                        .map(|s| SimState {
                            time: s.time,
                            theta_hat: s.theta_hat.scale(-1.0),
                        })
                        .collect();
                    flipped = TrajectoryStore::from_states(tr.config().clone(), states)?;
                    &flipped
                };
                let m0 = t.first().unwrap().theta().max().max(sup);
                let fam = LevelSetFamily::new(m0, t0, k_max, cfg.alpha)?;
                let rep = level_energy_sequence(t, &fam, cfg)?;
                worst = worst.min(rep.m_star / sup);
                if let Some(&u0) = rep.u.first().filter(|&&u| u > 0.0) {
                    for w in rep.u.windows(2) {
                        increase = increase.max((w[1] - w[0]) / u0);
                    }
                }
            }
            if worst.is_infinite() {
                worst = 1.0;
            }
            out.push(("m_star_over_sup".into(), worst, p.used.clone()));
            out.push(("relative_u_increase".into(), increase, p.used.clone()));
        }
        "interpolation" => {
            let k_max = p.count("k_max", 6)?;
            let v = match ctx.traj {
                Some(tr) => {
                    let t0 = p.get("t0", tr.end_time());
                    let th0 = tr.first().unwrap().theta();
                    let fam = LevelSetFamily::new(th0.max().max(f64::MIN_POSITIVE), t0, k_max, cfg.alpha)?;
                    interpolation_check(tr, &fam, cfg)?.max
                }
                None => interpolation_ratio(&ctx.hat_at(ctx.end_time())?.inverse(), cfg.alpha).unwrap_or(0.0),
            };
            out.push(("max_ratio".into(), v, p.used.clone()));
        }
        "cordoba" => {
            let t = p.get("time", ctx.end_time());
            let frac = p.get("level_frac", 0.5);
            let theta = ctx.hat_at(t)?.inverse();
            for (q, f) in [
                ("square_slack", ConvexFn::square()),
                ("positive_part_slack", ConvexFn::positive_part_for(&theta, frac * theta.max())),
            ] {
                let r = cordoba_check(&theta, &f, cfg.alpha)?;
                let v = if r.scale > 0.0 { r.min_slack / r.scale } else { r.min_slack };
                out.push((q.into(), v, p.used.clone()));
            }
        }
        "local_energy" => {
            let tr = ctx.traj(name)?;
            let c = (p.get("x1", 0.5 * l), p.get("x2", 0.5 * l));
            let eta = EtaSpec::new(c, p.get("radius", 0.25 * l), p.get("z_flat", 0.5), p.get("z_zero", 1.0))?;
            let t1 = p.get("t1", tr.start_time());
            let t2 = p.get("t2", tr.end_time());
            let r = local_energy_check(tr, ctx.ext, &eta, t1, t2, cfg)?;
            let v = if r.lhs > 0.0 { r.slack / r.lhs } else { r.slack };
            out.push(("relative_slack".into(), v, p.used.clone()));
        }
        "isoperimetric" | "change_of_variables" => {
            let t = p.get("time", ctx.end_time());
            let cells = p.count("r_cells", (g.n() / 8).max(1))?;
            let nz = p.count("nz", if name == "isoperimetric" { 64 } else { 256 })?;
            if cells == 0 || 2 * cells > g.n() {
                return Err(Error::Invalid(format!("r_cells = {cells} does not fit the grid")));
            }
            let r = cells as f64 * h;
            // `c - r + h/2` on a node, as close to the middle of the period as possible.
            let c = (g.n() / 2 - cells) as f64 * h + r - 0.5 * h;
            let raw = BoxSample::from_extension(&ctx.hat_at(t)?, ctx.ext, BoxSpec::starred(vec![c, c], r)?, nz)?;
            // Spread the box's range over [-1/2, 3/2] so that all three sets are populated.
            let sample = raw
                .normalized(-0.5, 1.5)
                .ok_or_else(|| Error::Degenerate("extension is constant on the box".into()))?;
            let b = ctx.ext.b();
            if name == "isoperimetric" {
                let rep = isoperimetric_check(&sample, b, default_p(b))?;
                out.push(("implied_constant".into(), rep.implied_constant, p.used.clone()));
            } else {
                out.push(("mismatch".into(), change_of_variables_check(&sample, b)?, p.used.clone()));
            }
        }
        "extension_identity" => {
            let t = p.get("time", ctx.end_time());
            let hat = ctx.hat_at(t)?;
            let lim = normal_derivative_limit(&extend(&hat, ctx.ext)?, ctx.ext)?;
            let exact = fractional_laplacian(&hat, ctx.ext.alpha)?.inverse();
            let scale = exact.linf_norm();
            let diff = lim.field.zip_with(&exact, |a, b| a - b)?.linf_norm();
            out.push(("max_relative_error".into(), if scale > 0.0 { diff / scale } else { diff }, p.used.clone()));
        }
        "barriers" => {
            let hh = p.get("h", 0.125);
            let b = ctx.ext.b();
            let r = barrier_report(b, &[2.0 * hh, hh], 0.5 * hh)?;
            out.push(("f1_margin".into(), r.lambda_margin, p.used.clone()));
            if b.abs() < 1e-12 {
                let e = (r.beta0_fit - std::f64::consts::PI).abs() / std::f64::consts::PI;
                out.push(("beta0_relative_error".into(), e, p.used.clone()));
            } else {
                out.push(("beta0".into(), r.beta0_fit, p.used.clone()));
            }
        }
        "scaling" => {
            let tr = ctx.traj(name)?;
            let mu = p.count("mu", 2)?;
            if mu == 0 || mu > u32::MAX as usize {
                return Err(Error::Invalid("mu must be a positive integer".into()));
            }
            let res = |t: &TrajectoryStore, c: &SimConfig| -> Result<f64> {
                Ok(pde_residual(t, c)?.iter().map(|x| x.1).fold(0.0, f64::max))
            };
            let base = res(tr, cfg)?;
            let scaled = rescale_solution(tr, mu as u32, cfg)?;
            let v = res(&scaled, scaled.config())?;
            out.push(("residual_ratio".into(), if base > 0.0 { v / base } else { v }, p.used.clone()));
        }
        "holder" => {
            let c = (p.get("x1", 0.0), p.get("x2", 0.0));
            let t = p.get("time", ctx.end_time());
            let spec = OscillationSpec::new(c, p.get("mu", 0.5), p.count("levels", 8)?, p.get("r0", 0.25 * l))?;
            let est = holder_fit(&oscillation_profile(&ctx.hat_at(t)?.inverse(), &spec)?)?;
            out.push(("delta".into(), est.delta, p.used.clone()));
            out.push(("fit_r2".into(), est.fit_r2, p.used.clone()));
        }
        "zoom" => {
            let tr = ctx.traj(name)?;
            let spec = ZoomSpec::new(
                (p.get("x1", 0.5 * l), p.get("x2", 0.5 * l)),
                p.get("t_start", tr.start_time()),
                p.count("levels", 4)?,
            )
            .with_mu(p.get("mu", DEFAULT_MU))
            .with_r0(p.get("r0", 0.25));
            let z = zoom_sequence(tr, &spec, cfg)?;
            out.push(("contracting_levels".into(), z.contracting_levels() as f64, p.used.clone()));
        }
        _ => unreachable!("catalog and dispatch disagree on '{name}'"),
    }
    let grid = (g.n(), l);
    out.into_iter()
        .map(|(q, v, params)| Record::new(name, &q, params, v, grid, ctx.seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::record::criterion_for;

    #[test]
    fn catalog_is_consistent() {
        let mut names: Vec<&str> = CHECKS.iter().map(|d| d.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), CHECKS.len());
        assert!(criterion_for("zoom", "contracting_levels").is_some());
        assert!(check_def("nope").is_none());
    }
}
