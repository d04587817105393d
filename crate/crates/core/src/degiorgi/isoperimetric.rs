//! Weighted measures of sub-level, super-level and transition sets in a box
//! `B_r* = [-r, r]^n × [0, r]`, and the isoperimetric-type bound relating them.
//!
//! Samples are piecewise linear in `z` within each column, so the measures integrate
//! `z^b` exactly over the pieces where `f <= 0`, `0 < f < 1` and `f >= 1`.

use crate::error::{check_range, Error, Result};
use crate::extension::{extend_to_heights, ExtensionConfig};
use crate::spectral::SpectralField;

#[derive(Clone, Debug, PartialEq)]
pub struct BoxSpec {
    /// Centre in the `n` horizontal coordinates.
    pub center: Vec<f64>,
    pub r: f64,
    pub z_height: f64,
    /// Time window for space-time boxes.
    pub window: Option<(f64, f64)>,
}

impl BoxSpec {
    /// `B_r*` centred at `center`, with height `r`.
    pub fn starred(center: Vec<f64>, r: f64) -> Result<Self> {
        check_range("r", r, "(0, inf)", r > 0.0 && r.is_finite())?;
        if center.is_empty() || center.len() > 2 || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("box centre needs 1 or 2 finite coordinates".into()));
        }
        Ok(Self {
            center,
            r,
            z_height: r,
            window: None,
        })
    }

    pub fn with_window(mut self, t0: f64, t1: f64) -> Result<Self> {
        if !(t1 > t0) {
            return Err(Error::Invalid(format!("time window [{t0}, {t1}]")));
        }
        self.window = Some((t0, t1));
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `∫_box z^b`.
    pub fn weighted_volume(&self, b: f64) -> f64 {
        (2.0 * self.r).powi(self.dim() as i32) * self.z_height.powf(1.0 + b) / (1.0 + b)
    }
}

/// `f` on a tensor grid: `nx` cell centres per horizontal axis, `nz + 1` nodes `z_j = j H / nz`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxSample {
    pub spec: BoxSpec,
    pub nx: usize,
    pub nz: usize,
    /// Column-major in `z`: `values[col * (nz + 1) + j]`.
    values: Vec<f64>,
}

impl BoxSample {
    pub fn from_fn(spec: BoxSpec, nx: usize, nz: usize, f: impl Fn(&[f64], f64) -> f64) -> Result<Self> {
        if nx < 2 || nz < 1 {
            return Err(Error::Invalid(format!("box sample needs nx >= 2 and nz >= 1, got {nx}, {nz}")));
        }
        let n = spec.dim();
        let hx = 2.0 * spec.r / nx as f64;
        let cols = nx.pow(n as u32);
        let mut values = Vec::with_capacity(cols * (nz + 1));
        let mut x = vec![0.0; n];
        for col in 0..cols {
            let mut rem = col;
            for d in (0..n).rev() {
                x[d] = spec.center[d] - spec.r + (rem % nx) as f64 * hx + 0.5 * hx;
                rem /= nx;
            }
            for j in 0..=nz {
                let v = f(&x, j as f64 * spec.z_height / nz as f64);
                if !v.is_finite() {
                    return Err(Error::NonFinite(values.len()));
                }
                values.push(v);
            }
        }
        Ok(Self { spec, nx, nz, values })
    }

    /// The extension of `θ` with grid nodes as cell centres.
    ///
    /// `nx = 2r / h` must be an integer no larger than the grid size, and the centre
    /// must sit half a spacing off the nodes so that `c - r + h/2` is a node.
    pub fn from_extension(theta: &SpectralField, cfg: &ExtensionConfig, spec: BoxSpec, nz: usize) -> Result<Self> {
        let g = *theta.grid();
        if spec.dim() != 2 {
            return Err(Error::Invalid("extension boxes are two dimensional in x".into()));
        }
        let h = g.spacing();
        let nx = (2.0 * spec.r / h).round() as usize;
        if ((nx as f64) * h - 2.0 * spec.r).abs() > 1e-9 * spec.r || nx > g.n() || nx < 2 || nz < 1 {
            return Err(Error::Invalid(format!("box half width {} does not fit the grid", spec.r)));
        }
        let z: Vec<f64> = (0..=nz).map(|j| j as f64 * spec.z_height / nz as f64).collect();
        let ext = extend_to_heights(theta, cfg, &z)?;
        let n = g.n() as i64;
        let mut start = Vec::with_capacity(2);
        for c in &spec.center {
            let s = (c - spec.r + 0.5 * h) / h;
            if (s - s.round()).abs() > 1e-9 {
                return Err(Error::Invalid(format!("box centre {c} is not half a spacing off the nodes")));
            }
            start.push(s.round() as i64);
        }
        let mut values = Vec::with_capacity(nx * nx * (nz + 1));
        for a in 0..nx as i64 {
            for b in 0..nx as i64 {
                let i0 = (start[0] + a).rem_euclid(n) as usize;
                let i1 = (start[1] + b).rem_euclid(n) as usize;
                for j in 0..=nz {
                    values.push(ext.layer(j).at(i0, i1));
                }
            }
        }
        Ok(Self { spec, nx, nz, values })
    }

    /// Affine image mapping the sampled range onto `[lo, hi]`; `None` for a flat sample.
    pub fn normalized(&self, lo: f64, hi: f64) -> Option<Self> {
        let (min, max) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if !(max > min) {
            return None;
        }
        let s = (hi - lo) / (max - min);
        Some(Self {
            values: self.values.iter().map(|&v| lo + (v - min) * s).collect(),
            ..self.clone()
        })
    }

    pub fn columns(&self) -> usize {
        self.nx.pow(self.spec.dim() as u32)
    }

    pub fn column(&self, col: usize) -> &[f64] {
        &self.values[col * (self.nz + 1)..(col + 1) * (self.nz + 1)]
    }

    fn hx(&self) -> f64 {
        2.0 * self.spec.r / self.nx as f64
    }

    fn hz(&self) -> f64 {
        self.spec.z_height / self.nz as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedSets {
    /// `|{f <= 0}|_w`.
    pub a: f64,
    /// `|{f >= 1}|_w`.
    pub b_set: f64,
    /// `|{0 < f < 1}|_w`.
    pub c: f64,
    /// `∫∫ z^b |∇f|²`.
    pub k: f64,
    pub p: f64,
    pub b: f64,
    /// Largest sampled `|∇f|`.
    pub max_grad: f64,
}

/// `∫_lo^hi z^b dz`.
fn zb_integral(lo: f64, hi: f64, b: f64) -> f64 {
    (hi.powf(1.0 + b) - lo.powf(1.0 + b)) / (1.0 + b)
}

/// Weighted lengths `(A, B, C)` of one piecewise-linear column.
fn column_measures(z: impl Fn(usize) -> f64, f: &[f64], b: f64) -> [f64; 3] {
    let mut out = [0.0; 3];
    for j in 0..f.len() - 1 {
        let (za, zb) = (z(j), z(j + 1));
        let (fa, fb) = (f[j], f[j + 1]);
        let mut cuts = vec![za];
        for level in [0.0, 1.0] {
            if (fa - level) * (fb - level) < 0.0 {
                cuts.push(za + (zb - za) * (level - fa) / (fb - fa));
            }
        }
        cuts.push(zb);
        cuts.sort_by(f64::total_cmp);
        for w in cuts.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            let t = (0.5 * (w[0] + w[1]) - za) / (zb - za);
            let fm = fa + t * (fb - fa);
            let set = if fm <= 0.0 {
                0
            } else if fm >= 1.0 {
                1
            } else {
                2
            };
            out[set] += zb_integral(w[0], w[1], b);
        }
    }
    out
}

fn check_b(b: f64) -> Result<()> {
    check_range("b", b, "(-1, 1)", b > -1.0 && b < 1.0)
}

/// Smallest admissible `p` is `(1+b)/(1-b)`; this default sits one above twice that.
pub fn default_p(b: f64) -> f64 {
    2.0 * (1.0 + b) / (1.0 - b) + 1.0
}

/// `|A|_w`, `|B|_w`, `|C|_w` and `K` for the sampled `f`, with `p` recorded for later use.
pub fn weighted_set_measures(f: &BoxSample, b: f64, p: f64) -> Result<WeightedSets> {
    check_b(b)?;
    let n = f.spec.dim();
    let (hx, hz) = (f.hx(), f.hz());
    let cell = hx.powi(n as i32);
    let zf = |j: usize| j as f64 * hz;
    let (mut a, mut bs, mut c) = (0.0, 0.0, 0.0);
    for col in 0..f.columns() {
        let m = column_measures(zf, f.column(col), b);
        a += m[0] * cell;
        bs += m[1] * cell;
        c += m[2] * cell;
    }

    // Hat-function weights ∫ z^b φ_j, exact for the piecewise-linear interpolant.
    let mut hat = vec![0.0; f.nz + 1];
    for j in 0..f.nz {
        let (lo, hi) = (zf(j), zf(j + 1));
        let i0 = zb_integral(lo, hi, b);
        let i1 = (hi.powf(2.0 + b) - lo.powf(2.0 + b)) / (2.0 + b);
        hat[j] += (hi * i0 - i1) / hz;
        hat[j + 1] += (i1 - lo * i0) / hz;
    }
    let nx = f.nx;
    let stride: Vec<usize> = (0..n).map(|d| nx.pow((n - 1 - d) as u32)).collect();
    let mut k = 0.0;
    let mut max_grad: f64 = 0.0;
    for col in 0..f.columns() {
        let v = f.column(col);
        for j in 0..f.nz {
            let dz = (v[j + 1] - v[j]) / hz;
            k += dz * dz * zb_integral(zf(j), zf(j + 1), b) * cell;
            max_grad = max_grad.max(dz.abs());
        }
        for j in 0..=f.nz {
            let mut g2 = 0.0;
            for &s in &stride {
                let i = (col / s) % nx;
                let at = |c: usize| f.column(c)[j];
                let (lo, hi, w) = if i == 0 {
                    (col, col + s, hx)
                } else if i == nx - 1 {
                    (col - s, col, hx)
                } else {
                    (col - s, col + s, 2.0 * hx)
                };
                let gd = (at(hi) - at(lo)) / w;
                g2 += gd * gd;
            }
            max_grad = max_grad.max(g2.sqrt());
            k += g2 * hat[j] * cell;
        }
    }
    Ok(WeightedSets {
        a,
        b_set: bs,
        c,
        k,
        p,
        b,
        max_grad,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsoperimetricReport {
    pub sets: WeightedSets,
    /// `|A|_w |B|_w`.
    pub lhs: f64,
    /// `1 + ½(n + 1 - (p+1) b / (p-1))(1 - 1/p)`.
    pub r_exponent: f64,
    pub r_factor: f64,
    /// `|C|_w^{1/(2p)}`.
    pub c_term: f64,
    /// `K^{1/2}`.
    pub k_term: f64,
    /// `lhs / (r_factor c_term k_term)`.
    pub implied_constant: f64,
    /// Set when `K` looks infinite: a sampled gradient beyond `1e8` times `sup|f| / h`.
    pub k_unbounded: bool,
}

pub fn isoperimetric_check(f: &BoxSample, b: f64, p: f64) -> Result<IsoperimetricReport> {
    check_b(b)?;
    let p_min = (1.0 + b) / (1.0 - b);
    check_range("p", p, "((1+b)/(1-b), inf)", p > p_min && p.is_finite())?;
    let sets = weighted_set_measures(f, b, p)?;
    let n = f.spec.dim() as f64;
    let r = f.spec.r;
    let r_exponent = 1.0 + 0.5 * (n + 1.0 - (p + 1.0) / (p - 1.0) * b) * (1.0 - 1.0 / p);
    let r_factor = r.powf(r_exponent);
    let c_term = sets.c.powf(1.0 / (2.0 * p));
    let k_term = sets.k.sqrt();
    let lhs = sets.a * sets.b_set;
    let den = r_factor * c_term * k_term;
    let implied_constant = if lhs == 0.0 {
        0.0
    } else if den > 0.0 {
        lhs / den
    } else {
        f64::INFINITY
    };
    let sup = f.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let h = f.hx().min(f.hz());
    Ok(IsoperimetricReport {
        sets,
        lhs,
        r_exponent,
        r_factor,
        c_term,
        k_term,
        implied_constant,
        k_unbounded: !sets.k.is_finite() || sets.max_grad > 1e8 * sup.max(1.0) / h,
    })
}

/// `|A|_w` against the unweighted measure of `{f <= 0}` after `z̃ = z^{1+b}/(1+b)`.
///
/// Each column is resampled at `nz + 1` uniform nodes of `[0, H^{1+b}/(1+b)]` through its
/// piecewise-linear interpolant. Returns the mismatch relative to the box's weighted volume.
pub fn change_of_variables_check(f: &BoxSample, b: f64) -> Result<f64> {
    check_b(b)?;
    let n = f.spec.dim();
    let cell = f.hx().powi(n as i32);
    let (nz, hz) = (f.nz, f.hz());
    let top = f.spec.z_height.powf(1.0 + b) / (1.0 + b);
    let ht = top / nz as f64;
    let back = |zt: f64| ((1.0 + b) * zt).powf(1.0 / (1.0 + b));
    let (mut weighted, mut flat) = (0.0, 0.0);
    for col in 0..f.columns() {
        let v = f.column(col);
        weighted += column_measures(|j| j as f64 * hz, v, b)[0] * cell;
        let resampled: Vec<f64> = (0..=nz)
            .map(|j| {
                let s = (back(j as f64 * ht) / hz).min(nz as f64);
                let i = (s.floor() as usize).min(nz - 1);
                let t = s - i as f64;
                v[i] + t * (v[i + 1] - v[i])
            })
            .collect();
        flat += column_measures(|j| j as f64 * ht, &resampled, 0.0)[0] * cell;
    }
    Ok((weighted - flat).abs() / f.spec.weighted_volume(b))
}
