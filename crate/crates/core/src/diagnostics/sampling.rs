//! Extrema of a periodic grid field over square boxes.

use crate::spectral::{PhysicalField, SpectralField};

/// Lattice points per axis used when a box is refined.
pub(crate) const REFINE_POINTS: usize = 17;
/// Boxes narrower than this many spacings per side are always refined.
const REFINE_BELOW: f64 = 4.0;

fn keys(s: f64) -> f64 {
    const A: f64 = -0.5;
    let s = s.abs();
    if s <= 1.0 {
        (A + 2.0) * s * s * s - (A + 3.0) * s * s + 1.0
    } else if s < 2.0 {
        A * s * s * s - 5.0 * A * s * s + 8.0 * A * s - 4.0 * A
    } else {
        0.0
    }
}

/// Periodic bicubic convolution interpolant at `(x1, x2)`.
pub(crate) fn bicubic(f: &PhysicalField, x1: f64, x2: f64) -> f64 {
    let g = f.grid();
    let (n, h) = (g.n() as i64, g.spacing());
    let (f1, f2) = (x1 / h, x2 / h);
    let (i1, i2) = (f1.floor() as i64, f2.floor() as i64);
    let (t1, t2) = (f1 - i1 as f64, f2 - i2 as f64);
    let w1: [f64; 4] = std::array::from_fn(|m| keys(t1 - (m as f64 - 1.0)));
    let w2: [f64; 4] = std::array::from_fn(|m| keys(t2 - (m as f64 - 1.0)));
    // Offsets from a reference node keep constants exact.
    let f0 = f.at(i1.rem_euclid(n) as usize, i2.rem_euclid(n) as usize);
    let mut s = 0.0;
    for (a, wa) in w1.iter().enumerate() {
        let r = (i1 + a as i64 - 1).rem_euclid(n) as usize;
        for (b, wb) in w2.iter().enumerate() {
            let c = (i2 + b as i64 - 1).rem_euclid(n) as usize;
            s += wa * wb * (f.at(r, c) - f0);
        }
    }
    f0 + s
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Extrema {
    pub sup: f64,
    pub inf: f64,
    /// Resolution bound on how far the sampled extrema may sit inside the true ones.
    pub err: f64,
}

impl Extrema {
    pub fn empty() -> Self {
        Self {
            sup: f64::NEG_INFINITY,
            inf: f64::INFINITY,
            err: 0.0,
        }
    }

    pub fn merge(&mut self, o: &Extrema) {
        self.sup = self.sup.max(o.sup);
        self.inf = self.inf.min(o.inf);
        self.err = self.err.max(o.err);
    }

    pub fn osc(&self) -> f64 {
        self.sup - self.inf
    }
}

/// Node offsets `m` with `|m h| <= w`, relative to the node nearest `c`.
fn axis_nodes(c: f64, w: f64, h: f64) -> (i64, Vec<i64>) {
    let base = (c / h).round() as i64;
    let off = c - base as f64 * h;
    let reach = (w / h).ceil() as i64 + 1;
    let nodes = (-reach..=reach)
        .filter(|&m| (m as f64 * h - off).abs() <= w * (1.0 + 1e-12))
        .collect();
    (base, nodes)
}

/// Sup and inf of `f` over `c + [-w, w]²`: the nodes inside the box, plus a bicubic
/// lattice through the box (edges included) when `refine` is set or the box is narrow.
pub(crate) fn box_extrema(f: &PhysicalField, c: (f64, f64), w: f64, refine: bool) -> Extrema {
    let g = f.grid();
    let (n, h) = (g.n() as i64, g.spacing());
    let (b1, m1) = axis_nodes(c.0, w, h);
    let (b2, m2) = axis_nodes(c.1, w, h);
    let mut out = Extrema::empty();
    let mut jump: f64 = 0.0;
    for &a in &m1 {
        let r = (b1 + a).rem_euclid(n) as usize;
        let rn = (b1 + a + 1).rem_euclid(n) as usize;
        for &b in &m2 {
            let s = (b2 + b).rem_euclid(n) as usize;
            let sn = (b2 + b + 1).rem_euclid(n) as usize;
            let v = f.at(r, s);
            out.sup = out.sup.max(v);
            out.inf = out.inf.min(v);
            jump = jump.max((f.at(rn, s) - v).abs()).max((f.at(r, sn) - v).abs());
        }
    }
    let refine = refine || m1.is_empty() || m2.is_empty() || 2.0 * w < REFINE_BELOW * h;
    let step = if refine {
        let k = REFINE_POINTS - 1;
        let d = 2.0 * w / k as f64;
        for i in 0..=k {
            let x = c.0 - w + i as f64 * d;
            for j in 0..=k {
                let v = bicubic(f, x, c.1 - w + j as f64 * d);
                out.sup = out.sup.max(v);
                out.inf = out.inf.min(v);
            }
        }
        d.min(h)
    } else {
        h
    };
    if jump == 0.0 {
        let (i, j) = ((b1.rem_euclid(n)) as usize, (b2.rem_euclid(n)) as usize);
        jump = (f.at((i + 1) % n as usize, j) - f.at(i, j)).abs();
    }
    // A slope of jump/h over half the sampling step, along a diagonal.
    out.err = jump / h * step * std::f64::consts::FRAC_1_SQRT_2;
    out
}

/// Sup and inf of the trigonometric interpolant over `c + [-w, w]²` on a
/// `REFINE_POINTS²` lattice (edges included) plus any grid nodes inside. Boxes wide
/// enough that the lattice is coarser than the grid fall back to the node scan.
pub(crate) fn box_extrema_spectral(hat: &SpectralField, theta: &PhysicalField, c: (f64, f64), w: f64) -> Extrema {
    let k = REFINE_POINTS - 1;
    let d = 2.0 * w / k as f64;
    if d >= theta.grid().spacing() {
        // The nodes are already the finer sampling.
        return box_extrema(theta, c, w, false);
    }
    let xs: Vec<f64> = (0..=k).map(|i| c.0 - w + i as f64 * d).collect();
    let ys: Vec<f64> = (0..=k).map(|j| c.1 - w + j as f64 * d).collect();
    let lat = hat.eval_lattice(&xs, &ys);
    let mut out = Extrema::empty();
    let (n, h) = (theta.grid().n() as i64, theta.grid().spacing());
    let (b1, m1) = axis_nodes(c.0, w, h);
    let (b2, m2) = axis_nodes(c.1, w, h);
    for &a in &m1 {
        for &b in &m2 {
            let v = theta.at((b1 + a).rem_euclid(n) as usize, (b2 + b).rem_euclid(n) as usize);
            out.sup = out.sup.max(v);
            out.inf = out.inf.min(v);
        }
    }
    let (lo, hi) = lat.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    out.sup = out.sup.max(hi);
    out.inf = out.inf.min(lo);
    // Largest jump between lattice neighbours, over half a lattice diagonal.
    let mut jump: f64 = 0.0;
    for i in 0..=k {
        for j in 0..=k {
            let v = lat[i * (k + 1) + j];
            if i < k {
                jump = jump.max((lat[(i + 1) * (k + 1) + j] - v).abs());
            }
            if j < k {
                jump = jump.max((lat[i * (k + 1) + j + 1] - v).abs());
            }
        }
    }
    out.err = jump * std::f64::consts::FRAC_1_SQRT_2;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;

    #[test]
    fn bicubic_reproduces_nodes_and_quadratics() {
        let g = Grid::new(32, 32.0).unwrap();
        let f = PhysicalField::from_fn(g, |x, y| 0.3 * x * x - 0.1 * x * y + 2.0 * y);
        assert_eq!(bicubic(&f, 5.0, 7.0), f.at(5, 7));
        let (x, y) = (10.37, 12.81);
        let want = 0.3 * x * x - 0.1 * x * y + 2.0 * y;
        assert!((bicubic(&f, x, y) - want).abs() < 1e-10);
    }

    #[test]
    fn box_on_nodes() {
        let g = Grid::new(64, 64.0).unwrap();
        let f = PhysicalField::from_fn(g, |x, y| x + 0.5 * y);
        let e = box_extrema(&f, (20.0, 20.0), 5.0, false);
        assert_eq!((e.sup, e.inf), (25.0 + 12.5, 15.0 + 7.5));
        let r = box_extrema(&f, (20.3, 19.6), 0.5, false);
        assert!((r.osc() - 1.5).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn spectral_box_inside_one_cell() {
        let g = Grid::periodic(16).unwrap();
        let th = PhysicalField::from_fn(g, |x, y| x.sin() + (2.0 * y).cos());
        let hat = th.forward();
        let (c, w) = ((0.05, 0.7), 0.01);
        let e = box_extrema_spectral(&hat, &th, c, w);
        let want = (c.0 + w).sin() - (c.0 - w).sin() + (2.0 * (c.1 - w)).cos() - (2.0 * (c.1 + w)).cos();
        assert!((e.osc() - want).abs() < 1e-12, "{} vs {want}", e.osc());
    }
}
