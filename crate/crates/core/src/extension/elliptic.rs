//! Finite-volume solver for `∇·(z^b ∇f) = 0` on a rectangle in `(x, z)` with `z >= 0`.

use crate::error::{Error, Result};

/// Dirichlet data: a constant on each side of `[x0, x1] × [0, z_top]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundarySpec {
    pub x_range: (f64, f64),
    pub z_top: f64,
    pub left: f64,
    pub right: f64,
    pub bottom: f64,
    pub top: f64,
}

impl BoundarySpec {
    pub fn constant(x_range: (f64, f64), z_top: f64, c: f64) -> Self {
        Self {
            x_range,
            z_top,
            left: c,
            right: c,
            bottom: c,
            top: c,
        }
    }

    fn extremes(&self) -> (f64, f64) {
        let v = [self.left, self.right, self.bottom, self.top];
        (
            v.iter().copied().fold(f64::INFINITY, f64::min),
            v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    }
}

/// Nodal solution, `(nx + 1) × (nz + 1)` values with the boundary rows included.
#[derive(Clone, Debug)]
pub struct BoxSolution {
    pub spec: BoundarySpec,
    pub h: f64,
    pub nx: usize,
    pub nz: usize,
    values: Vec<f64>,
    pub iterations: usize,
    /// `‖A f - r‖ / ‖r‖` of the discrete system at exit.
    pub residual: f64,
}

impl BoxSolution {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.nx + 1) + i]
    }

    pub fn x(&self, i: usize) -> f64 {
        self.spec.x_range.0 + i as f64 * self.h
    }

    pub fn z(&self, j: usize) -> f64 {
        j as f64 * self.h
    }

    /// Max over nodes with `x` in `xr` and `z` in `zr` (closed ranges).
    pub fn max_over(&self, xr: (f64, f64), zr: (f64, f64)) -> f64 {
        self.fold_over(xr, zr, f64::NEG_INFINITY, f64::max)
    }

    pub fn min_over(&self, xr: (f64, f64), zr: (f64, f64)) -> f64 {
        self.fold_over(xr, zr, f64::INFINITY, f64::min)
    }

    fn fold_over(&self, xr: (f64, f64), zr: (f64, f64), init: f64, f: fn(f64, f64) -> f64) -> f64 {
        let eps = 1e-9 * self.h;
        let mut acc = init;
        for j in 0..=self.nz {
            let z = self.z(j);
            if z < zr.0 - eps || z > zr.1 + eps {
                continue;
            }
            for i in 0..=self.nx {
                let x = self.x(i);
                if x >= xr.0 - eps && x <= xr.1 + eps {
                    acc = f(acc, self.at(i, j));
                }
            }
        }
        acc
    }

    /// Interior extremes, for the discrete maximum principle.
    pub fn interior_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 1..self.nz {
            for i in 1..self.nx {
                lo = lo.min(self.at(i, j));
                hi = hi.max(self.at(i, j));
            }
        }
        (lo, hi)
    }
}

/// Iteration cap for the conjugate-gradient loop.
pub const MAX_ITERATIONS: usize = 50_000;
const TOLERANCE: f64 = 1e-12;

struct Stencil {
    nx: usize,
    nz: usize,
    /// Coupling across the z-face between rows `j` and `j + 1`.
    zface: Vec<f64>,
    /// Coupling across an x-face in row `j`.
    xface: Vec<f64>,
}

impl Stencil {
    fn new(b: f64, h: f64, nx: usize, nz: usize) -> Self {
        // Exact harmonic mean of z^b over each vertical face-to-face segment.
        let zface = (0..nz)
            .map(|j| {
                let (a, c) = (j as f64 * h, (j + 1) as f64 * h);
                h * (1.0 - b) / (c.powf(1.0 - b) - a.powf(1.0 - b))
            })
            .collect();
        // ∫ z^b over the dual cell of row j, divided by h.
        let xface = (0..=nz)
            .map(|j| {
                let lo = ((j as f64 - 0.5) * h).max(0.0);
                let hi = ((j as f64 + 0.5) * h).min(nz as f64 * h);
                (hi.powf(1.0 + b) - lo.powf(1.0 + b)) / (1.0 + b) / h
            })
            .collect();
        Self { nx, nz, zface, xface }
    }

    fn unknowns(&self) -> usize {
        (self.nx - 1) * (self.nz - 1)
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        (j - 1) * (self.nx - 1) + (i - 1)
    }

    fn diag(&self, j: usize) -> f64 {
        2.0 * self.xface[j] + self.zface[j - 1] + self.zface[j]
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let (nx, nz) = (self.nx, self.nz);
        for j in 1..nz {
            for i in 1..nx {
                let k = self.idx(i, j);
                let mut s = self.diag(j) * x[k];
                if i > 1 {
                    s -= self.xface[j] * x[k - 1];
                }
                if i + 1 < nx {
                    s -= self.xface[j] * x[k + 1];
                }
                if j > 1 {
                    s -= self.zface[j - 1] * x[k - (nx - 1)];
                }
                if j + 1 < nz {
                    s -= self.zface[j] * x[k + (nx - 1)];
                }
                out[k] = s;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves with spacing `h`; the box sides must be multiples of `h`.
pub fn solve_weighted_laplace(spec: &BoundarySpec, b: f64, h: f64) -> Result<BoxSolution> {
    if !(b > -1.0 && b < 1.0) {
        return Err(Error::OutOfRange {
            name: "b",
            value: b,
            range: "(-1, 1)",
        });
    }
    let width = spec.x_range.1 - spec.x_range.0;
    let cells = |len: f64| -> Result<usize> {
        let n = (len / h).round();
        if !(h > 0.0) || n < 2.0 || (n * h - len).abs() > 1e-9 * len.max(1.0) {
            return Err(Error::Invalid(format!("side {len} is not a multiple of h = {h}")));
        }
        Ok(n as usize)
    };
    let (nx, nz) = (cells(width)?, cells(spec.z_top)?);
    let st = Stencil::new(b, h, nx, nz);
    let n = st.unknowns();

    let mut rhs = vec![0.0; n];
    for j in 1..nz {
        rhs[st.idx(1, j)] += st.xface[j] * spec.left;
        rhs[st.idx(nx - 1, j)] += st.xface[j] * spec.right;
    }
    for i in 1..nx {
        rhs[st.idx(i, 1)] += st.zface[0] * spec.bottom;
        rhs[st.idx(i, nz - 1)] += st.zface[nz - 1] * spec.top;
    }
    let inv_diag: Vec<f64> = (0..n).map(|k| 1.0 / st.diag(k / (nx - 1) + 1)).collect();

    // Jacobi-preconditioned conjugate gradients from the mean boundary value.
    let start = 0.25 * (spec.left + spec.right + spec.bottom + spec.top);
    let mut x = vec![start; n];
    let mut ax = vec![0.0; n];
    st.apply(&x, &mut ax);
    let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(a, b)| a - b).collect();
    let norm_rhs = dot(&rhs, &rhs).sqrt().max(f64::MIN_POSITIVE);
    let mut zv: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    let mut p = zv.clone();
    let mut rz = dot(&r, &zv);
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    let mut res = dot(&r, &r).sqrt() / norm_rhs;
    while res > TOLERANCE {
        if iterations == MAX_ITERATIONS {
            return Err(Error::NoConvergence {
                iterations,
                residual: res,
            });
        }
        st.apply(&p, &mut ap);
        let step = rz / dot(&p, &ap);
        for k in 0..n {
            x[k] += step * p[k];
            r[k] -= step * ap[k];
        }
        for k in 0..n {
            zv[k] = r[k] * inv_diag[k];
        }
        let rz_new = dot(&r, &zv);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = zv[k] + beta * p[k];
        }
        iterations += 1;
        res = dot(&r, &r).sqrt() / norm_rhs;
    }
    // True residual, not the recurrence.
    st.apply(&x, &mut ax);
    let true_res = rhs.iter().zip(&ax).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / norm_rhs;

    let mut values = vec![0.0; (nx + 1) * (nz + 1)];
    for j in 0..=nz {
        for i in 0..=nx {
            values[j * (nx + 1) + i] = if j == 0 {
                spec.bottom
            } else if j == nz {
                spec.top
            } else if i == 0 {
                spec.left
            } else if i == nx {
                spec.right
            } else {
                x[st.idx(i, j)]
            };
        }
    }
    Ok(BoxSolution {
        spec: *spec,
        h,
        nx,
        nz,
        values,
        iterations,
        residual: true_res,
    })
}

/// Whether interior values stay within the boundary data (with slack `tol`).
pub fn satisfies_maximum_principle(sol: &BoxSolution, tol: f64) -> bool {
    let (lo, hi) = sol.spec.extremes();
    let (ilo, ihi) = sol.interior_range();
    ilo >= lo - tol && ihi <= hi + tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_data_gives_constant() {
        for &b in &[-0.5, 0.0, 0.3, 0.8] {
            let s = solve_weighted_laplace(&BoundarySpec::constant((-1.0, 1.0), 1.0, 1.5), b, 0.125).unwrap();
            let (lo, hi) = s.interior_range();
            assert!((lo - 1.5).abs() < 1e-12 && (hi - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_one_dimensional_profile() {
        // f = z^{1-b} / Z^{1-b} solves (z^b f')' = 0 with f(0) = 0, f(Z) = 1; the
        // harmonic-mean coupling reproduces it exactly at the nodes.
        let spec = BoundarySpec {
            x_range: (0.0, 1.0),
            z_top: 2.0,
            left: 0.0,
            right: 0.0,
            bottom: 0.0,
            top: 1.0,
        };
        let b = 0.4;
        let s = solve_weighted_laplace(&spec, b, 0.0625).unwrap();
        assert!(s.residual < 1e-10);
        // Far from the side walls the profile is close to the 1-D one, and sits below it.
        let i = s.nx / 2;
        for j in 1..s.nz {
            let want = (s.z(j) / 2.0).powf(1.0 - b);
            assert!(s.at(i, j) <= want + 1e-12);
        }
        assert!(satisfies_maximum_principle(&s, 1e-12));
    }

    #[test]
    fn rejects_bad_input() {
        let spec = BoundarySpec::constant((0.0, 1.0), 1.0, 0.0);
        assert!(solve_weighted_laplace(&spec, 1.0, 0.1).is_err());
        assert!(solve_weighted_laplace(&spec, 0.0, 0.3).is_err());
    }
}
