use crate::error::{check_range, Result};
use crate::spectral::{PhysicalField, VelocityField};

/// Dyadic lattice offsets `s ∈ {1, 2, 4, ..} <= n/4` along both axes and both diagonals.
fn dyadic_offsets(n: usize) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    let mut s = 1i64;
    while s as usize <= (n / 4).max(1) {
        out.extend([(s, 0), (0, s), (s, s), (s, -s)]);
        s *= 2;
    }
    out
}

/// `(sup |g(x) - g(y)| / |x - y|^γ, pairs)` over every node and every offset, for a field
/// with the given components.
fn seminorm(comps: &[&PhysicalField], gamma: f64, offsets: &[(i64, i64)]) -> (f64, usize) {
    let g = *comps[0].grid();
    let n = g.n();
    let h = g.spacing();
    let mut best: f64 = 0.0;
    for &(d0, d1) in offsets {
        let w = (h * ((d0 * d0 + d1 * d1) as f64).sqrt()).powf(-gamma);
        for i0 in 0..n {
            let j0 = (i0 as i64 + d0).rem_euclid(n as i64) as usize;
            for i1 in 0..n {
                let j1 = (i1 as i64 + d1).rem_euclid(n as i64) as usize;
                let d2: f64 = comps
                    .iter()
                    .map(|c| {
                        let v = c.at(j0, j1) - c.at(i0, i1);
                        v * v
                    })
                    .sum();
                best = best.max(d2.sqrt() * w);
            }
        }
    }
    (best, offsets.len() * g.len())
}

/// Discrete `C^γ` seminorm of a scalar field at dyadic separations, `0 < γ <= 1`.
pub fn holder_seminorm(f: &PhysicalField, gamma: f64) -> Result<f64> {
    check_range("gamma", gamma, "(0, 1]", gamma > 0.0 && gamma <= 1.0)?;
    Ok(seminorm(&[f], gamma, &dyadic_offsets(f.grid().n())).0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocityNormReport {
    /// `sup |u(x) - u(y)| / |x - y|^γ` over the sampled pairs.
    pub holder_seminorm: f64,
    /// `max |u|`.
    pub sup_norm: f64,
    pub sample_pair_count: usize,
}

/// `C^γ` seminorm and sup norm of `u`, over all node pairs at dyadic separations.
pub fn velocity_holder_norm(u: &VelocityField, gamma: f64) -> Result<VelocityNormReport> {
    check_range("gamma", gamma, "(0, 1]", gamma > 0.0 && gamma <= 1.0)?;
    let (s, pairs) = seminorm(&[&u.u1, &u.u2], gamma, &dyadic_offsets(u.grid().n()));
    Ok(VelocityNormReport {
        holder_seminorm: s,
        sup_norm: u.max_speed(),
        sample_pair_count: pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::random_band_limited;
    use crate::spectral::{riesz_velocity, Grid};

    #[test]
    fn lipschitz_constant_of_a_sine() {
        let g = Grid::periodic(64).unwrap();
        let u = VelocityField {
            u1: PhysicalField::from_fn(g, |x, _| x.sin()),
            u2: PhysicalField::zeros(g),
        };
        let r = velocity_holder_norm(&u, 1.0).unwrap();
        assert!((r.holder_seminorm - 1.0).abs() < 0.02, "{r:?}");
        assert!((r.sup_norm - 1.0).abs() < 1e-12);
        // Steepest node secant straddles x = 0: (sin h - sin 0)/h.
        let h = g.spacing();
        assert!((r.holder_seminorm - h.sin() / h).abs() < 1e-12);
        assert!(velocity_holder_norm(&u, 0.0).is_err());
    }

    #[test]
    fn constants_have_no_seminorm() {
        let g = Grid::periodic(32).unwrap();
        let c = PhysicalField::constant(g, 3.0);
        assert_eq!(holder_seminorm(&c, 0.5).unwrap(), 0.0);
        let u = VelocityField { u1: c.clone(), u2: c };
        assert_eq!(velocity_holder_norm(&u, 0.4).unwrap().holder_seminorm, 0.0);
    }

    #[test]
    fn box_mean_does_not_matter() {
        let g = Grid::periodic(32).unwrap();
        let th = random_band_limited(g, 6.0, 1.0, 1.0, 11).unwrap();
        let u = riesz_velocity(&th.forward());
        let shifted = VelocityField {
            u1: u.u1.map(|v| v - 0.37),
            u2: u.u2.map(|v| v + 1.1),
        };
        let (a, b) = (velocity_holder_norm(&u, 0.4).unwrap(), velocity_holder_norm(&shifted, 0.4).unwrap());
        assert!((a.holder_seminorm - b.holder_seminorm).abs() < 1e-12 * a.holder_seminorm);
    }

    #[test]
    fn stable_when_pairs_double() {
        // Every separation up to n/4 instead of the dyadic ones.
        let g = Grid::periodic(64).unwrap();
        let th = random_band_limited(g, 10.0, 1.0, 1.0, 5).unwrap();
        let u = riesz_velocity(&th.forward());
        let all: Vec<(i64, i64)> = (1..=16i64).flat_map(|s| [(s, 0), (0, s), (s, s), (s, -s)]).collect();
        let (dense, pairs) = seminorm(&[&u.u1, &u.u2], 0.4, &all);
        let r = velocity_holder_norm(&u, 0.4).unwrap();
        assert!(pairs >= 2 * r.sample_pair_count);
        assert!((dense - r.holder_seminorm).abs() <= 0.05 * dense, "{dense} vs {r:?}");
    }
}
