//! Plane-wave response of the Poisson kernel by direct quadrature.
//!
//! Integrating the kernel over all but one coordinate leaves the 1-D profile
//! `(1 + t^2)^{-(1+2α)/2}` at unit height, so the multiplier of a wave of
//! frequency `s` is its normalized cosine transform.

use std::f64::consts::PI;
use std::sync::OnceLock;

const GL_POINTS: usize = 20;
/// Beyond this argument the profile is below `1e-20` and reported as 0.
pub const KERNEL_CUTOFF: f64 = 50.0;
const MAX_PIECES: usize = 400;

fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_POINTS;
        (0..n)
            .map(|i| {
                let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for k in 2..=n {
                        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    })
}

fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    gauss_legendre().iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

/// `[a, b]` split into panels whose length grows with the distance from 0.
fn integrate_graded(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mut total = 0.0;
    let mut lo = a;
    while lo < b {
        let hi = (lo.max(0.5) * 2.0).min(b).max(lo + 1e-300);
        total += integrate(f, lo, hi);
        lo = hi;
    }
    total
}

/// Wynn's epsilon acceleration of a sequence of partial sums.
fn wynn_epsilon(sums: &[f64]) -> f64 {
    let n = sums.len();
    if n < 3 {
        return *sums.last().unwrap_or(&0.0);
    }
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = sums.to_vec();
    let mut best = sums[n - 1];
    let mut best_delta = f64::INFINITY;
    let mut col = 0;
    while cur.len() > 1 {
        let next: Vec<f64> = (0..cur.len() - 1)
            .map(|i| {
                let d = cur[i + 1] - cur[i];
                if d == 0.0 {
                    f64::INFINITY
                } else {
                    prev[i + 1] + 1.0 / d
                }
            })
            .collect();
        col += 1;
        if col % 2 == 0 && next.len() >= 2 {
            let (a, b) = (next[next.len() - 1], next[next.len() - 2]);
            if a.is_finite() && b.is_finite() && (a - b).abs() < best_delta {
                best_delta = (a - b).abs();
                best = a;
            }
        }
        prev = cur;
        cur = next;
    }
    best
}

/// Kernel profile for one `α`; `mass` is `∫_0^∞ (1+t²)^{-(1+2α)/2} dt`.
#[derive(Clone, Copy, Debug)]
pub struct KernelProfile {
    alpha: f64,
    mass: f64,
}

impl KernelProfile {
    pub fn new(alpha: f64) -> Self {
        // t = sinh u turns the mass into ∫ cosh^{-2α} u du, analytic in a strip,
        // so the trapezoid rule converges geometrically; the tail is closed form.
        let h = 0.02;
        let u_max = 40.0 / alpha.min(1.0) + 10.0;
        let n = (u_max / h) as usize;
        let f = |u: f64| u.cosh().powf(-2.0 * alpha);
        let mut s = 0.5 * f(0.0);
        for i in 1..n {
            s += f(i as f64 * h);
        }
        let top = n as f64 * h;
        s += 0.5 * f(top);
        let tail = 2f64.powf(2.0 * alpha) * (-2.0 * alpha * top).exp() / (2.0 * alpha);
        Self {
            alpha,
            mass: s * h + tail,
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    fn weight(&self, t: f64) -> f64 {
        (1.0 + t * t).powf(-(1.0 + 2.0 * self.alpha) / 2.0)
    }

    /// `∫_0^∞ g(t) w(t) dt` for `g` = cos or t·sin of `s t`, summed between zeros.
    fn oscillatory(&self, s: f64, sine: bool) -> f64 {
        let f: Box<dyn Fn(f64) -> f64> = if sine {
            Box::new(move |t: f64| t * (s * t).sin() * self.weight(t))
        } else {
            Box::new(move |t: f64| (s * t).cos() * self.weight(t))
        };
        let period = PI / s;
        let first = if sine { period } else { 0.5 * period };
        let mut sums = Vec::with_capacity(MAX_PIECES);
        let mut total = integrate_graded(&*f, 0.0, first);
        sums.push(total);
        let mut a = first;
        for _ in 0..MAX_PIECES {
            let b = a + period;
            total += if a < 4.0 { integrate_graded(&*f, a, b) } else { integrate(&*f, a, b) };
            sums.push(total);
            a = b;
            if sums.len() >= 24 {
                break;
            }
        }
        wynn_epsilon(&sums)
    }

    /// Multiplier `m(s)` of a plane wave at dimensionless height `s = |k| z`.
    pub fn value(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 1.0;
        }
        if s > KERNEL_CUTOFF {
            return 0.0;
        }
        self.oscillatory(s, false) / self.mass
    }

    /// `m'(s) = -∫ t sin(s t) w(t) dt / mass`.
    pub fn derivative(&self, s: f64) -> f64 {
        if s > KERNEL_CUTOFF {
            return 0.0;
        }
        if s <= 0.0 {
            return f64::NAN;
        }
        -self.oscillatory(s, true) / self.mass
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre();
        assert!((rule.iter().map(|r| r.1).sum::<f64>() - 2.0).abs() < 1e-14);
        let m38: f64 = rule.iter().map(|&(x, w)| w * x.powi(38)).sum();
        assert!((m38 - 2.0 / 39.0).abs() < 1e-14);
    }

    #[test]
    fn mass_closed_form() {
        for &a in &[0.1, 0.25, 0.5, 0.8] {
            let want = PI.sqrt() * gamma(a) / (2.0 * gamma(a + 0.5));
            let got = KernelProfile::new(a).mass();
            assert!((got - want).abs() < 1e-12 * want, "alpha={a}: {got} vs {want}");
        }
    }

    #[test]
    fn harmonic_case_is_exponential() {
        let k = KernelProfile::new(0.5);
        for &s in &[1e-3, 0.05, 0.5, 1.0, 3.0, 10.0, 30.0] {
            let got = k.value(s);
            assert!((got - (-s).exp()).abs() < 1e-9, "s={s}: {got}");
            assert!((k.derivative(s) + (-s).exp()).abs() < 1e-8, "s={s}");
        }
    }

    #[test]
    fn agrees_with_bessel_closed_form() {
        for &a in &[0.2, 0.3, 0.4, 0.5, 0.75] {
            let k = KernelProfile::new(a);
            let m = crate::special::ExtensionMultiplier::new(a);
            for &s in &[1e-4, 0.01, 0.1, 0.5, 1.0, 2.5, 6.0, 15.0] {
                let (v, d) = (k.value(s), k.derivative(s));
                let (wv, wd) = (m.value(s).0, m.derivative(s).0);
                assert!((v - wv).abs() < 1e-8, "alpha={a} s={s}: {v} vs {wv}");
                assert!((d - wd).abs() < 1e-7 * (1.0 + wd.abs()), "alpha={a} s={s}: {d} vs {wd}");
            }
        }
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // ln 2 = 1 - 1/2 + 1/3 - ...
        let mut s = 0.0;
        let sums: Vec<f64> = (1..=20)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                s
            })
            .collect();
        assert!((wynn_epsilon(&sums) - 2f64.ln()).abs() < 1e-12);
    }
}
