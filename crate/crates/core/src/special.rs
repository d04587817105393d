//! Modified Bessel function of the second kind and the extension multiplier built on it.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;
const SERIES_SWITCH: f64 = 2.0;

/// Taylor coefficients of `1/Γ(z) = Σ c_k z^k`, `k = 1..26`.
const RGAMMA: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// `(gam1, gam2, 1/Γ(1+μ), 1/Γ(1-μ))` for `|μ| <= 1/2`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let mu2 = mu * mu;
    let (mut even, mut odd, mut p) = (0.0, 0.0, 1.0);
    for pair in RGAMMA.chunks_exact(2) {
        odd += pair[0] * p;
        even += pair[1] * p;
        p *= mu2;
    }
    let gam1 = -even;
    let gam2 = odd;
    (gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1)
}

/// `(K_μ(x), K_{μ+1}(x))` times `e^x` for `|μ| <= 1/2`.
fn k_pair_scaled(mu: f64, x: f64) -> (f64, f64) {
    let mu2 = mu * mu;
    if x < SERIES_SWITCH {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        let scale = x.exp();
        (sum * scale, sum1 * 2.0 / x * scale)
    } else {
        // Steed's continued fraction.
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let (mut q1, mut q2) = (0.0, 1.0);
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..MAX_ITER {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                break;
            }
        }
        h *= a1;
        let kmu = (PI / (2.0 * x)).sqrt() / s;
        (kmu, kmu * (mu + x + 0.5 - h) / x)
    }
}

/// `e^x K_ν(x)` for `ν >= 0`, `x > 0`.
pub fn bessel_k_scaled(nu: f64, x: f64) -> f64 {
    let nu = nu.abs();
    if !(x > 0.0) || !nu.is_finite() {
        return f64::NAN;
    }
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let (mut k0, mut k1) = k_pair_scaled(mu, x);
    for i in 1..=(nl as usize) {
        let next = (mu + i as f64) * 2.0 / x * k1 + k0;
        k0 = k1;
        k1 = next;
    }
    k0
}

/// `K_ν(x)`, order symmetric in `ν`.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    bessel_k_scaled(nu, x) * (-x).exp()
}

/// Above this argument the extension multiplier is reported as 0.
pub const MULTIPLIER_CLAMP: f64 = 700.0;

/// Profile of the weighted harmonic extension of a single Fourier mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtensionMultiplier {
    alpha: f64,
    prefactor: f64,
}

impl ExtensionMultiplier {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            prefactor: 2f64.powf(1.0 - alpha) / gamma(alpha),
        }
    }

    /// `φ(s) = 2^{1-α}/Γ(α) s^α K_α(s)`, with `φ(0) = 1`; second entry is the clamp flag.
    pub fn value(&self, s: f64) -> (f64, bool) {
        if s <= 0.0 {
            return (1.0, false);
        }
        if s > MULTIPLIER_CLAMP {
            return (0.0, true);
        }
        let a = self.alpha;
        if a == 0.5 {
            return ((-s).exp(), false);
        }
        let v = self.prefactor * (a * s.ln() - s).exp() * bessel_k_scaled(a, s);
        (v, false)
    }

    /// `φ'(s) = -2^{1-α}/Γ(α) s^α K_{1-α}(s)`.
    pub fn derivative(&self, s: f64) -> (f64, bool) {
        if s > MULTIPLIER_CLAMP {
            return (0.0, true);
        }
        let a = self.alpha;
        if s <= 0.0 {
            // φ'(0) is finite only for α > 1/2.
            return if a > 0.5 {
                (0.0, false)
            } else if a == 0.5 {
                (-1.0, false)
            } else {
                (f64::NEG_INFINITY, false)
            };
        }
        if a == 0.5 {
            return (-(-s).exp(), false);
        }
        let v = -self.prefactor * (a * s.ln() - s).exp() * bessel_k_scaled(1.0 - a, s);
        (v, false)
    }
}
