//! Gamma-function kernel: log-gamma, regularized incomplete gamma and its
//! inverse.
//!
//! `P(a, x)` uses the power series when `x < a + 1` and a Lentz continued
//! fraction for `Q(a, x)` otherwise. For `a >= 10` the common factor
//! `x^a e^-x / Γ(a)` is assembled from a Stirling expansion around `x = a`
//! so that large shapes keep full absolute accuracy.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecialError {
    #[error("argument out of domain: {0}")]
    Domain(&'static str),

    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}

const EPS: f64 = f64::EPSILON;
const TINY: f64 = 1e-300;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const STIRLING_CUTOFF: f64 = 10.0;

// Lanczos coefficients for g = 607/128.
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_8e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_6e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

/// `ln Γ(x) - [(x - 1/2) ln x - x + ln √(2π)]`, valid for `x >= 10`.
fn stirling_err(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0
        - r2 * (1.0 / 360.0
            - r2 * (1.0 / 1260.0
                - r2 * (1.0 / 1680.0
                    - r2 * (1.0 / 1188.0 - r2 * (691.0 / 360_360.0 - r2 * (1.0 / 156.0)))))))
}

fn ln_gamma_lanczos(x: f64) -> f64 {
    // Γ(x) for x >= 0.5 via the shifted series in (x - 1).
    let xm1 = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (xm1 + i as f64);
    }
    let t = xm1 + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (xm1 + 0.5) * t.ln() - t + sum.ln()
}

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x >= STIRLING_CUTOFF {
        (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_err(x)
    } else if x >= 0.5 {
        ln_gamma_lanczos(x)
    } else {
        ln_gamma_lanczos(x + 1.0) - x.ln()
    }
}

/// `ln(1 + d) - d`, accurate for small `|d|`.
pub fn log1pmx(d: f64) -> f64 {
    if d.abs() < 0.25 {
        // -d²/2 + d³/3 - d⁴/4 + ...
        let mut term = d;
        let mut sum = 0.0;
        for k in 2..200 {
            term *= -d;
            let add = term / k as f64;
            sum += add;
            if add.abs() <= EPS * sum.abs() {
                break;
            }
        }
        sum
    } else {
        d.ln_1p() - d
    }
}

/// `ln(x^a e^-x / Γ(a))`.
fn ln_prefactor(a: f64, x: f64) -> f64 {
    if a >= STIRLING_CUTOFF {
        let d = (x - a) / a;
        a * log1pmx(d) + 0.5 * (a / (2.0 * std::f64::consts::PI)).ln() - stirling_err(a)
    } else {
        a * x.ln() - x - ln_gamma(a + 1.0) + a.ln()
    }
}

/// `ln(x^a e^-x / Γ(a + 1))`, the series normalization.
fn ln_series_prefactor(a: f64, x: f64) -> f64 {
    if a >= STIRLING_CUTOFF {
        ln_prefactor(a, x) - a.ln()
    } else {
        a * x.ln() - x - ln_gamma(a + 1.0)
    }
}

fn max_iterations(a: f64) -> usize {
    10_000 + (50.0 * a.sqrt()) as usize
}

fn series_p(a: f64, x: f64) -> Result<f64, SpecialError> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..max_iterations(a) {
        term *= x / (a + n as f64);
        sum += term;
        if term < sum * EPS {
            return Ok((ln_series_prefactor(a, x).exp() * sum).min(1.0));
        }
    }
    Err(SpecialError::NoConvergence("incomplete gamma series"))
}

fn continued_fraction_q(a: f64, x: f64) -> Result<f64, SpecialError> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..max_iterations(a) {
        let fi = i as f64;
        let an = -fi * (fi - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok((ln_prefactor(a, x).exp() * h).clamp(0.0, 1.0));
        }
    }
    Err(SpecialError::NoConvergence("incomplete gamma continued fraction"))
}

/// Regularized incomplete gamma pair `(P(a, x), Q(a, x))`.
pub fn regularized_gamma_pq(a: f64, x: f64) -> Result<(f64, f64), SpecialError> {
    if !a.is_finite() || a <= 0.0 {
        return Err(SpecialError::Domain("shape must be finite and > 0"));
    }
    if x.is_nan() || x < 0.0 {
        return Err(SpecialError::Domain("x must be >= 0"));
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x == f64::INFINITY {
        return Ok((1.0, 0.0));
    }
    if x < a + 1.0 {
        let p = series_p(a, x)?;
        Ok((p, 1.0 - p))
    } else {
        let q = continued_fraction_q(a, x)?;
        Ok((1.0 - q, q))
    }
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn regularized_gamma_p(a: f64, x: f64) -> Result<f64, SpecialError> {
    regularized_gamma_pq(a, x).map(|(p, _)| p)
}

/// Density of the unit-rate gamma distribution with shape `a` at `x > 0`.
pub fn unit_gamma_pdf(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (ln_prefactor(a, x) - x.ln()).exp()
}

/// Standard normal quantile (Acklam's rational approximation, relative
/// error about 1e-9). Only used to seed root finding.
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const LOW: f64 = 0.024_25;

    let tail = |q: f64| {
        let r = (-2.0 * q.ln()).sqrt();
        (((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5])
            / ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0)
    };
    if p < LOW {
        tail(p)
    } else if p > 1.0 - LOW {
        -tail(1.0 - p)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

fn initial_guess(a: f64, q: f64) -> f64 {
    if a > 1.0 {
        let z = normal_quantile(q);
        let s = 1.0 / (9.0 * a);
        let x = a * (1.0 - s + z * s.sqrt()).powi(3);
        if x > 0.0 {
            return x;
        }
        // Far lower tail: P(a, x) ≈ x^a / Γ(a + 1).
        ((q.ln() + ln_gamma(a + 1.0)) / a).exp()
    } else {
        let t = 1.0 - a * (0.253 + a * 0.12);
        if q < t {
            (q / t).powf(1.0 / a)
        } else {
            1.0 - (1.0 - (q - t) / (1.0 - t)).ln()
        }
    }
}

/// Inverse of `P(a, ·)`: the `x` with `P(a, x) = q`, for `0 < q < 1`.
///
/// Halley steps from a Wilson-Hilferty (or small-shape) starting point,
/// falling back to bisection whenever a step leaves the current bracket.
pub fn regularized_gamma_p_inv(a: f64, q: f64) -> Result<f64, SpecialError> {
    if !a.is_finite() || a <= 0.0 {
        return Err(SpecialError::Domain("shape must be finite and > 0"));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(SpecialError::Domain("probability must lie in (0, 1)"));
    }

    let mut lo = 0.0_f64;
    let mut hi = f64::INFINITY;
    let mut x = initial_guess(a, q);
    if !(x.is_finite() && x > 0.0) {
        x = a.max(1.0);
    }

    for _ in 0..400 {
        let (p, qc) = regularized_gamma_pq(a, x)?;
        // Compare on whichever tail carries more precision.
        let f = if q > 0.5 { (1.0 - q) - qc } else { p - q };
        if f == 0.0 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }

        let pdf = unit_gamma_pdf(a, x);
        let mut next = f64::NAN;
        if pdf > 0.0 && pdf.is_finite() {
            let newton = f / pdf;
            let curvature = (a - 1.0) / x - 1.0;
            let denom = 1.0 - 0.5 * newton * curvature;
            let step = if denom > 0.5 && denom < 2.0 { newton / denom } else { newton };
            next = x - step;
        }
        if !(next > lo && next < hi) {
            next = if hi.is_infinite() {
                x * 2.0
            } else if lo > 0.0 && hi / lo > 4.0 {
                (lo * hi).sqrt()
            } else {
                0.5 * (lo + hi)
            };
        }

        if (next - x).abs() <= 2.0 * EPS * x {
            return Ok(next);
        }
        if hi.is_finite() && hi - lo <= 4.0 * EPS * hi {
            return Ok(next);
        }
        if next == 0.0 {
            // The quantile is below the smallest positive double.
            return Ok(0.0);
        }
        x = next;
    }
    Err(SpecialError::NoConvergence("gamma quantile"))
}
