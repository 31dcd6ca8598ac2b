//! Log-domain special functions: log-Gamma, digamma, log-Beta and Gamma ratios.
//!
//! Every integrand in the crate is a product of Gamma ratios with arguments
//! that range from `1e-16` (near the open endpoints of the unit interval) to
//! the sample size `n`, which may be as large as `1e7`. Those products are
//! formed as sums of logarithms and exponentiated once.
//!
//! The checked functions ([`log_gamma`], [`digamma_diff`], [`gamma_ratio`],
//! [`log_beta`]) validate their arguments. The raw versions ([`lgamma`],
//! [`lgamma_ratio`], [`lbeta`], [`digamma`]) skip the checks and return `NaN`
//! outside their domain; they are what the integrands call.

// Coefficient tables keep the digits as published.
#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Default index above which [`digamma_diff`] switches from the finite sum to
/// the asymptotic digamma expansion.
pub const DIGAMMA_DIFF_CROSSOVER: u64 = 10_000;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// zeta(k) - 1 for k = 2..=33
const ZETA_MINUS_ONE: [f64; 32] = [
    6.449_340_668_482_264e-1,
    2.020_569_031_595_943e-1,
    8.232_323_371_113_819e-2,
    3.692_775_514_336_993e-2,
    1.734_306_198_444_914e-2,
    8.349_277_381_922_827e-3,
    4.077_356_197_944_34e-3,
    2.008_392_826_082_214_4e-3,
    9.945_751_278_180_853e-4,
    4.941_886_041_194_645e-4,
    2.460_865_533_080_483e-4,
    1.227_133_475_784_891_5e-4,
    6.124_813_505_870_483e-5,
    3.058_823_630_702_049e-5,
    1.528_225_940_865_187e-5,
    7.637_197_637_899_763e-6,
    3.817_293_264_999_84e-6,
    1.908_212_716_553_939e-6,
    9.539_620_338_727_962e-7,
    4.769_329_867_878_064e-7,
    2.384_505_027_277_33e-7,
    1.192_199_259_653_110_7e-7,
    5.960_818_905_125_948e-8,
    2.980_350_351_465_228e-8,
    1.490_155_482_836_504e-8,
    7.450_711_789_835_43e-9,
    3.725_334_024_788_457e-9,
    1.862_659_723_513_049e-9,
    9.313_274_324_196_682e-10,
    4.656_629_065_033_784e-10,
    2.328_311_833_676_505_5e-10,
    1.164_155_017_270_052e-10,
];

// B_{2k} / (2k (2k-1))
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

// B_{2k} / (2k)
const DIGAMMA_COEFFS: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
];

const ASYMPTOTIC_THRESHOLD: f64 = 10.0;

/// `sum_{k>=2} (-1)^k (zeta(k)-1) z^k / k`, valid for `|z| <= 0.5`.
fn zeta_series(z: f64) -> f64 {
    let mut acc = 0.0;
    for (i, c) in ZETA_MINUS_ONE.iter().enumerate().rev() {
        let k = (i + 2) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc = acc * z + sign * c / k;
    }
    acc * z * z
}

/// `ln Gamma(1 + z)` for `|z| <= 0.5`.
fn lgamma1p_small(z: f64) -> f64 {
    -z.ln_1p() + z * (1.0 - EULER_GAMMA) + zeta_series(z)
}

/// Correction term of Stirling's series, `ln Gamma(x) - (x - 1/2) ln x + x - ln sqrt(2 pi)`.
fn stirling_tail(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut acc = 0.0;
    for c in STIRLING_COEFFS.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc * inv
}

/// `ln Gamma(x)` without argument checks; `NaN` for `x <= 0`.
pub fn lgamma(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return lgamma1p_small(x) - x.ln();
    }
    if x < 1.5 {
        return lgamma1p_small(x - 1.0);
    }
    if x < 2.5 {
        // ln Gamma(2 + z) = ln Gamma(1 + z) + ln(1 + z); the ln(1 + z) terms cancel.
        let z = x - 2.0;
        return z * (1.0 - EULER_GAMMA) + zeta_series(z);
    }
    if x < ASYMPTOTIC_THRESHOLD {
        let mut y = x;
        let mut prod = 1.0;
        while y >= 2.5 {
            y -= 1.0;
            prod *= y;
        }
        return prod.ln() + lgamma(y);
    }
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_tail(x)
}

/// `ln Gamma(a + c) - ln Gamma(a)` without argument checks.
///
/// For large arguments the difference is formed analytically from Stirling's
/// series so that no digits are lost when `a` is much larger than `c`.
pub fn lgamma_ratio(a: f64, c: f64) -> f64 {
    let x = a + c;
    if a >= ASYMPTOTIC_THRESHOLD && x >= ASYMPTOTIC_THRESHOLD {
        (a - 0.5) * (c / a).ln_1p() + c * x.ln() - c + (stirling_tail(x) - stirling_tail(a))
    } else {
        lgamma(x) - lgamma(a)
    }
}

/// `ln Be(x, y)` without argument checks.
pub fn lbeta(x: f64, y: f64) -> f64 {
    let (small, big) = if x <= y { (x, y) } else { (y, x) };
    lgamma(small) - lgamma_ratio(big, small)
}

/// Digamma function for `x > 0` without argument checks.
pub fn digamma(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    let mut shift = 0.0;
    let mut y = x;
    while y < ASYMPTOTIC_THRESHOLD {
        shift -= 1.0 / y;
        y += 1.0;
    }
    let inv2 = 1.0 / (y * y);
    let mut acc = 0.0;
    for c in DIGAMMA_COEFFS.iter().rev() {
        acc = acc * inv2 + c;
    }
    shift + y.ln() - 0.5 / y - acc * inv2
}

/// `sin(pi x)` with exact argument reduction.
pub fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let t = x.rem_euclid(2.0);
    let (t, sign) = if t > 1.0 { (t - 1.0, -1.0) } else { (t, 1.0) };
    let t = if t > 0.5 { 1.0 - t } else { t };
    sign * (PI * t).sin()
}

/// `sin(pi p) / (pi p)`, equal to `1 / (Gamma(1 - p) Gamma(1 + p))`; the
/// removable singularity at `p = 0` is filled with 1.
pub fn sinc_pi(p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        sin_pi(p) / (PI * p)
    }
}

fn check_finite(op: &'static str, name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(op, format!("{name} = {x} is not finite")))
    }
}

/// `ln Gamma(x)` for finite `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    check_finite("log_gamma", "x", x)?;
    if x <= 0.0 {
        return Err(Error::domain(
            "log_gamma",
            format!("x = {x} must be positive"),
        ));
    }
    Ok(lgamma(x))
}

/// `Psi(b - p) - Psi(1 - p) = sum_{k=1}^{b-1} 1/(k - p)` with the default crossover.
pub fn digamma_diff(b: u64, p: f64) -> Result<f64> {
    digamma_diff_with_crossover(b, p, DIGAMMA_DIFF_CROSSOVER)
}

/// As [`digamma_diff`], switching to the asymptotic digamma expansion once
/// `b > crossover`.
pub fn digamma_diff_with_crossover(b: u64, p: f64, crossover: u64) -> Result<f64> {
    check_finite("digamma_diff", "p", p)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(
            "digamma_diff",
            format!("p = {p} must lie in (0, 1)"),
        ));
    }
    if b == 0 {
        return Err(Error::domain("digamma_diff", "b must be at least 1"));
    }
    Ok(digamma_diff_raw(b, p, crossover))
}

/// Unchecked [`digamma_diff_with_crossover`]; also accepts `p = 0`.
pub fn digamma_diff_raw(b: u64, p: f64, crossover: u64) -> f64 {
    if b > crossover {
        return digamma(b as f64 - p) - digamma(1.0 - p);
    }
    // Neumaier summation, smallest terms first.
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for k in (1..b).rev() {
        let term = 1.0 / (k as f64 - p);
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// How [`gamma_ratio_with`] evaluates `Gamma(m + c) / Gamma(m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GammaRatioMethod {
    /// `exp(ln Gamma(m + c) - ln Gamma(m))`.
    Exact,
    /// `m^c`.
    StirlingFirst,
    /// `m^c (1 - c (1 - c) / (2 m))`.
    StirlingSecond,
}

/// `Gamma(m + c) / Gamma(m)`.
pub fn gamma_ratio(m: f64, c: f64) -> Result<f64> {
    gamma_ratio_with(m, c, GammaRatioMethod::Exact)
}

pub fn gamma_ratio_with(m: f64, c: f64, method: GammaRatioMethod) -> Result<f64> {
    check_finite("gamma_ratio", "m", m)?;
    check_finite("gamma_ratio", "c", c)?;
    if m <= 0.0 {
        return Err(Error::domain(
            "gamma_ratio",
            format!("m = {m} must be positive"),
        ));
    }
    if m + c <= 0.0 {
        return Err(Error::domain(
            "gamma_ratio",
            format!("m + c = {} must be positive", m + c),
        ));
    }
    Ok(match method {
        GammaRatioMethod::Exact => lgamma_ratio(m, c).exp(),
        GammaRatioMethod::StirlingFirst => m.powf(c),
        GammaRatioMethod::StirlingSecond => m.powf(c) * (1.0 - c * (1.0 - c) / (2.0 * m)),
    })
}

/// `ln Be(x, y) = ln Gamma(x) + ln Gamma(y) - ln Gamma(x + y)`.
pub fn log_beta(x: f64, y: f64) -> Result<f64> {
    check_finite("log_beta", "x", x)?;
    check_finite("log_beta", "y", y)?;
    if x <= 0.0 || y <= 0.0 {
        return Err(Error::domain(
            "log_beta",
            format!("arguments ({x}, {y}) must be positive"),
        ));
    }
    Ok(lbeta(x, y))
}
