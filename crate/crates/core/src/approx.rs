//! Shape functions `f1, g1, f2, f3`, the closed-form approximations of the
//! expected SFS, the leading-order asymptotic predictions and the limit
//! function `G`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_1d, integrate_triangle_with, QuadratureSpec};
use crate::specfun::{lgamma, sin_pi, sinc_pi};

fn check_unit(op: &'static str, u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(op, format!("u = {u} must lie in (0, 1)")))
    }
}

/// `α(u) = ln((1 − u) / u)`.
pub fn log_odds(u: f64) -> f64 {
    (1.0 - u).ln() - u.ln()
}

/// `f1(u) = ∫_0^1 u^{−p−1} (1−u)^{p−1} sin(πp)/(πp) dp`, written as
/// `(u(1−u))^{−1} ∫ e^{pα} sinc(p) dp`.
pub fn f1(u: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_unit("f1", u)?;
    let alpha = log_odds(u);
    let r = integrate_1d(|p| (p * alpha).exp() * sinc_pi(p), spec)?.require("f1")?;
    Ok(r / (u * (1.0 - u)))
}

/// Leading behaviour of `f1` as `u → 0`: `1 / (u² ln² u)`.
pub fn f1_near_zero(u: f64) -> f64 {
    let l = u.ln();
    1.0 / (u * u * l * l)
}

/// Leading behaviour of `f1` as `u → 1`, in terms of `w = 1 − u`: `−1 / (w ln w)`.
pub fn f1_near_one(w: f64) -> f64 {
    -1.0 / (w * w.ln())
}

/// Second-order correction of the refined approximation.
pub fn g1(u: f64) -> Result<f64> {
    check_unit("g1", u)?;
    let l = log_odds(u);
    let pi2 = PI * PI;
    let denom = pi2 + l * l;
    let w = u * u * (1.0 - u) * (1.0 - u);
    Ok((pi2 + l * l + 2.0 / u * l) / (denom * denom) / (2.0 * w))
}

/// `f2(u1, u2)` for `0 < u1 < u2 < 1`.
pub fn f2(u1: f64, u2: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(u1 > 0.0 && u1 < u2 && u2 < 1.0) {
        return Err(Error::domain(
            "f2",
            format!("({u1}, {u2}) must satisfy 0 < u1 < u2 < 1"),
        ));
    }
    let (l1, l21, l2c) = (u1.ln(), (u2 - u1).ln(), (1.0 - u2).ln());
    integrate_triangle_with(
        |p1, p2, gap| {
            // 1/Γ(gap) = gap / Γ(1 + gap)
            let ln = -(p1 + 1.0) * l1 + (gap - 1.0) * l21 + (p2 - 1.0) * l2c
                - p1.ln()
                - lgamma(1.0 - p1)
                + gap.ln()
                - lgamma(1.0 + gap)
                - lgamma(1.0 + p2);
            Ok(ln.exp())
        },
        spec,
    )?
    .require("f2")
}

/// `f3(u1, u2)` for `u1, u2 > 0`, `u1 + u2 < 1`.
pub fn f3(u1: f64, u2: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(u1 > 0.0 && u2 > 0.0 && u1 + u2 < 1.0) {
        return Err(Error::domain(
            "f3",
            format!("({u1}, {u2}) must satisfy u1, u2 > 0 and u1 + u2 < 1"),
        ));
    }
    let half = |ua: f64, ub: f64| -> Result<f64> {
        // Triangle where the variable attached to `ua` is the larger one.
        let (la, lb, lr) = (ua.ln(), ub.ln(), (1.0 - ua - ub).ln());
        integrate_triangle_with(
            |p1, p2, _| {
                let s = p1 + p2;
                // 1/Γ(s) = s / Γ(1 + s)
                let ln = -(p1 + 1.0) * la - (p2 + 1.0) * lb + (s - 1.0) * lr
                    - lgamma(1.0 - p1)
                    - lgamma(1.0 - p2)
                    - p1.ln()
                    + s.ln()
                    - lgamma(1.0 + s);
                Ok(ln.exp())
            },
            spec,
        )?
        .require("f3")
    };
    Ok(half(u1, u2)? + half(u2, u1)?)
}

/// Closed-form approximations of `E[SFS_{n,b}]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ApproxVariant {
    /// `θ/(n−1) · (b−1)/b · f1((b−1)/(n−1))`, for `b >= 2`.
    Basic,
    /// `θ n (b−1)/b · (f1/(n−1)² − g1/(n−1)³)`, for `b >= 2`.
    Refined,
    /// `θ n ∫_0^1 (n−1)^{p−1} / Γ(1+p) dp`, for `b = 1`.
    Singleton,
}

pub fn approx_sfs(
    n: u64,
    b: u64,
    theta: f64,
    variant: ApproxVariant,
    spec: &QuadratureSpec,
) -> Result<f64> {
    crate::moments::check_index("approx_sfs", n, b)?;
    check_theta(theta)?;
    let nf = n as f64;
    let bf = b as f64;
    match variant {
        ApproxVariant::Basic | ApproxVariant::Refined if b < 2 => Err(Error::domain(
            "approx_sfs",
            format!("{variant:?} requires b >= 2, got b = {b}"),
        )),
        ApproxVariant::Singleton if b != 1 => Err(Error::domain(
            "approx_sfs",
            format!("Singleton requires b = 1, got b = {b}"),
        )),
        ApproxVariant::Basic => {
            let u = (bf - 1.0) / (nf - 1.0);
            Ok(theta / (nf - 1.0) * (bf - 1.0) / bf * f1(u, spec)?)
        }
        ApproxVariant::Refined => {
            let u = (bf - 1.0) / (nf - 1.0);
            let m = nf - 1.0;
            Ok(theta * nf * (bf - 1.0) / bf * (f1(u, spec)? / (m * m) - g1(u)? / (m * m * m)))
        }
        ApproxVariant::Singleton => {
            let lm = (nf - 1.0).ln();
            let r = integrate_1d(|p| ((p - 1.0) * lm - lgamma(1.0 + p)).exp(), spec)?
                .require("approx_sfs")?;
            Ok(theta * nf * r)
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(
            "theta",
            format!("theta = {theta} must be positive and finite"),
        ))
    }
}

/// Asymptotic regimes of `E[SFS_{n,b}]` as `n → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `b = 1`: `θ n / ln n`.
    Singleton,
    /// `b >= 2`, `b/n → 0`: `θ n / (b(b−1) ln²(n/b))`.
    SmallB,
    /// `b/n → u`: `θ f1(b/n) / n`.
    Proportional,
    /// `(n−b)/n → 0`: `θ / ((n−b) ln(n/(n−b)))`.
    LargeB,
}

/// Leading-order prediction of `E[SFS_{n,b}]` in the given regime. This
/// never evaluates the exact moment integrals.
pub fn asymptotic_sfs(
    n: u64,
    b: u64,
    theta: f64,
    regime: Regime,
    spec: &QuadratureSpec,
) -> Result<f64> {
    crate::moments::check_index("asymptotic_sfs", n, b)?;
    check_theta(theta)?;
    let nf = n as f64;
    let bf = b as f64;
    match regime {
        Regime::Singleton => {
            if b != 1 {
                return Err(Error::domain(
                    "asymptotic_sfs",
                    "the singleton regime requires b = 1",
                ));
            }
            Ok(theta * nf / nf.ln())
        }
        Regime::SmallB => {
            if b < 2 {
                return Err(Error::domain(
                    "asymptotic_sfs",
                    "the small-b regime requires b >= 2",
                ));
            }
            let l = (nf / bf).ln();
            Ok(theta * nf / (bf * (bf - 1.0) * l * l))
        }
        Regime::Proportional => Ok(theta * f1(bf / nf, spec)? / nf),
        Regime::LargeB => {
            let m = nf - bf;
            Ok(theta / (m * (nf / m).ln()))
        }
    }
}

/// `G(x) = ∫_0^1 e^{px} sin(πp)/π dp = (1 + e^x) / (π² + x²)`.
pub fn g_limit(x: f64) -> f64 {
    // ln(1 + e^x) without overflow
    let softplus = if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    };
    (softplus - (PI * PI + x * x).ln()).exp()
}

/// `G` by direct quadrature, used to check the closed form.
pub fn g_limit_quadrature(x: f64, spec: &QuadratureSpec) -> Result<f64> {
    integrate_1d(|p| (p * x).exp() * sin_pi(p) / PI, spec)?.require("g_limit_quadrature")
}

/// The integral that the refined approximation reduces to in closed form:
/// `½ ∫_0^1 u^{−p−2} (1−u)^{p−2} (1 − p) sin(πp)/π dp`, equal to `g1(u)`.
pub fn g1_integral(u: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_unit("g1_integral", u)?;
    let (lu, lw) = (u.ln(), (1.0 - u).ln());
    let r = integrate_1d(
        |p| ((-p - 2.0) * lu + (p - 2.0) * lw).exp() * (1.0 - p) * sin_pi(p) / PI,
        spec,
    )?
    .require("g1_integral")?;
    Ok(0.5 * r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    /// Sine integral Si(π) by its power series.
    fn si_pi() -> f64 {
        let x = PI;
        let mut term = x;
        let mut sum = 0.0;
        for k in 0..40 {
            let kk = 2 * k + 1;
            sum += term / kk as f64;
            term *= -x * x / ((kk + 1) * (kk + 2)) as f64;
        }
        sum
    }

    #[test]
    fn f1_at_half() {
        let want = 4.0 * si_pi() / PI;
        assert!(rel(f1(0.5, &spec()).unwrap(), want) < 1e-12);
        assert!(rel(want, 2.357959488944335) < 1e-13);
    }

    #[test]
    fn f1_endpoint_behaviour() {
        let s = spec();
        let r: Vec<f64> = [1e-8, 1e-12, 1e-16]
            .iter()
            .map(|&u| f1(u, &s).unwrap() / f1_near_zero(u))
            .collect();
        assert!(
            r.windows(2)
                .all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs()),
            "{r:?}"
        );
        assert!((r[2] - 1.0).abs() < 0.06);
        let r: Vec<f64> = [1e-4, 1e-8, 1e-12]
            .iter()
            .map(|&w| {
                let u = 1.0 - w;
                f1(u, &s).unwrap() / f1_near_one(1.0 - u)
            })
            .collect();
        assert!(
            r.windows(2)
                .all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs()),
            "{r:?}"
        );
        assert!((r[2] - 1.0).abs() < 0.01);
    }

    #[test]
    fn f1_domain() {
        assert!(f1(0.0, &spec()).is_err());
        assert!(f1(1.0, &spec()).is_err());
        assert!(g1(1.5).is_err());
    }

    #[test]
    fn g1_examples() {
        assert!(rel(g1(0.5).unwrap(), 8.0 / (PI * PI)) < 1e-14);
        for i in 1..100 {
            assert!(g1(i as f64 / 100.0).unwrap() > 0.0);
        }
    }

    #[test]
    fn g1_matches_integral() {
        let s = spec();
        for i in 1..=9 {
            let u = i as f64 / 10.0;
            assert!(
                rel(g1(u).unwrap(), g1_integral(u, &s).unwrap()) < 1e-9,
                "u={u}"
            );
        }
    }

    #[test]
    fn g_limit_examples() {
        assert!(rel(g_limit(0.0), 2.0 / (PI * PI)) < 1e-15);
        let s = spec();
        for x in -5..=5 {
            let x = x as f64;
            assert!((g_limit(x) - g_limit_quadrature(x, &s).unwrap()).abs() < 1e-10);
        }
        for &x in &[-1e3, -1e5, -1e8] {
            assert!((g_limit(x) * x * x - 1.0).abs() < 1e-5);
        }
        // e^715 alone overflows, the ratio does not
        assert!(g_limit(715.0).is_finite());
    }

    #[test]
    fn f3_symmetric() {
        let s = spec();
        let a = f3(0.2, 0.3, &s).unwrap();
        let b = f3(0.3, 0.2, &s).unwrap();
        assert!(rel(a, b) < 1e-12);
        assert!(f3(0.6, 0.5, &s).is_err());
        assert!(f2(0.5, 0.4, &s).is_err());
    }

    #[test]
    fn approx_variant_mismatch() {
        let s = spec();
        assert!(approx_sfs(10, 1, 1.0, ApproxVariant::Basic, &s).is_err());
        assert!(approx_sfs(10, 1, 1.0, ApproxVariant::Refined, &s).is_err());
        assert!(approx_sfs(10, 2, 1.0, ApproxVariant::Singleton, &s).is_err());
        assert!(asymptotic_sfs(10, 2, 1.0, Regime::Singleton, &s).is_err());
        assert!(asymptotic_sfs(10, 1, 1.0, Regime::SmallB, &s).is_err());
    }

    #[test]
    fn singleton_at_two() {
        let v = approx_sfs(2, 1, 1.0, ApproxVariant::Singleton, &spec()).unwrap();
        // 2 ∫ dp / Γ(1 + p), reference by 30-digit quadrature
        assert!(rel(v / 2.0, 1.08514266435747) < 1e-12, "{v}");
        assert!(rel(v, 2.0) < 0.15);
    }
}
