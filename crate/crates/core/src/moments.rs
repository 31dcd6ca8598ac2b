//! Exact first and second moments of the family-size branch lengths
//! `ℓ_{n,b}` and of the site frequency spectrum, the infinite-coalescent
//! interval expectations, and Poisson–Dirichlet functional means.
//!
//! Every integrand is a product of the three Gamma-ratio kernels
//!
//! * `A(b, p) = Γ(b − p) / (Γ(b + 1) Γ(1 − p))`
//! * `B(m, p) = Γ(m + p) / (Γ(m + 1) Γ(1 + p))`
//! * `D(d, δ) = Γ(d + δ) / (Γ(d + 1) Γ(δ))`
//!
//! evaluated in the log domain and exponentiated once.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{
    integrate_1d, integrate_1d_with, integrate_interval_with, integrate_triangle_with,
    pairwise_sum, IntegralResult, QuadratureSpec,
};
use crate::specfun::{lgamma, lgamma_ratio, sinc_pi};

/// Sample size, mutation rate and a single family size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoalescentQuery {
    pub n: u64,
    pub theta: f64,
    pub b: u64,
}

impl CoalescentQuery {
    pub fn new(n: u64, theta: f64, b: u64) -> Result<Self> {
        let q = Self { n, theta, b };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        check_theta(self.theta)?;
        check_index("query", self.n, self.b)
    }
}

/// Sample size, mutation rate and a pair of family sizes with `b1 <= b2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairQuery {
    pub n: u64,
    pub theta: f64,
    pub b1: u64,
    pub b2: u64,
}

impl PairQuery {
    /// Builds a query, swapping the indices if needed.
    pub fn new(n: u64, theta: f64, b1: u64, b2: u64) -> Result<Self> {
        let (b1, b2) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        let q = Self { n, theta, b1, b2 };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        check_theta(self.theta)?;
        check_pair("pair query", self.n, self.b1, self.b2)
    }
}

/// Treatment of the diagonal `b1 = b2` in the second moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SecondMomentMode {
    /// `n L2 + n L3 1{b1 + b2 <= n}` for every pair.
    AsPrinted,
    /// As printed, but with the `L2` term doubled when `b1 = b2`. This
    /// variant matches the exact Markov-chain moments.
    #[default]
    DiagonalDoubled,
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

pub(crate) fn check_index(op: &'static str, n: u64, b: u64) -> Result<()> {
    if n < 2 {
        return Err(Error::domain(op, format!("n = {n} must be at least 2")));
    }
    if b < 1 || b >= n {
        return Err(Error::domain(
            op,
            format!("b = {b} must lie in [1, {}]", n - 1),
        ));
    }
    Ok(())
}

fn check_pair(op: &'static str, n: u64, b1: u64, b2: u64) -> Result<()> {
    check_index(op, n, b1)?;
    check_index(op, n, b2)?;
    if b1 > b2 {
        return Err(Error::domain(
            op,
            format!("b1 = {b1} must not exceed b2 = {b2}"),
        ));
    }
    Ok(())
}

/// `ln A(b, p)`, with `q = 1 - p` passed separately to keep its precision.
#[inline]
pub(crate) fn ln_a(b: f64, p: f64, q: f64) -> f64 {
    lgamma_ratio(b, -p) - b.ln() - lgamma(q)
}

/// `ln B(m, p)`.
#[inline]
pub(crate) fn ln_b(m: f64, p: f64) -> f64 {
    lgamma_ratio(m, p) - m.ln() - lgamma(1.0 + p)
}

/// `ln D(d, δ)`; the small-`d` branch uses `∏_{j<d} (δ + j) / d!`.
#[inline]
pub(crate) fn ln_d(d: u64, delta: f64) -> f64 {
    if d == 0 {
        return 0.0;
    }
    if d <= 16 {
        let mut prod = 1.0;
        for j in 0..d {
            prod *= (delta + j as f64) / (j + 1) as f64;
        }
        prod.ln()
    } else {
        let df = d as f64;
        delta.ln() + lgamma_ratio(df, delta) - df.ln() - lgamma(1.0 + delta)
    }
}

/// `L1(n, b) = ∫ A(b, p) B(n − b, p) dp`.
pub fn l1(n: u64, b: u64, spec: &QuadratureSpec) -> Result<f64> {
    check_index("l1", n, b)?;
    l1_integral(n, b, spec)?.require("l1")
}

pub fn l1_integral(n: u64, b: u64, spec: &QuadratureSpec) -> Result<IntegralResult> {
    check_index("l1", n, b)?;
    let bf = b as f64;
    let m = (n - b) as f64;
    integrate_1d(|p| (ln_a(bf, p, 1.0 - p) + ln_b(m, p)).exp(), spec)
}

/// Caches a function of the outer variable across one inner integral.
struct OuterCache {
    key: f64,
    value: f64,
}

impl OuterCache {
    fn new() -> Self {
        Self {
            key: f64::NAN,
            value: 0.0,
        }
    }

    fn get(&mut self, key: f64, f: impl FnOnce(f64) -> f64) -> f64 {
        if key.to_bits() != self.key.to_bits() {
            self.key = key;
            self.value = f(key);
        }
        self.value
    }
}

/// `L2(n, b1, b2)`, the triangle integral over `0 < p2 < p1 < 1` of
/// `A(b1, p1) D(b2 − b1, p1 − p2) B(n − b2, p2) / p1`.
pub fn l2(n: u64, b1: u64, b2: u64, spec: &QuadratureSpec) -> Result<f64> {
    l2_integral(n, b1, b2, spec)?.require("l2")
}

pub fn l2_integral(n: u64, b1: u64, b2: u64, spec: &QuadratureSpec) -> Result<IntegralResult> {
    check_pair("l2", n, b1, b2)?;
    let b1f = b1 as f64;
    let d = b2 - b1;
    let m = (n - b2) as f64;
    let mut outer = OuterCache::new();
    integrate_triangle_with(
        |p1, p2, gap| {
            let la = outer.get(p1, |p1| ln_a(b1f, p1, 1.0 - p1) - p1.ln());
            Ok((la + ln_d(d, gap) + ln_b(m, p2)).exp())
        },
        spec,
    )
}

/// `L3(n, b1, b2)`, the square integral of
/// `A(b1, p1) A(b2, p2) D(n − b1 − b2, p1 + p2) / max(p1, p2)`; zero when
/// `b1 + b2 > n`.
pub fn l3(n: u64, b1: u64, b2: u64, spec: &QuadratureSpec) -> Result<f64> {
    check_pair("l3", n, b1, b2)?;
    if b1 + b2 > n {
        return Ok(0.0);
    }
    let r = n - b1 - b2;
    // Split along the diagonal so the kink of max(p1, p2) sits on the boundary.
    let upper = l3_half(b1, b2, r, spec)?;
    if b1 == b2 {
        return Ok(2.0 * upper);
    }
    let lower = l3_half(b2, b1, r, spec)?;
    Ok(upper + lower)
}

/// Half of `L3` over `p2 < p1` with `big` attached to `p1`.
fn l3_half(big: u64, small: u64, r: u64, spec: &QuadratureSpec) -> Result<f64> {
    let bb = big as f64;
    let bs = small as f64;
    let mut outer = OuterCache::new();
    integrate_triangle_with(
        |p1, p2, _| {
            let la = outer.get(p1, |p1| ln_a(bb, p1, 1.0 - p1) - p1.ln());
            Ok((la + ln_a(bs, p2, 1.0 - p2) + ln_d(r, p1 + p2)).exp())
        },
        spec,
    )?
    .require("l3")
}

/// `E[SFS_{n,b}] = θ n L1(n, b)`.
pub fn expected_sfs(q: &CoalescentQuery, spec: &QuadratureSpec) -> Result<f64> {
    q.validate()?;
    Ok(q.theta * q.n as f64 * l1(q.n, q.b, spec)?)
}

/// `E[ℓ_{n,b}] = n L1(n, b)`.
pub fn expected_length(n: u64, b: u64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(n as f64 * l1(n, b, spec)?)
}

/// `E[SFS_{n,b}]` for every `b` in `1..n`, evaluated in parallel.
pub fn expected_sfs_all(n: u64, theta: f64, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    check_theta(theta)?;
    check_index("expected_sfs_all", n, 1)?;
    (1..n)
        .into_par_iter()
        .map(|b| Ok(theta * n as f64 * l1(n, b, spec)?))
        .collect()
}

/// `E[ℓ_{n,b1} ℓ_{n,b2}]`; the indices may be given in either order.
pub fn second_moment_lengths(
    n: u64,
    b1: u64,
    b2: u64,
    mode: SecondMomentMode,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let (b1, b2) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
    check_pair("second_moment_lengths", n, b1, b2)?;
    let nf = n as f64;
    let mut m2 = nf * l2(n, b1, b2, spec)?;
    if b1 == b2 && mode == SecondMomentMode::DiagonalDoubled {
        m2 *= 2.0;
    }
    if b1 + b2 <= n {
        m2 += nf * l3(n, b1, b2, spec)?;
    }
    Ok(m2)
}

/// `Cov(SFS_{n,b1}, SFS_{n,b2})`.
pub fn cov_sfs(q: &PairQuery, mode: SecondMomentMode, spec: &QuadratureSpec) -> Result<f64> {
    let q = PairQuery::new(q.n, q.theta, q.b1, q.b2)?;
    let nf = q.n as f64;
    let m2 = second_moment_lengths(q.n, q.b1, q.b2, mode, spec)?;
    let e1 = l1(q.n, q.b1, spec)?;
    let e2 = if q.b2 == q.b1 {
        e1
    } else {
        l1(q.n, q.b2, spec)?
    };
    let theta = q.theta;
    let mut cov = theta * theta * (m2 - nf * nf * e1 * e2);
    if q.b1 == q.b2 {
        cov += theta * nf * e1;
    }
    Ok(cov)
}

fn check_interval(op: &'static str, x: f64, y: f64) -> Result<()> {
    if !(x > 0.0 && y < 1.0 && x <= y && x.is_finite() && y.is_finite()) {
        return Err(Error::domain(
            op,
            format!("interval ({x}, {y}) must satisfy 0 < x <= y < 1"),
        ));
    }
    Ok(())
}

/// Expected number of mutations whose frequency lies in `(x, y)` in the
/// infinite coalescent, `θ ∫_x^y f1(u) du`.
///
/// The `u` integral is done in closed form: `∫_x^y u^{−p−1} (1−u)^{p−1} du =
/// (e^{p α(x)} − e^{p α(y)}) / p` with `α(u) = ln((1 − u) / u)`, leaving a
/// smooth integral over `p`.
pub fn expected_sfs_interval_infinite(
    x: f64,
    y: f64,
    theta: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_interval("expected_sfs_interval_infinite", x, y)?;
    check_theta(theta)?;
    if x == y {
        return Ok(0.0);
    }
    let ax = ((1.0 - x) / x).ln();
    let ay = ((1.0 - y) / y).ln();
    let diff = ax - ay;
    let r = integrate_1d(
        |p| {
            // (e^{p ax} − e^{p ay}) / p without cancellation
            let inner = if p == 0.0 {
                diff
            } else {
                (p * ay).exp() * (p * diff).exp_m1() / p
            };
            sinc_pi(p) * inner
        },
        spec,
    )?;
    Ok(theta * r.require("expected_sfs_interval_infinite")?)
}

/// Snaps `t` to the nearest integer when it is within rounding distance,
/// so that e.g. `10 * 0.3` maps to 3.
fn snap(t: f64) -> f64 {
    let r = t.round();
    if (t - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        t
    }
}

/// Family sizes `⌈n x⌉ ..= ⌊n y⌋` belonging to the frequency interval `(x, y)`.
pub fn interval_indices(n: u64, x: f64, y: f64) -> std::ops::RangeInclusive<u64> {
    let nf = n as f64;
    let lo = snap(nf * x).ceil().max(1.0) as u64;
    let hi = (snap(nf * y).floor() as u64).min(n - 1);
    lo..=hi
}

/// Expected number of mutations carried by `⌈n x⌉ ..= ⌊n y⌋` individuals.
pub fn expected_sfs_interval_finite(
    n: u64,
    x: f64,
    y: f64,
    theta: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_interval("expected_sfs_interval_finite", x, y)?;
    check_theta(theta)?;
    check_index("expected_sfs_interval_finite", n, 1)?;
    let terms: Vec<f64> = interval_indices(n, x, y)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|b| l1(n, b, spec).map(|v| theta * n as f64 * v))
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&terms))
}

/// A function `f` whose sum over the parts of a `PD(α, 0)` partition is averaged.
#[derive(Clone, Copy)]
pub enum PdFunctional<'a> {
    /// `u ↦ u^k`.
    Power(i32),
    /// Indicator of the open interval `(lo, hi)`, with `0 < lo < hi <= 1`.
    Indicator(f64, f64),
    /// Any function for which the integral converges.
    Custom(&'a (dyn Fn(f64) -> f64 + Sync)),
}

impl PdFunctional<'_> {
    fn eval(&self, u: f64) -> f64 {
        match *self {
            PdFunctional::Power(k) => u.powi(k),
            PdFunctional::Indicator(lo, hi) => {
                if u > lo && u < hi {
                    1.0
                } else {
                    0.0
                }
            }
            PdFunctional::Custom(f) => f(u),
        }
    }
}

/// `E[Σ_i f(a_i)]` for `(a_i) ~ PD(α, 0)`, equal to
/// `sin(πα)/π ∫_0^1 f(u) (1 − u)^{α−1} u^{−α−1} du`.
///
/// The range is split at the midpoint. The substitution `u = c t^{1/(1−α)}`
/// near 0 and `1 − u = c t^{1/α}` near 1 absorb the algebraic endpoint
/// singularities of the weight.
pub fn pd_functional_mean(
    alpha: f64,
    f: PdFunctional<'_>,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(
            "pd_functional_mean",
            format!("alpha = {alpha} must lie in (0, 1)"),
        ));
    }
    let (lo, hi) = match f {
        PdFunctional::Indicator(lo, hi) => {
            if !(lo > 0.0 && lo < hi && hi <= 1.0) {
                return Err(Error::domain(
                    "pd_functional_mean",
                    format!("indicator interval ({lo}, {hi}) must satisfy 0 < lo < hi <= 1"),
                ));
            }
            (lo, hi)
        }
        _ => (0.0, 1.0),
    };
    let weight = crate::specfun::sin_pi(alpha) / std::f64::consts::PI;
    let mid = 0.5 * (lo + hi);
    let ln_w = |u: f64, w: f64| (alpha - 1.0) * w.ln() - (alpha + 1.0) * u.ln();

    // Lower piece [lo, mid]: singular at 0 only when lo = 0.
    let lower = if lo == 0.0 {
        let q = 1.0 / (1.0 - alpha);
        integrate_1d_with(
            |t| {
                let u = mid * t.powf(q);
                if u == 0.0 {
                    return Ok(0.0);
                }
                let jac = mid * q * t.powf(q - 1.0);
                Ok(f.eval(u) * (ln_w(u, 1.0 - u)).exp() * jac)
            },
            spec,
        )?
    } else {
        integrate_interval_with(|u| Ok(f.eval(u) * ln_w(u, 1.0 - u).exp()), lo, mid, spec)?
    };
    // Upper piece [mid, hi]: singular at 1 only when hi = 1.
    let upper = if hi == 1.0 {
        let c = 1.0 - mid;
        let r = 1.0 / alpha;
        integrate_1d_with(
            |t| {
                let w = c * t.powf(r);
                if w == 0.0 {
                    return Ok(0.0);
                }
                let u = 1.0 - w;
                let jac = c * r * t.powf(r - 1.0);
                Ok(f.eval(u) * ln_w(u, w).exp() * jac)
            },
            spec,
        )?
    } else {
        integrate_interval_with(|u| Ok(f.eval(u) * ln_w(u, 1.0 - u).exp()), mid, hi, spec)?
    };
    Ok(IntegralResult {
        value: weight * (lower.value + upper.value),
        error_estimate: weight * (lower.error_estimate + upper.error_estimate),
        converged: lower.converged && upper.converged,
        evaluations: lower.evaluations + upper.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        ((a - b) / b).abs() < tol
    }

    #[test]
    fn l1_examples() {
        let s = spec();
        assert!(close(l1(2, 1, &s).unwrap(), 1.0, 1e-12));
        assert!(close(l1(3, 1, &s).unwrap(), 0.75, 1e-12));
        assert!(close(l1(3, 2, &s).unwrap(), 0.25, 1e-12));
    }

    #[test]
    fn l1_stable_for_large_n() {
        let s = spec();
        for &n in &[1_000_u64, 100_000, 10_000_000] {
            for &b in &[1, 2, n / 2, n - 1] {
                let v = l1(n, b, &s).unwrap();
                assert!(v.is_finite() && v > 0.0, "n={n} b={b}");
            }
        }
    }

    #[test]
    fn l2_l3_examples() {
        let s = spec();
        assert!(close(l2(2, 1, 1, &s).unwrap(), 1.0, 1e-10));
        assert!(close(l3(2, 1, 1, &s).unwrap(), 2.0, 1e-10));
        assert!(close(l2(3, 1, 2, &s).unwrap(), 0.25, 1e-10));
        assert!(close(l3(3, 1, 2, &s).unwrap(), 0.625, 1e-10));
        assert!(close(l2(3, 1, 1, &s).unwrap(), 0.625, 1e-10));
        assert!(close(l3(3, 1, 1, &s).unwrap(), 1.5, 1e-10));
        assert_eq!(l3(5, 2, 4, &s).unwrap(), 0.0);
    }

    #[test]
    fn index_violations() {
        let s = spec();
        assert!(l1(3, 0, &s).is_err());
        assert!(l1(3, 3, &s).is_err());
        assert!(l1(1, 1, &s).is_err());
        assert!(l2(5, 3, 2, &s).is_err());
        assert!(CoalescentQuery::new(4, 0.0, 1).is_err());
        assert!(CoalescentQuery::new(4, 1.0, 4).is_err());
    }

    #[test]
    fn ln_d_branches_agree() {
        for d in [17_u64, 20, 40] {
            for &delta in &[1e-8, 0.3, 1.0, 1.7] {
                let mut prod = 1.0_f64;
                for j in 0..d {
                    prod *= (delta + j as f64) / (j + 1) as f64;
                }
                assert!((ln_d(d, delta) - prod.ln()).abs() < 1e-12 * prod.ln().abs().max(1.0));
            }
        }
        assert_eq!(ln_d(0, 0.5), 0.0);
    }

    #[test]
    fn expected_sfs_examples() {
        let s = spec();
        assert!(close(
            expected_sfs(&CoalescentQuery::new(2, 1.0, 1).unwrap(), &s).unwrap(),
            2.0,
            1e-12
        ));
        assert!(close(
            expected_sfs(&CoalescentQuery::new(3, 1.0, 2).unwrap(), &s).unwrap(),
            0.75,
            1e-12
        ));
        assert!(close(
            expected_sfs(&CoalescentQuery::new(3, 2.0, 1).unwrap(), &s).unwrap(),
            4.5,
            1e-12
        ));
    }

    #[test]
    fn second_moment_examples() {
        let s = spec();
        let dd = SecondMomentMode::DiagonalDoubled;
        let ap = SecondMomentMode::AsPrinted;
        assert!(close(
            second_moment_lengths(2, 1, 1, dd, &s).unwrap(),
            8.0,
            1e-10
        ));
        assert!(close(
            second_moment_lengths(2, 1, 1, ap, &s).unwrap(),
            6.0,
            1e-10
        ));
        assert!(close(
            second_moment_lengths(3, 1, 1, dd, &s).unwrap(),
            33.0 / 4.0,
            1e-10
        ));
        assert!(close(
            second_moment_lengths(3, 1, 1, ap, &s).unwrap(),
            51.0 / 8.0,
            1e-10
        ));
        for mode in [dd, ap] {
            assert!(close(
                second_moment_lengths(3, 1, 2, mode, &s).unwrap(),
                21.0 / 8.0,
                1e-10
            ));
            assert!(close(
                second_moment_lengths(3, 2, 1, mode, &s).unwrap(),
                21.0 / 8.0,
                1e-10
            ));
        }
    }

    #[test]
    fn covariance_examples() {
        let s = spec();
        let q = PairQuery::new(2, 1.0, 1, 1).unwrap();
        assert!(close(
            cov_sfs(&q, SecondMomentMode::DiagonalDoubled, &s).unwrap(),
            6.0,
            1e-10
        ));
        assert!(close(
            cov_sfs(&q, SecondMomentMode::AsPrinted, &s).unwrap(),
            4.0,
            1e-10
        ));
        let q = PairQuery::new(3, 1.0, 1, 2).unwrap();
        assert!(close(
            cov_sfs(&q, SecondMomentMode::default(), &s).unwrap(),
            15.0 / 16.0,
            1e-10
        ));
        let swapped = PairQuery::new(3, 1.0, 2, 1).unwrap();
        assert_eq!(q, swapped);
    }

    #[test]
    fn interval_infinite_examples() {
        let s = spec();
        assert_eq!(
            expected_sfs_interval_infinite(0.4, 0.4, 1.0, &s).unwrap(),
            0.0
        );
        let a = expected_sfs_interval_infinite(0.3, 0.5, 1.0, &s).unwrap();
        let b = expected_sfs_interval_infinite(0.3, 0.7, 1.0, &s).unwrap();
        assert!(0.0 < a && a < b);
        assert!(expected_sfs_interval_infinite(0.0, 0.5, 1.0, &s).is_err());
        assert!(expected_sfs_interval_infinite(0.6, 0.5, 1.0, &s).is_err());
    }

    #[test]
    fn interval_index_ranges() {
        assert!(interval_indices(10, 0.95, 0.99).is_empty());
        assert_eq!(interval_indices(3, 0.2, 0.4), 1..=1);
        assert_eq!(interval_indices(10, 0.3, 0.6), 3..=6);
        let s = spec();
        assert_eq!(
            expected_sfs_interval_finite(10, 0.95, 0.99, 1.0, &s).unwrap(),
            0.0
        );
        assert!(close(
            expected_sfs_interval_finite(3, 0.2, 0.4, 1.0, &s).unwrap(),
            2.25,
            1e-12
        ));
    }

    #[test]
    fn pd_functional_examples() {
        let s = spec();
        for &alpha in &[0.1, 0.25, 0.5, 0.75, 0.9] {
            let r = pd_functional_mean(alpha, PdFunctional::Power(1), &s).unwrap();
            assert!(r.converged);
            assert!((r.value - 1.0).abs() < 1e-10, "alpha={alpha}: {}", r.value);
            let r = pd_functional_mean(alpha, PdFunctional::Power(2), &s).unwrap();
            assert!((r.value - (1.0 - alpha)).abs() < 1e-10);
        }
        let g = |u: f64| u * u;
        let r = pd_functional_mean(0.5, PdFunctional::Custom(&g), &s).unwrap();
        assert!((r.value - 0.5).abs() < 1e-10);
        assert!(pd_functional_mean(1.0, PdFunctional::Power(1), &s).is_err());
        assert!(pd_functional_mean(0.5, PdFunctional::Indicator(0.0, 0.5), &s).is_err());
    }

    #[test]
    fn pd_indicator_additive() {
        let s = spec();
        let a = pd_functional_mean(0.4, PdFunctional::Indicator(0.2, 0.5), &s)
            .unwrap()
            .value;
        let b = pd_functional_mean(0.4, PdFunctional::Indicator(0.5, 1.0), &s)
            .unwrap()
            .value;
        let c = pd_functional_mean(0.4, PdFunctional::Indicator(0.2, 1.0), &s)
            .unwrap()
            .value;
        assert!((a + b - c).abs() < 1e-10);
    }
}
