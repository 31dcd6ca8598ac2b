//! Distribution functions: survival of `ℓ_{n,b}` for large families
//! (`b > n/2`), its conditional limit law, the joint law of the large-family
//! lengths along a merge chain, and the root-edge laws of the random
//! recursive tree, which include the absorption-time distribution.

use serde::{Deserialize, Serialize};

use crate::approx::{g_limit, log_odds};
use crate::error::{Error, Result};
use crate::quad::{integrate_1d, QuadratureSpec};
use crate::specfun::{digamma_diff_raw, lbeta, DIGAMMA_DIFF_CROSSOVER};

fn check_s(op: &'static str, s: f64) -> Result<()> {
    if s >= 0.0 && !s.is_nan() {
        Ok(())
    } else {
        Err(Error::domain(op, format!("s = {s} must be nonnegative")))
    }
}

fn check_large(op: &'static str, n: u64, b: u64) -> Result<()> {
    if n < 3 || 2 * b <= n || b >= n {
        return Err(Error::domain(
            op,
            format!("b = {b} must satisfy n/2 < b < n for n = {n}"),
        ));
    }
    Ok(())
}

/// `1 / Be(x, y)`, zero when `y` underflows to zero.
#[inline]
fn inv_beta(x: f64, y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        (-lbeta(x, y)).exp()
    }
}

#[inline]
fn dd(b: u64, p: f64) -> f64 {
    digamma_diff_raw(b, p, DIGAMMA_DIFF_CROSSOVER)
}

/// `P(ℓ_{n,b} > s)` for `n/2 < b < n`:
/// `n/((n−b) b (b−1)) ∫ (Ψ(b−p) − Ψ(1−p)) / (Be(n−b, e^{−s}p) Be(b−1, 1−p)) dp`.
pub fn surv_length_large_family(n: u64, b: u64, s: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_large("surv_length_large_family", n, b)?;
    check_s("surv_length_large_family", s)?;
    let (nf, bf) = (n as f64, b as f64);
    let decay = (-s).exp();
    let m = nf - bf;
    let r = integrate_1d(
        |p| dd(b, p) * inv_beta(m, decay * p) * inv_beta(bf - 1.0, 1.0 - p),
        spec,
    )?
    .require("surv_length_large_family")?;
    Ok(nf / (m * bf * (bf - 1.0)) * r)
}

/// Limit of `P((ln n) ℓ_{n,b} > s | ℓ_{n,b} > 0)` as `b/n → u`: `G(α − s)/G(α)`
/// with `α = ln((1−u)/u)`.
pub fn limit_conditional_surv(u: f64, s: f64) -> Result<f64> {
    if !(0.5..1.0).contains(&u) {
        return Err(Error::domain(
            "limit_conditional_surv",
            format!("u = {u} must lie in [1/2, 1)"),
        ));
    }
    check_s("limit_conditional_surv", s)?;
    let alpha = log_odds(u);
    Ok(g_limit(alpha - s) / g_limit(alpha))
}

/// `(n P(ℓ_{n,b} > 0) / ln n, G(α)/(u(1−u)))` with `u = b/n`; the first
/// component converges to the second.
pub fn prob_block_scaling(n: u64, b: u64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    check_large("prob_block_scaling", n, b)?;
    let nf = n as f64;
    let exact = nf * surv_length_large_family(n, b, 0.0, spec)? / nf.ln();
    let u = b as f64 / nf;
    let limit = g_limit(log_odds(u)) / (u * (1.0 - u));
    Ok((exact, limit))
}

/// Root-edge statistics of a random recursive tree with exponential edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootEdgeLaw {
    /// Survival `P(m(T) > s)` of the smallest root edge.
    Min,
    /// Distribution function `P(M(T) <= s)` of the largest root edge, which
    /// is also the absorption-time distribution of the `n`-coalescent.
    Max,
    /// Survival `P(m(T2) − M(T1) > s)` for independent trees of sizes `n1`, `n2`.
    Gap { n1: u64, n2: u64 },
}

/// Evaluates one of the root-edge laws at `s`. For [`RootEdgeLaw::Gap`] the
/// tree sizes come from the variant and `n` is only range-checked.
pub fn root_edge_laws(n: u64, s: f64, which: RootEdgeLaw, spec: &QuadratureSpec) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(
            "root_edge_laws",
            format!("n = {n} must be at least 2"),
        ));
    }
    check_s("root_edge_laws", s)?;
    let m = (n - 1) as f64;
    match which {
        RootEdgeLaw::Min => Ok(inv_beta(m, (-s).exp()) / m),
        RootEdgeLaw::Max => Ok(inv_beta(m, -(-s).exp_m1()) / m),
        RootEdgeLaw::Gap { n1, n2 } => {
            if n1 < 2 || n2 < 2 {
                return Err(Error::domain(
                    "root_edge_laws",
                    "gap law requires n1, n2 >= 2",
                ));
            }
            let (m1, m2) = ((n1 - 1) as f64, (n2 - 1) as f64);
            let decay = (-s).exp();
            let r = integrate_1d(
                |p| dd(n1, p) * inv_beta(m2, decay * p) * inv_beta(m1, 1.0 - p),
                spec,
            )?
            .require("root_edge_laws")?;
            Ok(r / (m1 * m2))
        }
    }
}

/// `P(A_n <= s)` for the absorption time `A_n`.
pub fn absorption_cdf(n: u64, s: f64) -> Result<f64> {
    root_edge_laws(n, s, RootEdgeLaw::Max, &QuadratureSpec::default())
}

/// A chain of large family sizes `n/2 < b1 < … < bm < n` with thresholds `s_i >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeFamilyChain {
    pub n: u64,
    pub b: Vec<u64>,
    pub s: Vec<f64>,
}

impl LargeFamilyChain {
    pub fn new(n: u64, b: Vec<u64>, s: Vec<f64>) -> Result<Self> {
        let c = Self { n, b, s };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        const OP: &str = "large family chain";
        if self.b.is_empty() {
            return Err(Error::domain(OP, "chain must not be empty"));
        }
        if self.b.len() != self.s.len() {
            return Err(Error::domain(
                OP,
                format!("{} sizes but {} thresholds", self.b.len(), self.s.len()),
            ));
        }
        check_large(OP, self.n, self.b[0])?;
        if self.b.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain(
                OP,
                format!("sizes {:?} must be strictly increasing", self.b),
            ));
        }
        if *self.b.last().unwrap() >= self.n {
            return Err(Error::domain(OP, "largest size must be below n"));
        }
        for &s in &self.s {
            check_s(OP, s)?;
        }
        Ok(())
    }

    /// `⟨(m, m−1, …, 1), s⟩`.
    fn weighted_time(&self) -> f64 {
        let m = self.s.len();
        self.s
            .iter()
            .enumerate()
            .map(|(i, s)| (m - i) as f64 * s)
            .sum()
    }

    /// `(b2 − b1)(b3 − b2) ⋯ (n − bm)`.
    fn increments(&self) -> f64 {
        let mut prod = 1.0;
        for w in self.b.windows(2) {
            prod *= (w[1] - w[0]) as f64;
        }
        prod * (self.n - self.b.last().unwrap()) as f64
    }
}

/// Normalisation of the joint law.
///
/// The closed form, re-derived from the distribution of the largest root
/// edge of a tree of size `b1`, carries a factor `1/(b1 − 1)` (and `1/(b − 1)`
/// inside the subtracted sum of the minimal variant). Only the corrected
/// version makes the chain probabilities add up to `P(ℓ_{n,b1} > 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum JointNormalization {
    #[default]
    Corrected,
    /// The formula without the `1/(b − 1)` factors.
    AsPrinted,
}

/// `P(Λ_{b,s})`: a block of size `b1` lives longer than `s1`, then merges
/// into a block of size exactly `b2` that lives longer than `s2`, and so on
/// until the last block merges into the full sample.
///
/// With `minimal = true` the event additionally requires that no block of
/// any size in `(n/2, b1)` ever exists.
pub fn joint_large_family(
    chain: &LargeFamilyChain,
    minimal: bool,
    normalization: JointNormalization,
    spec: &QuadratureSpec,
) -> Result<f64> {
    chain.validate()?;
    let n = chain.n;
    let b1 = chain.b[0];
    let m = chain.b.len() as i32;
    let mut factorial = 1.0;
    for k in 2..=m {
        factorial *= k as f64;
    }
    let prefactor = n as f64 / chain.increments() * (-chain.weighted_time()).exp() / factorial;
    let norm = |b: u64| match normalization {
        JointNormalization::Corrected => (b * (b - 1)) as f64,
        JointNormalization::AsPrinted => b as f64,
    };
    let kernel = |b: u64, p: f64| dd(b, p) * inv_beta((b - 1) as f64, 1.0 - p);
    let lower: Vec<u64> = if minimal {
        (n / 2 + 1..b1).collect()
    } else {
        Vec::new()
    };
    let norm_b1 = norm(b1);
    let r = integrate_1d(
        |p| {
            let mut v = p.powi(m) * kernel(b1, p) / norm_b1;
            if !lower.is_empty() {
                let mut sub = 0.0;
                for &b in &lower {
                    sub += kernel(b, p) / (norm(b) * (b1 - b) as f64);
                }
                v -= p.powi(m + 1) / (m + 1) as f64 * sub;
            }
            v
        },
        spec,
    )?
    .require("joint_large_family")?;
    Ok(prefactor * r)
}

/// Every admissible chain that starts at `b1`: `b1` followed by any
/// increasing subset of `b1+1 .. n−1`.
pub fn admissible_chains(n: u64, b1: u64) -> Vec<Vec<u64>> {
    let rest: Vec<u64> = (b1 + 1..n).collect();
    let mut out = Vec::with_capacity(1 << rest.len());
    for mask in 0u64..(1 << rest.len()) {
        let mut c = vec![b1];
        c.extend(
            rest.iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &b)| b),
        );
        out.push(c);
    }
    out
}

/// `Σ P(Λ_{b,0})` over all chains starting at `b1`; equals `P(ℓ_{n,b1} > 0)`
/// under the corrected normalisation.
pub fn chain_sum(
    n: u64,
    b1: u64,
    normalization: JointNormalization,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_large("chain_sum", n, b1)?;
    let mut total = 0.0;
    for c in admissible_chains(n, b1) {
        let s = vec![0.0; c.len()];
        total += joint_large_family(&LargeFamilyChain::new(n, c, s)?, false, normalization, spec)?;
    }
    Ok(total)
}
