//! Acceptance checks shared by the `bsfs validate` command and the
//! acceptance test target. Each criterion returns a [`CriterionReport`]
//! listing every individual comparison, so failures can be traced to a
//! single `(n, b, s)` point.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{
    approx_sfs, asymptotic_sfs, g1, g1_integral, g_limit, g_limit_quadrature, ApproxVariant, Regime,
};
use crate::dist::{
    absorption_cdf, chain_sum, joint_large_family, prob_block_scaling, surv_length_large_family,
    JointNormalization, LargeFamilyChain,
};
use crate::error::Result;
use crate::moments::{
    expected_length, expected_sfs_all, pd_functional_mean, second_moment_lengths, PdFunctional,
    SecondMomentMode,
};
use crate::quad::{integrate_square, integrate_triangle, QuadratureSpec};
use crate::simulate::{
    absorption_time, mean_and_se, rep_rng, sample_pd_with, sample_tree_with,
    simulate_lengths_and_sfs, OracleModel, SimulationSummary, MAX_ORACLE_N,
};
use crate::specfun::{lgamma, sin_pi};

/// Knobs for a validation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationConfig {
    /// Largest `n` compared against the exact Markov chain in criteria 1 and 2.
    pub max_n: usize,
    /// Replicates per sample size in the Monte-Carlo concordance check.
    pub reps: usize,
    /// Replicates per `α` in the Poisson–Dirichlet check.
    pub pd_reps: usize,
    /// Trees of size `10^4` drawn for the absorption-time limit.
    pub absorption_reps: usize,
    pub seed: u64,
    pub spec: QuadratureSpec,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            max_n: 7,
            reps: 100_000,
            pd_reps: 20_000,
            absorption_reps: 20_000,
            seed: 0,
            spec: QuadratureSpec::default(),
        }
    }
}

/// Whether a check counts toward the verdict or is recorded for information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckKind {
    Assert,
    Info,
}

/// One comparison: `discrepancy` is measured in the units of `tolerance`
/// (relative error, absolute error, or standard errors, as the label says).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub reference: f64,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub kind: CheckKind,
    pub passed: bool,
}

impl Check {
    fn new(label: String, value: f64, reference: f64, discrepancy: f64, tolerance: f64) -> Self {
        let passed = discrepancy <= tolerance;
        Self {
            label,
            value,
            reference,
            discrepancy,
            tolerance,
            kind: CheckKind::Assert,
            passed,
        }
    }

    fn relative(label: String, value: f64, reference: f64, tolerance: f64) -> Self {
        Self::new(
            label,
            value,
            reference,
            rel_err(value, reference),
            tolerance,
        )
    }

    fn absolute(label: String, value: f64, reference: f64, tolerance: f64) -> Self {
        Self::new(
            label,
            value,
            reference,
            (value - reference).abs(),
            tolerance,
        )
    }

    /// `|value − reference|` in units of `se`.
    fn within_se(label: String, value: f64, reference: f64, se: f64, k: f64) -> Self {
        let d = if se > 0.0 {
            (value - reference).abs() / se
        } else if value == reference {
            0.0
        } else {
            f64::INFINITY
        };
        Self::new(label, value, reference, d, k)
    }

    fn info(mut self) -> Self {
        self.kind = CheckKind::Info;
        self.passed = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub checks: Vec<Check>,
}

impl CriterionReport {
    fn new(id: u8, name: &str) -> Self {
        Self {
            id,
            name: name.to_owned(),
            checks: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Largest discrepancy-to-tolerance ratio among asserted checks.
    pub fn worst(&self) -> Option<&Check> {
        self.checks
            .iter()
            .filter(|c| c.kind == CheckKind::Assert)
            .max_by(|a, b| (a.discrepancy / a.tolerance).total_cmp(&(b.discrepancy / b.tolerance)))
    }

    /// One line: `criterion 3 PASS approximation error bounds (2340 checks, worst ...)`.
    pub fn summary_line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let asserted = self
            .checks
            .iter()
            .filter(|c| c.kind == CheckKind::Assert)
            .count();
        let failed = self.failures().count();
        let worst = self
            .worst()
            .map(|c| {
                format!(
                    ", worst {} at {:.3e} (tol {:.1e})",
                    c.label, c.discrepancy, c.tolerance
                )
            })
            .unwrap_or_default();
        format!(
            "criterion {:>2} {verdict} {} ({asserted} checks, {failed} failed{worst})",
            self.id, self.name
        )
    }
}

fn rel_err(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        value.abs()
    } else {
        ((value - reference) / reference).abs()
    }
}

/// Ids accepted by [`run_criterion`].
pub const CRITERIA: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

pub fn run_criterion(id: u8, cfg: &ValidationConfig) -> Result<CriterionReport> {
    match id {
        1 => oracle_means(cfg),
        2 => oracle_second_moments(cfg),
        3 => approximation_bounds(cfg),
        4 => figure_one(cfg),
        5 => distribution_anchors(cfg),
        6 => monte_carlo_concordance(cfg),
        7 => asymptotic_regimes(cfg),
        8 => identities(cfg),
        9 => poisson_dirichlet(cfg),
        10 => absorption_law(cfg),
        _ => Err(crate::Error::InvalidSpec(format!("unknown criterion {id}"))),
    }
}

pub fn run_all(cfg: &ValidationConfig) -> Result<Vec<CriterionReport>> {
    CRITERIA.iter().map(|&id| run_criterion(id, cfg)).collect()
}

fn oracle_sizes(cfg: &ValidationConfig) -> std::ops::RangeInclusive<usize> {
    2..=cfg.max_n.clamp(2, MAX_ORACLE_N)
}

/// Expected SFS from the moment integrals against the partition chain.
pub fn oracle_means(cfg: &ValidationConfig) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(1, "expected SFS equals the exact Markov chain");
    for n in oracle_sizes(cfg) {
        let oracle = OracleModel::new(n)?;
        for &theta in &[1.0, 2.5] {
            let exact = expected_sfs_all(n as u64, theta, &cfg.spec)?;
            for b in 1..n {
                let o = oracle.mean_sfs(b, theta)?;
                r.checks.push(Check::relative(
                    format!("n={n} b={b} theta={theta}"),
                    exact[b - 1],
                    o,
                    1e-8,
                ));
            }
        }
    }
    for (n, b, v) in [(2, 1, 2.0), (3, 1, 2.25), (3, 2, 0.75)] {
        r.checks.push(Check::relative(
            format!("anchor E[l_{{{n},{b}}}]"),
            expected_length(n, b, &cfg.spec)?,
            v,
            1e-8,
        ));
    }
    Ok(r)
}

/// `E[ℓ_{n,b1} ℓ_{n,b2}]` in diagonal-doubled mode against the chain; the
/// as-printed diagonal gap is recorded for information.
pub fn oracle_second_moments(cfg: &ValidationConfig) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(2, "second moments equal the exact Markov chain");
    for n in oracle_sizes(cfg) {
        let oracle = OracleModel::new(n)?;
        for b1 in 1..n {
            for b2 in b1..n {
                let o = oracle.cross_moment(b1, b2)?;
                let (nu, b1u, b2u) = (n as u64, b1 as u64, b2 as u64);
                let doubled = second_moment_lengths(
                    nu,
                    b1u,
                    b2u,
                    SecondMomentMode::DiagonalDoubled,
                    &cfg.spec,
                )?;
                r.checks.push(Check::relative(
                    format!("n={n} b1={b1} b2={b2}"),
                    doubled,
                    o,
                    1e-8,
                ));
                if b1 == b2 {
                    let printed = second_moment_lengths(
                        nu,
                        b1u,
                        b2u,
                        SecondMomentMode::AsPrinted,
                        &cfg.spec,
                    )?;
                    r.checks.push(
                        Check::relative(format!("as printed n={n} b={b1}"), printed, o, 1e-8)
                            .info(),
                    );
                }
            }
        }
    }
    Ok(r)
}

fn exact_grid(
    ns: impl IntoParallelIterator<Item = u64>,
    spec: &QuadratureSpec,
) -> Result<Vec<(u64, Vec<f64>)>> {
    ns.into_par_iter()
        .map(|n| Ok((n, expected_sfs_all(n, 1.0, spec)?)))
        .collect()
}

/// Relative errors of the basic and refined approximations on `n ∈ 8..=200`.
pub fn approximation_bounds(cfg: &ValidationConfig) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(3, "approximation error bounds");
    for (n, exact) in exact_grid(8..=200u64, &cfg.spec)? {
        for b in 2..n {
            let e = exact[b as usize - 1];
            let basic = approx_sfs(n, b, 1.0, ApproxVariant::Basic, &cfg.spec)?;
            r.checks.push(Check::relative(
                format!("basic n={n} b={b}"),
                basic,
                e,
                0.10,
            ));
            if n < 10 {
                continue;
            }
            let refined = approx_sfs(n, b, 1.0, ApproxVariant::Refined, &cfg.spec)?;
            let tol = match (b, n) {
                (2, 150..) => 0.005,
                (2, _) => 0.01,
                _ => 0.003,
            };
            r.checks.push(Check::relative(
                format!("refined n={n} b={b}"),
                refined,
                e,
                tol,
            ));
        }
    }
    Ok(r)
}

/// Refined approximation at the three sample sizes of the first figure.
pub fn figure_one(cfg: &ValidationConfig) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(4, "refined approximation at n = 5, 20, 35");
    for (n, exact) in exact_grid(vec![5u64, 20, 35], &cfg.spec)? {
        let tol = if n == 5 { 0.10 } else { 0.01 };
        for b in 2..n {
            let refined = approx_sfs(n, b, 1.0, ApproxVariant::Refined, &cfg.spec)?;
            r.checks.push(Check::relative(
                format!("n={n} b={b}"),
                refined,
                exact[b as usize - 1],
                tol,
            ));
        }
    }
    Ok(r)
}

pub fn distribution_anchors(cfg: &ValidationConfig) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(5, "distribution anchors");
    for &s in &[0.0, 0.5, 1.0, 2.0] {
        let v = surv_length_large_family(3, 2, s, &cfg.spec)?;
        r.checks.push(Check::absolute(
            format!("P(l_{{3,2}} > {s})"),
            v,
            0.75 * (-s).exp(),
            1e-10,
        ));
    }
    let chain = LargeFamilyChain::new(3, vec![2], vec![0.0])?;
    let v = joint_large_family(&chain, false, JointNormalization::Corrected, &cfg.spec)?;
    r.checks.push(Check::absolute(
        "joint n=3 chain (2) s=(0)".into(),
        v,
        0.75,
        1e-10,
    ));
    for n in 3..=12u64 {
        for b1 in n / 2 + 1..n {
            let total = chain_sum(n, b1, JointNormalization::Corrected, &cfg.spec)?;
            let surv = surv_length_large_family(n, b1, 0.0, &cfg.spec)?;
            r.checks.push(Check::absolute(
                format!("chain sum n={n} b1={b1}"),
                total,
                surv,
                1e-9,
            ));
        }
    }
    Ok(r)
}

/// Simulated lengths, SFS and large-family survival against exact values.
pub fn monte_carlo_concordance(cfg: &ValidationConfig) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(6, "Monte-Carlo concordance");
    let theta = 1.0;
    for (k, &n) in [6usize, 12, 25].iter().enumerate() {
        let samples =
            simulate_lengths_and_sfs(n, theta, cfg.reps, cfg.seed.wrapping_add(k as u64))?;
        let summary = SimulationSummary::from_samples(&samples);
        let exact = expected_sfs_all(n as u64, theta, &cfg.spec)?;
        for b in 1..n {
            let e = exact[b - 1];
            r.checks.push(Check::within_se(
                format!("mean l n={n} b={b}"),
                summary.mean_length[b - 1],
                e / theta,
                summary.se_length[b - 1],
                3.0,
            ));
            r.checks.push(Check::within_se(
                format!("mean SFS n={n} b={b}"),
                summary.mean_sfs[b - 1],
                e,
                summary.se_sfs[b - 1],
                3.0,
            ));
        }
        let b = (3 * n).div_ceil(5);
        for &s in &[0.0, 0.1, 0.5, 1.0] {
            let (p, se) = SimulationSummary::survival(&samples, b, s);
            let exact = surv_length_large_family(n as u64, b as u64, s, &cfg.spec)?;
            r.checks.push(Check::within_se(
                format!("P(l_{{{n},{b}}} > {s})"),
                p,
                exact,
                se,
                3.0,
            ));
        }
    }
    Ok(r)
}

/// Regime index used for the trend check at sample size `n`.
fn regime_index(regime: Regime, n: u64) -> u64 {
    match regime {
        Regime::Singleton => 1,
        Regime::SmallB => 2,
        Regime::Proportional => n / 2,
        Regime::LargeB => n - 2,
    }
}

/// Pushes a monotone-approach check and a final-gap check for a ratio sequence.
fn push_trend(r: &mut CriterionReport, name: &str, ns: &[u64], ratios: &[f64]) {
    for (&n, &q) in ns.iter().zip(ratios) {
        r.checks
            .push(Check::absolute(format!("{name} ratio at n={n}"), q, 1.0, f64::INFINITY).info());
    }
    let gaps: Vec<f64> = ratios.iter().map(|q| (q - 1.0).abs()).collect();
    let worst_step = gaps
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    r.checks.push(Check::new(
        format!("{name} gap to 1 shrinks"),
        worst_step,
        0.0,
        worst_step,
        0.0,
    ));
    let last = *gaps.last().expect("nonempty");
    r.checks.push(Check::new(
        format!("{name} final gap"),
        ratios[ratios.len() - 1],
        1.0,
        last,
        0.20,
    ));
}

pub fn asymptotic_regimes(cfg: &ValidationConfig) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(7, "asymptotic regimes");
    let ns = [1_000u64, 10_000, 100_000];
    for regime in [
        Regime::Singleton,
        Regime::SmallB,
        Regime::Proportional,
        Regime::LargeB,
    ] {
        let ratios = ns
            .par_iter()
            .map(|&n| {
                let b = regime_index(regime, n);
                let exact = expected_length(n, b, &cfg.spec)?;
                Ok(exact / asymptotic_sfs(n, b, 1.0, regime, &cfg.spec)?)
            })
            .collect::<Result<Vec<_>>>()?;
        push_trend(&mut r, &format!("{regime:?}"), &ns, &ratios);
    }
    let ratios = ns
        .par_iter()
        .map(|&n| {
            let (exact, limit) = prob_block_scaling(n, 3 * n / 4, &cfg.spec)?;
            Ok(exact / limit)
        })
        .collect::<Result<Vec<_>>>()?;
    push_trend(&mut r, "block probability u=3/4", &ns, &ratios);
    Ok(r)
}

pub fn identities(cfg: &ValidationConfig) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(8, "identity suite");
    for i in 1..20 {
        let x = i as f64 / 20.0;
        let lhs = lgamma(x) + lgamma(1.0 - x);
        r.checks.push(Check::absolute(
            format!("reflection x={x}"),
            lhs,
            (PI / sin_pi(x)).ln(),
            1e-9,
        ));
    }
    for &x in &[-30.0, -5.0, -1.0, 0.0, 0.5, 2.0, 10.0, 40.0] {
        r.checks.push(Check::relative(
            format!("G({x})"),
            g_limit_quadrature(x, &cfg.spec)?,
            g_limit(x),
            1e-9,
        ));
    }
    for &u in &[0.05, 0.2, 0.5, 0.7, 0.95] {
        r.checks.push(Check::relative(
            format!("g1({u})"),
            g1_integral(u, &cfg.spec)?,
            g1(u)?,
            1e-9,
        ));
    }
    type Kernel = fn(f64, f64) -> f64;
    let kernels: [(&str, Kernel); 3] = [
        ("polynomial", |x, y| 1.0 + x * y * y + 3.0 * x * x),
        ("exponential", |x, y| (x - 2.0 * y).exp()),
        ("log-singular", |x, y| ((x + y) / 2.0).ln() * x.sqrt()),
    ];
    for (name, f) in kernels {
        let lower = integrate_triangle(&f, &cfg.spec)?.require("triangle")?;
        let upper = integrate_triangle(|p1, p2| f(p2, p1), &cfg.spec)?.require("triangle")?;
        let square = integrate_square(f, &cfg.spec)?.require("square")?;
        r.checks.push(Check::relative(
            format!("triangle+swap {name}"),
            lower + upper,
            square,
            1e-9,
        ));
    }
    Ok(r)
}

/// Stick truncation per `α`: the stick count grows like `R^{−α/(1−α)}`.
fn pd_truncation(alpha: f64) -> f64 {
    if alpha > 0.7 {
        0.1
    } else {
        0.01
    }
}

/// `Σ a_i²` of one truncated stick-breaking draw plus the expected
/// contribution of the unsampled tail. After `k` sticks with remaining mass
/// `R`, the tail is `R` times a `PD(α, kα)` sample, whose mean sum of
/// squares is `(1 − α)/(1 + kα)`; adding it keeps the estimator unbiased.
fn pd_sum_of_squares(alpha: f64, truncation: f64, seed: u64, rep: u64) -> Result<f64> {
    let s = sample_pd_with(alpha, truncation, usize::MAX, &mut rep_rng(seed, rep))?;
    let k = s.frequencies.len() as f64;
    let head: f64 = s.frequencies.iter().map(|a| a * a).sum();
    Ok(head + s.remaining * s.remaining * (1.0 - alpha) / (1.0 + k * alpha))
}

pub fn poisson_dirichlet(cfg: &ValidationConfig) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(9, "Poisson-Dirichlet checks");
    for (k, &alpha) in [0.25, 0.5, 0.75].iter().enumerate() {
        let trunc = pd_truncation(alpha);
        let seed = cfg.seed.wrapping_add(100 + k as u64);
        let draws = (0..cfg.pd_reps as u64)
            .into_par_iter()
            .map(|i| pd_sum_of_squares(alpha, trunc, seed, i))
            .collect::<Result<Vec<_>>>()?;
        let (mean, se) = mean_and_se(draws.into_iter());
        r.checks.push(Check::within_se(
            format!("sum a^2 alpha={alpha}"),
            mean,
            1.0 - alpha,
            se,
            3.0,
        ));
        let m = pd_functional_mean(alpha, PdFunctional::Power(1), &cfg.spec)?
            .require("pd_functional_mean")?;
        r.checks.push(Check::absolute(
            format!("E sum a alpha={alpha}"),
            m,
            1.0,
            1e-10,
        ));
    }
    Ok(r)
}

pub fn absorption_law(cfg: &ValidationConfig) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(10, "absorption law");
    for n in 2..=MAX_ORACLE_N {
        let oracle = OracleModel::new(n)?;
        for &s in &[0.05, 0.3, 1.0, 2.5, 6.0] {
            let closed = absorption_cdf(n as u64, s)?;
            r.checks.push(Check::absolute(
                format!("P(A_{n} <= {s})"),
                oracle.absorption_cdf(s),
                closed,
                1e-9,
            ));
        }
    }
    let n = 10_000usize;
    let shift = (n as f64).ln().ln();
    let mut centred: Vec<f64> = (0..cfg.absorption_reps as u64)
        .into_par_iter()
        .map(|i| {
            absorption_time(&sample_tree_with(
                n,
                &mut rep_rng(cfg.seed.wrapping_add(200), i),
            )) - shift
        })
        .collect();
    centred.sort_by(f64::total_cmp);
    let k = centred.len() as f64;
    for &q in &[0.25, 0.5, 0.75] {
        let x = -(-f64::ln(q)).ln();
        let empirical = centred.partition_point(|&v| v <= x) as f64 / k;
        r.checks.push(Check::absolute(
            format!("Gumbel CDF at quartile {q}"),
            empirical,
            q,
            0.05,
        ));
    }
    Ok(r)
}
