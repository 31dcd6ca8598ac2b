//! Poisson–Dirichlet `PD(α, 0)` samplers.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rep_rng;
use super::sfs::mean_and_se;
use crate::error::{Error, Result};

pub const DEFAULT_TRUNCATION_MASS: f64 = 1e-6;

/// Upper bound on the number of sticks drawn for one sample. For `α` close
/// to 1 the remaining mass decays like `k^{−(1−α)/α}`, so a cap is needed.
pub const DEFAULT_MAX_PARTS: usize = 10_000_000;

/// Stick cap used by the interval estimator, where `α` ranges over all of `(0, 1)`.
const INTERVAL_MAX_PARTS: usize = 100_000;

/// Frequencies in size-biased order plus the mass left unassigned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdSample {
    pub frequencies: Vec<f64>,
    pub remaining: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(
            "sample_pd",
            format!("alpha = {alpha} must lie in (0, 1)"),
        ))
    }
}

/// Stick-breaking sample of `PD(α, 0)`: `V_i ~ Beta(1 − α, iα)`,
/// `a_i = V_i ∏_{j<i} (1 − V_j)`, stopping once the remaining mass is
/// below `truncation_mass` or after [`DEFAULT_MAX_PARTS`] parts.
pub fn sample_pd(alpha: f64, truncation_mass: f64, seed: u64) -> Result<PdSample> {
    sample_pd_with(
        alpha,
        truncation_mass,
        DEFAULT_MAX_PARTS,
        &mut rep_rng(seed, 0),
    )
}

pub fn sample_pd_with<R: Rng + ?Sized>(
    alpha: f64,
    truncation_mass: f64,
    max_parts: usize,
    rng: &mut R,
) -> Result<PdSample> {
    check_alpha(alpha)?;
    if !(truncation_mass > 0.0 && truncation_mass < 1.0) {
        return Err(Error::domain(
            "sample_pd",
            format!("truncation_mass = {truncation_mass} must lie in (0, 1)"),
        ));
    }
    let mut frequencies = Vec::new();
    let mut remaining = 1.0;
    let mut i = 1.0;
    while remaining >= truncation_mass && frequencies.len() < max_parts {
        let v = Beta::new(1.0 - alpha, i * alpha)
            .expect("positive shape parameters")
            .sample(rng);
        frequencies.push(v * remaining);
        remaining *= 1.0 - v;
        i += 1.0;
    }
    Ok(PdSample {
        frequencies,
        remaining,
    })
}

/// Block sizes of a Chinese restaurant process with parameters `(α, 0)`
/// after `n` customers, in decreasing order.
pub fn sample_crp<R: Rng + ?Sized>(alpha: f64, n: usize, rng: &mut R) -> Result<Vec<usize>> {
    check_alpha(alpha)?;
    let mut tables: Vec<usize> = Vec::new();
    for k in 0..n {
        if k == 0 {
            tables.push(1);
            continue;
        }
        // New table with probability |tables| α / k, else table j with (n_j − α)/k.
        let x = rng.random::<f64>() * k as f64;
        let new_weight = tables.len() as f64 * alpha;
        if x < new_weight {
            tables.push(1);
        } else {
            let mut acc = new_weight;
            let mut chosen = tables.len() - 1;
            for (j, &size) in tables.iter().enumerate() {
                acc += size as f64 - alpha;
                if x < acc {
                    chosen = j;
                    break;
                }
            }
            tables[chosen] += 1;
        }
    }
    tables.sort_unstable_by(|a, b| b.cmp(a));
    Ok(tables)
}

/// Monte-Carlo estimate (mean, standard error) of the expected number of
/// mutations with frequency in `(x, y)` in the infinite coalescent.
///
/// Uses `E[SFS_I] = θ ∫_0^1 E_α[N_I] / α dα`, where `N_I` counts the parts
/// of a `PD(α, 0)` sample inside `I`. Drawing `α = U²` gives the unbiased,
/// finite-variance estimator `2 θ N_I / U`. Truncating the sticks once the
/// remaining mass drops below `x` loses no part inside `I`. For `α` near 1
/// the stick cap may stop earlier; the parts left over are then tiny and
/// almost never fall in `I`.
pub fn mc_interval_sfs_infinite(
    x: f64,
    y: f64,
    theta: f64,
    reps: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if !(x > 0.0 && x < y && y < 1.0) {
        return Err(Error::domain(
            "mc_interval_sfs_infinite",
            format!("interval ({x}, {y}) is invalid"),
        ));
    }
    let draws: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rep_rng(seed, i);
            let u: f64 = 1.0 - rng.random::<f64>();
            let alpha = u * u;
            if alpha >= 1.0 {
                return Ok(0.0);
            }
            let s = sample_pd_with(alpha, x, INTERVAL_MAX_PARTS, &mut rng)?;
            let count = s.frequencies.iter().filter(|&&a| a > x && a < y).count() as f64;
            Ok(2.0 * theta * count / u)
        })
        .collect::<Result<_>>()?;
    Ok(mean_and_se(draws.into_iter()))
}
