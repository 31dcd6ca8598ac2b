//! Monte-Carlo branch lengths and site frequency spectra.

use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rep_rng;
use super::tree::{branch_lengths, sample_tree_with};
use crate::error::{Error, Result};

/// One replicate: `lengths[b − 1] = ℓ_{n,b}` and `sfs[b − 1] = SFS_{n,b}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepSample {
    pub lengths: Vec<f64>,
    pub sfs: Vec<u64>,
    pub absorption_time: f64,
}

/// Simulates `reps` independent coalescent trees and, per family size, a
/// Poisson(`θ ℓ_{n,b}`) mutation count. Replicate `i` uses the stream
/// `rep_rng(seed, i)`, so the output does not depend on scheduling.
pub fn simulate_lengths_and_sfs(
    n: usize,
    theta: f64,
    reps: usize,
    seed: u64,
) -> Result<Vec<RepSample>> {
    if n < 2 {
        return Err(Error::domain(
            "simulate",
            format!("n = {n} must be at least 2"),
        ));
    }
    if reps < 1 {
        return Err(Error::domain("simulate", "reps must be at least 1"));
    }
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::domain(
            "simulate",
            format!("theta = {theta} must be nonnegative"),
        ));
    }
    Ok((0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rep_rng(seed, i);
            let tree = sample_tree_with(n, &mut rng);
            let lengths = branch_lengths(&tree);
            let absorption_time = super::tree::absorption_time(&tree);
            let sfs = lengths
                .iter()
                .map(|&l| {
                    let lambda = theta * l;
                    if lambda > 0.0 {
                        Poisson::new(lambda)
                            .expect("positive finite rate")
                            .sample(&mut rng) as u64
                    } else {
                        0
                    }
                })
                .collect();
            RepSample {
                lengths,
                sfs,
                absorption_time,
            }
        })
        .collect())
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(xs: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.clone().sum::<f64>() / k;
    if k < 2.0 {
        return (mean, f64::NAN);
    }
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Per-family-size means and standard errors over a set of replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub reps: usize,
    pub mean_length: Vec<f64>,
    pub se_length: Vec<f64>,
    pub mean_sfs: Vec<f64>,
    pub se_sfs: Vec<f64>,
}

impl SimulationSummary {
    pub fn from_samples(samples: &[RepSample]) -> Self {
        let width = samples.first().map_or(0, |s| s.lengths.len());
        let mut out = Self {
            reps: samples.len(),
            mean_length: Vec::with_capacity(width),
            se_length: Vec::with_capacity(width),
            mean_sfs: Vec::with_capacity(width),
            se_sfs: Vec::with_capacity(width),
        };
        for b in 0..width {
            let (m, s) = mean_and_se(samples.iter().map(|r| r.lengths[b]));
            out.mean_length.push(m);
            out.se_length.push(s);
            let (m, s) = mean_and_se(samples.iter().map(|r| r.sfs[b] as f64));
            out.mean_sfs.push(m);
            out.se_sfs.push(s);
        }
        out
    }

    /// Empirical `P(ℓ_{n,b} > s)` and its binomial standard error.
    pub fn survival(samples: &[RepSample], b: usize, s: f64) -> (f64, f64) {
        let k = samples.len() as f64;
        let hits = samples.iter().filter(|r| r.lengths[b - 1] > s).count() as f64;
        let p = hits / k;
        (p, (p * (1.0 - p) / k).sqrt())
    }
}
