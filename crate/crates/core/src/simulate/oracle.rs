//! Exact Markov chain of block sizes for small samples.
//!
//! By exchangeability the block-size configuration of the `n`-coalescent is
//! itself Markov. Its states are the integer partitions of `n`. When `m`
//! blocks are present, any `k` of them merge at rate
//! `λ_{m,k} = (k−2)! (m−k)! / (m−1)!`. Branch-length moments are
//! phase-type reward moments of the transient sub-generator.

use nalgebra::{DMatrix, DVector};

use crate::dist::{root_edge_laws, RootEdgeLaw};
use crate::error::{Error, Result};
use crate::quad::QuadratureSpec;

/// Largest sample size the oracle accepts.
pub const MAX_ORACLE_N: usize = 9;

/// Integer partitions of `n` with parts in decreasing order.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for k in (1..=n.min(max)).rev() {
            prefix.push(k);
            rec(n - k, k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Rate at which a specific set of `k` out of `m` blocks merges.
fn merger_rate(m: usize, k: usize) -> f64 {
    factorial(k - 2) * factorial(m - k) / factorial(m - 1)
}

/// The lumped chain on block-size configurations.
#[derive(Debug, Clone)]
pub struct OracleModel {
    n: usize,
    states: Vec<Vec<usize>>,
    generator: DMatrix<f64>,
    /// Indices of transient states, in `states` order.
    transient: Vec<usize>,
    start: usize,
    /// `(−Q_T)^{-1}` on the transient states.
    green: DMatrix<f64>,
}

impl OracleModel {
    /// Builds the chain and checks its absorption-time law against the
    /// closed form for the largest root edge. No value is available unless
    /// that check passes to `1e-9`.
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=MAX_ORACLE_N).contains(&n) {
            return Err(Error::domain(
                "oracle",
                format!("n = {n} must lie in [2, {MAX_ORACLE_N}]"),
            ));
        }
        let model = Self::build(n);
        model.gate()?;
        Ok(model)
    }

    fn build(n: usize) -> Self {
        let states = partitions(n);
        let index = |s: &Vec<usize>| states.iter().position(|t| t == s).expect("partition");
        let size = states.len();
        let mut q = DMatrix::zeros(size, size);
        for (i, s) in states.iter().enumerate() {
            let m = s.len();
            if m == 1 {
                continue;
            }
            // Distinct sizes with multiplicities.
            let mut classes: Vec<(usize, usize)> = Vec::new();
            for &z in s {
                match classes.last_mut() {
                    Some((v, c)) if *v == z => *c += 1,
                    _ => classes.push((z, 1)),
                }
            }
            let mut picks = vec![0usize; classes.len()];
            loop {
                let k: usize = picks.iter().sum();
                if k >= 2 {
                    let mut ways = 1.0;
                    let mut merged = 0;
                    let mut rest = Vec::new();
                    for (&(z, c), &j) in classes.iter().zip(&picks) {
                        ways *= binomial(c, j);
                        merged += z * j;
                        rest.extend(std::iter::repeat_n(z, c - j));
                    }
                    rest.push(merged);
                    rest.sort_unstable_by(|a, b| b.cmp(a));
                    let j = index(&rest);
                    q[(i, j)] += merger_rate(m, k) * ways;
                }
                // Next multi-index.
                let mut pos = 0;
                loop {
                    if pos == picks.len() {
                        break;
                    }
                    if picks[pos] < classes[pos].1 {
                        picks[pos] += 1;
                        break;
                    }
                    picks[pos] = 0;
                    pos += 1;
                }
                if pos == picks.len() {
                    break;
                }
            }
            let out: f64 = q.row(i).iter().sum();
            q[(i, i)] = -out;
        }
        let transient: Vec<usize> = (0..size).filter(|&i| states[i].len() > 1).collect();
        let start = transient
            .iter()
            .position(|&i| states[i].len() == n)
            .expect("singletons state");
        let t = transient.len();
        let mut neg = DMatrix::zeros(t, t);
        for (a, &i) in transient.iter().enumerate() {
            for (b, &j) in transient.iter().enumerate() {
                neg[(a, b)] = -q[(i, j)];
            }
        }
        let green = neg
            .try_inverse()
            .expect("transient generator is invertible");
        Self {
            n,
            states,
            generator: q,
            transient,
            start,
            green,
        }
    }

    fn gate(&self) -> Result<()> {
        let spec = QuadratureSpec::default();
        for &s in &[0.05, 0.3, 1.0, 2.5, 6.0] {
            let oracle = self.absorption_cdf(s);
            let closed_form = root_edge_laws(self.n as u64, s, RootEdgeLaw::Max, &spec)?;
            if (oracle - closed_form).abs() > 1e-9 {
                return Err(Error::OracleGate {
                    n: self.n,
                    s,
                    oracle,
                    closed_form,
                });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn states(&self) -> &[Vec<usize>] {
        &self.states
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    /// Number of blocks of size `b` in each transient state.
    fn reward(&self, b: usize) -> DVector<f64> {
        DVector::from_iterator(
            self.transient.len(),
            self.transient
                .iter()
                .map(|&i| self.states[i].iter().filter(|&&z| z == b).count() as f64),
        )
    }

    fn check_b(&self, b: usize) -> Result<()> {
        if b < 1 || b >= self.n {
            return Err(Error::domain(
                "oracle",
                format!("b = {b} must lie in [1, {}]", self.n - 1),
            ));
        }
        Ok(())
    }

    /// `E[ℓ_{n,b}]`.
    pub fn mean_length(&self, b: usize) -> Result<f64> {
        self.check_b(b)?;
        let v = &self.green * self.reward(b);
        Ok(v[self.start])
    }

    /// `E[SFS_{n,b}] = θ E[ℓ_{n,b}]`.
    pub fn mean_sfs(&self, b: usize, theta: f64) -> Result<f64> {
        Ok(theta * self.mean_length(b)?)
    }

    /// `E[ℓ_{n,b1} ℓ_{n,b2}]`.
    pub fn cross_moment(&self, b1: usize, b2: usize) -> Result<f64> {
        self.check_b(b1)?;
        self.check_b(b2)?;
        let (r1, r2) = (self.reward(b1), self.reward(b2));
        let u1 = &self.green * &r1;
        let u2 = &self.green * &r2;
        let a = &self.green * r1.component_mul(&u2);
        let b = &self.green * r2.component_mul(&u1);
        Ok(a[self.start] + b[self.start])
    }

    /// `E[A_n]`, the expected time to absorption.
    pub fn expected_absorption_time(&self) -> f64 {
        let ones = DVector::from_element(self.transient.len(), 1.0);
        (&self.green * ones)[self.start]
    }

    /// `P(A_n <= s)` from the matrix exponential of the sub-generator.
    pub fn absorption_cdf(&self, s: f64) -> f64 {
        let t = self.transient.len();
        let mut sub = DMatrix::zeros(t, t);
        for (a, &i) in self.transient.iter().enumerate() {
            for (b, &j) in self.transient.iter().enumerate() {
                sub[(a, b)] = self.generator[(i, j)] * s;
            }
        }
        let e = sub.exp();
        let survive: f64 = e.row(self.start).iter().sum();
        1.0 - survive
    }

    /// Size of the unique block larger than `n/2` (and below `n`), if any.
    fn large_block(&self, state: usize) -> Option<usize> {
        let top = self.states[state][0];
        (2 * top > self.n && top < self.n).then_some(top)
    }

    /// Probability that the large block sizes ever present, restricted to
    /// `[lower, n)`, are exactly `sizes`. Computed on the embedded jump chain
    /// by inclusion–exclusion over "only sizes in T are visited" events.
    pub fn large_family_visit_probability(&self, sizes: &[usize], lower: usize) -> Result<f64> {
        if sizes
            .iter()
            .any(|&b| b < lower || 2 * b <= self.n || b >= self.n)
        {
            return Err(Error::domain(
                "oracle",
                format!("sizes {sizes:?} must be large and at least {lower}"),
            ));
        }
        let k = sizes.len();
        let mut total = 0.0;
        for mask in 0u32..(1 << k) {
            let allowed: Vec<usize> = (0..k)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| sizes[i])
                .collect();
            let sign = if (k - allowed.len()).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            total += sign * self.avoid_probability(&allowed, lower);
        }
        Ok(total)
    }

    /// Probability of never visiting a state whose large block has a size in
    /// `[lower, n)` outside `allowed`.
    fn avoid_probability(&self, allowed: &[usize], lower: usize) -> f64 {
        let size = self.states.len();
        let forbidden = |i: usize| {
            self.large_block(i)
                .is_some_and(|b| b >= lower && !allowed.contains(&b))
        };
        let mut a = DMatrix::zeros(size, size);
        let mut rhs = DVector::zeros(size);
        for i in 0..size {
            a[(i, i)] = 1.0;
            if self.states[i].len() == 1 {
                rhs[i] = 1.0;
                continue;
            }
            if forbidden(i) {
                continue;
            }
            let out = -self.generator[(i, i)];
            for j in 0..size {
                if j != i {
                    a[(i, j)] -= self.generator[(i, j)] / out;
                }
            }
        }
        let h = a.lu().solve(&rhs).expect("hitting system is nonsingular");
        let start = self.transient[self.start];
        h[start]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts() {
        let counts: Vec<usize> = (1..=9).map(|n| partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 3, 5, 7, 11, 15, 22, 30]);
    }

    #[test]
    fn generator_rows_sum_to_zero() {
        for n in 2..=MAX_ORACLE_N {
            let o = OracleModel::new(n).unwrap();
            for i in 0..o.states().len() {
                let s: f64 = o.generator().row(i).iter().sum();
                assert!(s.abs() < 1e-12);
            }
            let absorbing = o.states().iter().position(|s| s.len() == 1).unwrap();
            assert!(o.generator().row(absorbing).iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn total_rate_with_m_blocks_is_m_minus_one() {
        // Σ_k C(m,k) λ_{m,k} = m − 1 for the uniform Λ.
        for m in 2..10 {
            let total: f64 = (2..=m).map(|k| binomial(m, k) * merger_rate(m, k)).sum();
            assert!((total - (m - 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn small_sample_values() {
        let o = OracleModel::new(2).unwrap();
        assert!((o.mean_length(1).unwrap() - 2.0).abs() < 1e-12);
        assert!((o.cross_moment(1, 1).unwrap() - 8.0).abs() < 1e-12);
        let o = OracleModel::new(3).unwrap();
        assert!((o.mean_length(1).unwrap() - 2.25).abs() < 1e-12);
        assert!((o.mean_length(2).unwrap() - 0.75).abs() < 1e-12);
        assert!((o.cross_moment(1, 2).unwrap() - 21.0 / 8.0).abs() < 1e-12);
        assert!((o.cross_moment(1, 1).unwrap() - 33.0 / 4.0).abs() < 1e-12);
        for &s in &[0.2, 1.0, 3.0] {
            let q = 1.0 - f64::exp(-s);
            assert!((o.absorption_cdf(s) - q * (q + 1.0) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(OracleModel::new(1).is_err());
        assert!(OracleModel::new(10).is_err());
        assert!(OracleModel::new(4).unwrap().mean_length(4).is_err());
    }

    #[test]
    fn visit_probabilities() {
        let o = OracleModel::new(3).unwrap();
        assert!((o.large_family_visit_probability(&[2], 2).unwrap() - 0.75).abs() < 1e-12);
        let o = OracleModel::new(5).unwrap();
        let any3 = o.large_family_visit_probability(&[3], 3).unwrap()
            + o.large_family_visit_probability(&[3, 4], 3).unwrap();
        assert!((any3 - 5.0 / 9.0).abs() < 1e-12);
    }
}
