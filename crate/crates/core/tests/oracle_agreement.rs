//! Closed forms against the exact Markov chain on integer partitions.

use bsfs_core::dist::{admissible_chains, joint_large_family};
use bsfs_core::moments::{expected_length, expected_sfs_all, second_moment_lengths};
use bsfs_core::simulate::{simulate_lengths_and_sfs, OracleModel, SimulationSummary};
use bsfs_core::{JointNormalization, LargeFamilyChain, QuadratureSpec, SecondMomentMode};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn moments_match_oracle() {
    let s = QuadratureSpec::default();
    for n in 2..=7usize {
        let o = OracleModel::new(n).unwrap();
        let means = expected_sfs_all(n as u64, 0.7, &s).unwrap();
        for b1 in 1..n {
            assert!(rel(means[b1 - 1], o.mean_sfs(b1, 0.7).unwrap()) < 1e-8);
            for b2 in b1..n {
                let m2 = second_moment_lengths(
                    n as u64,
                    b1 as u64,
                    b2 as u64,
                    SecondMomentMode::DiagonalDoubled,
                    &s,
                )
                .unwrap();
                let exact = o.cross_moment(b1, b2).unwrap();
                assert!(rel(m2, exact) < 1e-8, "n={n} ({b1},{b2}): {m2} vs {exact}");
            }
        }
    }
}

#[test]
fn printed_diagonal_misses_half_the_ordered_term() {
    let s = QuadratureSpec::default();
    let o = OracleModel::new(2).unwrap();
    let printed = second_moment_lengths(2, 1, 1, SecondMomentMode::AsPrinted, &s).unwrap();
    assert!((printed - 6.0).abs() < 1e-10);
    assert!((o.cross_moment(1, 1).unwrap() - 8.0).abs() < 1e-10);
}

#[test]
fn total_length_identity() {
    // Blocks carry n lineages in total until absorption.
    let s = QuadratureSpec::default();
    for n in 2..=8u64 {
        let weighted: f64 = (1..n)
            .map(|b| b as f64 * expected_length(n, b, &s).unwrap())
            .sum();
        let o = OracleModel::new(n as usize).unwrap();
        let target = n as f64 * o.expected_absorption_time();
        assert!(
            rel(weighted, target) < 1e-9,
            "n={n}: {weighted} vs {target}"
        );
    }
}

#[test]
fn joint_law_matches_visit_probabilities() {
    let s = QuadratureSpec::default();
    for n in 3..=9u64 {
        let o = OracleModel::new(n as usize).unwrap();
        let lowest = n / 2 + 1;
        for b1 in lowest..n {
            for chain in admissible_chains(n, b1) {
                let sizes: Vec<usize> = chain.iter().map(|&b| b as usize).collect();
                let c = LargeFamilyChain::new(n, chain.clone(), vec![0.0; chain.len()]).unwrap();
                let plain =
                    joint_large_family(&c, false, JointNormalization::Corrected, &s).unwrap();
                let minimal =
                    joint_large_family(&c, true, JointNormalization::Corrected, &s).unwrap();
                let want_plain = o
                    .large_family_visit_probability(&sizes, b1 as usize)
                    .unwrap();
                let want_minimal = o
                    .large_family_visit_probability(&sizes, lowest as usize)
                    .unwrap();
                assert!(
                    (plain - want_plain).abs() < 1e-9,
                    "n={n} {chain:?}: {plain} vs {want_plain}"
                );
                assert!(
                    (minimal - want_minimal).abs() < 1e-9,
                    "minimal n={n} {chain:?}: {minimal} vs {want_minimal}"
                );
            }
        }
    }
}

#[test]
fn simulated_lengths_match_oracle() {
    for n in 4..=7usize {
        let o = OracleModel::new(n).unwrap();
        let samples = simulate_lengths_and_sfs(n, 1.0, 100_000, 40 + n as u64).unwrap();
        let summary = SimulationSummary::from_samples(&samples);
        for b in 1..n {
            let exact = o.mean_length(b).unwrap();
            let z = (summary.mean_length[b - 1] - exact).abs() / summary.se_length[b - 1];
            assert!(z < 3.0, "n={n} b={b}: {z:.2} SE");
        }
    }
}
