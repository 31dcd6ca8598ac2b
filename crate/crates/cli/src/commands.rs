use std::error::Error;

use bsfs_core::approx::{approx_sfs, asymptotic_sfs};
use bsfs_core::dist::{joint_large_family, surv_length_large_family};
use bsfs_core::moments::{cov_sfs, expected_sfs_all};
use bsfs_core::simulate::{simulate_lengths_and_sfs, SimulationSummary};
use bsfs_core::validation::{run_criterion, CheckKind, ValidationConfig, CRITERIA};
use bsfs_core::{
    ApproxVariant, JointNormalization, LargeFamilyChain, PairQuery, QuadratureSpec, Regime,
    SecondMomentMode,
};

use crate::table::{Cell, Table};
use crate::{Command, Common, Mode, Normalization, Outcome};

type CmdResult = Result<Outcome, Box<dyn Error>>;

pub fn run(command: &Command, common: &Common) -> CmdResult {
    let spec = common.spec();
    spec.validate()?;
    match command {
        Command::ExpectedSfs { n, theta, b, all_b } => {
            let bs: Vec<u64> = if *all_b {
                (1..*n).collect()
            } else {
                vec![b.expect("clap requires b")]
            };
            ok(expected_sfs_table(*n, *theta, &bs, &spec)?)
        }
        Command::Cov {
            n,
            theta,
            b1,
            b2,
            mode,
        } => ok(cov_table(*n, *theta, *b1, *b2, *mode, &spec)?),
        Command::Dist { n, b, s_grid } => ok(dist_table(*n, *b, &parse_grid(s_grid)?, &spec)?),
        Command::Joint {
            n,
            chain,
            s,
            minimal,
            normalization,
        } => ok(joint_table(*n, chain, s, *minimal, *normalization, &spec)?),
        Command::Figure1 { n, theta } => ok(figure1_table(n, *theta, &spec)?),
        Command::Figure3 { n, theta } => ok(figure3_table(*n, *theta, &spec)?),
        Command::Simulate {
            n,
            theta,
            reps,
            seed,
        } => ok(simulate_table(*n, *theta, *reps, *seed, &spec)?),
        Command::Validate { max_n, reps, seed } => {
            let cfg = ValidationConfig {
                max_n: *max_n,
                reps: *reps,
                seed: *seed,
                spec,
                ..ValidationConfig::default()
            };
            validate(&cfg)
        }
    }
}

fn ok(table: Table) -> CmdResult {
    Ok(Outcome {
        table,
        failed: false,
    })
}

fn rel_err(approx: f64, exact: f64) -> f64 {
    ((approx - exact) / exact).abs()
}

/// Basic and refined approximations; at `b = 1` both columns hold the
/// singleton approximation, which needs no refinement.
fn approximations(
    n: u64,
    b: u64,
    theta: f64,
    spec: &QuadratureSpec,
) -> bsfs_core::Result<(f64, f64)> {
    if b == 1 {
        let s = approx_sfs(n, 1, theta, ApproxVariant::Singleton, spec)?;
        Ok((s, s))
    } else {
        Ok((
            approx_sfs(n, b, theta, ApproxVariant::Basic, spec)?,
            approx_sfs(n, b, theta, ApproxVariant::Refined, spec)?,
        ))
    }
}

pub fn expected_sfs_table(
    n: u64,
    theta: f64,
    bs: &[u64],
    spec: &QuadratureSpec,
) -> Result<Table, Box<dyn Error>> {
    let exact = expected_sfs_all(n, theta, spec)?;
    let mut t = Table::new(vec![
        "b",
        "exact",
        "basic_approx",
        "refined_approx",
        "rel_err_basic",
        "rel_err_refined",
    ]);
    for &b in bs {
        bsfs_core::CoalescentQuery::new(n, theta, b)?;
        let e = exact[b as usize - 1];
        let (basic, refined) = approximations(n, b, theta, spec)?;
        t.push(vec![
            b.into(),
            e.into(),
            basic.into(),
            refined.into(),
            rel_err(basic, e).into(),
            rel_err(refined, e).into(),
        ]);
    }
    Ok(t)
}

fn cov_table(
    n: u64,
    theta: f64,
    b1: u64,
    b2: u64,
    mode: Mode,
    spec: &QuadratureSpec,
) -> Result<Table, Box<dyn Error>> {
    let q = PairQuery::new(n, theta, b1, b2)?;
    let (m, label) = match mode {
        Mode::Printed => (SecondMomentMode::AsPrinted, "printed"),
        Mode::Doubled => (SecondMomentMode::DiagonalDoubled, "doubled"),
    };
    let c = cov_sfs(&q, m, spec)?;
    let mut t = Table::new(vec!["n", "theta", "b1", "b2", "mode", "cov"]);
    t.push(vec![
        n.into(),
        theta.into(),
        q.b1.into(),
        q.b2.into(),
        label.into(),
        c.into(),
    ]);
    Ok(t)
}

/// Parses `start:stop:step` into the points `start + i·step <= stop`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, Box<dyn Error>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, step] = parts.as_slice() else {
        return Err(format!("grid `{spec}` must have the form start:stop:step").into());
    };
    let (a, b, step): (f64, f64, f64) =
        (a.trim().parse()?, b.trim().parse()?, step.trim().parse()?);
    if !(a.is_finite() && b.is_finite() && step > 0.0 && step.is_finite() && b >= a) {
        return Err(format!("grid `{spec}` needs finite start <= stop and a positive step").into());
    }
    // Allow for rounding so that the stop value itself is included.
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    if count > 10_000_000 {
        return Err(format!("grid `{spec}` has too many points").into());
    }
    Ok((0..count).map(|i| a + i as f64 * step).collect())
}

fn dist_table(
    n: u64,
    b: u64,
    grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<Table, Box<dyn Error>> {
    let mut t = Table::new(vec!["n", "b", "s", "survival"]);
    for &s in grid {
        let p = surv_length_large_family(n, b, s, spec)?;
        t.push(vec![n.into(), b.into(), s.into(), p.into()]);
    }
    Ok(t)
}

fn joint_table(
    n: u64,
    chain: &[u64],
    s: &[f64],
    minimal: bool,
    normalization: Normalization,
    spec: &QuadratureSpec,
) -> Result<Table, Box<dyn Error>> {
    let c = LargeFamilyChain::new(n, chain.to_vec(), s.to_vec())?;
    let norm = match normalization {
        Normalization::Corrected => JointNormalization::Corrected,
        Normalization::Printed => JointNormalization::AsPrinted,
    };
    let p = joint_large_family(&c, minimal, norm, spec)?;
    let join = |v: Vec<String>| v.join(" ");
    let mut t = Table::new(vec!["n", "chain", "s", "minimal", "probability"]);
    t.push(vec![
        n.into(),
        join(chain.iter().map(u64::to_string).collect()).into(),
        join(s.iter().map(|x| crate::table::format_float(*x)).collect()).into(),
        minimal.into(),
        p.into(),
    ]);
    Ok(t)
}

fn figure1_table(ns: &[u64], theta: f64, spec: &QuadratureSpec) -> Result<Table, Box<dyn Error>> {
    let mut t = Table::new(vec!["n", "b", "exact", "refined_approx", "rel_err_refined"]);
    for &n in ns {
        let exact = expected_sfs_all(n, theta, spec)?;
        for b in 1..n {
            let e = exact[b as usize - 1];
            let (_, refined) = approximations(n, b, theta, spec)?;
            t.push(vec![
                n.into(),
                b.into(),
                e.into(),
                refined.into(),
                rel_err(refined, e).into(),
            ]);
        }
    }
    Ok(t)
}

fn figure3_table(n: u64, theta: f64, spec: &QuadratureSpec) -> Result<Table, Box<dyn Error>> {
    let exact = expected_sfs_all(n, theta, spec)?;
    let mut t = Table::new(vec!["b", "exact", "small_b", "proportional", "large_b"]);
    for b in 1..n {
        let small = if b >= 2 {
            Some(asymptotic_sfs(n, b, theta, Regime::SmallB, spec)?)
        } else {
            None
        };
        let prop = asymptotic_sfs(n, b, theta, Regime::Proportional, spec)?;
        let large = asymptotic_sfs(n, b, theta, Regime::LargeB, spec)?;
        t.push(vec![
            b.into(),
            exact[b as usize - 1].into(),
            small.into(),
            prop.into(),
            large.into(),
        ]);
    }
    Ok(t)
}

fn simulate_table(
    n: usize,
    theta: f64,
    reps: usize,
    seed: u64,
    spec: &QuadratureSpec,
) -> Result<Table, Box<dyn Error>> {
    let samples = simulate_lengths_and_sfs(n, theta, reps, seed)?;
    let summary = SimulationSummary::from_samples(&samples);
    let exact = expected_sfs_all(n as u64, 1.0, spec)?;
    let mut t = Table::new(vec![
        "b",
        "mean_length",
        "se_length",
        "exact_length",
        "mean_sfs",
        "se_sfs",
        "exact_sfs",
    ]);
    for b in 1..n {
        let i = b - 1;
        t.push(vec![
            b.into(),
            summary.mean_length[i].into(),
            summary.se_length[i].into(),
            exact[i].into(),
            summary.mean_sfs[i].into(),
            summary.se_sfs[i].into(),
            (theta * exact[i]).into(),
        ]);
    }
    Ok(t)
}

fn validate(cfg: &ValidationConfig) -> CmdResult {
    let mut t = Table::new(vec![
        "criterion",
        "check",
        "kind",
        "value",
        "reference",
        "discrepancy",
        "tolerance",
        "passed",
    ]);
    let mut failed = false;
    for id in CRITERIA {
        let report = run_criterion(id, cfg)?;
        eprintln!("{}", report.summary_line());
        failed |= !report.passed();
        for c in &report.checks {
            let kind = match c.kind {
                CheckKind::Assert => "assert",
                CheckKind::Info => "info",
            };
            t.push(vec![
                u64::from(id).into(),
                c.label.clone().into(),
                kind.into(),
                c.value.into(),
                c.reference.into(),
                c.discrepancy.into(),
                c.tolerance.into(),
                Cell::Bool(c.passed),
            ]);
        }
    }
    eprintln!(
        "{}",
        if failed {
            "validation FAILED"
        } else {
            "validation passed"
        }
    );
    Ok(Outcome { table: t, failed })
}
