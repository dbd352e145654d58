//! End-to-end trials: build, solve, filter, compare with the closed form.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::count::cover_count;
use crate::error::Result;
use crate::problem::ProblemSpec;
use crate::rampoly::CoverFunction;

use super::filter::{filter_solutions, RejectionCounts};
use super::homotopy::{solve_total_degree_with, PathStats};
use super::params::{Execution, ToleranceSet};
use super::system::{build_system, trial_seed, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Error,
}

/// Outcome of one trial. Serializes identically for identical
/// `(spec, seed, tolerances)`; `wall_time` is not serialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub spec_hash: String,
    pub trial: u32,
    /// Seed of this trial's system, derived from the run seed.
    pub seed: u64,
    pub tolerances: ToleranceSet,
    pub lambda: Vec<[f64; 2]>,
    pub bezout_number: u64,
    pub paths: PathStats,
    pub raw_finite: usize,
    pub rejected: RejectionCounts,
    pub escalations: usize,
    pub accepted: usize,
    pub expected: String,
    /// `accepted <= segre * rho`
    pub within_bound: bool,
    pub max_residual: Option<f64>,
    pub min_rcond: Option<f64>,
    pub verdict: Verdict,
    pub error: Option<String>,
    pub covers: Vec<CoverFunction<C64>>,
    #[serde(skip)]
    pub wall_time: Duration,
}

pub fn verify_count(spec: &ProblemSpec, trials: u32, seed: u64, params: &ToleranceSet) -> Result<Vec<VerifyReport>> {
    verify_count_with(spec, trials, seed, params, Execution::default())
}

pub fn verify_count_with(
    spec: &ProblemSpec,
    trials: u32,
    seed: u64,
    params: &ToleranceSet,
    exec: Execution,
) -> Result<Vec<VerifyReport>> {
    let expected = cover_count(spec)?.total;
    Ok((0..trials)
        .map(|trial| verify_trial(spec, &expected, seed, trial, params, exec))
        .collect())
}

/// One trial; solver errors become an `ERROR` verdict.
pub fn verify_trial(
    spec: &ProblemSpec,
    expected: &BigUint,
    seed: u64,
    trial: u32,
    params: &ToleranceSet,
    exec: Execution,
) -> VerifyReport {
    let started = Instant::now();
    let seed = trial_seed(seed, trial);
    let mut report = VerifyReport {
        spec_hash: spec.hash(),
        trial,
        seed,
        tolerances: params.clone(),
        lambda: Vec::new(),
        bezout_number: 0,
        paths: PathStats::default(),
        raw_finite: 0,
        rejected: RejectionCounts::default(),
        escalations: 0,
        accepted: 0,
        expected: expected.to_string(),
        within_bound: true,
        max_residual: None,
        min_rcond: None,
        verdict: Verdict::Error,
        error: None,
        covers: Vec::new(),
        wall_time: Duration::ZERO,
    };
    let mut run = || -> Result<()> {
        let sys = build_system(spec, seed)?;
        report.lambda = sys.lambda.iter().map(|z| [z.re, z.im]).collect();
        report.bezout_number = sys.bezout_number();
        let solved = solve_total_degree_with(&sys, params, exec)?;
        report.paths = solved.stats.clone();
        report.raw_finite = solved.stats.finite;
        let filtered = filter_solutions(&solved.paths, spec, &sys, params);
        report.rejected = filtered.rejected;
        report.escalations = filtered.escalations;
        report.accepted = filtered.accepted.len();
        report.within_bound = BigUint::from(report.accepted) <= *expected;
        report.max_residual = filtered.accepted.iter().map(|a| a.residual).reduce(f64::max);
        report.min_rcond = filtered.accepted.iter().map(|a| a.rcond).reduce(f64::min);
        report.covers = filtered.accepted.into_iter().map(|a| a.cover).collect();
        report.verdict = if BigUint::from(report.accepted) == *expected { Verdict::Pass } else { Verdict::Fail };
        Ok(())
    };
    if let Err(e) = run() {
        report.verdict = Verdict::Error;
        report.error = Some(e.to_string());
    }
    report.wall_time = started.elapsed();
    report
}
