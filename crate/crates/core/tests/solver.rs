use std::collections::BTreeMap;

use eqcover::count::cover_count;
use eqcover::poly::Poly;
use eqcover::problem::{enumerate_problems, CyclicData, ProblemSpec};
use eqcover::rampoly::{build_psi, build_rho, in_u_exact, CoverFunction, UReason};
use eqcover::solver::{
    build_system, build_system_unchecked, solve_total_degree, verify_count, verify_count_with, Execution,
    Precision, ToleranceSet, Verdict,
};
use eqcover::Error;
use num_rational::BigRational;
use num_traits::Zero;

type Q = BigRational;

fn spec(r: u32, xi: &[u32], ord: &[i64], b: &[u32], t0: u64, tinf: u64) -> ProblemSpec {
    ProblemSpec { r, xi: xi.to_vec(), ord: ord.to_vec(), b: b.to_vec(), t0, tinf }
}

fn hyperelliptic() -> ProblemSpec {
    spec(2, &[1; 4], &[-1; 4], &[3, 3], 4, 0)
}

fn r3_mixed() -> ProblemSpec {
    spec(3, &[1, 1, 2, 2], &[-2, -2, 2, -1], &[2, 3], 3, 0)
}

fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

#[test]
fn all_twos_has_the_unique_cover() {
    let s = spec(2, &[1; 4], &[1, 1, -1, -1], &[2, 2], 0, 0);
    let reports = verify_count(&s, 1, 0, &ToleranceSet::default()).unwrap();
    assert_eq!(reports[0].verdict, Verdict::Pass, "{:?}", reports[0]);
    assert_eq!(reports[0].accepted, 1);
}

#[test]
fn extended_precision_agrees() {
    let params = ToleranceSet { precision: Precision::Extended, ..Default::default() };
    let reports = verify_count(&hyperelliptic(), 1, 3, &params).unwrap();
    assert_eq!(reports[0].verdict, Verdict::Pass, "{:?}", reports[0]);
    assert_eq!(reports[0].accepted, 4);
}

#[test]
fn accepted_covers_satisfy_the_invariants() {
    let s = r3_mixed();
    let params = ToleranceSet::default();
    let count = cover_count(&s).unwrap();
    for report in verify_count(&s, 2, 5, &params).unwrap() {
        assert_eq!(report.verdict, Verdict::Pass);
        assert!(report.accepted <= report.raw_finite);
        assert!(report.within_bound);
        assert_eq!(report.expected, count.total.to_string());
        assert!(report.max_residual.unwrap() < params.residual_tol);
        assert!(report.min_rcond.unwrap() >= params.singular_tol);
        assert_eq!(report.covers.len(), report.accepted);
        assert!(report.accepted as u64 <= report.bezout_number);
    }
}

#[test]
fn sequential_and_parallel_reports_match() {
    let s = r3_mixed();
    let params = ToleranceSet::default();
    let seq = verify_count_with(&s, 1, 9, &params, Execution::Sequential).unwrap();
    let par = verify_count_with(&s, 1, 9, &params, Execution::Parallel).unwrap();
    assert_eq!(serde_json::to_string(&seq).unwrap(), serde_json::to_string(&par).unwrap());
}

#[test]
fn unbalanced_system_is_rejected_before_tracking() {
    // sum ord = -2 but tinf - t0 = 0
    let s = spec(2, &[1; 4], &[-1; 4], &[3, 3], 2, 2);
    assert!(build_system(&s, 0).is_err());
    let sys = build_system_unchecked(&s, 0).unwrap();
    assert!(matches!(
        solve_total_degree(&sys, &ToleranceSet::default()),
        Err(Error::BalanceViolated { .. })
    ));
}

#[test]
fn tolerances_are_echoed() {
    let params = ToleranceSet { dedup_radius: 2e-6, step_budget: 5000, ..Default::default() };
    let reports = verify_count(&hyperelliptic(), 1, 0, &params).unwrap();
    let json: serde_json::Value = serde_json::to_value(&reports[0]).unwrap();
    assert_eq!(json["tolerances"]["dedupRadius"], 2e-6);
    assert_eq!(json["tolerances"]["stepBudget"], 5000);
    assert_eq!(json["tolerances"]["precision"], "double");
    assert!(json.get("wall_time").is_none());
}

#[test]
fn tiny_step_budget_fails_without_panicking() {
    let params = ToleranceSet { step_budget: 1, ..Default::default() };
    let reports = verify_count(&hyperelliptic(), 1, 0, &params).unwrap();
    assert_ne!(reports[0].verdict, Verdict::Pass);
    assert_eq!(reports[0].paths.truncated, reports[0].paths.tracked);
}

fn k1_quartic() -> ProblemSpec {
    let base = CyclicData::new(3, vec![1, 1, 1]).unwrap();
    enumerate_problems(&base, 8)
        .into_iter()
        .find(|p| p.b == [4] && p.t0 == p.r as u64 && p.tinf == p.r as u64)
        .expect("a k = 1 spec with B = {4}")
}

/// With one moving point of index 4 and `t0 = tinf = r`, the pair
/// `P0 = Pinf = x - a` lies on both `psi` and `rho` for every `lambda`.
#[test]
fn k1_degenerate_point_lies_on_the_intersection() {
    let s = k1_quartic();
    let lambda = vec![q(1), q(2), q(-3)];
    let one = Poly::<Q>::one();
    let psi0 = build_psi(&CoverFunction::new(lambda.clone(), s.ord.clone(), one.clone(), one, s.r).unwrap()).unwrap();
    assert_eq!(psi0.degree(), Some(1));
    let a = -psi0.coeff(0) / psi0.coeff(1);
    assert!(lambda.iter().all(|l| *l != a));

    let p = Poly::linear_factor(a.clone());
    let cf = CoverFunction::new(lambda, s.ord.clone(), p.clone(), p.clone(), s.r).unwrap();
    let psi = build_psi(&cf).unwrap();
    // a point of index 4 contributes R^3
    let rho = build_rho(&BTreeMap::from([(3u32, p.clone())]));
    let ratio = psi.leading().unwrap().clone() / rho.leading().unwrap().clone();
    assert!(!ratio.is_zero());
    assert_eq!(psi, rho.scale(&ratio));

    let u = in_u_exact(&cf).unwrap();
    assert!(!u.inside);
    assert!(u.reasons.contains(&UReason::CommonRoot));
}

/// The degenerate point absorbs part of the intersection, so the solver
/// finds fewer covers than the closed form and says so.
#[test]
fn k1_mismatch_is_reported() {
    let s = k1_quartic();
    let report = &verify_count(&s, 1, 0, &ToleranceSet::default()).unwrap()[0];
    assert_eq!(report.expected, "6");
    assert_eq!(report.verdict, Verdict::Fail, "{report:?}");
    assert_eq!(report.accepted, 4);
    assert!(report.rejected.outside_u >= 1);
    assert_eq!(report.paths.truncated, 0);
}
