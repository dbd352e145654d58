//! Deduplication and genericity filters on raw endpoints.

use std::cmp::Ordering;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::poly::{complex_from_f64, complex_to_f64, Poly, Real};
use crate::problem::ProblemSpec;
use crate::rampoly::{branch_profile, critical_value, in_u_numeric, BranchProfile, CoverFunction};

use super::homotopy::{refine, PathResult, PathStatus};
use super::linalg::rcond;
use super::params::{Precision, ToleranceSet};
use super::system::{BlockKind, PolySystem, C64};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionCounts {
    pub duplicate: usize,
    pub outside_u: usize,
    pub profile_mismatch: usize,
    pub singular_jacobian: usize,
    /// Root clusters unresolved even in extended precision.
    pub precision_exhausted: usize,
}

#[derive(Debug, Clone)]
pub struct AcceptedCover {
    pub cover: CoverFunction<C64>,
    pub mu: C64,
    pub solution: Vec<C64>,
    pub residual: f64,
    pub rcond: f64,
    pub profile: BranchProfile,
}

#[derive(Debug, Clone, Default)]
pub struct FilterOutcome {
    pub accepted: Vec<AcceptedCover>,
    pub rejected: RejectionCounts,
    /// Solutions re-examined in extended precision after a double-precision failure.
    pub escalations: usize,
}

enum Reject {
    OutsideU,
    Profile,
}

fn sort_key(sys: &PolySystem, x: &[C64]) -> Vec<f64> {
    let mut key = Vec::with_capacity(2 * x.len());
    for blk in &sys.blocks {
        let v = &x[blk.range()];
        let (arg, _) = v
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, bn), (i, z)| if z.norm() > bn { (i, z.norm()) } else { (bi, bn) });
        let pivot = if blk.kind == BlockKind::Mu { C64::new(1.0, 0.0) } else { v[arg] };
        for z in v {
            let w = z / pivot;
            key.push(w.re);
            key.push(w.im);
        }
    }
    key
}

/// Largest per-block sine of the angle between `x` and `y` (relative
/// difference for `mu`).
fn projective_distance(sys: &PolySystem, x: &[C64], y: &[C64]) -> f64 {
    let mut worst: f64 = 0.0;
    for blk in &sys.blocks {
        let (a, b) = (&x[blk.range()], &y[blk.range()]);
        let d = if blk.kind == BlockKind::Mu {
            (a[0] - b[0]).norm() / a[0].norm().max(b[0].norm()).max(f64::MIN_POSITIVE)
        } else {
            let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
            let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
            let inner: C64 = a.iter().zip(b).map(|(u, v)| u.conj() * v).sum();
            (1.0 - inner.norm_sqr() / (na * nb)).max(0.0).sqrt()
        };
        worst = worst.max(d);
    }
    worst
}

fn cover_from<F: Real>(sys: &PolySystem, x: &[Complex<F>]) -> Result<CoverFunction<Complex<F>>> {
    let coeffs = |k| Poly::from_coeffs(x[sys.block(k).range()].to_vec());
    CoverFunction::new(
        sys.lambda.iter().map(|&z| complex_from_f64(z)).collect(),
        sys.spec.ord.clone(),
        coeffs(BlockKind::P0),
        coeffs(BlockKind::Pinf),
        sys.spec.r,
    )?
    .with_nominal_degrees(sys.n0, sys.ninf)
}

/// In-U and branch-profile checks in working precision `F`.
fn check_generic<F: Real>(
    sys: &PolySystem,
    spec: &ProblemSpec,
    x: &[Complex<F>],
    radius: f64,
) -> Result<std::result::Result<BranchProfile, Reject>> {
    let cover = cover_from(sys, x)?;
    if !in_u_numeric(&cover, radius)?.inside {
        return Ok(Err(Reject::OutsideU));
    }
    let profile = branch_profile(&cover, radius)?;
    let mut want = spec.b.clone();
    want.sort_unstable();
    if profile.outside_u || profile.indices() != want {
        return Ok(Err(Reject::Profile));
    }
    let values: Option<Vec<C64>> = profile.entries.iter().map(|e| critical_value(&cover, e.point)).collect();
    let Some(values) = values else {
        return Ok(Err(Reject::Profile));
    };
    // points at the lambda_i and the roots of P_0, P_inf are already excluded
    let distinct = values.iter().enumerate().all(|(i, v)| {
        v.norm() > f64::MIN_POSITIVE
            && v.norm().is_finite()
            && values[i + 1..].iter().all(|w| (v - w).norm() > radius * v.norm().max(w.norm()))
    });
    if !distinct {
        return Ok(Err(Reject::Profile));
    }
    Ok(Ok(profile))
}

struct Examined {
    x: Vec<C64>,
    residual: f64,
    verdict: std::result::Result<BranchProfile, Reject>,
}

fn examine_extended(sys: &PolySystem, spec: &ProblemSpec, x: &[C64], params: &ToleranceSet) -> Result<Examined> {
    let tables = sys.tables::<TwoFloat>();
    let start: Vec<Complex<TwoFloat>> = x.iter().map(|&z| complex_from_f64(z)).collect();
    let (xd, residual, _) = refine(&tables, start, params.residual_tol);
    let verdict = check_generic(sys, spec, &xd, params.cluster_radius)?;
    Ok(Examined { x: xd.into_iter().map(complex_to_f64).collect(), residual, verdict })
}

/// Filters the finite endpoints of a solve, in order: duplicates, points
/// outside `U`, branch profile different from `B` (or coincident, zero or
/// infinite critical values), and Jacobian conditioning below `singularTol`.
pub fn filter_solutions(raw: &[PathResult], spec: &ProblemSpec, sys: &PolySystem, params: &ToleranceSet) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    let mut finite: Vec<(Vec<f64>, &PathResult)> = raw
        .iter()
        .filter(|p| p.status == PathStatus::Finite)
        .filter_map(|p| p.solution.as_ref().map(|x| (sort_key(sys, x), p)))
        .collect();
    finite.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
            .then(a.1.index.cmp(&b.1.index))
    });

    let mut reps: Vec<&PathResult> = Vec::new();
    for (_, p) in finite {
        let x = p.solution.as_ref().unwrap();
        if reps
            .iter()
            .any(|q| projective_distance(sys, x, q.solution.as_ref().unwrap()) < params.dedup_radius)
        {
            out.rejected.duplicate += 1;
        } else {
            reps.push(p);
        }
    }

    let tables = sys.tables::<f64>();
    let n = sys.n_unknowns();
    for p in reps {
        let x = p.solution.as_ref().unwrap();
        let examined = match params.precision {
            Precision::Extended => examine_extended(sys, spec, x, params),
            // a multiple root of psi spreads by about u^(1/multiplicity) in
            // double precision, so mismatches are rechecked as well
            Precision::Double => match check_generic(sys, spec, x, params.cluster_radius) {
                Err(Error::PrecisionExhausted(_)) | Ok(Err(Reject::Profile)) => {
                    out.escalations += 1;
                    examine_extended(sys, spec, x, params)
                }
                other => other.map(|verdict| Examined { x: x.clone(), residual: p.residual, verdict }),
            },
        };
        let examined = match examined {
            Ok(e) => e,
            Err(_) => {
                out.rejected.precision_exhausted += 1;
                continue;
            }
        };
        let profile = match examined.verdict {
            Ok(profile) => profile,
            Err(Reject::OutsideU) => {
                out.rejected.outside_u += 1;
                continue;
            }
            Err(Reject::Profile) => {
                out.rejected.profile_mismatch += 1;
                continue;
            }
        };
        let (_, jac) = tables.eval_affine(&examined.x);
        let rc = rcond(&jac, n);
        if !(rc >= params.singular_tol) {
            out.rejected.singular_jacobian += 1;
            continue;
        }
        let cover = cover_from(sys, &examined.x).expect("cover already built once");
        out.accepted.push(AcceptedCover {
            cover,
            mu: examined.x[n - 1],
            solution: examined.x,
            residual: examined.residual,
            rcond: rc,
            profile,
        });
    }
    out
}
