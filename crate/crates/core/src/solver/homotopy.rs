//! Total-degree homotopy `H = (1 - t) gamma G + t F` on the homogenized system,
//! tracked in a random affine chart of projective space.

use std::f64::consts::PI;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::poly::Real;

use super::linalg::{lu_solve, max_norm};
use super::params::{map_indexed, Execution, ToleranceSet};
use super::system::{PolySystem, Tables, C64};

const INITIAL_STEP: f64 = 0.02;
const MAX_STEP: f64 = 0.1;
const MIN_STEP: f64 = 1e-14;
/// Below this step a path hugging `z0 = 0` is taken to diverge.
const STALL_STEP: f64 = 1e-8;
const ENDGAME_GAP: f64 = 1e-6;
const CORRECTOR_ITERS: usize = 3;
const CORRECTOR_TOL: f64 = 1e-9;
const REFINE_ITERS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathStatus {
    /// Reached `t = 1` and refined to a finite solution.
    Finite,
    /// Endpoint at or beyond `divergenceNorm`.
    AtInfinity,
    /// Step budget exhausted or step size underflow.
    Truncated,
    /// Reached `t = 1` but Newton refinement did not converge.
    Failed,
}

#[derive(Debug, Clone)]
pub struct PathResult {
    pub index: usize,
    pub status: PathStatus,
    pub steps: u64,
    /// Affine solution, present for finite paths.
    pub solution: Option<Vec<C64>>,
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStats {
    pub tracked: usize,
    pub finite: usize,
    pub at_infinity: usize,
    pub truncated: usize,
    pub failed: usize,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub paths: Vec<PathResult>,
    pub stats: PathStats,
}

impl SolveOutcome {
    pub fn finite(&self) -> impl Iterator<Item = &PathResult> {
        self.paths.iter().filter(|p| p.status == PathStatus::Finite)
    }
}

pub fn solve_total_degree(sys: &PolySystem, params: &ToleranceSet) -> Result<SolveOutcome> {
    solve_total_degree_with(sys, params, Execution::default())
}

pub fn solve_total_degree_with(sys: &PolySystem, params: &ToleranceSet, exec: Execution) -> Result<SolveOutcome> {
    sys.check_balance()?;
    let tracker = Tracker {
        tables: sys.tables::<f64>(),
        degrees: sys.equation_degrees(),
        gamma: sys.gamma,
        patch: sys.patch.clone(),
        params: params.clone(),
    };
    let total = sys.bezout_number() as usize;
    let paths = map_indexed(exec, total, |i| tracker.track(i));
    let mut stats = PathStats { tracked: total, ..Default::default() };
    for p in &paths {
        match p.status {
            PathStatus::Finite => stats.finite += 1,
            PathStatus::AtInfinity => stats.at_infinity += 1,
            PathStatus::Truncated => stats.truncated += 1,
            PathStatus::Failed => stats.failed += 1,
        }
    }
    Ok(SolveOutcome { paths, stats })
}

/// Newton's method on the affine system. Returns the iterate, its max-norm
/// residual, and whether it reached `tol`.
pub(crate) fn refine<F: Real>(tables: &Tables<F>, mut x: Vec<Complex<F>>, tol: f64) -> (Vec<Complex<F>>, f64, bool) {
    let n = x.len();
    let mut polish = 0;
    let mut residual = f64::INFINITY;
    for _ in 0..REFINE_ITERS {
        let (vals, mut jac) = tables.eval_affine(&x);
        residual = max_norm(&vals);
        if !residual.is_finite() {
            return (x, residual, false);
        }
        if residual < tol {
            polish += 1;
            if polish > 2 {
                break;
            }
        }
        let mut dx: Vec<Complex<F>> = vals.iter().map(|v| -*v).collect();
        if !lu_solve(&mut jac, n, &mut dx) {
            break;
        }
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi = *xi + *d;
        }
    }
    if residual.is_finite() {
        residual = max_norm(&tables.eval_affine(&x).0);
    }
    (x, residual, residual < tol)
}

struct Tracker {
    tables: Tables<f64>,
    degrees: Vec<u32>,
    gamma: C64,
    patch: Vec<C64>,
    params: ToleranceSet,
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl Tracker {
    fn start_point(&self, index: usize) -> Vec<C64> {
        let mut rest = index;
        let mut z = vec![C64::new(1.0, 0.0)];
        for &d in &self.degrees {
            let k = rest % d as usize;
            rest /= d as usize;
            z.push(C64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64));
        }
        let s: C64 = self.patch.iter().zip(&z).map(|(a, b)| a * b).sum();
        z.into_iter().map(|v| v / s).collect()
    }

    /// `H(Z, t)` with its Jacobian in `Z` (square, patch row last) and `dH/dt`.
    fn eval(&self, z: &[C64], t: f64) -> (Vec<C64>, Vec<C64>, Vec<C64>) {
        let n = z.len() - 1;
        let cols = n + 1;
        let (f, jf) = self.tables.eval_homogeneous(z[0], &z[1..]);
        let a = self.gamma * (1.0 - t);
        let mut h = vec![C64::new(0.0, 0.0); cols];
        let mut dt = vec![C64::new(0.0, 0.0); cols];
        let mut jac = vec![C64::new(0.0, 0.0); cols * cols];
        for i in 0..n {
            let d = self.degrees[i] as i32;
            let g = z[i + 1].powi(d) - z[0].powi(d);
            h[i] = a * g + f[i] * t;
            dt[i] = f[i] - self.gamma * g;
            for j in 0..cols {
                jac[i * cols + j] = jf[i * cols + j] * t;
            }
            let df = d as f64;
            jac[i * cols] -= a * df * z[0].powi(d - 1);
            jac[i * cols + i + 1] += a * df * z[i + 1].powi(d - 1);
        }
        h[n] = self.patch.iter().zip(z).map(|(p, v)| p * v).sum::<C64>() - 1.0;
        jac[n * cols..].copy_from_slice(&self.patch);
        (h, jac, dt)
    }

    fn tangent(&self, z: &[C64], t: f64) -> Option<Vec<C64>> {
        let (_, mut jac, dt) = self.eval(z, t);
        let mut v: Vec<C64> = dt.iter().map(|d| -d).collect();
        let n = v.len();
        v[n - 1] = C64::new(0.0, 0.0);
        lu_solve(&mut jac, n, &mut v).then_some(v)
    }

    fn predict(&self, z: &[C64], t: f64, h: f64) -> Option<Vec<C64>> {
        let axpy = |a: &[C64], b: &[C64], s: f64| -> Vec<C64> { a.iter().zip(b).map(|(x, y)| x + y * s).collect() };
        let k1 = self.tangent(z, t)?;
        let k2 = self.tangent(&axpy(z, &k1, h / 2.0), t + h / 2.0)?;
        let k3 = self.tangent(&axpy(z, &k2, h / 2.0), t + h / 2.0)?;
        let k4 = self.tangent(&axpy(z, &k3, h), t + h)?;
        Some(
            (0..z.len())
                .map(|i| z[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0))
                .collect(),
        )
    }

    fn correct(&self, mut z: Vec<C64>, t: f64) -> Option<Vec<C64>> {
        let mut last = f64::INFINITY;
        for _ in 0..CORRECTOR_ITERS {
            let (h, mut jac, _) = self.eval(&z, t);
            let mut dz: Vec<C64> = h.iter().map(|v| -v).collect();
            if !lu_solve(&mut jac, dz.len(), &mut dz) {
                return None;
            }
            let step = norm(&dz);
            if !step.is_finite() || step > 0.5 * last {
                return None;
            }
            for (a, b) in z.iter_mut().zip(&dz) {
                *a += b;
            }
            last = step;
            if step <= CORRECTOR_TOL * norm(&z).max(1.0) {
                return Some(z);
            }
        }
        None
    }

    fn at_infinity(&self, z: &[C64]) -> bool {
        z[0].norm() * self.params.divergence_norm < norm(&z[1..])
    }

    fn track(&self, index: usize) -> PathResult {
        let mut z = self.start_point(index);
        let mut t = 0.0;
        let mut h = INITIAL_STEP;
        let mut streak = 0;
        let mut steps = 0u64;
        let result = |status, steps| PathResult { index, status, steps, solution: None, residual: f64::INFINITY };
        while t < 1.0 {
            if steps >= self.params.step_budget {
                return result(PathStatus::Truncated, steps);
            }
            steps += 1;
            let step = h.min(1.0 - t);
            let next = self.predict(&z, t, step).and_then(|p| self.correct(p, t + step));
            match next {
                Some(w) => {
                    z = w;
                    t = if step == 1.0 - t { 1.0 } else { t + step };
                    streak += 1;
                    if streak >= 3 {
                        h = (h * 2.0).min(MAX_STEP);
                        streak = 0;
                    }
                    if self.at_infinity(&z) {
                        return result(PathStatus::AtInfinity, steps);
                    }
                }
                None => {
                    h /= 2.0;
                    streak = 0;
                    if h < STALL_STEP && self.at_infinity_loose(&z) {
                        return result(PathStatus::AtInfinity, steps);
                    }
                    if h < MIN_STEP {
                        // stalled next to a singular endpoint: let Newton finish it
                        if 1.0 - t < ENDGAME_GAP {
                            break;
                        }
                        let status = if self.at_infinity_loose(&z) { PathStatus::AtInfinity } else { PathStatus::Truncated };
                        return result(status, steps);
                    }
                }
            }
        }
        if self.at_infinity(&z) {
            return result(PathStatus::AtInfinity, steps);
        }
        let x: Vec<C64> = z[1..].iter().map(|v| v / z[0]).collect();
        let (x, residual, ok) = refine(&self.tables, x, self.params.residual_tol);
        if ok && norm(&x) < self.params.divergence_norm {
            PathResult { index, status: PathStatus::Finite, steps, solution: Some(x), residual }
        } else if norm(&x) >= self.params.divergence_norm.sqrt() {
            result(PathStatus::AtInfinity, steps)
        } else {
            PathResult { residual, ..result(PathStatus::Failed, steps) }
        }
    }

    /// Classification of a stalled path: close to the hyperplane `z0 = 0`.
    fn at_infinity_loose(&self, z: &[C64]) -> bool {
        z[0].norm() * self.params.divergence_norm.sqrt() < norm(&z[1..])
    }
}
