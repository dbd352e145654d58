//! The square coefficient system `psi(P_0, P_inf) - mu * prod R_l^l = 0`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{complex_from_f64, Real};
use crate::problem::ProblemSpec;

pub type C64 = Complex<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    P0,
    Pinf,
    R(u32),
    Mu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Block {
    pub kind: BlockKind,
    pub start: usize,
    pub len: usize,
}

impl Block {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Unknowns are ordered `[P_0 | P_inf | R_l for l in L ascending | mu]`.
/// Equations are the coefficients `x^0 .. x^b`, then one normalization
/// `nu_B . block = 1` per projective block.
#[derive(Debug, Clone)]
pub struct PolySystem {
    pub spec: ProblemSpec,
    pub seed: u64,
    pub lambda: Vec<C64>,
    pub blocks: Vec<Block>,
    /// One unit-norm functional per block except `mu`.
    pub normalizations: Vec<Vec<C64>>,
    pub b: usize,
    pub n0: usize,
    pub ninf: usize,
    /// `(l, c_l)` ascending in `l`.
    pub factors: Vec<(u32, usize)>,
    /// Random constant of the start-system deformation.
    pub gamma: C64,
    /// Random affine chart on the homogenized unknowns `(z0, z)`.
    pub patch: Vec<C64>,
}

fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// `m` points area-uniform on `0.5 <= |z| <= 2`, pairwise at least `1e-2` apart.
pub fn sample_lambda(rng: &mut ChaCha8Rng, m: usize) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::with_capacity(m);
    while out.len() < m {
        let radius = (0.25 + 3.75 * rng.gen::<f64>()).sqrt();
        let z = C64::from_polar(radius, 2.0 * PI * rng.gen::<f64>());
        if out.iter().all(|w| (w - z).norm() >= 1e-2) {
            out.push(z);
        }
    }
    out
}

/// Seed of trial `trial` in a run seeded with `seed`.
pub fn trial_seed(seed: u64, trial: u32) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng.next_u64()
}

/// Builds the system for a valid spec; `lambda` is drawn from `seed`.
pub fn build_system(spec: &ProblemSpec, seed: u64) -> Result<PolySystem> {
    spec.validate().into_result()?;
    build_system_unchecked(spec, seed)
}

/// As [`build_system`] but only checks that the block sizes make sense, so
/// that unbalanced data can reach the precheck in [`PolySystem::check_balance`].
pub fn build_system_unchecked(spec: &ProblemSpec, seed: u64) -> Result<PolySystem> {
    let r = spec.r as u64;
    if r == 0 || spec.xi.len() != spec.ord.len() || spec.b.iter().any(|&b| b < 2) {
        return Err(Error::InvalidSpec("malformed problem shape".into()));
    }
    let n0 = (spec.t0 / r) as usize;
    let ninf = (spec.tinf / r) as usize;
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &bj in &spec.b {
        *counts.entry(bj - 1).or_default() += 1;
    }
    let factors: Vec<(u32, usize)> = counts.into_iter().collect();
    let b: usize = factors.iter().map(|&(l, c)| l as usize * c).sum();

    let mut blocks = vec![
        Block { kind: BlockKind::P0, start: 0, len: n0 + 1 },
        Block { kind: BlockKind::Pinf, start: n0 + 1, len: ninf + 1 },
    ];
    let mut start = n0 + ninf + 2;
    for &(l, c) in &factors {
        blocks.push(Block { kind: BlockKind::R(l), start, len: c + 1 });
        start += c + 1;
    }
    blocks.push(Block { kind: BlockKind::Mu, start, len: 1 });

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambda = sample_lambda(&mut rng, spec.ord.len());
    let normalizations = blocks[..blocks.len() - 1]
        .iter()
        .map(|blk| unit_vector(&mut rng, blk.len))
        .collect();
    let gamma = C64::from_polar(1.0, 2.0 * PI * rng.gen::<f64>());
    let patch = unit_vector(&mut rng, start + 2);
    Ok(PolySystem {
        spec: spec.clone(),
        seed,
        lambda,
        blocks,
        normalizations,
        b,
        n0,
        ninf,
        factors,
        gamma,
        patch,
    })
}

impl PolySystem {
    pub fn n_unknowns(&self) -> usize {
        self.blocks.iter().map(|b| b.len).sum()
    }

    pub fn n_equations(&self) -> usize {
        self.b + 1 + self.normalizations.len()
    }

    pub fn block(&self, kind: BlockKind) -> Block {
        *self.blocks.iter().find(|b| b.kind == kind).expect("block exists")
    }

    /// Degree of every coefficient equation: `1 + sum_{l in L} l`.
    pub fn coefficient_degree(&self) -> u32 {
        1 + self.factors.iter().map(|&(l, _)| l).sum::<u32>()
    }

    pub fn equation_degrees(&self) -> Vec<u32> {
        let mut d = vec![self.coefficient_degree(); self.b + 1];
        d.extend(std::iter::repeat_n(1, self.normalizations.len()));
        d
    }

    /// Number of start paths of the total-degree homotopy.
    pub fn bezout_number(&self) -> u64 {
        self.equation_degrees().iter().map(|&d| d as u64).product()
    }

    /// Symbolic check, before any tracking, that the system is square and
    /// that `psi` has no terms above `x^b`.
    pub fn check_balance(&self) -> Result<()> {
        let sum_ord: i64 = self.spec.ord.iter().sum();
        let expected = self.spec.tinf as i64 - self.spec.t0 as i64;
        let r = self.spec.r as u64;
        let divisible = self.spec.t0.is_multiple_of(r) && self.spec.tinf.is_multiple_of(r);
        // the only candidate for x^{b+1} is the top coefficient of psi
        let top = self.spec.ord.len() + self.n0 + self.ninf;
        if !divisible || sum_ord != expected || top != self.b + 2 {
            return Err(Error::BalanceViolated { b: self.b, sum_ord, expected });
        }
        if self.n_equations() != self.n_unknowns() {
            return Err(Error::InvalidSpec("system is not square".into()));
        }
        Ok(())
    }

    pub(crate) fn tables<F: Real>(&self) -> Tables<F> {
        let lambda: Vec<Complex<F>> = self.lambda.iter().map(|&z| complex_from_f64(z)).collect();
        let m = lambda.len();
        let zero = Complex::new(F::zero(), F::zero());
        let one = Complex::new(F::one(), F::zero());
        let int = |n: i64| Complex::new(F::from_f64(n as f64), F::zero());
        // A = sum ord_i prod_{j != i}(x - lambda_j), L = prod (x - lambda_i)
        let mut a = vec![zero; m];
        for i in 0..m {
            let mut prod = vec![one];
            for (j, l) in lambda.iter().enumerate() {
                if j != i {
                    prod = mul_linear(&prod, *l);
                }
            }
            for (k, c) in prod.into_iter().enumerate() {
                a[k] = a[k] + c * int(self.spec.ord[i]);
            }
        }
        let mut lpoly = vec![one];
        for l in &lambda {
            lpoly = mul_linear(&lpoly, *l);
        }
        // W_{u,v} = A x^{u+v} + r (u - v) L x^{u+v-1}, truncated to x^b
        let width = self.b + 1;
        let mut w = vec![zero; (self.n0 + 1) * (self.ninf + 1) * width];
        for u in 0..=self.n0 {
            for v in 0..=self.ninf {
                let base = (u * (self.ninf + 1) + v) * width;
                for (k, &c) in a.iter().enumerate() {
                    if k + u + v < width {
                        w[base + k + u + v] = w[base + k + u + v] + c;
                    }
                }
                if u != v {
                    let s = int(self.spec.r as i64 * (u as i64 - v as i64));
                    for (k, &c) in lpoly.iter().enumerate() {
                        let e = k + u + v - 1;
                        if e < width {
                            w[base + e] = w[base + e] + s * c;
                        }
                    }
                }
            }
        }
        Tables {
            w,
            nu: self
                .normalizations
                .iter()
                .map(|v| v.iter().map(|&z| complex_from_f64(z)).collect())
                .collect(),
            blocks: self.blocks.clone(),
            factors: self.factors.clone(),
            b: self.b,
            n0: self.n0,
            ninf: self.ninf,
            degree: self.coefficient_degree(),
        }
    }
}

fn mul_linear<F: Real>(p: &[Complex<F>], root: Complex<F>) -> Vec<Complex<F>> {
    let zero = Complex::new(F::zero(), F::zero());
    let mut out = vec![zero; p.len() + 1];
    for (k, &c) in p.iter().enumerate() {
        out[k + 1] = out[k + 1] + c;
        out[k] = out[k] - c * root;
    }
    out
}

fn conv<F: Real>(a: &[Complex<F>], b: &[Complex<F>]) -> Vec<Complex<F>> {
    let zero = Complex::new(F::zero(), F::zero());
    let mut out = vec![zero; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = out[i + j] + x * y;
        }
    }
    out
}

fn power<F: Real>(a: &[Complex<F>], e: u32) -> Vec<Complex<F>> {
    let mut out = vec![Complex::new(F::one(), F::zero())];
    for _ in 0..e {
        out = conv(&out, a);
    }
    out
}

/// Precomputed coefficient tables in working precision `F`.
#[derive(Debug, Clone)]
pub(crate) struct Tables<F> {
    w: Vec<Complex<F>>,
    nu: Vec<Vec<Complex<F>>>,
    pub blocks: Vec<Block>,
    factors: Vec<(u32, usize)>,
    pub b: usize,
    n0: usize,
    ninf: usize,
    pub degree: u32,
}

impl<F: Real> Tables<F> {
    pub fn n(&self) -> usize {
        self.blocks.iter().map(|b| b.len).sum()
    }

    /// Homogenized system at `(z0, z)`. Returns the values and the row-major
    /// Jacobian with columns `(z0, z_1, ..., z_n)`.
    pub fn eval_homogeneous(&self, z0: Complex<F>, z: &[Complex<F>]) -> (Vec<Complex<F>>, Vec<Complex<F>>) {
        let n = self.n();
        let cols = n + 1;
        let zero = Complex::new(F::zero(), F::zero());
        let width = self.b + 1;
        let mut values = vec![zero; n];
        let mut jac = vec![zero; n * cols];

        let p = &z[self.blocks[0].range()];
        let q = &z[self.blocks[1].range()];
        let mu = z[n - 1];

        let mut psi = vec![zero; width];
        let mut dp = vec![zero; (self.n0 + 1) * width];
        let mut dq = vec![zero; (self.ninf + 1) * width];
        for u in 0..=self.n0 {
            for v in 0..=self.ninf {
                let base = (u * (self.ninf + 1) + v) * width;
                let pq = p[u] * q[v];
                for c in 0..width {
                    let wc = self.w[base + c];
                    psi[c] = psi[c] + pq * wc;
                    dp[u * width + c] = dp[u * width + c] + q[v] * wc;
                    dq[v * width + c] = dq[v * width + c] + p[u] * wc;
                }
            }
        }

        // rho and, per factor, rho / R_l * l
        let rs: Vec<&[Complex<F>]> = self.blocks[2..self.blocks.len() - 1]
            .iter()
            .map(|blk| &z[blk.range()])
            .collect();
        let powers: Vec<Vec<Complex<F>>> = rs
            .iter()
            .zip(&self.factors)
            .map(|(r, &(l, _))| power(r, l))
            .collect();
        let rho = powers.iter().fold(vec![Complex::new(F::one(), F::zero())], |acc, p| conv(&acc, p));
        let partials: Vec<Vec<Complex<F>>> = (0..rs.len())
            .map(|i| {
                let l = self.factors[i].0;
                let mut acc = power(rs[i], l - 1);
                let scale = Complex::new(F::from_f64(l as f64), F::zero());
                acc.iter_mut().for_each(|c| *c = *c * scale);
                for (j, pw) in powers.iter().enumerate() {
                    if j != i {
                        acc = conv(&acc, pw);
                    }
                }
                acc
            })
            .collect();

        let dm2 = self.degree as i32 - 2;
        let z0pow = z0.powi(dm2);
        let dz0pow = if dm2 > 0 {
            z0.powi(dm2 - 1) * Complex::new(F::from_f64(dm2 as f64), F::zero())
        } else {
            zero
        };
        for c in 0..width {
            let row = c * cols;
            let rho_c = rho.get(c).copied().unwrap_or(zero);
            values[c] = psi[c] * z0pow - mu * rho_c;
            jac[row] = psi[c] * dz0pow;
            for u in 0..=self.n0 {
                jac[row + 1 + self.blocks[0].start + u] = dp[u * width + c] * z0pow;
            }
            for v in 0..=self.ninf {
                jac[row + 1 + self.blocks[1].start + v] = dq[v * width + c] * z0pow;
            }
            for (i, blk) in self.blocks[2..self.blocks.len() - 1].iter().enumerate() {
                for j in 0..blk.len.min(c + 1) {
                    if let Some(&d) = partials[i].get(c - j) {
                        jac[row + 1 + blk.start + j] = -(mu * d);
                    }
                }
            }
            jac[row + n] = -rho_c;
        }
        for (k, (blk, nu)) in self.blocks.iter().zip(&self.nu).enumerate() {
            let eq = width + k;
            let row = eq * cols;
            let mut s = -z0;
            for (j, &coef) in nu.iter().enumerate() {
                s = s + coef * z[blk.start + j];
                jac[row + 1 + blk.start + j] = coef;
            }
            values[eq] = s;
            jac[row] = -Complex::new(F::one(), F::zero());
        }
        (values, jac)
    }

    /// Affine system (`z0 = 1`) with its square Jacobian.
    pub fn eval_affine(&self, x: &[Complex<F>]) -> (Vec<Complex<F>>, Vec<Complex<F>>) {
        let n = self.n();
        let (values, hjac) = self.eval_homogeneous(Complex::new(F::one(), F::zero()), x);
        let mut jac = Vec::with_capacity(n * n);
        for row in 0..n {
            jac.extend_from_slice(&hjac[row * (n + 1) + 1..(row + 1) * (n + 1)]);
        }
        (values, jac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;
    use crate::rampoly::{build_psi, build_rho, CoverFunction};

    fn spec(r: u32, xi: &[u32], ord: &[i64], b: &[u32], t0: u64, tinf: u64) -> ProblemSpec {
        ProblemSpec { r, xi: xi.to_vec(), ord: ord.to_vec(), b: b.to_vec(), t0, tinf }
    }

    fn sizes(sys: &PolySystem) -> Vec<usize> {
        sys.blocks.iter().map(|b| b.len).collect()
    }

    #[test]
    fn block_layout_examples() {
        let a = build_system(&spec(2, &[1; 4], &[-1; 4], &[3, 3], 4, 0), 1).unwrap();
        assert_eq!(sizes(&a), vec![3, 1, 3, 1]);
        assert_eq!((a.n_equations(), a.n_unknowns()), (8, 8));
        assert_eq!(a.bezout_number(), 243);
        let c = build_system(&spec(3, &[1, 1, 2, 2], &[-2, -2, 2, -1], &[2, 3], 3, 0), 1).unwrap();
        assert_eq!(sizes(&c), vec![2, 1, 2, 2, 1]);
        assert_eq!((c.n_equations(), c.n_unknowns()), (8, 8));
        assert_eq!(c.bezout_number(), 256);
        assert!(a.check_balance().is_ok() && c.check_balance().is_ok());
    }

    #[test]
    fn lambda_sampling_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let l = sample_lambda(&mut rng, 8);
            assert!(l.iter().all(|z| (0.5 - 1e-12..=2.0 + 1e-12).contains(&z.norm())));
            for i in 0..8 {
                for j in i + 1..8 {
                    assert!((l[i] - l[j]).norm() >= 1e-2);
                }
            }
        }
    }

    #[test]
    fn normalizations_are_unit() {
        let s = build_system(&spec(2, &[1; 4], &[3, -1, -1, -1], &[3, 3], 2, 2), 9).unwrap();
        for nu in &s.normalizations {
            assert!((nu.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let t = build_system(&spec(2, &[1; 4], &[3, -1, -1, -1], &[3, 3], 2, 2), 9).unwrap();
        assert_eq!(s.lambda, t.lambda);
        assert_ne!(trial_seed(0, 0), trial_seed(0, 1));
    }

    #[test]
    fn unbalanced_rejected_before_tracking() {
        let bad = build_system_unchecked(&spec(2, &[1; 4], &[-1; 4], &[3, 3], 2, 0), 1).unwrap();
        assert!(matches!(bad.check_balance(), Err(Error::BalanceViolated { .. })));
        assert!(build_system(&spec(2, &[1; 4], &[-1; 4], &[3, 3], 2, 0), 1).is_err());
    }

    // oracle: psi and rho assembled with the exact polynomial code
    #[test]
    fn evaluation_matches_polynomial_assembly() {
        let s = build_system(&spec(3, &[1, 1, 2, 2], &[-2, -2, 2, -1], &[2, 3], 3, 0), 5).unwrap();
        let tables = s.tables::<f64>();
        let n = s.n_unknowns();
        let x: Vec<C64> = (0..n).map(|i| C64::new(0.3 * i as f64 - 0.7, 0.2 + 0.1 * (i * i) as f64)).collect();
        let (vals, jac) = tables.eval_affine(&x);

        let blk = |k: BlockKind| Poly::from_coeffs(x[s.block(k).range()].to_vec());
        let cf = CoverFunction::new(s.lambda.clone(), s.spec.ord.clone(), blk(BlockKind::P0), blk(BlockKind::Pinf), 3).unwrap();
        let psi = build_psi(&cf).unwrap();
        let rho = build_rho(&BTreeMap::from([(1, blk(BlockKind::R(1))), (2, blk(BlockKind::R(2)))]));
        let mu = x[n - 1];
        for c in 0..=s.b {
            assert!((vals[c] - (psi.coeff(c) - mu * rho.coeff(c))).norm() < 1e-12);
        }
        assert!(psi.coeff(s.b + 1).norm() < 1e-12);

        // Jacobian against central differences
        let h = 1e-6;
        for j in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let (vp, _) = tables.eval_affine(&xp);
            let (vm, _) = tables.eval_affine(&xm);
            for i in 0..n {
                let fd = (vp[i] - vm[i]) / (2.0 * h);
                assert!((fd - jac[i * n + j]).norm() < 1e-6 * (1.0 + fd.norm()), "entry {i},{j}");
            }
        }
    }

    #[test]
    fn homogeneous_jacobian_column_zero() {
        let s = build_system(&spec(2, &[1; 4], &[-1; 4], &[3, 3], 4, 0), 2).unwrap();
        let tables = s.tables::<f64>();
        let n = s.n_unknowns();
        let z: Vec<C64> = (0..n).map(|i| C64::new(1.0 / (i + 1) as f64, 0.3)).collect();
        let z0 = C64::new(0.8, -0.4);
        let (_, jac) = tables.eval_homogeneous(z0, &z);
        let h = 1e-6;
        let (vp, _) = tables.eval_homogeneous(z0 + h, &z);
        let (vm, _) = tables.eval_homogeneous(z0 - h, &z);
        for i in 0..n {
            let fd = (vp[i] - vm[i]) / (2.0 * h);
            assert!((fd - jac[i * (n + 1)]).norm() < 1e-6 * (1.0 + fd.norm()));
        }
    }
}
