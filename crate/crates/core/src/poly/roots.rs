//! Simultaneous root finding (Aberth-Ehrlich) with multiplicity clustering.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::{complex_recip, Poly, Real};
use crate::error::{Error, Result};

const MAX_ITER: usize = 800;

/// A group of numerically coincident roots.
#[derive(Debug, Clone, PartialEq)]
pub struct RootCluster<F> {
    /// Mean of the member roots.
    pub center: Complex<F>,
    pub multiplicity: usize,
    /// `|a(center)|`
    pub residual: f64,
    /// `|a(center)| / sum |a_i| |center|^i`, the backward error at the center.
    pub relative_residual: f64,
}

fn horner<F: Real>(coeffs: &[Complex<F>], z: Complex<F>) -> (Complex<F>, Complex<F>) {
    let mut p = Complex::zero();
    let mut dp = Complex::zero();
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + *c;
    }
    (p, dp)
}

fn abs_scale<F: Real>(coeffs: &[Complex<F>], z: Complex<F>) -> F {
    let r = z.norm();
    coeffs
        .iter()
        .rev()
        .fold(F::zero(), |acc, c| acc * r + c.norm())
}

fn aberth<F: Real>(coeffs: &[Complex<F>]) -> Vec<Complex<F>> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n].norm();
    // Fujiwara-style radius for the starting circle.
    let mut rho = F::zero();
    for k in 1..=n {
        let c = coeffs[n - k].norm() / lead;
        if c > F::zero() {
            rho = rho.max(c.powf(F::one() / F::from_f64(k as f64)));
        }
    }
    if rho == F::zero() {
        return vec![Complex::zero(); n];
    }
    let two_pi = F::from_f64(std::f64::consts::TAU);
    let mut z: Vec<Complex<F>> = (0..n)
        .map(|k| {
            let theta = two_pi * F::from_f64(k as f64) / F::from_f64(n as f64) + F::from_f64(0.7);
            Complex::from_polar(rho, theta)
        })
        .collect();
    let tol = F::from_f64(16.0 * F::unit_roundoff() * n as f64);
    let mut done = vec![false; n];
    for _ in 0..MAX_ITER {
        let mut all = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (p, dp) = horner(coeffs, z[k]);
            if p.norm() <= tol * abs_scale(coeffs, z[k]) {
                done[k] = true;
                continue;
            }
            all = false;
            let ratio = p * complex_recip(dp);
            let mut sum = Complex::<F>::zero();
            for j in 0..n {
                if j != k {
                    let diff = z[k] - z[j];
                    if diff != Complex::zero() {
                        sum = sum + complex_recip(diff);
                    }
                }
            }
            let denom = Complex::<F>::one() - ratio * sum;
            let step = if denom.norm() > F::zero() && dp != Complex::zero() {
                ratio * complex_recip(denom)
            } else {
                Complex::new(F::from_f64(1e-3), F::from_f64(1e-3))
            };
            z[k] = z[k] - step;
        }
        if all {
            break;
        }
    }
    z
}

/// All complex roots of `a`, grouped into clusters.
///
/// Two roots belong to the same cluster when their distance is at most
/// `cluster_radius * max(1, |z|)` (single linkage). A pair in different
/// clusters within twice that distance makes the grouping ambiguous and
/// yields [`Error::PrecisionExhausted`]. Clusters are sorted by real part,
/// then imaginary part, of the center.
pub fn roots_clustered<F: Real>(a: &Poly<Complex<F>>, cluster_radius: f64) -> Result<Vec<RootCluster<F>>> {
    let Some(n) = a.degree() else {
        return Err(Error::ZeroInput);
    };
    if n == 0 {
        return Ok(Vec::new());
    }
    let coeffs = a.coeffs();
    if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::PrecisionExhausted("non-finite coefficient".into()));
    }
    let roots = if n == 1 {
        vec![-coeffs[0] * complex_recip(coeffs[1])]
    } else {
        aberth(coeffs)
    };
    if roots.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::PrecisionExhausted("root iteration diverged".into()));
    }

    let thr: Vec<f64> = roots
        .iter()
        .map(|z| cluster_radius * z.norm().to_f64().max(1.0))
        .collect();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let dist = |i: usize, j: usize| (roots[i] - roots[j]).norm().to_f64();
    for i in 0..n {
        for j in i + 1..n {
            if dist(i, j) <= thr[i].max(thr[j]) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if find(&mut parent, i) != find(&mut parent, j) && dist(i, j) <= 2.0 * thr[i].max(thr[j]) {
                return Err(Error::PrecisionExhausted(format!(
                    "roots {:?} and {:?} are {:.3e} apart, inside the guard band of radius {:.3e}",
                    roots[i],
                    roots[j],
                    dist(i, j),
                    thr[i].max(thr[j])
                )));
            }
        }
    }

    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, members)) => members.push(i),
            None => groups.push((r, vec![i])),
        }
    }
    let mut clusters: Vec<RootCluster<F>> = groups
        .into_iter()
        .map(|(_, members)| {
            let m = members.len();
            let sum = members
                .iter()
                .fold(Complex::<F>::zero(), |acc, &i| acc + roots[i]);
            let center = sum * F::from_f64(m as f64).recip_accurate();
            let (p, _) = horner(coeffs, center);
            let scale = abs_scale(coeffs, center).to_f64();
            let residual = p.norm().to_f64();
            RootCluster {
                center,
                multiplicity: m,
                residual,
                relative_residual: if scale > 0.0 { residual / scale } else { residual },
            }
        })
        .collect();
    clusters.sort_by(|a, b| {
        let (ar, ai) = (a.center.re.to_f64(), a.center.im.to_f64());
        let (br, bi) = (b.center.re.to_f64(), b.center.im.to_f64());
        ar.total_cmp(&br).then(ai.total_cmp(&bi))
    });
    Ok(clusters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rational_to_complex, squarefree_decomposition, ComplexDd};
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn cpoly(coeffs: &[f64]) -> Poly<C> {
        Poly::from_coeffs(coeffs.iter().map(|&c| C::new(c, 0.0)).collect())
    }

    fn summary(cl: &[RootCluster<f64>]) -> Vec<(f64, f64, usize)> {
        cl.iter()
            .map(|c| (c.center.re, c.center.im, c.multiplicity))
            .collect()
    }

    fn assert_clusters(cl: &[RootCluster<f64>], want: &[(f64, usize)]) {
        assert_eq!(cl.len(), want.len(), "{:?}", summary(cl));
        for (c, (root, m)) in cl.iter().zip(want) {
            assert!((c.center - C::new(*root, 0.0)).norm() < 1e-7, "{:?}", summary(cl));
            assert_eq!(c.multiplicity, *m);
        }
    }

    #[test]
    fn simple_and_double_roots() {
        assert_clusters(&roots_clustered(&cpoly(&[-1.0, 0.0, 1.0]), 1e-6).unwrap(), &[(-1.0, 1), (1.0, 1)]);
        assert_clusters(&roots_clustered(&cpoly(&[4.0, -4.0, 1.0]), 1e-6).unwrap(), &[(2.0, 2)]);
        assert_clusters(
            &roots_clustered(&cpoly(&[-3.0, -5.0, -1.0, 1.0]), 1e-6).unwrap(),
            &[(-1.0, 2), (3.0, 1)],
        );
    }

    #[test]
    fn zero_polynomial_is_rejected() {
        assert_eq!(roots_clustered::<f64>(&Poly::zero(), 1e-6), Err(Error::ZeroInput));
        assert!(roots_clustered(&cpoly(&[5.0]), 1e-6).unwrap().is_empty());
    }

    #[test]
    fn guard_band_is_ambiguous() {
        // roots 1 and 1 + 1.5e-6 with radius 1e-6
        let p = Poly::from_roots(&[C::new(1.0, 0.0), C::new(1.0 + 1.5e-6, 0.0)]);
        assert!(matches!(roots_clustered(&p, 1e-6), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn extended_precision_resolves_quadruple_root() {
        let r: ComplexDd = Complex::new(1.5.into(), 0.0.into());
        let p = Poly::linear_factor(r).pow(4);
        let cl = roots_clustered(&p, 1e-6).unwrap();
        assert_eq!(cl.len(), 1);
        assert_eq!(cl[0].multiplicity, 4);
    }

    /// Multiplicities from clustering agree with Yun's exact decomposition.
    #[test]
    fn multiplicities_match_exact_squarefree_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let mut roots: Vec<i64> = Vec::new();
            let mut p = Poly::<BigRational>::one();
            let mut deg = 0;
            while deg < 12 {
                let r = loop {
                    let r = rng.gen_range(-6i64..=6);
                    if !roots.contains(&r) {
                        break r;
                    }
                };
                let m = rng.gen_range(1u32..=3).min(12 - deg);
                roots.push(r);
                p = &p * &Poly::linear_factor(BigRational::from_integer(r.into())).pow(m);
                deg += m;
                if rng.gen_bool(0.3) {
                    break;
                }
            }
            let exact = squarefree_decomposition(&p).unwrap();
            let mut want: Vec<usize> = exact
                .iter()
                .enumerate()
                .flat_map(|(i, f)| std::iter::repeat_n(i + 1, f.degree().unwrap()))
                .collect();
            want.sort();

            let pd: Poly<ComplexDd> = p.map(rational_to_complex);
            let mut got: Vec<usize> = roots_clustered(&pd, 1e-4)
                .unwrap()
                .iter()
                .map(|c| c.multiplicity)
                .collect();
            got.sort();
            assert_eq!(got, want, "{p}");

            let pf: Poly<C> = p.map(rational_to_complex);
            let mut got: Vec<usize> = roots_clustered(&pf, 2e-3)
                .unwrap()
                .iter()
                .map(|c| c.multiplicity)
                .collect();
            got.sort();
            assert_eq!(got, want, "{p}");
        }
    }
}
