//! Exact algorithms over the rationals: gcd, squarefree part and decomposition.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Poly;
use crate::error::{Error, Result};

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parsed = match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(s.into()))?;
            let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(s.into()))?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            BigRational::new(n, d)
        }
        None => BigRational::from_integer(s.parse().map_err(|_| Error::Parse(s.into()))?),
    };
    Ok(parsed)
}

/// Splits `p = content * primitive` with `primitive` an integer polynomial
/// whose coefficients have gcd 1 and positive leading coefficient.
pub fn content_primitive(p: &Poly<BigRational>) -> (BigRational, Vec<BigInt>) {
    if p.is_zero() {
        return (BigRational::zero(), Vec::new());
    }
    let den_lcm = p
        .coeffs()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p
        .coeffs()
        .iter()
        .map(|c| (c * BigRational::from_integer(den_lcm.clone())).to_integer())
        .collect();
    let mut g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if ints.last().unwrap().is_negative() {
        g = -g;
    }
    let prim = ints.into_iter().map(|c| c / &g).collect();
    (BigRational::new(g, den_lcm), prim)
}

fn primitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    if v.is_empty() {
        return v;
    }
    let mut g = v.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if v.last().unwrap().is_negative() {
        g = -g;
    }
    v.into_iter().map(|c| c / &g).collect()
}

/// Pseudo-remainder of `a` by `b` over the integers.
fn prem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lb = &b[db];
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        for c in r.iter_mut() {
            *c *= lb;
        }
        let shift = dr - db;
        for (j, bc) in b.iter().enumerate() {
            r[shift + j] -= &lr * bc;
        }
        while r.last().is_some_and(|c| c.is_zero()) {
            r.pop();
        }
    }
    r
}

fn int_to_poly(v: &[BigInt]) -> Poly<BigRational> {
    Poly::from_coeffs(
        v.iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect(),
    )
}

/// Monic gcd by a primitive (content-normalized) remainder sequence.
/// `gcd(0, 0)` is the zero polynomial.
pub fn gcd(a: &Poly<BigRational>, b: &Poly<BigRational>) -> Poly<BigRational> {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    let (_, mut x) = content_primitive(a);
    let (_, mut y) = content_primitive(b);
    if x.len() < y.len() {
        std::mem::swap(&mut x, &mut y);
    }
    loop {
        if y.len() == 1 {
            return Poly::one();
        }
        let r = primitive(prem(&x, &y));
        if r.is_empty() {
            return int_to_poly(&y).monic();
        }
        x = y;
        y = r;
    }
}

/// `a / gcd(a, a')`, monic.
pub fn squarefree_part(a: &Poly<BigRational>) -> Result<Poly<BigRational>> {
    if a.is_zero() {
        return Err(Error::ZeroInput);
    }
    let g = gcd(a, &a.derivative());
    let (q, r) = a.div_rem(&g);
    debug_assert!(r.is_zero());
    Ok(q.monic())
}

/// Yun's algorithm. Returns monic squarefree, pairwise coprime `f_1, f_2, ...`
/// with `monic(a) = prod f_i^i`; the last entry is nonconstant.
pub fn squarefree_decomposition(a: &Poly<BigRational>) -> Result<Vec<Poly<BigRational>>> {
    if a.is_zero() {
        return Err(Error::ZeroInput);
    }
    let a = a.monic();
    if a.degree() == Some(0) {
        return Ok(Vec::new());
    }
    let da = a.derivative();
    let c = gcd(&a, &da);
    let mut w = a.div_rem(&c).0;
    let mut y = da.div_rem(&c).0;
    let mut z = &y - &w.derivative();
    let mut out = Vec::new();
    while w.degree() != Some(0) {
        let g = gcd(&w, &z);
        w = w.div_rem(&g).0;
        y = z.div_rem(&g).0;
        z = &y - &w.derivative();
        out.push(g);
    }
    while out.last().is_some_and(|f| f.degree() == Some(0)) {
        out.pop();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(coeffs: &[i64]) -> Poly<BigRational> {
        Poly::from_i64s(coeffs)
    }

    #[test]
    fn squarefree_examples() {
        assert_eq!(squarefree_part(&q(&[1, -2, 1])).unwrap(), q(&[-1, 1]));
        assert_eq!(squarefree_part(&q(&[-1, 0, 1])).unwrap(), q(&[-1, 0, 1]));
        assert_eq!(squarefree_part(&q(&[-3, -5, -1, 1])).unwrap(), q(&[-3, -2, 1]));
        assert_eq!(squarefree_part(&Poly::zero()), Err(Error::ZeroInput));
    }

    #[test]
    fn gcd_with_derivative() {
        let a = q(&[-3, -5, -1, 1]);
        assert_eq!(gcd(&a, &a.derivative()), q(&[1, 1]));
        assert_eq!(gcd(&q(&[-1, 1]), &q(&[1, 1])), q(&[1]));
    }

    #[test]
    fn yun_decomposition() {
        // (x-3) (x+1)^2
        let f = squarefree_decomposition(&q(&[-3, -5, -1, 1])).unwrap();
        assert_eq!(f, vec![q(&[-3, 1]), q(&[1, 1])]);
    }

    #[test]
    fn parses_rational_text() {
        assert_eq!(
            parse_rational("-6/4").unwrap(),
            BigRational::new((-3).into(), 2.into())
        );
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    proptest! {
        #[test]
        fn squarefree_of_power(roots in prop::collection::btree_set(-9i64..9, 1..5), n in 1u32..=4) {
            let rs: Vec<BigRational> = roots.iter().map(|&r| BigRational::from_integer(r.into())).collect();
            let a = Poly::from_roots(&rs).scale(&BigRational::new(3.into(), 7.into()));
            prop_assert_eq!(squarefree_part(&a.pow(n)).unwrap(), a.monic());
        }
    }
}
