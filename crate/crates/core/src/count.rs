//! Closed-form count of equivariant covers, over arbitrary-precision integers.
//!
//! The count factors as the degree of the bilinear ramification map
//! (a binomial coefficient) times the degree of the power-product map
//! `(R_l) -> prod R_l^l`.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::problem::{ProblemInvariants, ProblemSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountBreakdown {
    #[serde(with = "decimal")]
    pub segre: BigUint,
    #[serde(with = "decimal")]
    pub rho: BigUint,
    #[serde(with = "decimal")]
    pub total: BigUint,
}

mod decimal {
    use num_bigint::BigUint;
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, i| acc * i)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::default();
    }
    let k = k.min(n - k);
    // running product stays integral: C(n - k + i, i) at step i
    (1..=k).fold(BigUint::one(), |acc, i| acc * (n - k + i) / i)
}

fn segre_from(spec: &ProblemSpec) -> BigUint {
    let r = spec.r as u64;
    binomial((spec.t0 + spec.tinf) / r, spec.t0 / r)
}

fn rho_from(spec: &ProblemSpec, inv: &ProblemInvariants) -> BigUint {
    let prod = spec
        .b
        .iter()
        .fold(BigUint::one(), |acc, &b| acc * (b as u64 - 1));
    let denom = inv
        .c
        .values()
        .fold(BigUint::one(), |acc, &c| acc * factorial(c as u64));
    prod * factorial(inv.k as u64) / denom
}

/// `C(t/r, t0/r)`
pub fn segre_degree(spec: &ProblemSpec) -> Result<BigUint> {
    spec.validate().into_result()?;
    Ok(segre_from(spec))
}

/// `prod (b_j - 1) * k! / prod c_l!`
pub fn rho_degree(spec: &ProblemSpec) -> Result<BigUint> {
    let inv = spec.validate().into_result()?;
    Ok(rho_from(spec, &inv))
}

pub fn cover_count(spec: &ProblemSpec) -> Result<CountBreakdown> {
    let inv = spec.validate().into_result()?;
    let segre = segre_from(spec);
    let rho = rho_from(spec, &inv);
    let total = &segre * &rho;
    Ok(CountBreakdown { segre, rho, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{enumerate_problems, CyclicData};
    use crate::Error;

    fn spec(r: u32, xi: &[u32], ord: &[i64], b: &[u32], t0: u64, tinf: u64) -> ProblemSpec {
        ProblemSpec {
            r,
            xi: xi.to_vec(),
            ord: ord.to_vec(),
            b: b.to_vec(),
            t0,
            tinf,
        }
    }

    fn n(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn segre_examples() {
        assert_eq!(segre_degree(&spec(2, &[1; 4], &[-1; 4], &[3, 3], 4, 0)).unwrap(), n(1));
        assert_eq!(segre_degree(&spec(2, &[1; 4], &[3, -1, -1, -1], &[3, 3], 2, 2)).unwrap(), n(2));
        assert_eq!(
            segre_degree(&spec(3, &[1, 1, 2, 2], &[-2, -2, 2, -1], &[2, 3], 3, 0)).unwrap(),
            n(1)
        );
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho_degree(&spec(2, &[1; 4], &[-1; 4], &[3, 3], 4, 0)).unwrap(), n(4));
        assert_eq!(rho_degree(&spec(2, &[1; 4], &[1, 1, -1, -1], &[2, 2], 0, 0)).unwrap(), n(1));
        assert_eq!(
            rho_degree(&spec(3, &[1, 1, 2, 2], &[-2, -2, 2, -1], &[2, 3], 3, 0)).unwrap(),
            n(4)
        );
    }

    #[test]
    fn cover_count_examples() {
        let c = cover_count(&spec(2, &[1; 4], &[3, -1, -1, -1], &[3, 3], 2, 2)).unwrap();
        assert_eq!((c.segre, c.rho, c.total), (n(2), n(4), n(8)));
        let c = cover_count(&spec(3, &[1, 1, 2, 2], &[-2, -2, 2, -1], &[2, 3], 3, 0)).unwrap();
        assert_eq!(c.total, n(4));
        assert!(matches!(
            cover_count(&spec(2, &[1; 4], &[-1; 4], &[3, 3], 3, 0)),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn hyperelliptic_odd_covers() {
        for g in 1..=6usize {
            let m = 2 * g + 2;
            // pole orders 2 n_i + 1 with sum n_i = g - 1, spread two ways
            let mut lumped = vec![-1i64; m];
            lumped[0] = -(2 * g as i64 - 1);
            let mut spread = vec![-1i64; m];
            for n in spread.iter_mut().take(g - 1) {
                *n = -3;
            }
            for ord in [lumped, spread] {
                let s = spec(2, &vec![1; m], &ord, &vec![3; 2 * g], 4 * g as u64, 0);
                assert_eq!(cover_count(&s).unwrap().total, BigUint::from(2u32).pow(2 * g as u32));
            }
        }
    }

    #[test]
    fn binomial_matches_pascal() {
        let mut row = vec![n(1)];
        for nn in 1..30u64 {
            let mut next = vec![n(1); nn as usize + 1];
            for k in 1..nn as usize {
                next[k] = &row[k - 1] + &row[k];
            }
            row = next;
            for k in 0..=nn {
                assert_eq!(binomial(nn, k), row[k as usize]);
            }
        }
    }

    #[test]
    fn json_uses_decimal_strings() {
        let c = cover_count(&spec(2, &[1; 4], &[3, -1, -1, -1], &[3, 3], 2, 2)).unwrap();
        assert_eq!(
            serde_json::to_string(&c).unwrap(),
            r#"{"segre":"2","rho":"4","total":"8"}"#
        );
    }

    #[test]
    fn count_properties_on_enumeration() {
        for base in [
            CyclicData::new(2, vec![1; 4]).unwrap(),
            CyclicData::new(3, vec![1, 1, 2, 2]).unwrap(),
        ] {
            let all = enumerate_problems(&base, 7);
            for p in &all {
                let c = cover_count(p).unwrap();
                assert_eq!(c.total, &c.segre * &c.rho);
                if p.t0 == 0 || p.tinf == 0 {
                    assert_eq!(c.segre, n(1));
                }
                // swapping fibers and negating orders is again a valid problem over
                // the conjugate monodromy with the same count
                let swapped = ProblemSpec {
                    xi: p.xi.iter().map(|&x| p.r - x).collect(),
                    ord: p.ord.iter().map(|o| -o).collect(),
                    t0: p.tinf,
                    tinf: p.t0,
                    ..p.clone()
                };
                assert_eq!(cover_count(&swapped).unwrap().total, c.total);
                // B as a multiset
                let mut rev = p.clone();
                rev.b.reverse();
                assert_eq!(cover_count(&rev).unwrap().total, c.total);
            }
            // independence from order magnitudes
            let mut by_shape: std::collections::BTreeMap<(Vec<u32>, u64, u64), BigUint> = Default::default();
            for p in &all {
                let mut b = p.b.clone();
                b.sort();
                let total = cover_count(p).unwrap().total;
                let prev = by_shape.entry((b, p.t0, p.tinf)).or_insert_with(|| total.clone());
                assert_eq!(*prev, total);
            }
        }
    }
}
