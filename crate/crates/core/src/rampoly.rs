//! The ramification polynomial of the quotient map and the power-product target.
//!
//! A candidate quotient map is
//! `h'(x) = prod (x - lambda_i)^{ord_i} * (P_0(x) / P_inf(x))^r`.
//! Away from the `lambda_i` and the roots of `P_0`, `P_inf`, its ramification
//! points are the roots of
//!
//! ```text
//! psi = sum_i ord_i * prod_{j != i} (x - lambda_j) * P_0 * P_inf
//!       + r * prod_i (x - lambda_i) * (P_0' P_inf - P_0 P_inf')
//! ```
//!
//! and a root of multiplicity `l` is a ramification point of index `l + 1`.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_rational::BigRational;
use num_traits::Zero;
use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::poly::{
    coeffs_from_json, complex_to_f64, gcd, roots_clustered, Coeff, FieldCoeff, JsonCoeff,
    JsonCoeffs, Poly, Real,
};

/// `h'` given by its zeros/poles at the `lambda_i` and the pair `(P_0, P_inf)`.
///
/// `deg0` and `deginf` are the nominal degrees `t0/r` and `tinf/r`; a
/// stored polynomial of lower degree has roots at `x = infinity`. When absent
/// they default to the actual degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverFunction<T: Coeff> {
    pub lambda: Vec<T>,
    pub ord: Vec<i64>,
    pub p0: Poly<T>,
    pub pinf: Poly<T>,
    pub r: u32,
    pub deg0: Option<usize>,
    pub deginf: Option<usize>,
}

impl<T: Coeff> CoverFunction<T> {
    pub fn new(lambda: Vec<T>, ord: Vec<i64>, p0: Poly<T>, pinf: Poly<T>, r: u32) -> Result<Self> {
        let cf = CoverFunction {
            lambda,
            ord,
            p0,
            pinf,
            r,
            deg0: None,
            deginf: None,
        };
        cf.check()?;
        Ok(cf)
    }

    pub fn with_nominal_degrees(mut self, deg0: usize, deginf: usize) -> Result<Self> {
        self.deg0 = Some(deg0);
        self.deginf = Some(deginf);
        self.check()?;
        Ok(self)
    }

    fn check(&self) -> Result<()> {
        if self.lambda.len() != self.ord.len() {
            return Err(Error::InvalidCover(format!(
                "{} lambdas but {} orders",
                self.lambda.len(),
                self.ord.len()
            )));
        }
        for i in 0..self.lambda.len() {
            for j in i + 1..self.lambda.len() {
                if self.lambda[i] == self.lambda[j] {
                    return Err(Error::InvalidCover(format!("lambda[{i}] = lambda[{j}]")));
                }
            }
        }
        if self.p0.is_zero() || self.pinf.is_zero() {
            return Err(Error::InvalidCover("P_0 and P_inf must be nonzero".into()));
        }
        if self.r < 1 {
            return Err(Error::InvalidCover("r must be positive".into()));
        }
        if self.deg0.is_some_and(|d| d < self.p0.degree().unwrap())
            || self.deginf.is_some_and(|d| d < self.pinf.degree().unwrap())
        {
            return Err(Error::InvalidCover("nominal degree below actual degree".into()));
        }
        Ok(())
    }

    pub fn nominal_deg0(&self) -> usize {
        self.deg0.unwrap_or_else(|| self.p0.degree().unwrap_or(0))
    }

    pub fn nominal_deginf(&self) -> usize {
        self.deginf.unwrap_or_else(|| self.pinf.degree().unwrap_or(0))
    }

    /// `sum ord_i + r (deg0 - deginf) = 0`, the condition for the top
    /// coefficients of the two summands of `psi` to cancel.
    pub fn is_balanced(&self) -> bool {
        let sum: i64 = self.ord.iter().sum();
        sum + self.r as i64 * (self.nominal_deg0() as i64 - self.nominal_deginf() as i64) == 0
    }

    /// Expected degree of `psi`: `m - 2 + t/r`.
    pub fn expected_b(&self) -> usize {
        (self.lambda.len() + self.nominal_deg0() + self.nominal_deginf()).saturating_sub(2)
    }

    /// `prod (x - lambda_i)`
    pub fn lambda_poly(&self) -> Poly<T> {
        Poly::from_roots(&self.lambda)
    }
}

fn powi<T: FieldCoeff>(x: &T, e: i64) -> T {
    let mut acc = T::one();
    for _ in 0..e.unsigned_abs() {
        acc = acc * x.clone();
    }
    if e < 0 {
        T::one() / acc
    } else {
        acc
    }
}

impl<T: FieldCoeff> CoverFunction<T> {
    /// `h'(x)`
    pub fn eval(&self, x: &T) -> T {
        let base = self
            .lambda
            .iter()
            .zip(&self.ord)
            .fold(T::one(), |acc, (l, &o)| acc * powi(&(x.clone() - l.clone()), o));
        let ratio = self.p0.eval(x) / self.pinf.eval(x);
        base * powi(&ratio, self.r as i64)
    }
}

/// The ramification polynomial `psi` of `h'`.
pub fn build_psi<T: Coeff>(cf: &CoverFunction<T>) -> Result<Poly<T>> {
    cf.check()?;
    let m = cf.lambda.len();
    let factors: Vec<Poly<T>> = cf.lambda.iter().map(|l| Poly::linear_factor(l.clone())).collect();
    let p0pinf = &cf.p0 * &cf.pinf;
    let mut first = Poly::zero();
    for i in 0..m {
        let others = (0..m)
            .filter(|&j| j != i)
            .fold(Poly::one(), |acc, j| &acc * &factors[j]);
        first = &first + &others.scale(&T::from_i64(cf.ord[i]));
    }
    let first = &first * &p0pinf;
    let wronskian = &(&cf.p0.derivative() * &cf.pinf) - &(&cf.p0 * &cf.pinf.derivative());
    let second = (&cf.lambda_poly() * &wronskian).scale(&T::from_i64(cf.r as i64));
    Ok(&first + &second)
}

/// `prod_l R_l^l` over the map `l -> R_l`.
pub fn build_rho<T: Coeff>(factors: &BTreeMap<u32, Poly<T>>) -> Poly<T> {
    factors
        .iter()
        .fold(Poly::one(), |acc, (&l, rl)| &acc * &rl.pow(l))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    P0,
    Pinf,
}

/// Why a pair `(P_0, P_inf)` lies outside the open set `U`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum UReason {
    CommonRoot,
    RootAtLambda { which: Which, index: usize },
    DoubleRoot { which: Which },
    CommonRootAtInfinity,
    DoubleRootAtInfinity { which: Which },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UMembership {
    pub inside: bool,
    pub reasons: Vec<UReason>,
}

impl UMembership {
    fn from_reasons(reasons: Vec<UReason>) -> Self {
        UMembership {
            inside: reasons.is_empty(),
            reasons,
        }
    }
}

fn infinity_reasons(mult0: usize, multinf: usize) -> Vec<UReason> {
    let mut out = Vec::new();
    if mult0 >= 1 && multinf >= 1 {
        out.push(UReason::CommonRootAtInfinity);
    }
    if mult0 >= 2 {
        out.push(UReason::DoubleRootAtInfinity { which: Which::P0 });
    }
    if multinf >= 2 {
        out.push(UReason::DoubleRootAtInfinity { which: Which::Pinf });
    }
    out
}

/// Exact membership test in `U` for rational data.
pub fn in_u_exact(cf: &CoverFunction<BigRational>) -> Result<UMembership> {
    cf.check()?;
    let mut reasons = Vec::new();
    if gcd(&cf.p0, &cf.pinf).degree() != Some(0) {
        reasons.push(UReason::CommonRoot);
    }
    for (which, p) in [(Which::P0, &cf.p0), (Which::Pinf, &cf.pinf)] {
        for (index, l) in cf.lambda.iter().enumerate() {
            if p.eval(l).is_zero() {
                reasons.push(UReason::RootAtLambda { which, index });
            }
        }
        if gcd(p, &p.derivative()).degree() != Some(0) {
            reasons.push(UReason::DoubleRoot { which });
        }
    }
    let mult0 = cf.nominal_deg0() - cf.p0.degree().unwrap();
    let multinf = cf.nominal_deginf() - cf.pinf.degree().unwrap();
    reasons.extend(infinity_reasons(mult0, multinf));
    Ok(UMembership::from_reasons(reasons))
}

/// Drops top coefficients with `|c| <= tol * max |c|`.
pub fn trim_relative<F: Real>(p: &Poly<Complex<F>>, tol: f64) -> Poly<Complex<F>> {
    let coeffs = p.coeffs();
    let max = coeffs.iter().map(|c| c.norm().to_f64()).fold(0.0, f64::max);
    let mut n = coeffs.len();
    while n > 1 && coeffs[n - 1].norm().to_f64() <= tol * max {
        n -= 1;
    }
    Poly::from_coeffs(coeffs[..n].to_vec())
}

fn near<F: Real>(a: Complex<F>, b: Complex<F>, tol: f64) -> bool {
    let scale = a.norm().to_f64().max(b.norm().to_f64()).max(1.0);
    (a - b).norm().to_f64() <= tol * scale
}

/// Numerical membership test in `U`. Coefficients below `tol` relative to the
/// largest are treated as zero; roots within `tol` (relative) coincide.
pub fn in_u_numeric<F: Real>(cf: &CoverFunction<Complex<F>>, tol: f64) -> Result<UMembership> {
    cf.check()?;
    let p0 = trim_relative(&cf.p0, tol);
    let pinf = trim_relative(&cf.pinf, tol);
    let roots0 = roots_clustered(&p0, tol)?;
    let rootsinf = roots_clustered(&pinf, tol)?;
    let mut reasons = Vec::new();
    if roots0
        .iter()
        .any(|a| rootsinf.iter().any(|b| near(a.center, b.center, tol)))
    {
        reasons.push(UReason::CommonRoot);
    }
    for (which, roots) in [(Which::P0, &roots0), (Which::Pinf, &rootsinf)] {
        for (index, l) in cf.lambda.iter().enumerate() {
            if roots.iter().any(|c| near(c.center, *l, tol)) {
                reasons.push(UReason::RootAtLambda { which, index });
            }
        }
        if roots.iter().any(|c| c.multiplicity > 1) {
            reasons.push(UReason::DoubleRoot { which });
        }
    }
    let mult0 = cf.nominal_deg0().saturating_sub(p0.degree().unwrap());
    let multinf = cf.nominal_deginf().saturating_sub(pinf.degree().unwrap());
    reasons.extend(infinity_reasons(mult0, multinf));
    Ok(UMembership::from_reasons(reasons))
}

/// One moving ramification point; `point == None` is `x = infinity`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchEntry {
    pub point: Option<[f64; 2]>,
    pub index: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchProfile {
    /// Sorted by real part, then imaginary part; infinity last.
    pub entries: Vec<BranchEntry>,
    /// Set when `(P_0, P_inf)` is not in `U`, so `psi` may have extraneous roots.
    pub outside_u: bool,
}

impl BranchProfile {
    /// Ramification indices as a sorted multiset.
    pub fn indices(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.entries.iter().map(|e| e.index).collect();
        v.sort_unstable();
        v
    }
}

/// Moving ramification of `h'`: roots of `psi` away from the `lambda_i` and
/// the roots of `P_0`, `P_inf`, with index `multiplicity + 1`, plus
/// `x = infinity` with index `b - deg psi + 1` when `deg psi < b`.
pub fn branch_profile<F: Real>(cf: &CoverFunction<Complex<F>>, cluster_radius: f64) -> Result<BranchProfile> {
    let psi = build_psi(cf)?;
    let b = cf.expected_b();
    let psi = if cf.is_balanced() {
        Poly::from_coeffs(psi.coeffs().iter().take(b + 1).cloned().collect())
    } else {
        psi
    };
    let psi = trim_relative(&psi, cluster_radius);
    let outside_u = !in_u_numeric(cf, cluster_radius).map(|u| u.inside).unwrap_or(false);

    let mut excluded: Vec<Complex<F>> = cf.lambda.clone();
    for p in [&cf.p0, &cf.pinf] {
        let p = trim_relative(p, cluster_radius);
        excluded.extend(roots_clustered(&p, cluster_radius)?.into_iter().map(|c| c.center));
    }

    let mut entries: Vec<BranchEntry> = roots_clustered(&psi, cluster_radius)?
        .into_iter()
        .filter(|c| !excluded.iter().any(|e| near(c.center, *e, cluster_radius)))
        .map(|c| {
            let z = complex_to_f64(c.center);
            BranchEntry {
                point: Some([z.re, z.im]),
                index: c.multiplicity as u32 + 1,
            }
        })
        .collect();
    let deg = psi.degree().unwrap_or(0);
    if deg < b {
        entries.push(BranchEntry {
            point: None,
            index: (b - deg + 1) as u32,
        });
    }
    Ok(BranchProfile { entries, outside_u })
}

/// `h'` at a profile point, in double precision; `None` when not finite.
pub fn critical_value<F: Real>(cf: &CoverFunction<Complex<F>>, point: Option<[f64; 2]>) -> Option<Complex<f64>> {
    let value = match point {
        Some([re, im]) => complex_to_f64(cf.eval(&Complex::new(F::from_f64(re), F::from_f64(im)))),
        None => {
            // h'(infinity) is finite only when both polynomials keep their nominal degree
            if cf.p0.degree() != Some(cf.nominal_deg0()) || cf.pinf.degree() != Some(cf.nominal_deginf()) {
                return None;
            }
            let ratio = complex_to_f64(*cf.p0.leading()? / *cf.pinf.leading()?);
            ratio.powi(cf.r as i32)
        }
    };
    (value.re.is_finite() && value.im.is_finite()).then_some(value)
}

impl<T: Coeff + JsonCoeff> Serialize for CoverFunction<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let extra = self.deg0.is_some() as usize + self.deginf.is_some() as usize;
        let mut st = s.serialize_struct("CoverFunction", 5 + extra)?;
        st.serialize_field("lambda", &JsonCoeffs(&self.lambda))?;
        st.serialize_field("ord", &self.ord)?;
        st.serialize_field("p0", &self.p0)?;
        st.serialize_field("pinf", &self.pinf)?;
        st.serialize_field("r", &self.r)?;
        if let Some(d) = self.deg0 {
            st.serialize_field("deg0", &d)?;
        }
        if let Some(d) = self.deginf {
            st.serialize_field("deginf", &d)?;
        }
        st.end()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCover {
    lambda: Vec<serde_json::Value>,
    ord: Vec<i64>,
    p0: Vec<serde_json::Value>,
    pinf: Vec<serde_json::Value>,
    r: u32,
    #[serde(default)]
    deg0: Option<usize>,
    #[serde(default)]
    deginf: Option<usize>,
}

impl<'de, T: Coeff + JsonCoeff> Deserialize<'de> for CoverFunction<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawCover::deserialize(d)?;
        let lambda = coeffs_from_json(&raw.lambda).map_err(D::Error::custom)?;
        let p0 = Poly::from_coeffs(coeffs_from_json(&raw.p0).map_err(D::Error::custom)?);
        let pinf = Poly::from_coeffs(coeffs_from_json(&raw.pinf).map_err(D::Error::custom)?);
        let cf = CoverFunction {
            lambda,
            ord: raw.ord,
            p0,
            pinf,
            r: raw.r,
            deg0: raw.deg0,
            deginf: raw.deginf,
        };
        cf.check().map_err(D::Error::custom)?;
        Ok(cf)
    }
}
