//! Dense univariate polynomials.
//!
//! `Poly<T>` stores coefficients in ascending degree order; `coeffs[i]` is the
//! coefficient of `x^i`. The vector is either empty (the zero polynomial) or
//! its last entry is nonzero.
//!
//! The coefficient domain is a type parameter: exact arithmetic uses
//! [`num_rational::BigRational`], floating-point arithmetic uses
//! `Complex<f64>` or `Complex<TwoFloat>` (extended precision). Mixing domains
//! is a type error, so there is no runtime domain tag.

mod rational;
mod roots;

pub use rational::{
    content_primitive, gcd, parse_rational, squarefree_decomposition, squarefree_part,
};
pub use roots::{roots_clustered, RootCluster};

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Float, One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use twofloat::TwoFloat;

/// Extended-precision complex scalar (double-double real and imaginary parts).
pub type ComplexDd = Complex<TwoFloat>;

/// Coefficient ring for [`Poly`].
pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_i64(n: i64) -> Self;
}

/// Coefficient field: a [`Coeff`] with exact-or-rounded division.
pub trait FieldCoeff: Coeff + Div<Output = Self> {}

impl<T: Coeff + Div<Output = T>> FieldCoeff for T {}

impl Coeff for BigRational {
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(n.into())
    }
}

impl<F> Coeff for Complex<F>
where
    F: Float + fmt::Debug + Send + Sync,
{
    fn from_i64(n: i64) -> Self {
        Complex::new(F::from(n).expect("integer fits in float"), F::zero())
    }
}

/// Real scalar types usable as the component type of a complex coefficient.
pub trait Real: Float + fmt::Debug + Send + Sync + 'static {
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    /// Unit roundoff of the type.
    fn unit_roundoff() -> f64;
    /// `1 / self` to full working precision.
    fn recip_accurate(self) -> Self {
        self.recip()
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn unit_roundoff() -> f64 {
        f64::EPSILON / 2.0
    }
}

impl Real for TwoFloat {
    fn from_f64(x: f64) -> Self {
        TwoFloat::from(x)
    }
    fn to_f64(self) -> f64 {
        self.hi() + self.lo()
    }
    fn unit_roundoff() -> f64 {
        // 106-bit significand
        2f64.powi(-104)
    }
    // one Newton step on top of the library division, which is only
    // accurate to double precision
    fn recip_accurate(self) -> Self {
        let r = TwoFloat::from(1.0) / self;
        r + r * (TwoFloat::from(1.0) - self * r)
    }
}

/// `1 / w` to full working precision.
pub fn complex_recip<F: Real>(w: Complex<F>) -> Complex<F> {
    // scaled so the squared norm cannot under- or overflow
    let m = w.re.abs().max(w.im.abs());
    if m == F::zero() || !m.is_finite() {
        return Complex::new(F::one() / w.re, F::zero());
    }
    let inv_m = m.recip_accurate();
    let (re, im) = (w.re * inv_m, w.im * inv_m);
    let s = (re * re + im * im).recip_accurate() * inv_m;
    Complex::new(re * s, -im * s)
}

pub fn complex_from_f64<F: Real>(z: Complex<f64>) -> Complex<F> {
    Complex::new(F::from_f64(z.re), F::from_f64(z.im))
}

pub fn complex_to_f64<F: Real>(z: Complex<F>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

/// Rational to complex float; numerator and denominator are rounded separately.
pub fn rational_to_complex<F: Real>(q: &BigRational) -> Complex<F> {
    use num_traits::ToPrimitive;
    let n = q.numer().to_f64().unwrap_or(f64::NAN);
    let d = q.denom().to_f64().unwrap_or(f64::NAN);
    Complex::new(F::from_f64(n) * F::from_f64(d).recip_accurate(), F::zero())
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Coeff> Poly<T> {
    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The indeterminate `x`.
    pub fn x() -> Self {
        Self::from_coeffs(vec![T::zero(), T::one()])
    }

    pub fn monomial(c: T, deg: usize) -> Self {
        let mut coeffs = vec![T::zero(); deg + 1];
        coeffs[deg] = c;
        Self::from_coeffs(coeffs)
    }

    /// `x - root`
    pub fn linear_factor(root: T) -> Self {
        Self::from_coeffs(vec![-root, T::one()])
    }

    /// Monic polynomial with the given roots, `prod (x - r_i)`.
    pub fn from_roots(roots: &[T]) -> Self {
        roots
            .iter()
            .fold(Self::one(), |acc, r| &acc * &Self::linear_factor(r.clone()))
    }

    /// Builds from ascending coefficients, trimming trailing zeros.
    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        let mut p = Poly { coeffs };
        p.normalize();
        p
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| T::from_i64(c)).collect())
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Coefficient of `x^i`, zero past the degree.
    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.clone() * T::from_i64(i as i64))
            .collect();
        Self::from_coeffs(coeffs)
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Coefficient-wise conversion into another domain.
    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        Poly::from_coeffs(self.coeffs.iter().map(f).collect())
    }
}

impl<T: FieldCoeff> Poly<T> {
    /// Divides by the leading coefficient. The zero polynomial is returned unchanged.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => self.clone(),
            Some(lc) => {
                let inv = T::one() / lc.clone();
                self.scale(&inv)
            }
        }
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lc = divisor.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree() else {
            return (Self::zero(), Self::zero());
        };
        if nd < dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![T::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let q = rem[k + dd].clone() / lc.clone();
            if q.is_zero() {
                continue;
            }
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] = rem[k + j].clone() - q.clone() * dc.clone();
            }
            quot[k] = q;
        }
        rem.truncate(dd);
        (Self::from_coeffs(quot), Self::from_coeffs(rem))
    }
}

impl<T: Coeff> Add for &Poly<T> {
    type Output = Poly<T>;
    fn add(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::from_coeffs((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<T: Coeff> Sub for &Poly<T> {
    type Output = Poly<T>;
    fn sub(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::from_coeffs((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<T: Coeff> Mul for &Poly<T> {
    type Output = Poly<T>;
    fn mul(self, rhs: &Poly<T>) -> Poly<T> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::from_coeffs(out)
    }
}

impl<T: Coeff> Neg for &Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        Poly::from_coeffs(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<T: Coeff> $tr for Poly<T> {
            type Output = Poly<T>;
            fn $m(self, rhs: Poly<T>) -> Poly<T> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<T: Coeff> fmt::Debug for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly{:?}", self.coeffs)
    }
}

impl fmt::Display for Poly<BigRational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*x")?,
                _ => write!(f, "({c})*x^{i}")?,
            }
        }
        Ok(())
    }
}

// Text form: coefficient list, constant term first. Rationals are "p/q"
// strings, complex floats are [re, im] pairs.

/// JSON text form of a single coefficient.
pub trait JsonCoeff: Sized {
    fn to_json(&self) -> serde_json::Value;
    fn from_json(v: &serde_json::Value) -> Result<Self, String>;
}

impl JsonCoeff for BigRational {
    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }
    fn from_json(v: &serde_json::Value) -> Result<Self, String> {
        match v {
            serde_json::Value::String(s) => parse_rational(s).map_err(|e| e.to_string()),
            serde_json::Value::Number(n) if n.is_i64() => {
                Ok(BigRational::from_integer(n.as_i64().unwrap().into()))
            }
            other => Err(format!("expected a \"p/q\" string, got {other}")),
        }
    }
}

impl JsonCoeff for Complex<f64> {
    fn to_json(&self) -> serde_json::Value {
        serde_json::json!([self.re, self.im])
    }
    fn from_json(v: &serde_json::Value) -> Result<Self, String> {
        let pair: [f64; 2] = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
        Ok(Complex::new(pair[0], pair[1]))
    }
}

/// Serializes a coefficient slice in the [`JsonCoeff`] text form.
pub struct JsonCoeffs<'a, T>(pub &'a [T]);

impl<T: JsonCoeff> Serialize for JsonCoeffs<'_, T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|c| c.to_json()))
    }
}

pub fn coeffs_from_json<T: JsonCoeff>(values: &[serde_json::Value]) -> Result<Vec<T>, String> {
    values.iter().map(T::from_json).collect()
}

impl<T: Coeff + JsonCoeff> Serialize for Poly<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        JsonCoeffs(&self.coeffs).serialize(s)
    }
}

impl<'de, T: Coeff + JsonCoeff> Deserialize<'de> for Poly<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let values = Vec::<serde_json::Value>::deserialize(d)?;
        Ok(Poly::from_coeffs(coeffs_from_json(&values).map_err(D::Error::custom)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type Q = BigRational;

    fn q(coeffs: &[i64]) -> Poly<Q> {
        Poly::from_i64s(coeffs)
    }

    #[test]
    fn double_double_reciprocal() {
        let three = TwoFloat::from(3.0);
        let err = three.recip_accurate() * three - TwoFloat::from(1.0);
        assert!(err.to_f64().abs() < 1e-31);
        let w = Complex::new(TwoFloat::from(1e-200), TwoFloat::from(-3e-200));
        let one = complex_recip(w) * w;
        assert!((one.re.to_f64() - 1.0).abs() < 1e-30 && one.im.to_f64().abs() < 1e-30);
        let w = Complex::new(1e250, 2e250);
        assert!((complex_recip(w) * w - Complex::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn mul_examples() {
        assert_eq!(&q(&[-1, 1]) * &q(&[1, 1]), q(&[-1, 0, 1]));
        assert!((&Poly::<Q>::zero() * &q(&[3, 2, 1])).is_zero());
        let xp1 = q(&[1, 1]);
        assert_eq!(&q(&[-3, 1]) * &xp1.pow(2), q(&[-3, -5, -1, 1]));
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(q(&[0, 0, 1]).derivative(), q(&[0, 2]));
        assert!(q(&[7]).derivative().is_zero());
        assert_eq!(q(&[-3, -5, -1, 1]).derivative(), q(&[-5, -2, 3]));
    }

    #[test]
    fn trailing_zeros_are_trimmed() {
        let p = q(&[1, 2, 0, 0]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(Poly::<Q>::from_i64s(&[0, 0]).degree(), None);
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = q(&[-3, -5, -1, 1]);
        let b = q(&[1, 1]);
        let (qt, r) = a.div_rem(&b);
        assert!(r.is_zero());
        assert_eq!(qt, q(&[-3, -2, 1]));
    }

    #[test]
    fn rational_json_text_form() {
        let p = Poly::from_coeffs(vec![
            Q::new(1.into(), 2.into()),
            Q::from_integer((-3).into()),
        ]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"["1/2","-3"]"#);
        let back: Poly<Q> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    fn arb_poly() -> impl Strategy<Value = Poly<Q>> {
        prop::collection::vec(-20i64..20, 0..7).prop_map(|c| Poly::from_i64s(&c))
    }

    proptest! {
        #[test]
        fn ring_laws(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            if let (Some(da), Some(db)) = (a.degree(), b.degree()) {
                prop_assert_eq!((&a * &b).degree(), Some(da + db));
            }
        }

        #[test]
        fn leibniz_rule(a in arb_poly(), b in arb_poly()) {
            let lhs = (&a * &b).derivative();
            let rhs = &(&a.derivative() * &b) + &(&a * &b.derivative());
            prop_assert_eq!(lhs, rhs);
        }
    }
}
