//! Coefficient fields.
//!
//! Two backends share one trait: [`Exact`] (Gaussian rationals over
//! arbitrary-precision integers) and [`Complex64`]. Structural questions such
//! as universal vanishing are only ever decided in the exact backend.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Complex numbers with exact rational real and imaginary parts.
pub type Exact = Complex<BigRational>;

/// Field operations needed by the series, operator and armould machinery.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Whether arithmetic in this backend is exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(n: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Real number with the given value; exact backends convert the binary
    /// value of `x` without rounding.
    fn from_f64(x: f64) -> Self;
    fn from_big(n: &BigUint) -> Self;
    fn from_c64(z: Complex64) -> Self;
    fn to_c64(&self) -> Complex64;

    fn modulus(&self) -> f64 {
        self.to_c64().norm()
    }

    /// `|self|` as an element of the field, when that is representable.
    /// Exact backends return `None` for non-real values whose modulus is
    /// irrational.
    fn abs_value(&self) -> Option<Self>;

    fn is_nonneg_real(&self) -> bool;

    /// `|self|²` as a real element of the field.
    fn squared_norm(&self) -> Self;

    /// Division that reports an exactly vanishing (or, in float mode,
    /// sub-normal) divisor instead of producing infinities.
    fn checked_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.is_negligible_divisor() {
            None
        } else {
            Some(self.clone() / rhs.clone())
        }
    }

    fn is_negligible_divisor(&self) -> bool;

    fn pow_int(&self, e: i64) -> Option<Self> {
        if e < 0 {
            let inv = Self::one().checked_div(self)?;
            return inv.pow_int(-e);
        }
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        Some(acc)
    }

    fn re_json(&self) -> Value;
    fn im_json(&self) -> Value;
    fn from_json_parts(re: &Value, im: &Value) -> Result<Self>;
}

/// Float comparisons below this modulus are treated as an exact zero divisor.
pub const RESONANCE_GUARD: f64 = 1e-300;

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn from_big(n: &BigUint) -> Self {
        Complex64::new(n.to_f64().unwrap_or(f64::INFINITY), 0.0)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn abs_value(&self) -> Option<Self> {
        Some(Complex64::new(self.norm(), 0.0))
    }
    fn is_nonneg_real(&self) -> bool {
        self.im == 0.0 && self.re >= 0.0
    }
    fn squared_norm(&self) -> Self {
        Complex64::new(self.norm_sqr(), 0.0)
    }
    fn is_negligible_divisor(&self) -> bool {
        self.norm() < RESONANCE_GUARD
    }
    fn re_json(&self) -> Value {
        float_json(self.re)
    }
    fn im_json(&self) -> Value {
        float_json(self.im)
    }
    fn from_json_parts(re: &Value, im: &Value) -> Result<Self> {
        Ok(Complex64::new(json_to_f64(re)?, json_to_f64(im)?))
    }
}

impl Scalar for Exact {
    const EXACT: bool = true;

    fn zero() -> Self {
        Complex::new(BigRational::zero(), BigRational::zero())
    }
    fn one() -> Self {
        Complex::new(BigRational::one(), BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn from_i64(n: i64) -> Self {
        Complex::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }
    fn from_f64(x: f64) -> Self {
        let re = BigRational::from_float(x).expect("finite float");
        Complex::new(re, BigRational::zero())
    }
    fn from_big(n: &BigUint) -> Self {
        Complex::new(
            BigRational::from_integer(BigInt::from(n.clone())),
            BigRational::zero(),
        )
    }
    fn from_c64(z: Complex64) -> Self {
        Complex::new(
            BigRational::from_float(z.re).expect("finite float"),
            BigRational::from_float(z.im).expect("finite float"),
        )
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
    fn abs_value(&self) -> Option<Self> {
        if self.im.is_zero() {
            Some(Complex::new(self.re.abs(), BigRational::zero()))
        } else if self.re.is_zero() {
            Some(Complex::new(self.im.abs(), BigRational::zero()))
        } else {
            None
        }
    }
    fn is_nonneg_real(&self) -> bool {
        self.im.is_zero() && !self.re.is_negative()
    }
    fn squared_norm(&self) -> Self {
        Complex::new(
            &self.re * &self.re + &self.im * &self.im,
            BigRational::zero(),
        )
    }
    fn is_negligible_divisor(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn re_json(&self) -> Value {
        Value::String(ratio_string(&self.re))
    }
    fn im_json(&self) -> Value {
        Value::String(ratio_string(&self.im))
    }
    fn from_json_parts(re: &Value, im: &Value) -> Result<Self> {
        Ok(Complex::new(json_to_ratio(re)?, json_to_ratio(im)?))
    }
}

fn float_json(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(x.to_string()))
}

fn ratio_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p/q"`, `"p"`, or a JSON number into an exact rational.
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational literal {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => {
            if let Ok(p) = s.parse::<BigInt>() {
                return Ok(BigRational::from_integer(p));
            }
            let x: f64 = s.parse().map_err(|_| bad())?;
            BigRational::from_float(x).ok_or_else(bad)
        }
    }
}

fn json_to_ratio(v: &Value) -> Result<BigRational> {
    match v {
        Value::String(s) => parse_ratio(s),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigRational::from_integer(BigInt::from(i)))
            } else {
                let x = n.as_f64().ok_or_else(|| Error::Parse(format!("bad number {n}")))?;
                BigRational::from_float(x).ok_or_else(|| Error::Parse(format!("bad number {n}")))
            }
        }
        other => Err(Error::Parse(format!("expected number or rational string, got {other}"))),
    }
}

fn json_to_f64(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Parse(format!("bad number {n}"))),
        Value::String(s) => {
            let r = parse_ratio(s)?;
            r.to_f64()
                .ok_or_else(|| Error::Parse(format!("rational {s} out of float range")))
        }
        other => Err(Error::Parse(format!("expected number, got {other}"))),
    }
}

/// Relative discrepancy used throughout for float comparisons:
/// `|x - y| / (1 + max(|x|, |y|))`.
pub fn relative_gap(x: Complex64, y: Complex64) -> f64 {
    (x - y).norm() / (1.0 + x.norm().max(y.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_powers_with_negative_exponents() {
        let two = Exact::from_i64(2);
        assert_eq!(two.pow_int(-3).unwrap(), Exact::from_ratio(1, 8));
        assert_eq!(two.pow_int(0).unwrap(), <Exact as Scalar>::one());
        assert!(<Exact as Scalar>::zero().pow_int(-1).is_none());
    }

    #[test]
    fn float_guard_rejects_tiny_divisors() {
        let tiny = Complex64::new(1e-310, 0.0);
        assert!(<Complex64 as Scalar>::one().checked_div(&tiny).is_none());
        let small = Complex64::new(1e-200, 0.0);
        assert!(<Complex64 as Scalar>::one().checked_div(&small).is_some());
    }

    #[test]
    fn rational_literals() {
        assert_eq!(
            parse_ratio("-3/6").unwrap(),
            BigRational::new(BigInt::from(-1), BigInt::from(2))
        );
        assert_eq!(parse_ratio("7").unwrap(), BigRational::from_integer(7.into()));
        assert_eq!(parse_ratio("0.5").unwrap(), BigRational::new(1.into(), 2.into()));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("abc").is_err());
    }

    #[test]
    fn json_parts_round_trip() {
        let z = Exact::new(
            BigRational::new(2.into(), 3.into()),
            BigRational::from_integer((-5).into()),
        );
        let back = Exact::from_json_parts(&z.re_json(), &z.im_json()).unwrap();
        assert_eq!(back, z);
        assert_eq!(z.re_json(), Value::String("2/3".into()));
    }
}
