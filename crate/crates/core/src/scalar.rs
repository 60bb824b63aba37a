//! Coefficient fields: exact rationals for algebra, complex doubles for holonomy.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_rational(q: &Rational) -> Self;

    /// Absolute value as a double, used for norms and tolerances.
    fn magnitude(&self) -> f64;

    fn to_complex(&self) -> Complex64;

    fn to_json(&self) -> Value;

    fn from_json(value: &Value) -> Result<Self>;

    /// Short human-readable form.
    fn render(&self) -> String;
}

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Only reached for huge numerators/denominators.
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::Parse {
        position: 0,
        message: format!("bad rational `{text}`"),
    };
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text.trim(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

impl Scalar for Rational {
    fn from_ratio(num: i64, den: i64) -> Self {
        rational(num, den)
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn magnitude(&self) -> f64 {
        rational_to_f64(&self.abs())
    }

    fn to_complex(&self) -> Complex64 {
        Complex64::new(rational_to_f64(self), 0.0)
    }

    fn to_json(&self) -> Value {
        json!({ "num": self.numer().to_string(), "den": self.denom().to_string() })
    }

    fn from_json(value: &Value) -> Result<Self> {
        let field = |name: &str| {
            value
                .get(name)
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Parse {
                    position: 0,
                    message: format!("missing string field `{name}`"),
                })
        };
        parse_rational(&format!("{}/{}", field("num")?, field("den")?))
    }

    fn render(&self) -> String {
        format_rational(self)
    }
}

impl Scalar for Complex64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }

    fn from_rational(q: &Rational) -> Self {
        Complex64::new(rational_to_f64(q), 0.0)
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }

    fn to_json(&self) -> Value {
        json!({ "re": round12(self.re), "im": round12(self.im) })
    }

    fn from_json(value: &Value) -> Result<Self> {
        let field = |name: &str| {
            value.get(name).and_then(Value::as_f64).ok_or_else(|| Error::Parse {
                position: 0,
                message: format!("missing numeric field `{name}`"),
            })
        };
        Ok(Complex64::new(field("re")?, field("im")?))
    }

    fn render(&self) -> String {
        if self.im == 0.0 {
            format!("{:.12}", self.re)
        } else {
            format!("({:.12}{:+.12}i)", self.re, self.im)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_text() {
        assert_eq!(format_rational(&rational(6, -4)), "-3/2");
        assert_eq!(format_rational(&rational(4, 2)), "2");
        assert_eq!(parse_rational("-3/2").unwrap(), rational(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), rational(7, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a").is_err());
    }

    #[test]
    fn json_round_trip() {
        let q = rational(-5, 7);
        assert_eq!(Rational::from_json(&q.to_json()).unwrap(), q);
        let z = Complex64::new(0.25, -1.5);
        assert_eq!(Complex64::from_json(&z.to_json()).unwrap(), z);
    }

    #[test]
    fn rounding() {
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
        assert_eq!(round12(0.0), 0.0);
    }
}
