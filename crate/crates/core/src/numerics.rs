//! Scalar backends shared by every other module.
//!
//! Two backends: exact unbounded rationals (all algebraic identities hold
//! with equality) and 64-bit floats (empirical estimators, tolerance-based
//! comparison). A computation never mixes backends; doing so is a usage
//! error and the arithmetic operators panic on it.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("malformed scalar `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("mixed exact/float backends in one expression")]
    MixedBackends,
}

/// Which numeric representation a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Backend::Exact),
            "float" => Ok(Backend::Float),
            other => Err(format!("unknown backend `{other}` (expected exact|float)")),
        }
    }
}

/// An exact rational or a 64-bit float, tagged by backend.
///
/// Exact values are kept in lowest terms with positive denominator
/// (`BigRational` maintains this on construction).
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    Float(f64),
}

impl Scalar {
    pub fn backend(&self) -> Backend {
        match self {
            Scalar::Exact(_) => Backend::Exact,
            Scalar::Float(_) => Backend::Float,
        }
    }

    pub fn zero(backend: Backend) -> Scalar {
        Scalar::from_int(0, backend)
    }

    pub fn one(backend: Backend) -> Scalar {
        Scalar::from_int(1, backend)
    }

    pub fn from_int(v: i64, backend: Backend) -> Scalar {
        match backend {
            Backend::Exact => Scalar::Exact(BigRational::from_integer(BigInt::from(v))),
            Backend::Float => Scalar::Float(v as f64),
        }
    }

    pub fn from_ratio(num: i64, den: i64, backend: Backend) -> Scalar {
        assert!(den != 0, "zero denominator");
        match backend {
            Backend::Exact => {
                Scalar::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
            }
            Backend::Float => Scalar::Float(num as f64 / den as f64),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(f) => *f == 0.0,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_positive(),
            Scalar::Float(f) => *f > 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_negative(),
            Scalar::Float(f) => *f < 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Scalar::Exact(_) => true,
            Scalar::Float(f) => f.is_finite(),
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Float(f) => Scalar::Float(f.abs()),
        }
    }

    pub fn pow(&self, exp: u32) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.pow(exp as i32)),
            Scalar::Float(f) => Scalar::Float(f.powi(exp as i32)),
        }
    }

    pub fn square(&self) -> Scalar {
        self.clone() * self.clone()
    }

    /// Exact square root when the value is a perfect rational square
    /// (integer square roots of numerator and denominator), or the float
    /// square root on the float backend. `None` for negative values and
    /// for exact values with irrational roots.
    pub fn sqrt(&self) -> Option<Scalar> {
        match self {
            Scalar::Exact(r) => {
                if r.is_negative() {
                    return None;
                }
                let num = r.numer().sqrt();
                let den = r.denom().sqrt();
                if &(&num * &num) == r.numer() && &(&den * &den) == r.denom() {
                    Some(Scalar::Exact(BigRational::new(num, den)))
                } else {
                    None
                }
            }
            Scalar::Float(f) => {
                if *f < 0.0 {
                    None
                } else {
                    Some(Scalar::Float(f.sqrt()))
                }
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Float(f) => *f,
        }
    }

    /// Textual form: exact values as `p/q` (or `p` when q = 1), floats with
    /// 17 significant digits so they round-trip.
    pub fn render(&self) -> String {
        match self {
            Scalar::Exact(r) => {
                if r.denom().is_one() {
                    r.numer().to_string()
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Float(f) => format!("{:.16e}", f),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Scalar) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.partial_cmp(b),
            (Scalar::Float(a), Scalar::Float(b)) => a.partial_cmp(b),
            _ => None,
        }
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    (Scalar::Float(a), Scalar::Float(b)) => Scalar::Float(a $op b),
                    _ => panic!("mixed exact/float backends in one expression"),
                }
            }
        }
        impl $trait for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.clone().$method(rhs.clone())
            }
        }
    };
}

scalar_binop!(Add, add, +);
scalar_binop!(Sub, sub, -);
scalar_binop!(Mul, mul, *);
scalar_binop!(Div, div, /);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(f) => Scalar::Float(-f),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -self.clone()
    }
}

/// Comparison policy for float results. Both fields are zero on the exact
/// backend (equality is exact there).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance {
    pub relative: f64,
    pub absolute: f64,
}

impl Tolerance {
    pub fn exact() -> Tolerance {
        Tolerance { relative: 0.0, absolute: 0.0 }
    }

    pub fn new(relative: f64, absolute: f64) -> Tolerance {
        assert!(relative >= 0.0 && absolute >= 0.0);
        Tolerance { relative, absolute }
    }
}

impl Default for Tolerance {
    // single documented float policy: rel 1e-9, abs 1e-12
    fn default() -> Tolerance {
        Tolerance { relative: 1e-9, absolute: 1e-12 }
    }
}

/// Exact backend: equality. Float backend:
/// `|a-b| <= absolute + relative * max(|a|,|b|)`.
pub fn approx_eq(a: &Scalar, b: &Scalar, tol: Tolerance) -> Result<bool, NumericsError> {
    match (a, b) {
        (Scalar::Exact(x), Scalar::Exact(y)) => Ok(x == y),
        (Scalar::Float(x), Scalar::Float(y)) => {
            Ok((x - y).abs() <= tol.absolute + tol.relative * x.abs().max(y.abs()))
        }
        _ => Err(NumericsError::MixedBackends),
    }
}

/// Parses `p/q`, an integer, or a decimal literal (optionally with a base-10
/// exponent) into the requested backend. On the exact backend decimals are
/// converted exactly (digits over a power of ten); on the float backend
/// `p/q` is rounded to the nearest f64.
pub fn parse_scalar(text: &str, backend: Backend) -> Result<Scalar, NumericsError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(NumericsError::Malformed(text.to_string()));
    }
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| NumericsError::Malformed(text.to_string()))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| NumericsError::Malformed(text.to_string()))?;
        if q.is_zero() {
            return Err(NumericsError::ZeroDenominator(text.to_string()));
        }
        let r = BigRational::new(p, q);
        return Ok(match backend {
            Backend::Exact => Scalar::Exact(r),
            Backend::Float => Scalar::Float(r.to_f64().unwrap_or(f64::NAN)),
        });
    }
    match backend {
        Backend::Exact => parse_decimal_exact(text)
            .map(Scalar::Exact)
            .ok_or_else(|| NumericsError::Malformed(text.to_string())),
        Backend::Float => text
            .parse::<f64>()
            .map(Scalar::Float)
            .map_err(|_| NumericsError::Malformed(text.to_string())),
    }
}

fn parse_decimal_exact(text: &str) -> Option<BigRational> {
    let (mantissa, exp10) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if frac_part.contains(['+', '-']) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "+" || digits == "-" {
        return None;
    }
    let numer: BigInt = digits.parse().ok()?;
    let scale = frac_part.len() as i32 - exp10;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        BigRational::new(numer, ten.pow(scale as u32))
    } else {
        BigRational::from_integer(numer * ten.pow((-scale) as u32))
    })
}
