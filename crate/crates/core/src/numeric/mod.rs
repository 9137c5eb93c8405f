//! Scalar backends.
//!
//! Every algorithm in the crate is generic over [`Scalar`], implemented by
//! the exact [`Rational`] and by `f64`. A run picks one backend up front and
//! never mixes them; [`DynScalar`] exists for the places (config parsing,
//! dumps) where the backend is only known at runtime.

mod rational;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use rational::Rational;

/// Default absolute tolerance for tie detection in the float backend.
pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-12;

/// `1/pi` rounded to the nearest `f64`.
pub const INV_PI: f64 = std::f64::consts::FRAC_1_PI;
/// `1/e` rounded to the nearest `f64`.
pub const INV_E: f64 = 0.367_879_441_171_442_33;
/// `1/sqrt 2` rounded to the nearest `f64`.
pub const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("cannot parse `{0}` as a number")]
    Parse(String),
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("cannot mix the rational and float backends")]
    MixedBackends,
    #[error("`{0}` has no exact rational representation")]
    NotRational(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Rational,
    Float,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Rational => "rational",
            Backend::Float => "float",
        })
    }
}

/// Arithmetic contract shared by both backends.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
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
    const BACKEND: Backend;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    /// `num / den`, exact in the rational backend and correctly rounded in floats.
    fn from_ratio(num: i64, den: u64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact rational value; `None` only for non-finite floats.
    fn to_rational(&self) -> Option<Rational>;
    /// Total order: exact for rationals, raw IEEE order for floats.
    fn scalar_cmp(&self, other: &Self) -> Ordering;
    /// Tie test used for argmin selection: equality for rationals,
    /// `|a - b| <= tolerance` for floats.
    fn is_tie(&self, other: &Self, tolerance: f64) -> bool;

    fn is_zero(&self) -> bool {
        self.scalar_cmp(&Self::zero()) == Ordering::Equal
    }

    fn abs(&self) -> Self {
        if self.scalar_cmp(&Self::zero()) == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    fn cube(&self) -> Self {
        self.clone() * self.clone() * self.clone()
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a.scalar_cmp(&b) == Ordering::Less {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b.scalar_cmp(&a) == Ordering::Less {
            b
        } else {
            a
        }
    }

    /// True for values in the closed unit interval.
    fn in_unit_interval(&self) -> bool {
        self.scalar_cmp(&Self::zero()) != Ordering::Less
            && self.scalar_cmp(&Self::one()) != Ordering::Greater
            && self.to_f64().is_finite()
    }
}

impl Scalar for Rational {
    const BACKEND: Backend = Backend::Rational;

    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn from_int(v: i64) -> Self {
        Rational::from_integer(v)
    }
    fn from_ratio(num: i64, den: u64) -> Self {
        Rational::from_parts(num, den).expect("from_ratio with zero denominator")
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
    fn scalar_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn is_tie(&self, other: &Self, _tolerance: f64) -> bool {
        self == other
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
    fn abs(&self) -> Self {
        Rational::abs(self)
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(num: i64, den: u64) -> Self {
        assert!(den != 0, "from_ratio with zero denominator");
        num as f64 / den as f64
    }
    fn from_rational(r: &Rational) -> Self {
        r.to_f64()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_rational(&self) -> Option<Rational> {
        Rational::from_f64(*self).ok()
    }
    fn scalar_cmp(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or_else(|| self.total_cmp(other))
    }
    fn is_tie(&self, other: &Self, tolerance: f64) -> bool {
        (self - other).abs() <= tolerance
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

/// A scalar whose backend is chosen at runtime.
#[derive(Debug, Clone, PartialEq)]
pub enum DynScalar {
    Exact(Rational),
    Float(f64),
}

impl DynScalar {
    pub fn backend(&self) -> Backend {
        match self {
            DynScalar::Exact(_) => Backend::Rational,
            DynScalar::Float(_) => Backend::Float,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            DynScalar::Exact(r) => r.to_f64(),
            DynScalar::Float(x) => *x,
        }
    }
}

impl fmt::Display for DynScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynScalar::Exact(r) => write!(f, "{r}"),
            DynScalar::Float(x) => write!(f, "{x}"),
        }
    }
}

/// Compares two runtime scalars; both must come from the same backend.
pub fn scalar_cmp(a: &DynScalar, b: &DynScalar) -> Result<Ordering, NumericError> {
    match (a, b) {
        (DynScalar::Exact(x), DynScalar::Exact(y)) => Ok(x.cmp(y)),
        (DynScalar::Float(x), DynScalar::Float(y)) => Ok(x.scalar_cmp(y)),
        _ => Err(NumericError::MixedBackends),
    }
}

/// Shorthand for `Rational::from_parts` with small integers.
pub fn rational_from_parts(j: i64, q: u64) -> Result<Rational, NumericError> {
    Rational::from_parts(j, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyn_compare() {
        let third = DynScalar::Exact(rational_from_parts(1, 3).unwrap());
        let half = DynScalar::Exact(rational_from_parts(1, 2).unwrap());
        assert_eq!(scalar_cmp(&third, &half), Ok(Ordering::Less));
        let a = DynScalar::Exact(rational_from_parts(7, 8).unwrap());
        assert_eq!(scalar_cmp(&a, &a.clone()), Ok(Ordering::Equal));
        let sum = DynScalar::Float(0.1 + 0.2);
        assert_eq!(scalar_cmp(&sum, &DynScalar::Float(0.3)), Ok(Ordering::Greater));
        assert_eq!(scalar_cmp(&sum, &half), Err(NumericError::MixedBackends));
    }

    #[test]
    fn float_ties_use_tolerance() {
        assert!(1.0f64.is_tie(&(1.0 + 5e-13), DEFAULT_TIE_TOLERANCE));
        assert!(!1.0f64.is_tie(&(1.0 + 5e-12), DEFAULT_TIE_TOLERANCE));
        let a = rational_from_parts(1, 3).unwrap();
        assert!(!a.is_tie(&(&a + &rational_from_parts(1, 1 << 60).unwrap()), 1.0));
    }

    #[test]
    fn unit_interval_check() {
        assert!(0.0f64.in_unit_interval());
        assert!(!(1.0f64 + 1e-16 * 4.0).in_unit_interval());
        assert!(!f64::NAN.in_unit_interval());
        assert!(rational_from_parts(1, 1).unwrap().in_unit_interval());
        assert!(!rational_from_parts(-1, 9).unwrap().in_unit_interval());
    }
}
