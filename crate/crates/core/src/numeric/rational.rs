//! Reduced arbitrary-precision fractions.
//!
//! Sums of points with denominators `2, 4, ..., 2n` have denominators close
//! to `lcm(1..n)`, so most additions in a greedy run pair one huge operand
//! with one small one. The arithmetic below (Henrici addition, Knuth's
//! cross-reduced multiplication) only ever takes gcds against the smaller
//! factor in that case, which keeps a step linear in the operand size.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::NumericError;

/// An exact fraction `numerator / denominator` in lowest terms with a
/// positive denominator. Zero is `0/1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational {
    num: BigInt,
    den: BigInt,
}

impl Rational {
    /// Builds `j / q` in lowest terms.
    pub fn from_parts(j: impl Into<BigInt>, q: impl Into<BigInt>) -> Result<Self, NumericError> {
        let (j, q) = (j.into(), q.into());
        if q.is_zero() {
            return Err(NumericError::ZeroDenominator);
        }
        Ok(Self::reduce(j, q))
    }

    pub fn from_integer(v: impl Into<BigInt>) -> Self {
        Self {
            num: v.into(),
            den: BigInt::one(),
        }
    }

    pub fn zero() -> Self {
        Self::from_integer(0)
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    /// Exact value of a finite binary float.
    pub fn from_f64(x: f64) -> Result<Self, NumericError> {
        if !x.is_finite() {
            return Err(NumericError::NonFinite(x));
        }
        if x == 0.0 {
            return Ok(Self::zero());
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let exp_bits = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exp) = if exp_bits == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_bits - 1075)
        };
        let mut num = BigInt::from(mantissa);
        if negative {
            num = -num;
        }
        let r = if exp >= 0 {
            Self::from_integer(num << exp as usize)
        } else {
            Self::reduce(num, BigInt::one() << (-exp) as usize)
        };
        Ok(r)
    }

    /// Parses a plain decimal literal such as `0.375`, `-2`, or `1.5e-3` exactly.
    pub fn from_decimal_str(s: &str) -> Result<Self, NumericError> {
        let bad = || NumericError::Parse(s.to_string());
        let t = s.trim();
        let (mantissa, exponent) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
            None => (t, 0),
        };
        let (neg, digits) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = match digits.split_once('.') {
            Some((a, b)) => (a, b),
            None => (digits, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let all: String = format!("{int_part}{frac_part}");
        let mut num: BigInt = all.parse().map_err(|_| bad())?;
        if neg {
            num = -num;
        }
        let scale = exponent - frac_part.len() as i32;
        let ten = BigInt::from(10u32);
        if scale >= 0 {
            Ok(Self::from_integer(num * num_traits::pow(ten, scale as usize)))
        } else {
            Ok(Self::reduce(num, num_traits::pow(ten, (-scale) as usize)))
        }
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    pub fn denom(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn abs(&self) -> Self {
        Self {
            num: self.num.abs(),
            den: self.den.clone(),
        }
    }

    pub fn recip(&self) -> Result<Self, NumericError> {
        if self.num.is_zero() {
            return Err(NumericError::ZeroDenominator);
        }
        let (num, den) = if self.num.is_negative() {
            (-self.den.clone(), -self.num.clone())
        } else {
            (self.den.clone(), self.num.clone())
        };
        Ok(Self { num, den })
    }

    pub fn pow(&self, e: u32) -> Self {
        Self {
            num: num_traits::pow(self.num.clone(), e as usize),
            den: num_traits::pow(self.den.clone(), e as usize),
        }
    }

    /// Nearest binary float. Lossless whenever the value is representable.
    pub fn to_f64(&self) -> f64 {
        const EXACT: u64 = 1 << 53;
        if let (Some(n), Some(d)) = (self.num.to_i64(), self.den.to_u64()) {
            if n.unsigned_abs() <= EXACT && d <= EXACT {
                return n as f64 / d as f64;
            }
        }
        if self.num.is_zero() {
            return 0.0;
        }
        let nb = self.num.bits() as i64;
        let db = self.den.bits() as i64;
        // scale so the integer quotient carries 64..66 significant bits
        let shift = 65 - (nb - db);
        let mag = self.num.magnitude();
        let den = self.den.magnitude();
        let q: BigUint = if shift >= 0 {
            (mag << shift as usize) / den
        } else {
            (mag >> (-shift) as usize) / den
        };
        let mut v = q.to_f64().unwrap_or(f64::INFINITY);
        // apply 2^-shift in two halves to stay inside the exponent range
        let half = -shift / 2;
        v *= 2f64.powi(half as i32);
        v *= 2f64.powi((-shift - half) as i32);
        if self.num.is_negative() {
            -v
        } else {
            v
        }
    }

    fn reduce(num: BigInt, den: BigInt) -> Self {
        let (mut num, mut den) = if den.is_negative() { (-num, -den) } else { (num, den) };
        if num.is_zero() {
            return Self::zero();
        }
        let g = gcd(num.magnitude(), den.magnitude());
        if !g.is_one() {
            let g = BigInt::from(g);
            num /= &g;
            den /= &g;
        }
        Self { num, den }
    }

    fn add_ref(&self, rhs: &Self) -> Self {
        if self.num.is_zero() {
            return rhs.clone();
        }
        if rhs.num.is_zero() {
            return self.clone();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return Self::from_integer(&self.num + &rhs.num);
        }
        // Henrici: with g = gcd(b, d), the sum only needs gcd(t, g).
        let g = BigInt::from(gcd(self.den.magnitude(), rhs.den.magnitude()));
        if g.is_one() {
            let num = &self.num * &rhs.den + &rhs.num * &self.den;
            return Self {
                num,
                den: &self.den * &rhs.den,
            };
        }
        let b1 = &self.den / &g;
        let d1 = &rhs.den / &g;
        let t = &self.num * &d1 + &rhs.num * &b1;
        if t.is_zero() {
            return Self::zero();
        }
        let g2 = BigInt::from(gcd(t.magnitude(), g.magnitude()));
        if g2.is_one() {
            Self {
                num: t,
                den: b1 * &rhs.den,
            }
        } else {
            Self {
                num: t / &g2,
                den: b1 * (&rhs.den / &g2),
            }
        }
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        if self.num.is_zero() || rhs.num.is_zero() {
            return Self::zero();
        }
        let g1 = BigInt::from(gcd(self.num.magnitude(), rhs.den.magnitude()));
        let g2 = BigInt::from(gcd(rhs.num.magnitude(), self.den.magnitude()));
        let num = (&self.num / &g1) * (&rhs.num / &g2);
        let den = (&self.den / &g2) * (&rhs.den / &g1);
        Self { num, den }
    }
}

/// gcd that takes the cheap route when one operand is word-sized or much
/// shorter than the other.
fn gcd(a: &BigUint, b: &BigUint) -> BigUint {
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    if small.is_zero() {
        return big.clone();
    }
    if let Some(s) = small.to_u64() {
        let r = (big % s).to_u64().unwrap_or(0);
        return BigUint::from(s.gcd(&r));
    }
    if big.bits() > small.bits() + 64 {
        let r = big % small;
        if r.is_zero() {
            return small.clone();
        }
        return r.gcd(small);
    }
    big.gcd(small)
}

impl Default for Rational {
    fn default() -> Self {
        Self::zero()
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.num.sign(), other.num.sign());
        if sa != sb {
            return sign_rank(sa).cmp(&sign_rank(sb));
        }
        if self.den == other.den {
            return self.num.cmp(&other.num);
        }
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

fn sign_rank(s: Sign) -> i8 {
    match s {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Rational {
    type Err = NumericError;

    /// Accepts `j/q` (the canonical text form) or a bare integer `j`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || NumericError::Parse(s.to_string());
        let t = s.trim();
        match t.split_once('/') {
            Some((j, q)) => {
                let j: BigInt = j.trim().parse().map_err(|_| bad())?;
                let q: BigInt = q.trim().parse().map_err(|_| bad())?;
                if q.is_negative() {
                    return Err(bad());
                }
                Rational::from_parts(j, q)
            }
            None => Ok(Rational::from_integer(t.parse::<BigInt>().map_err(|_| bad())?)),
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                $body(self, rhs)
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                $body(&self, &rhs)
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                $body(&self, rhs)
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                $body(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a: &Rational, b: &Rational| a.add_ref(b));
forward_binop!(Sub, sub, |a: &Rational, b: &Rational| a.add_ref(&-b));
forward_binop!(Mul, mul, |a: &Rational, b: &Rational| a.mul_ref(b));
forward_binop!(Div, div, |a: &Rational, b: &Rational| a
    .mul_ref(&b.recip().expect("division of a Rational by zero")));

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational {
            num: -self.num,
            den: self.den,
        }
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational {
            num: -self.num.clone(),
            den: self.den.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(j: i64, q: i64) -> Rational {
        Rational::from_parts(j, q).unwrap()
    }

    #[test]
    fn from_parts_reduces() {
        assert_eq!(r(7, 14).to_string(), "1/2");
        assert_eq!(r(7, 8).to_string(), "7/8");
        assert_eq!(r(0, 5).to_string(), "0/1");
        assert_eq!(r(3, -6).to_string(), "-1/2");
        assert_eq!(
            Rational::from_parts(1, 0).unwrap_err(),
            NumericError::ZeroDenominator
        );
    }

    #[test]
    fn ordering_is_exact() {
        assert!(r(1, 3) < r(1, 2));
        assert_eq!(r(7, 8).cmp(&r(14, 16)), Ordering::Equal);
        assert!(r(-1, 2) < r(0, 1));
        assert!(r(-1, 3) > r(-1, 2));
    }

    #[test]
    fn parse_forms() {
        assert_eq!("7/14".parse::<Rational>().unwrap(), r(1, 2));
        assert_eq!("-3".parse::<Rational>().unwrap(), r(-3, 1));
        assert!("1/-2".parse::<Rational>().is_err());
        assert!("a/2".parse::<Rational>().is_err());
        assert!("1/0".parse::<Rational>().is_err());
        assert_eq!(Rational::from_decimal_str("0.375").unwrap(), r(3, 8));
        assert_eq!(Rational::from_decimal_str("-1.5e-1").unwrap(), r(-3, 20));
        assert_eq!(Rational::from_decimal_str("2E2").unwrap(), r(200, 1));
        assert!(Rational::from_decimal_str(".").is_err());
        assert!(Rational::from_decimal_str("1.2.3").is_err());
    }

    #[test]
    fn float_conversion() {
        assert_eq!(r(1, 3).to_f64(), 1.0 / 3.0);
        assert_eq!(Rational::from_f64(0.1).unwrap().to_f64(), 0.1);
        assert_eq!(Rational::from_f64(0.375).unwrap(), r(3, 8));
        assert!(Rational::from_f64(f64::NAN).is_err());
        // huge numerator and denominator
        let big = Rational::from_parts(
            BigInt::from(10u32).pow(400) + 1u32,
            BigInt::from(10u32).pow(400) * 3u32,
        )
        .unwrap();
        assert!((big.to_f64() - 1.0 / 3.0).abs() < 1e-15);
        let tiny = Rational::from_parts(1, BigInt::one() << 1000usize).unwrap();
        assert_eq!(tiny.to_f64(), 2f64.powi(-1000));
    }

    fn small() -> impl Strategy<Value = Rational> {
        (-1000i64..1000, 1i64..500).prop_map(|(j, q)| r(j, q))
    }

    proptest! {
        #[test]
        fn field_identities(a in small(), b in small(), c in small()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&(&a - &b) + &b, a.clone());
            if !b.is_zero() {
                prop_assert_eq!(&(&a / &b) * &b, a.clone());
            }
        }

        #[test]
        fn results_stay_reduced(a in small(), b in small()) {
            for v in [&a + &b, &a - &b, &a * &b] {
                let g = v.numer().magnitude().gcd(v.denom().magnitude());
                prop_assert!(g.is_one() || v.is_zero());
                prop_assert!(v.denom().is_positive());
            }
        }

        #[test]
        fn text_round_trip(j in any::<i64>(), q in 1i64..i64::MAX) {
            let v = r(j, q);
            prop_assert_eq!(v.to_string().parse::<Rational>().unwrap(), v);
        }

        #[test]
        fn dyadic_float_round_trip(m in -(1i64 << 53)..(1i64 << 53), e in 0u32..200) {
            let v = Rational::from_parts(m, BigInt::one() << e as usize).unwrap();
            let f = v.to_f64();
            prop_assert_eq!(Rational::from_f64(f).unwrap(), v);
        }

        #[test]
        fn order_matches_cross_multiplication(a in small(), b in small()) {
            let lhs = a.numer() * b.denom();
            let rhs = b.numer() * a.denom();
            prop_assert_eq!(a.cmp(&b), lhs.cmp(&rhs));
        }
    }
}
