//! Exact field elements: arbitrary-precision rationals or residues modulo a prime.
//!
//! Every scalar carries its field mode so that matrices built from mixed sources
//! can be checked cheaply. Mixing modes in one arithmetic operation is a logic
//! error and panics.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The ground field all linear algebra runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Rational,
    Prime(u32),
}

impl Field {
    /// Builds a prime field, rejecting moduli that are not prime.
    pub fn prime(p: u32) -> Result<Field> {
        if p < 2 || (2..p).take_while(|k| k * k <= p).any(|k| p.is_multiple_of(k)) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        Ok(Field::Prime(p))
    }

    pub fn zero(self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(self, v: i64) -> Scalar {
        match self {
            Field::Rational => Scalar::Rational(BigRational::from_integer(BigInt::from(v))),
            Field::Prime(p) => Scalar::Prime {
                value: v.rem_euclid(p as i64) as u32,
                modulus: p,
            },
        }
    }

    /// Reduces an exact rational into this field. Fails when the denominator
    /// vanishes modulo the characteristic.
    pub fn from_rational(self, q: &BigRational) -> Result<Scalar> {
        match self {
            Field::Rational => Ok(Scalar::Rational(q.clone())),
            Field::Prime(p) => {
                let pm = BigInt::from(p);
                let num = q.numer().mod_floor(&pm).to_u32().unwrap_or(0);
                let den = q.denom().mod_floor(&pm).to_u32().unwrap_or(0);
                if den == 0 {
                    return Err(Error::Parse(format!("denominator of {q} vanishes mod {p}")));
                }
                let n = Scalar::Prime { value: num, modulus: p };
                let dn = Scalar::Prime { value: den, modulus: p };
                Ok(&n * &dn.inverse())
            }
        }
    }

    /// Parses the canonical textual form ("p/q", "p", "-p/q").
    pub fn parse(self, s: &str) -> Result<Scalar> {
        let q = parse_rational(s)?;
        self.from_rational(&q)
    }

    /// Number of elements, or `None` for ℚ.
    pub fn order(self) -> Option<u32> {
        match self {
            Field::Rational => None,
            Field::Prime(p) => Some(p),
        }
    }

    /// All field elements in a fixed order (prime fields only).
    pub fn elements(self) -> Option<Vec<Scalar>> {
        self.order().map(|p| (0..p as i64).map(|v| self.from_i64(v)).collect())
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "rational"),
            Field::Prime(p) => write!(f, "prime:{p}"),
        }
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Field> {
        if s == "rational" {
            return Ok(Field::Rational);
        }
        if let Some(p) = s.strip_prefix("prime:") {
            let p: u32 = p
                .parse()
                .map_err(|_| Error::InvalidField(format!("bad prime in {s:?}")))?;
            return Field::prime(p);
        }
        Err(Error::InvalidField(format!("expected rational or prime:P, got {s:?}")))
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    /// Always kept in lowest terms with a positive denominator.
    Rational(BigRational),
    Prime { value: u32, modulus: u32 },
}

impl Scalar {
    pub fn field(&self) -> Field {
        match self {
            Scalar::Rational(_) => Field::Rational,
            Scalar::Prime { modulus, .. } => Field::Prime(*modulus),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(q) => q.is_zero(),
            Scalar::Prime { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rational(q) => q.is_one(),
            Scalar::Prime { value, .. } => *value == 1,
        }
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inverse(&self) -> Scalar {
        assert!(!self.is_zero(), "inverse of zero");
        match self {
            Scalar::Rational(q) => Scalar::Rational(q.recip()),
            Scalar::Prime { value, modulus } => {
                // Fermat: a^(p-2)
                let p = *modulus as u64;
                let mut base = *value as u64;
                let mut exp = p - 2;
                let mut acc = 1u64;
                while exp > 0 {
                    if exp & 1 == 1 {
                        acc = acc * base % p;
                    }
                    base = base * base % p;
                    exp >>= 1;
                }
                Scalar::Prime { value: acc as u32, modulus: *modulus }
            }
        }
    }

    pub fn div(&self, rhs: &Scalar) -> Scalar {
        self * &rhs.inverse()
    }

    fn check_same(&self, rhs: &Scalar) -> u32 {
        match (self, rhs) {
            (Scalar::Prime { modulus: a, .. }, Scalar::Prime { modulus: b, .. }) if a == b => *a,
            _ => panic!("field mismatch: {} vs {}", self.field(), rhs.field()),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(q) => {
                if q.denom().is_one() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
            Scalar::Prime { value, .. } => write!(f, "{value}"),
        }
    }
}

impl Add for &Scalar {
    type Output = Scalar;

    fn add(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            _ => {
                let p = self.check_same(rhs);
                let (Scalar::Prime { value: a, .. }, Scalar::Prime { value: b, .. }) = (self, rhs)
                else {
                    unreachable!()
                };
                Scalar::Prime {
                    value: ((*a as u64 + *b as u64) % p as u64) as u32,
                    modulus: p,
                }
            }
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;

    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;

    fn mul(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            _ => {
                let p = self.check_same(rhs);
                let (Scalar::Prime { value: a, .. }, Scalar::Prime { value: b, .. }) = (self, rhs)
                else {
                    unreachable!()
                };
                Scalar::Prime {
                    value: ((*a as u64 * *b as u64) % p as u64) as u32,
                    modulus: p,
                }
            }
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(a) => Scalar::Rational(-a),
            Scalar::Prime { value, modulus } => Scalar::Prime {
                value: (modulus - value) % modulus,
                modulus: *modulus,
            },
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Size of the largest numerator or denominator, in bits. Used only for
/// diagnostics on coefficient growth.
pub fn bit_size(s: &Scalar) -> u64 {
    match s {
        Scalar::Rational(q) => q.numer().abs().bits().max(q.denom().bits()),
        Scalar::Prime { modulus, .. } => 32 - modulus.leading_zeros() as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_canonical_strings() {
        let q = Field::Rational;
        assert_eq!(q.parse("4/6").unwrap().to_string(), "2/3");
        assert_eq!(q.parse("3/-6").unwrap().to_string(), "-1/2");
        assert_eq!(q.parse("0/5").unwrap().to_string(), "0");
        assert_eq!(q.parse("+7").unwrap().to_string(), "7");
        assert!(q.parse("1/0").is_err());
        assert!(q.parse("x").is_err());
    }

    #[test]
    fn prime_arithmetic() {
        let f = Field::prime(7).unwrap();
        let a = f.from_i64(3);
        let b = f.from_i64(5);
        assert_eq!((&a + &b).to_string(), "1");
        assert_eq!((&a * &b).to_string(), "1");
        assert_eq!((&a - &b).to_string(), "5");
        assert_eq!((&a * &a.inverse()), f.one());
        assert_eq!(f.parse("1/2").unwrap(), f.from_i64(4));
        assert!(f.parse("1/7").is_err());
    }

    #[test]
    fn field_strings() {
        assert_eq!("rational".parse::<Field>().unwrap(), Field::Rational);
        assert_eq!("prime:5".parse::<Field>().unwrap(), Field::Prime(5));
        assert!("prime:6".parse::<Field>().is_err());
        assert!("real".parse::<Field>().is_err());
        assert_eq!(Field::Prime(5).to_string(), "prime:5");
    }

    #[test]
    #[should_panic(expected = "field mismatch")]
    fn mixed_modes_panic() {
        let _ = &Field::Rational.one() + &Field::Prime(3).one();
    }
}
