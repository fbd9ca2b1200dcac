//! Exact scalars over a prime field F_p or over the rationals.
//!
//! Scalars carry their field so that mixing fields is caught at runtime.
//! The operator impls panic on a field mismatch; the `checked_*` methods
//! report it as an error instead.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldSpec {
    Prime(u64),
    Rationals,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    pub fn prime(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(FieldSpec::Prime(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    pub fn zero(&self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        match *self {
            FieldSpec::Prime(p) => Scalar::Mod {
                v: v.rem_euclid(p as i64) as u64,
                p,
            },
            FieldSpec::Rationals => Scalar::Rat(BigRational::from_integer(BigInt::from(v))),
        }
    }

    pub fn ratio(&self, num: i64, den: i64) -> Result<Scalar> {
        let d = self.from_i64(den);
        Ok(self.from_i64(num).mul(&d.inv()?))
    }

    /// Number of elements, if finite.
    pub fn order(&self) -> Option<u64> {
        match *self {
            FieldSpec::Prime(p) => Some(p),
            FieldSpec::Rationals => None,
        }
    }

    /// All elements (or all nonzero ones) in residue order.
    pub fn enumerate(&self, nonzero: bool) -> Result<Vec<Scalar>> {
        match *self {
            FieldSpec::Prime(p) => {
                let start = if nonzero { 1 } else { 0 };
                Ok((start..p).map(|v| Scalar::Mod { v, p }).collect())
            }
            FieldSpec::Rationals => Err(Error::NotEnumerable(self.to_string())),
        }
    }

    pub fn parse_scalar(&self, s: &str) -> Result<Scalar> {
        let bad = || Error::Parse {
            what: "scalar",
            input: s.to_string(),
        };
        let t = s.trim();
        let (num, den) = match t.split_once('/') {
            Some((a, b)) => (
                BigInt::from_str(a.trim()).map_err(|_| bad())?,
                BigInt::from_str(b.trim()).map_err(|_| bad())?,
            ),
            None => (BigInt::from_str(t).map_err(|_| bad())?, BigInt::one()),
        };
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match *self {
            FieldSpec::Prime(p) => {
                let pb = BigInt::from(p);
                let reduce = |x: &BigInt| -> u64 {
                    let r = ((x % &pb) + &pb) % &pb;
                    r.to_string().parse().unwrap()
                };
                let n = Scalar::Mod { v: reduce(&num), p };
                let d = Scalar::Mod { v: reduce(&den), p };
                Ok(n.mul(&d.inv()?))
            }
            FieldSpec::Rationals => Ok(Scalar::Rat(BigRational::new(num, den))),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Prime(p) => write!(f, "F_{p}"),
            FieldSpec::Rationals => write!(f, "Q"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    /// Accepts `5`, `F_5`, `F5`, `Q`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("q") || t.eq_ignore_ascii_case("rationals") {
            return Ok(FieldSpec::Rationals);
        }
        let digits = t
            .strip_prefix("F_")
            .or_else(|| t.strip_prefix("F"))
            .or_else(|| t.strip_prefix("f_"))
            .or_else(|| t.strip_prefix("f"))
            .unwrap_or(t);
        let p: u64 = digits.parse().map_err(|_| Error::Parse {
            what: "field",
            input: s.to_string(),
        })?;
        FieldSpec::prime(p)
    }
}

/// An element of F_p (canonical residue) or of Q (lowest terms, positive
/// denominator; `BigRational` keeps that form).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Mod { v: u64, p: u64 },
    Rat(BigRational),
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // extended Euclid on i128 to stay clear of overflow
    let (mut r0, mut r1) = (p as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    t0.rem_euclid(p as i128) as u64
}

impl Scalar {
    pub fn field(&self) -> FieldSpec {
        match self {
            Scalar::Mod { p, .. } => FieldSpec::Prime(*p),
            Scalar::Rat(_) => FieldSpec::Rationals,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Mod { v, .. } => *v == 0,
            Scalar::Rat(r) => r.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Mod { v, .. } => *v == 1,
            Scalar::Rat(r) => r.is_one(),
        }
    }

    fn same_field(&self, o: &Scalar) -> Result<()> {
        if self.field() == o.field() {
            Ok(())
        } else {
            Err(Error::MixedField(
                self.field().to_string(),
                o.field().to_string(),
            ))
        }
    }

    pub fn checked_add(&self, o: &Scalar) -> Result<Scalar> {
        self.same_field(o)?;
        Ok(match (self, o) {
            (Scalar::Mod { v: a, p }, Scalar::Mod { v: b, .. }) => Scalar::Mod {
                v: ((*a as u128 + *b as u128) % *p as u128) as u64,
                p: *p,
            },
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            _ => unreachable!(),
        })
    }

    pub fn checked_sub(&self, o: &Scalar) -> Result<Scalar> {
        self.same_field(o)?;
        Ok(match (self, o) {
            (Scalar::Mod { v: a, p }, Scalar::Mod { v: b, .. }) => Scalar::Mod {
                v: ((*a as u128 + *p as u128 - *b as u128) % *p as u128) as u64,
                p: *p,
            },
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a - b),
            _ => unreachable!(),
        })
    }

    pub fn checked_mul(&self, o: &Scalar) -> Result<Scalar> {
        self.same_field(o)?;
        Ok(match (self, o) {
            (Scalar::Mod { v: a, p }, Scalar::Mod { v: b, .. }) => Scalar::Mod {
                v: ((*a as u128 * *b as u128) % *p as u128) as u64,
                p: *p,
            },
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            _ => unreachable!(),
        })
    }

    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match self {
            Scalar::Mod { v, p } => Scalar::Mod {
                v: inv_mod(*v, *p),
                p: *p,
            },
            Scalar::Rat(r) => Scalar::Rat(r.recip()),
        })
    }

    pub fn checked_div(&self, o: &Scalar) -> Result<Scalar> {
        self.same_field(o)?;
        self.checked_mul(&o.inv()?)
    }

    pub fn add(&self, o: &Scalar) -> Scalar {
        self.checked_add(o).expect("scalar field mismatch")
    }

    pub fn sub(&self, o: &Scalar) -> Scalar {
        self.checked_sub(o).expect("scalar field mismatch")
    }

    pub fn mul(&self, o: &Scalar) -> Scalar {
        self.checked_mul(o).expect("scalar field mismatch")
    }

    pub fn div(&self, o: &Scalar) -> Result<Scalar> {
        self.checked_div(o)
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Mod { v, p } => Scalar::Mod {
                v: (*p - *v) % *p,
                p: *p,
            },
            Scalar::Rat(r) => Scalar::Rat(-r),
        }
    }

    /// Integer power; negative exponents invert.
    pub fn pow(&self, e: i64) -> Result<Scalar> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = self.field().one();
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    /// Residue for prime fields. Used as a sort key and by enumerators.
    pub fn residue(&self) -> Option<u64> {
        match self {
            Scalar::Mod { v, .. } => Some(*v),
            Scalar::Rat(_) => None,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Mod { v, .. } => write!(f, "{v}"),
            Scalar::Rat(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Total order used only for deterministic sorting: residues for F_p,
/// numeric order for Q, and F_p before Q when fields differ.
impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (Scalar::Mod { v: a, p: pa }, Scalar::Mod { v: b, p: pb }) => (pa, a).cmp(&(pb, b)),
            (Scalar::Rat(a), Scalar::Rat(b)) => a.cmp(b),
            (Scalar::Mod { .. }, Scalar::Rat(_)) => std::cmp::Ordering::Less,
            (Scalar::Rat(_), Scalar::Mod { .. }) => std::cmp::Ordering::Greater,
        }
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        Scalar::add(self, o)
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        Scalar::sub(self, o)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        Scalar::mul(self, o)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::neg(self)
    }
}

/// Absolute height of a rational, handy for bounding random samples.
pub fn rational_height(s: &Scalar) -> Option<BigInt> {
    match s {
        Scalar::Rat(r) => Some(r.numer().abs().max(r.denom().clone())),
        Scalar::Mod { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(p: u64) -> FieldSpec {
        FieldSpec::prime(p).unwrap()
    }

    #[test]
    fn modular_arithmetic() {
        let k = f(5);
        assert_eq!(k.from_i64(3).add(&k.from_i64(4)), k.from_i64(2));
        assert_eq!(k.from_i64(2).mul(&k.from_i64(3)), k.one());
        assert_eq!(k.from_i64(2).inv().unwrap(), k.from_i64(3));
        assert_eq!(f(7).from_i64(3).inv().unwrap(), f(7).from_i64(5));
        assert_eq!(k.from_i64(-1).to_string(), "4");
    }

    #[test]
    fn rational_arithmetic() {
        let q = FieldSpec::Rationals;
        let half = q.ratio(1, 2).unwrap();
        let third = q.ratio(1, 3).unwrap();
        assert_eq!(half.add(&third), q.ratio(5, 6).unwrap());
        assert_eq!(
            q.ratio(-2, 3).unwrap().inv().unwrap(),
            q.ratio(-3, 2).unwrap()
        );
        assert_eq!(q.ratio(2, -4).unwrap().to_string(), "-1/2");
        assert!(q.ratio(1, 0).is_err());
    }

    #[test]
    fn zero_has_no_inverse() {
        assert_eq!(f(3).zero().inv(), Err(Error::DivisionByZero));
        assert_eq!(
            FieldSpec::Rationals.zero().inv(),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn mixed_fields_are_rejected() {
        let a = f(3).one();
        let b = f(5).one();
        assert!(matches!(a.checked_add(&b), Err(Error::MixedField(..))));
        assert!(a.checked_mul(&FieldSpec::Rationals.one()).is_err());
    }

    #[test]
    fn primality_and_parsing() {
        assert_eq!(FieldSpec::prime(4), Err(Error::NotPrime(4)));
        assert!(FieldSpec::prime(1).is_err());
        assert_eq!("F_7".parse::<FieldSpec>().unwrap(), f(7));
        assert_eq!("5".parse::<FieldSpec>().unwrap(), f(5));
        assert_eq!("Q".parse::<FieldSpec>().unwrap(), FieldSpec::Rationals);
        assert!("9".parse::<FieldSpec>().is_err());
    }

    #[test]
    fn enumeration() {
        assert_eq!(
            f(3).enumerate(true).unwrap(),
            vec![f(3).from_i64(1), f(3).from_i64(2)]
        );
        assert_eq!(
            f(2).enumerate(false).unwrap(),
            vec![f(2).zero(), f(2).one()]
        );
        assert_eq!(
            FieldSpec::Rationals.enumerate(false),
            Err(Error::NotEnumerable("Q".into()))
        );
    }

    fn rational() -> impl Strategy<Value = Scalar> {
        (-50i64..50, 1i64..30).prop_map(|(n, d)| FieldSpec::Rationals.ratio(n, d).unwrap())
    }

    fn residue() -> impl Strategy<Value = Scalar> {
        (
            prop_oneof![Just(2u64), Just(3), Just(5), Just(101)],
            any::<i64>(),
        )
            .prop_map(|(p, v)| FieldSpec::Prime(p).from_i64(v))
    }

    proptest! {
        #[test]
        fn field_axioms_rationals(a in rational(), b in rational(), c in rational()) {
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            if !a.is_zero() {
                prop_assert!(a.mul(&a.inv().unwrap()).is_one());
            }
        }

        #[test]
        fn field_axioms_prime(p in prop_oneof![Just(2u64), Just(3), Just(5), Just(7), Just(101)],
                              x in any::<i64>(), y in any::<i64>(), z in any::<i64>()) {
            let k = FieldSpec::Prime(p);
            let (a, b, c) = (k.from_i64(x), k.from_i64(y), k.from_i64(z));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.sub(&a), k.zero());
            if !a.is_zero() {
                prop_assert!(a.mul(&a.inv().unwrap()).is_one());
            }
        }

        #[test]
        fn print_parse_round_trip(a in prop_oneof![rational(), residue()]) {
            let k = a.field();
            prop_assert_eq!(k.parse_scalar(&a.to_string()).unwrap(), a);
        }
    }
}
