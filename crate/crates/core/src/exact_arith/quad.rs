//! Elements of a real quadratic field `Q(√D)`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// `a + b·√D` with `a, b` rational and `D` a square-free integer `≥ 2`.
///
/// Rational values (`b = 0`) carry `disc = 0` and combine with elements of any
/// field. Combining two irrational elements from different fields panics.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadExt {
    a: Rational,
    b: Rational,
    disc: u64,
}

pub fn is_square_free(d: u64) -> bool {
    if d < 2 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= d {
        if d % (p * p) == 0 {
            return false;
        }
        p += 1;
    }
    true
}

fn join_disc(x: u64, y: u64) -> u64 {
    match (x, y) {
        (0, y) => y,
        (x, 0) => x,
        (x, y) if x == y => x,
        (x, y) => panic!("mixing Q(√{x}) and Q(√{y})"),
    }
}

impl QuadExt {
    pub fn new(a: Rational, b: Rational, disc: u64) -> Result<Self> {
        if b.is_zero() {
            return Ok(QuadExt::rational(a));
        }
        if !is_square_free(disc) {
            return Err(Error::Validation(format!(
                "discriminant {disc} is not a square-free integer >= 2"
            )));
        }
        Ok(QuadExt { a, b, disc })
    }

    pub fn rational(a: Rational) -> Self {
        QuadExt {
            a,
            b: Rational::zero(),
            disc: 0,
        }
    }

    pub fn int(n: i64) -> Self {
        QuadExt::rational(Rational::from_integer(n.into()))
    }

    pub fn frac(p: i64, q: i64) -> Self {
        QuadExt::rational(Rational::new(p.into(), q.into()))
    }

    /// `√D`.
    pub fn sqrt(disc: u64) -> Result<Self> {
        QuadExt::new(Rational::zero(), Rational::one(), disc)
    }

    /// `p/q + (r/s)·√D` from machine integers.
    pub fn from_parts(p: i64, q: i64, r: i64, s: i64, disc: u64) -> Result<Self> {
        QuadExt::new(
            Rational::new(p.into(), q.into()),
            Rational::new(r.into(), s.into()),
            disc,
        )
    }

    /// The golden ratio `(1 + √5)/2`.
    pub fn golden() -> Self {
        QuadExt::from_parts(1, 2, 1, 2, 5).expect("5 is square-free")
    }

    /// The silver ratio `1 + √2`.
    pub fn silver() -> Self {
        QuadExt::from_parts(1, 1, 1, 1, 2).expect("2 is square-free")
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    /// The discriminant, `0` for rational values.
    pub fn disc(&self) -> u64 {
        self.disc
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Galois conjugate `a − b·√D`.
    pub fn conjugate(&self) -> Self {
        QuadExt {
            a: self.a.clone(),
            b: -self.b.clone(),
            disc: self.disc,
        }
    }

    /// Field norm `a² − D·b²`.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * Rational::from_integer(self.disc.into())
    }

    pub fn signum(&self) -> i32 {
        let sa = sign(&self.a);
        let sb = sign(&self.b);
        if sb == 0 || sa == sb {
            return sa;
        }
        if sa == 0 {
            return sb;
        }
        let a2 = &self.a * &self.a;
        let db2 = &self.b * &self.b * Rational::from_integer(self.disc.into());
        match a2.cmp(&db2) {
            Ordering::Greater => sa,
            _ => sb,
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "division by zero in Q(√D)");
        let n = self.norm();
        let c = self.conjugate();
        QuadExt {
            a: c.a / &n,
            b: c.b / &n,
            disc: self.disc,
        }
    }

    /// Nearest `f64`; conjugate-sign cancellation is avoided by dividing the norm.
    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        if self.b.is_zero() {
            return a;
        }
        let root = (self.disc as f64).sqrt();
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        if sign(&self.a) * sign(&self.b) >= 0 {
            a + b * root
        } else {
            self.norm().to_f64().unwrap_or(f64::NAN) / (a - b * root)
        }
    }

    /// The exact dyadic rational equal to `x`.
    pub fn from_f64(x: f64) -> Self {
        QuadExt::rational(Rational::from_float(x).expect("finite float"))
    }

    /// Integer value, when the element is one.
    pub fn to_bigint(&self) -> Option<BigInt> {
        if self.b.is_zero() && self.a.is_integer() {
            Some(self.a.to_integer())
        } else {
            None
        }
    }

    /// Coordinates `(a, b)` as rationals over the basis `{1, √D}`.
    pub fn rational_parts(&self) -> (Rational, Rational) {
        (self.a.clone(), self.b.clone())
    }
}

fn sign(r: &Rational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

impl fmt::Debug for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "{}*sqrt({})", self.b, self.disc)
        } else {
            write!(f, "{}+{}*sqrt({})", self.a, self.b, self.disc)
        }
    }
}

/// Parses an integer, a fraction `p/q`, or a finite decimal such as `-2.618`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational literal: `{s}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let neg = int_part.starts_with('-');
    let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
    if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let mut num = BigInt::from_str(&digits).map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

impl Zero for QuadExt {
    fn zero() -> Self {
        QuadExt::rational(Rational::zero())
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for QuadExt {
    fn one() -> Self {
        QuadExt::rational(Rational::one())
    }
}

impl PartialOrd for QuadExt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadExt {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum().cmp(&0)
    }
}

impl ToPrimitive for QuadExt {
    fn to_i64(&self) -> Option<i64> {
        self.to_bigint().and_then(|n| n.to_i64())
    }
    fn to_u64(&self) -> Option<u64> {
        self.to_bigint().and_then(|n| n.to_u64())
    }
    fn to_f64(&self) -> Option<f64> {
        Some(QuadExt::to_f64(self))
    }
}

impl<'a> Add<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    fn add(self, rhs: &QuadExt) -> QuadExt {
        let disc = join_disc(self.disc, rhs.disc);
        let b = &self.b + &rhs.b;
        let disc = if b.is_zero() { 0 } else { disc };
        QuadExt {
            a: &self.a + &rhs.a,
            b,
            disc,
        }
    }
}

impl<'a> Sub<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    fn sub(self, rhs: &QuadExt) -> QuadExt {
        let disc = join_disc(self.disc, rhs.disc);
        let b = &self.b - &rhs.b;
        let disc = if b.is_zero() { 0 } else { disc };
        QuadExt {
            a: &self.a - &rhs.a,
            b,
            disc,
        }
    }
}

impl<'a> Mul<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    fn mul(self, rhs: &QuadExt) -> QuadExt {
        let disc = join_disc(self.disc, rhs.disc);
        let d = Rational::from_integer(disc.into());
        let a = &self.a * &rhs.a + &self.b * &rhs.b * d;
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        let disc = if b.is_zero() { 0 } else { disc };
        QuadExt { a, b, disc }
    }
}

impl<'a> Div<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &QuadExt) -> QuadExt {
        self * &rhs.inv()
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<QuadExt> for QuadExt {
            type Output = QuadExt;
            fn $m(self, rhs: QuadExt) -> QuadExt { (&self).$m(&rhs) }
        }
        impl<'a> $tr<&'a QuadExt> for QuadExt {
            type Output = QuadExt;
            fn $m(self, rhs: &QuadExt) -> QuadExt { (&self).$m(rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl Neg for QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt {
            a: -self.a,
            b: -self.b,
            disc: self.disc,
        }
    }
}

impl Neg for &QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        -self.clone()
    }
}

impl From<i64> for QuadExt {
    fn from(n: i64) -> Self {
        QuadExt::int(n)
    }
}

impl From<Rational> for QuadExt {
    fn from(r: Rational) -> Self {
        QuadExt::rational(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_ratio_satisfies_its_polynomial() {
        let t = QuadExt::golden();
        assert_eq!(&t * &t, &t + &QuadExt::one());
        assert_eq!(t.norm(), Rational::from_integer((-1).into()));
        assert_eq!(t.conjugate(), QuadExt::one() - t.clone());
    }

    #[test]
    fn sign_of_small_conjugates() {
        // (1 - τ)^20 is tiny and positive; (1 - τ)^21 tiny and negative.
        let c = QuadExt::one() - QuadExt::golden();
        let mut p = QuadExt::one();
        for _ in 0..20 {
            p = &p * &c;
        }
        assert_eq!(p.signum(), 1);
        assert!(p.to_f64() > 0.0 && p.to_f64() < 1e-3);
        let rel = (p.to_f64() - 0.618_033_988_749_895f64.powi(20)).abs() / p.to_f64();
        assert!(rel < 1e-12);
        assert_eq!((&p * &c).signum(), -1);
    }

    #[test]
    fn ordering_and_division() {
        let r2 = QuadExt::sqrt(2).unwrap();
        assert!(r2 > QuadExt::frac(141, 100));
        assert!(r2 < QuadExt::frac(142, 100));
        let s = QuadExt::silver();
        assert_eq!(&(&QuadExt::one() / &s) * &s, QuadExt::one());
        assert_eq!(QuadExt::one() / s.clone(), r2 - QuadExt::one());
    }

    #[test]
    fn rejects_non_square_free() {
        assert!(QuadExt::sqrt(8).is_err());
        assert!(QuadExt::sqrt(1).is_err());
        assert!(QuadExt::from_parts(1, 1, 0, 1, 4).is_ok());
    }

    #[test]
    #[should_panic(expected = "mixing")]
    fn mixing_fields_panics() {
        let _ = QuadExt::sqrt(2).unwrap() + QuadExt::sqrt(5).unwrap();
    }

    #[test]
    fn parses_literals() {
        assert_eq!(parse_rational("3/6").unwrap(), Rational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("-2.5").unwrap(), Rational::new((-5).into(), 2.into()));
        assert_eq!(parse_rational("1e2").unwrap(), Rational::from_integer(100.into()));
        assert_eq!(parse_rational(".25").unwrap(), Rational::new(1.into(), 4.into()));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
    }
}
