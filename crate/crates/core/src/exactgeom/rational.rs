//! Rational scalars and small vector helpers.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

use super::GeomError;

/// Exact rational scalar. `BigRational` keeps numerator/denominator reduced
/// with a positive denominator.
pub type Rational = BigRational;

/// A point (or vector) with rational coordinates.
pub type Point = Vec<Rational>;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn point(xs: &[i64]) -> Point {
    xs.iter().map(|&x| int(x)).collect()
}

pub fn zero_point(n: usize) -> Point {
    vec![Rational::zero(); n]
}

/// Parses `"a"`, `"-a"` or `"a/b"`.
pub fn parse_rational(s: &str) -> Result<Rational, GeomError> {
    let bad = || GeomError::BadRational(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

/// Integers print as `"a"`, everything else as `"a/b"`.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn add(a: &[Rational], b: &[Rational]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Rational], b: &[Rational]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[Rational], s: &Rational) -> Point {
    a.iter().map(|x| x * s).collect()
}

pub fn neg(a: &[Rational]) -> Point {
    a.iter().map(|x| -x).collect()
}

pub fn is_zero_vec(a: &[Rational]) -> bool {
    a.iter().all(Zero::is_zero)
}

pub fn to_rational_vec(xs: &[i64]) -> Point {
    point(xs)
}

pub fn to_rational_bigvec(xs: &[BigInt]) -> Point {
    xs.iter().map(|x| Rational::from_integer(x.clone())).collect()
}

/// Multiplies by the lcm of denominators and divides by the gcd of numerators.
/// The sign is preserved (positive scaling only). Zero maps to zero.
pub fn primitive_integer(v: &[Rational]) -> Vec<BigInt> {
    let mut l = BigInt::one();
    for x in v {
        l = l.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Positive rescaling of a rational vector to a primitive integer vector,
/// returned as rationals.
pub fn primitive(v: &[Rational]) -> Point {
    to_rational_bigvec(&primitive_integer(v))
}

pub fn bigint_to_i64(x: &BigInt) -> Option<i64> {
    use num::ToPrimitive;
    x.to_i64()
}

/// Lexicographic comparison of rational vectors.
pub fn lex_cmp(a: &[Rational], b: &[Rational]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            std::cmp::Ordering::Equal => {}
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

pub fn abs(q: &Rational) -> Rational {
    q.abs()
}

/// gcd of the absolute values of integer entries (0 for the zero vector).
pub fn gcd_all(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}
