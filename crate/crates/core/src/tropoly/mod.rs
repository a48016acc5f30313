//! Valued polynomials, p-adic valuations, tropicalization and tropical
//! hypersurfaces in the (min, +) convention.

mod complex;

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::{Integer, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactgeom::rational::{dot, point};
use crate::exactgeom::{GeomError, Point, Rational};

pub use complex::{balancing_defect, hypersurface, local_cone, rays_span_subspace, ComplexCell, ComplexSource, TropicalComplex};
pub(crate) use complex::cells_from_subdivision;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TropError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("a single-term polynomial has empty tropical hypersurface")]
    EmptyHypersurface,
    #[error("point does not lie on the complex")]
    PointNotOnComplex,
    #[error("exponent {0:?} appears twice")]
    DuplicateExponent(Vec<i64>),
    #[error("exponent length {got} does not match n_vars = {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("stored valuation of {exp:?} disagrees with its coefficient")]
    ValuationMismatch { exp: Vec<i64> },
    #[error("local intersection failed: {0}")]
    Intersection(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The p-adic valuation of a rational; `None` stands for +∞ (q = 0).
pub fn padic_valuation(q: &Rational, p: u64) -> Result<Option<Rational>, TropError> {
    if !is_prime(p) {
        return Err(TropError::NotPrime(p));
    }
    if q.is_zero() {
        return Ok(None);
    }
    let pb = BigInt::from(p);
    let count = |mut x: BigInt| {
        let mut k = 0i64;
        x = x.abs();
        while (&x % &pb).is_zero() {
            x /= &pb;
            k += 1;
        }
        k
    };
    Ok(Some(Rational::from_integer((count(q.numer().clone()) - count(q.denom().clone())).into())))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub exp: Vec<i64>,
    pub val: Rational,
    pub coeff: Option<Rational>,
}

/// A polynomial remembered through its support and coefficient valuations.
#[derive(Clone, Debug, PartialEq)]
pub struct ValuedPolynomial {
    n_vars: usize,
    terms: Vec<Term>,
    prime: Option<u64>,
    collision: bool,
}

impl ValuedPolynomial {
    pub fn new(n_vars: usize, terms: Vec<Term>, prime: Option<u64>) -> Result<Self, TropError> {
        let mut seen = BTreeMap::new();
        for t in &terms {
            if t.exp.len() != n_vars {
                return Err(TropError::ArityMismatch { expected: n_vars, got: t.exp.len() });
            }
            if seen.insert(t.exp.clone(), ()).is_some() {
                return Err(TropError::DuplicateExponent(t.exp.clone()));
            }
            if let (Some(c), Some(p)) = (&t.coeff, prime) {
                if padic_valuation(c, p)?.as_ref() != Some(&t.val) {
                    return Err(TropError::ValuationMismatch { exp: t.exp.clone() });
                }
            }
        }
        if terms.is_empty() {
            return Err(TropError::ZeroPolynomial);
        }
        Ok(ValuedPolynomial { n_vars, terms, prime, collision: false })
    }

    /// Builds a polynomial from (exponent, valuation) pairs.
    pub fn from_vals(n_vars: usize, terms: &[(Vec<i64>, Rational)]) -> Result<Self, TropError> {
        let terms = terms.iter().map(|(e, v)| Term { exp: e.clone(), val: v.clone(), coeff: None }).collect();
        Self::new(n_vars, terms, None)
    }

    /// Convenience for integer valuations.
    pub fn from_int_vals(n_vars: usize, terms: &[(Vec<i64>, i64)]) -> Result<Self, TropError> {
        let t: Vec<(Vec<i64>, Rational)> = terms.iter().map(|(e, v)| (e.clone(), Rational::from_integer((*v).into()))).collect();
        Self::from_vals(n_vars, &t)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn prime(&self) -> Option<u64> {
        self.prime
    }

    /// True if an exponent was produced by two different sources (product or
    /// pushforward) and the valuations were merged by taking the minimum.
    pub fn collision(&self) -> bool {
        self.collision
    }

    pub fn support(&self) -> Vec<Vec<i64>> {
        self.terms.iter().map(|t| t.exp.clone()).collect()
    }

    pub fn lifted_support(&self) -> Vec<(Vec<i64>, Rational)> {
        self.terms.iter().map(|t| (t.exp.clone(), t.val.clone())).collect()
    }

    pub fn valuation_of(&self, exp: &[i64]) -> Option<&Rational> {
        self.terms.iter().find(|t| t.exp == exp).map(|t| &t.val)
    }

    /// trop(f)(x) = min over terms of val + α·x.
    pub fn evaluate(&self, x: &[Rational]) -> Rational {
        self.terms.iter().map(|t| &t.val + dot(&point(&t.exp), x)).min().unwrap()
    }

    /// Indices of the terms attaining the minimum at x.
    pub fn active_terms(&self, x: &[Rational]) -> Vec<usize> {
        let vals: Vec<Rational> = self.terms.iter().map(|t| &t.val + dot(&point(&t.exp), x)).collect();
        let m = vals.iter().min().unwrap().clone();
        (0..vals.len()).filter(|&i| vals[i] == m).collect()
    }

    /// Membership in the tropical hypersurface.
    pub fn vanishes_at(&self, x: &[Rational]) -> bool {
        self.active_terms(x).len() >= 2
    }

    /// Restriction to a subset of terms with valuations reset to zero (the
    /// initial form that governs the local cone).
    pub fn initial_form(&self, idx: &[usize]) -> ValuedPolynomial {
        let terms = idx.iter().map(|&i| Term { exp: self.terms[i].exp.clone(), val: Rational::zero(), coeff: None }).collect();
        ValuedPolynomial { n_vars: self.n_vars, terms, prime: None, collision: false }
    }

    /// Rebuilds from merged (exponent → valuation) data.
    pub(crate) fn from_merged(n_vars: usize, merged: BTreeMap<Vec<i64>, Rational>, collision: bool) -> Self {
        let terms = merged.into_iter().map(|(exp, val)| Term { exp, val, coeff: None }).collect();
        ValuedPolynomial { n_vars, terms, prime: None, collision }
    }

    pub fn with_collision(mut self, collision: bool) -> Self {
        self.collision = collision;
        self
    }

    /// Shifts every valuation by the given amounts (same order as `terms`).
    pub fn with_valuation_offsets(&self, offsets: &[Rational]) -> ValuedPolynomial {
        let terms = self
            .terms
            .iter()
            .zip(offsets)
            .map(|(t, o)| Term { exp: t.exp.clone(), val: &t.val + o, coeff: None })
            .collect();
        ValuedPolynomial { n_vars: self.n_vars, terms, prime: None, collision: false }
    }

    pub fn degree(&self) -> i64 {
        self.terms.iter().map(|t| t.exp.iter().sum::<i64>()).max().unwrap_or(0)
    }
}

/// Tropicalization of a polynomial with rational coefficients.
pub fn tropicalize(n_vars: usize, coeffs: &[(Vec<i64>, Rational)], p: u64) -> Result<ValuedPolynomial, TropError> {
    if !is_prime(p) {
        return Err(TropError::NotPrime(p));
    }
    let mut merged: BTreeMap<Vec<i64>, Rational> = BTreeMap::new();
    let mut order: Vec<Vec<i64>> = Vec::new();
    for (e, c) in coeffs {
        if e.len() != n_vars {
            return Err(TropError::ArityMismatch { expected: n_vars, got: e.len() });
        }
        if !merged.contains_key(e) {
            order.push(e.clone());
        }
        *merged.entry(e.clone()).or_insert_with(Rational::zero) += c;
    }
    let mut terms = Vec::new();
    for e in order {
        let c = merged[&e].clone();
        if let Some(v) = padic_valuation(&c, p)? {
            terms.push(Term { exp: e, val: v, coeff: Some(c) });
        }
    }
    if terms.is_empty() {
        return Err(TropError::ZeroPolynomial);
    }
    ValuedPolynomial::new(n_vars, terms, Some(p))
}

/// Tropical product: exponents add, valuations add, collisions take the min.
pub fn tropical_product(f: &ValuedPolynomial, g: &ValuedPolynomial) -> Result<ValuedPolynomial, TropError> {
    if f.n_vars != g.n_vars {
        return Err(TropError::Geom(GeomError::DimMismatch(f.n_vars, g.n_vars)));
    }
    let mut merged: BTreeMap<Vec<i64>, Rational> = BTreeMap::new();
    let mut collision = false;
    for a in &f.terms {
        for b in &g.terms {
            let e: Vec<i64> = a.exp.iter().zip(&b.exp).map(|(x, y)| x + y).collect();
            let v = &a.val + &b.val;
            match merged.get_mut(&e) {
                Some(old) => {
                    collision = true;
                    if v < *old {
                        *old = v;
                    }
                }
                None => {
                    merged.insert(e, v);
                }
            }
        }
    }
    Ok(ValuedPolynomial::from_merged(f.n_vars, merged, collision))
}

pub fn tropical_product_all(fs: &[ValuedPolynomial]) -> Result<ValuedPolynomial, TropError> {
    let mut acc = fs.first().ok_or(TropError::ZeroPolynomial)?.clone();
    for f in &fs[1..] {
        acc = tropical_product(&acc, f)?;
    }
    Ok(acc)
}

/// Integer lattice length of a vector (gcd of entries).
pub fn lattice_length(v: &[i64]) -> u64 {
    v.iter().fold(0i64, |g, x| g.gcd(x)).unsigned_abs()
}

pub(crate) fn to_i64_vec(v: &[BigInt]) -> Vec<i64> {
    v.iter().map(|x| x.to_i64().expect("small integer")).collect()
}

#[allow(dead_code)]
pub(crate) fn rational_point(v: &[i64]) -> Point {
    point(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::{frac, int};

    #[test]
    fn valuations() {
        assert_eq!(padic_valuation(&int(-4), 2).unwrap(), Some(int(2)));
        assert_eq!(padic_valuation(&int(0), 2).unwrap(), None);
        assert_eq!(padic_valuation(&int(338), 2).unwrap(), Some(int(1)));
        assert_eq!(padic_valuation(&frac(3, 8), 2).unwrap(), Some(int(-3)));
        assert_eq!(padic_valuation(&int(5), 4), Err(TropError::NotPrime(4)));
    }

    #[test]
    fn tropicalize_examples() {
        let f1 = tropicalize(
            3,
            &[(vec![1, 0, 0], int(1)), (vec![0, 1, 0], int(2)), (vec![0, 0, 1], int(1)), (vec![0, 0, 0], int(-4))],
            2,
        )
        .unwrap();
        let vals: Vec<Rational> = f1.terms().iter().map(|t| t.val.clone()).collect();
        assert_eq!(vals, vec![int(0), int(1), int(0), int(2)]);
        let c = tropicalize(1, &[(vec![0], int(3))], 2).unwrap();
        assert_eq!(c.terms().len(), 1);
        assert_eq!(c.terms()[0].val, int(0));
        assert_eq!(tropicalize(1, &[(vec![0], int(0))], 2), Err(TropError::ZeroPolynomial));
    }

    #[test]
    fn product_flags_collisions() {
        let f = ValuedPolynomial::from_int_vals(1, &[(vec![1], 0), (vec![0], 0)]).unwrap();
        let g = tropical_product(&f, &f).unwrap();
        assert!(g.collision());
        assert_eq!(g.terms().len(), 3);
        let h = ValuedPolynomial::from_int_vals(1, &[(vec![2], 5)]).unwrap();
        assert!(!tropical_product(&f, &h).unwrap().collision());
    }
}
