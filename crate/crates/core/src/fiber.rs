//! Fiber polytopes of linear functionals ψ: ℝⁿ → ℝ.
//!
//! Σψ(P) is the Minkowski integral of the slices ψ⁻¹(x) ∩ P over ψ(P). Slices
//! vary linearly between consecutive vertex values, so the integral over each
//! such interval [a, b] equals (b − a) times the slice at the midpoint.

use num::Zero;
use thiserror::Error;

use crate::exactgeom::rational::{add, dot, gcd_all, scale, sub};
use crate::exactgeom::{int, point, GeomError, Point, Polytope, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FiberError {
    #[error("linear functional is zero")]
    ZeroFunctional,
    #[error("linear functional is not primitive")]
    NotPrimitive,
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("slice at level {0} is empty")]
    EmptySlice(String),
    #[error("maximizer over the slice at level {0} is not unique")]
    TieError(String),
    #[error("mixed fiber polytope could not be certified: {0}")]
    MixedFiberNotCertified(GeomError),
    #[error("face is not a facet of the Minkowski sum as required")]
    NotAFacet,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Primitive integer functional.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearFunctional {
    coeffs: Vec<i64>,
}

impl LinearFunctional {
    pub fn new(coeffs: Vec<i64>) -> Result<Self, FiberError> {
        if coeffs.iter().all(|&c| c == 0) {
            return Err(FiberError::ZeroFunctional);
        }
        let g = gcd_all(&coeffs.iter().map(|&c| c.into()).collect::<Vec<_>>());
        if g != 1.into() {
            return Err(FiberError::NotPrimitive);
        }
        Ok(LinearFunctional { coeffs })
    }

    /// Divides out the gcd of a nonzero integer vector.
    pub fn primitive(coeffs: &[i64]) -> Result<Self, FiberError> {
        if coeffs.iter().all(|&c| c == 0) {
            return Err(FiberError::ZeroFunctional);
        }
        let g = coeffs.iter().fold(0i64, |g, &c| num::integer::gcd(g, c));
        LinearFunctional::new(coeffs.iter().map(|c| c / g).collect())
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn as_point(&self) -> Point {
        point(&self.coeffs)
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        dot(&self.as_point(), x)
    }

    /// ψ_P (min) and ψᴾ (max).
    pub fn range(&self, p: &Polytope) -> (Rational, Rational) {
        let w = self.as_point();
        (p.min_value(&w), p.support(&w))
    }

    fn check(&self, p: &Polytope) -> Result<(), FiberError> {
        if p.ambient_dim() != self.dim() {
            return Err(FiberError::DimMismatch(self.dim(), p.ambient_dim()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FiberSource {
    Plain,
    /// Mixed fiber polytope of this many factors.
    Mixed(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiberPolytope {
    pub polytope: Polytope,
    pub source: FiberSource,
    pub psi: LinearFunctional,
}

/// The slice ψ⁻¹(level) ∩ P as a polytope.
pub fn slice(p: &Polytope, psi: &LinearFunctional, level: &Rational) -> Result<Polytope, FiberError> {
    psi.check(p)?;
    let vals: Vec<Rational> = p.vertices().iter().map(|v| psi.eval(v)).collect();
    let mut pts: Vec<Point> = Vec::new();
    for (i, a) in p.vertices().iter().enumerate() {
        if &vals[i] == level {
            pts.push(a.clone());
        }
        for (j, b) in p.vertices().iter().enumerate().skip(i + 1) {
            let (va, vb) = (&vals[i], &vals[j]);
            if (va < level && level < vb) || (vb < level && level < va) {
                let t = (level - va) / (vb - va);
                pts.push(add(a, &scale(&sub(b, a), &t)));
            }
        }
    }
    if pts.is_empty() {
        return Err(FiberError::EmptySlice(crate::exactgeom::format_rational(level)));
    }
    Ok(Polytope::hull(&pts)?)
}

/// Sorted distinct ψ-values of the vertices.
fn breakpoints(p: &Polytope, psi: &LinearFunctional) -> Vec<Rational> {
    let mut v: Vec<Rational> = p.vertices().iter().map(|x| psi.eval(x)).collect();
    v.sort();
    v.dedup();
    v
}

/// Σ over consecutive pairs of `cuts` of (b − a)·slice(midpoint).
fn integrate(p: &Polytope, psi: &LinearFunctional, cuts: &[Rational]) -> Result<Polytope, FiberError> {
    let mut acc = Polytope::point(vec![Rational::zero(); p.ambient_dim()]);
    for w in cuts.windows(2) {
        let mid = (&w[0] + &w[1]) / int(2);
        let s = slice(p, psi, &mid)?.scale(&(&w[1] - &w[0]));
        acc = acc.minkowski_sum(&s)?;
    }
    Ok(acc)
}

/// Σψ(P) integrated over the partition of ψ(P) refined by `extra` cut points
/// (values outside ψ(P) are ignored). The result never depends on `extra`.
pub fn fiber_polytope_refined(p: &Polytope, psi: &LinearFunctional, extra: &[Rational]) -> Result<Polytope, FiberError> {
    psi.check(p)?;
    let mut cuts = breakpoints(p, psi);
    let (lo, hi) = (cuts[0].clone(), cuts[cuts.len() - 1].clone());
    cuts.extend(extra.iter().filter(|x| **x > lo && **x < hi).cloned());
    cuts.sort();
    cuts.dedup();
    integrate(p, psi, &cuts)
}

pub fn fiber_polytope(p: &Polytope, psi: &LinearFunctional) -> Result<FiberPolytope, FiberError> {
    Ok(FiberPolytope { polytope: fiber_polytope_refined(p, psi, &[])?, source: FiberSource::Plain, psi: psi.clone() })
}

/// (ψᴾ² − ψ_P²)/2, the constant value of ψ on Σψ(P).
pub fn expected_psi_value(p: &Polytope, psi: &LinearFunctional) -> Rational {
    let (lo, hi) = psi.range(p);
    (&hi * &hi - &lo * &lo) / int(2)
}

fn minkowski_all(ps: &[Polytope], n: usize) -> Result<Polytope, GeomError> {
    let mut acc = Polytope::point(vec![Rational::zero(); n]);
    for p in ps {
        acc = acc.minkowski_sum(p)?;
    }
    Ok(acc)
}

/// Alternating sum Σ_J (−1)^{r+|J|} Σψ(Σ_{j∈J} P_j) over nonempty J, evaluated
/// as a certified Minkowski difference of its positive and negative parts.
pub fn mixed_fiber_polytope(ps: &[Polytope], psi: &LinearFunctional) -> Result<FiberPolytope, FiberError> {
    let r = ps.len();
    let n = psi.dim();
    for p in ps {
        psi.check(p)?;
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for mask in 1u32..(1 << r) {
        let j: Vec<Polytope> = (0..r).filter(|i| mask & (1 << i) != 0).map(|i| ps[i].clone()).collect();
        let k = j.len();
        let s = fiber_polytope_refined(&minkowski_all(&j, n)?, psi, &[])?;
        if (r + k).is_multiple_of(2) {
            pos.push(s);
        } else {
            neg.push(s);
        }
    }
    let pos = minkowski_all(&pos, n)?;
    let neg = minkowski_all(&neg, n)?;
    let polytope = pos.minkowski_difference(&neg).map_err(FiberError::MixedFiberNotCertified)?;
    Ok(FiberPolytope { polytope, source: FiberSource::Mixed(r), psi: psi.clone() })
}

/// The unique maximizer of w over the slice at `level`.
pub fn slice_argmax_at(p: &Polytope, psi: &LinearFunctional, level: &Rational, w: &[Rational]) -> Result<Point, FiberError> {
    let s = slice(p, psi, level)?;
    let f = s.face_unchecked(w);
    if !f.is_point() {
        return Err(FiberError::TieError(crate::exactgeom::format_rational(level)));
    }
    Ok(f.vertices()[0].clone())
}

/// [P]_i: the maximizer of w over the slice at i + ½.
pub fn slice_argmax(p: &Polytope, psi: &LinearFunctional, i: i64, w: &[Rational]) -> Result<Point, FiberError> {
    let level = int(i) + crate::exactgeom::frac(1, 2);
    slice_argmax_at(p, psi, &level, w)
}

/// Σ_{i=lo}^{hi−1} [P]_i over integer indices.
pub fn argmax_sum(p: &Polytope, psi: &LinearFunctional, lo: i64, hi: i64, w: &[Rational]) -> Result<Point, FiberError> {
    let mut acc = vec![Rational::zero(); psi.dim()];
    for i in lo..hi {
        acc = add(&acc, &slice_argmax(p, psi, i, w)?);
    }
    Ok(acc)
}

/// Integral of the w-maximizers of the slices over [lo, hi], exact for
/// rational data (breakpoints of P are inserted).
pub fn argmax_integral(p: &Polytope, psi: &LinearFunctional, lo: &Rational, hi: &Rational, w: &[Rational]) -> Result<Point, FiberError> {
    let mut cuts: Vec<Rational> = breakpoints(p, psi).into_iter().filter(|x| x > lo && x < hi).collect();
    cuts.push(lo.clone());
    cuts.push(hi.clone());
    cuts.sort();
    cuts.dedup();
    let mut acc = vec![Rational::zero(); psi.dim()];
    for c in cuts.windows(2) {
        let mid = (&c[0] + &c[1]) / int(2);
        let x = slice_argmax_at(p, psi, &mid, w)?;
        acc = add(&acc, &scale(&x, &(&c[1] - &c[0])));
    }
    Ok(acc)
}

/// t with Σψ(F) + t = face_w(Σψ(P)) for F = face_w(P): the integral of the
/// w-maximizers of the slices over ψ(P) outside ψ(F).
pub fn face_of_fiber_polytope(p: &Polytope, f: &Polytope, psi: &LinearFunctional, w: &[Rational]) -> Result<Point, FiberError> {
    psi.check(p)?;
    psi.check(f)?;
    let (plo, phi) = psi.range(p);
    let (flo, fhi) = psi.range(f);
    let below = argmax_integral(p, psi, &plo, &flo, w)?;
    let above = argmax_integral(p, psi, &fhi, &phi, w)?;
    Ok(add(&below, &above))
}

fn as_i64(q: &Rational) -> i64 {
    assert!(q.is_integer(), "lattice data expected");
    num::ToPrimitive::to_i64(&q.to_integer()).expect("small")
}

/// Out-of-range sums Σ_{i=ψ_P}^{ψ_F−1}[P]_i + Σ_{i=ψᶠ}^{ψᴾ−1}[P]_i of a
/// lattice polytope P and its face F.
fn out_of_range_sum(p: &Polytope, f: &Polytope, psi: &LinearFunctional, w: &[Rational]) -> Result<Point, FiberError> {
    let (plo, phi) = psi.range(p);
    let (flo, fhi) = psi.range(f);
    let a = argmax_sum(p, psi, as_i64(&plo), as_i64(&flo), w)?;
    let b = argmax_sum(p, psi, as_i64(&fhi), as_i64(&phi), w)?;
    Ok(add(&a, &b))
}

/// Both sides of the face identity for mixed fiber polytopes of lattice
/// polytopes C, D and a direction w:
///   Σψ(face C, face D) + sums over C+D  =  face_w Σψ(C, D) + sums over C and D,
/// where the sums run over the integer slices outside the ψ-range of the faces.
pub fn face_mixed_identity(
    c: &Polytope,
    d: &Polytope,
    psi: &LinearFunctional,
    w: &[Rational],
) -> Result<(Polytope, Polytope), FiberError> {
    let cd = c.minkowski_sum(d)?;
    let (fc, fd, fcd) = (c.face_unchecked(w), d.face_unchecked(w), cd.face_unchecked(w));
    let lhs = mixed_fiber_polytope(&[fc.clone(), fd.clone()], psi)?.polytope.translate(&out_of_range_sum(&cd, &fcd, psi, w)?);
    let rhs_shift = add(&out_of_range_sum(c, &fc, psi, w)?, &out_of_range_sum(d, &fd, psi, w)?);
    let rhs = mixed_fiber_polytope(&[c.clone(), d.clone()], psi)?.polytope.face_unchecked(w).translate(&rhs_shift);
    Ok((lhs, rhs))
}

/// Returns t when q = p + t, otherwise None.
pub fn translation_between(p: &Polytope, q: &Polytope) -> Option<Point> {
    if p.vertices().len() != q.vertices().len() || p.ambient_dim() != q.ambient_dim() {
        return None;
    }
    let t = sub(&q.vertices()[0], &p.vertices()[0]);
    p.vertices().iter().zip(q.vertices()).all(|(a, b)| sub(b, a) == t).then_some(t)
}

/// v(C, D, w) = Σψ(face_w C, D) − face_w Σψ(C, D), a single vector when D and
/// ψ(D) are one-dimensional and face_w(C) + D is a facet of C + D.
pub fn patchwork_offset(c: &Polytope, d: &Polytope, psi: &LinearFunctional, w: &[Rational]) -> Result<Point, FiberError> {
    psi.check(c)?;
    psi.check(d)?;
    let (dlo, dhi) = psi.range(d);
    if d.dim() != 1 || dlo == dhi {
        return Err(FiberError::NotAFacet);
    }
    let cd = c.minkowski_sum(d)?;
    let fc = c.face_unchecked(w);
    // w constant on C + D is allowed: nothing is truncated and the offset is 0
    let whole = fc == *c;
    let fd = fc.minkowski_sum(d)?;
    if d.face_unchecked(w) != *d || (!whole && fd.dim() + 1 != cd.dim()) || cd.face_unchecked(w) != fd {
        return Err(FiberError::NotAFacet);
    }
    let left = mixed_fiber_polytope(&[fc, d.clone()], psi)?.polytope;
    let right = mixed_fiber_polytope(&[c.clone(), d.clone()], psi)?.polytope.face_unchecked(w);
    // left = right + v
    translation_between(&right, &left).ok_or(FiberError::NotAFacet)
}

/// Offset between neighboring mixed cells C₁+D₁ and C₂+D₂ sharing the facet
/// with outer normal w on the first cell.
pub fn neighbor_offset(
    c1: &Polytope,
    d1: &Polytope,
    c2: &Polytope,
    d2: &Polytope,
    psi: &LinearFunctional,
    w: &[Rational],
) -> Result<Point, FiberError> {
    let a = patchwork_offset(c1, d1, psi, w)?;
    let minus_w: Point = w.iter().map(|x| -x).collect();
    let b = patchwork_offset(c2, d2, psi, &minus_w)?;
    Ok(sub(&a, &b))
}

/// True when ψ is constant on the polytope.
pub fn psi_constant(p: &Polytope, psi: &LinearFunctional) -> bool {
    let (lo, hi) = psi.range(p);
    lo == hi
}

/// Rejects nonpositive scalars; used by homogeneity checks.
pub fn scaled(p: &Polytope, lambda: i64) -> Polytope {
    assert!(lambda > 0);
    p.scale(&int(lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::{frac, hull_i64};

    fn cube() -> Polytope {
        let mut pts = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    pts.push(vec![x, y, z]);
                }
            }
        }
        hull_i64(&pts).unwrap()
    }

    fn q3(a: Rational, b: Rational, c: Rational) -> Point {
        vec![a, b, c]
    }

    #[test]
    fn cube_hexagon() {
        let psi = LinearFunctional::new(vec![1, 1, 1]).unwrap();
        let s = fiber_polytope(&cube(), &psi).unwrap().polytope;
        let h = frac(1, 2);
        let t = frac(3, 2);
        let f = frac(5, 2);
        let expect = Polytope::hull(&[
            q3(h.clone(), f.clone(), t.clone()),
            q3(f.clone(), t.clone(), h.clone()),
            q3(f.clone(), h.clone(), t.clone()),
            q3(h.clone(), t.clone(), f.clone()),
            q3(t.clone(), f.clone(), h.clone()),
            q3(t.clone(), h.clone(), f.clone()),
        ])
        .unwrap();
        assert_eq!(s, expect);
        assert!(s.vertices().iter().all(|v| psi.eval(v) == expected_psi_value(&cube(), &psi)));
    }

    #[test]
    fn cube_face_offset() {
        let psi = LinearFunctional::new(vec![1, 1, 1]).unwrap();
        let w = point(&[0, -1, 0]);
        let f = cube().face_in_direction(&w).unwrap();
        let sf = fiber_polytope(&f, &psi).unwrap().polytope;
        assert_eq!(sf, Polytope::hull(&[q3(frac(1, 2), int(0), frac(3, 2)), q3(frac(3, 2), int(0), frac(1, 2))]).unwrap());
        let t = face_of_fiber_polytope(&cube(), &f, &psi, &w).unwrap();
        assert_eq!(t, q3(int(1), frac(1, 2), int(1)));
        let full = fiber_polytope(&cube(), &psi).unwrap().polytope;
        assert_eq!(full.face_unchecked(&w), sf.translate(&t));
    }

    #[test]
    fn segment_and_point() {
        let psi = LinearFunctional::new(vec![1, 0]).unwrap();
        let seg = hull_i64(&[vec![0, 0], vec![1, 0]]).unwrap();
        assert_eq!(fiber_polytope(&seg, &psi).unwrap().polytope.vertices(), &[vec![frac(1, 2), int(0)]]);
        let pt = hull_i64(&[vec![3, 4]]).unwrap();
        assert!(fiber_polytope(&pt, &psi).unwrap().polytope.is_point());
    }

    #[test]
    fn slice_argmax_examples() {
        let psi = LinearFunctional::new(vec![1, 1, 1]).unwrap();
        assert!(matches!(slice_argmax(&cube(), &psi, 0, &point(&[0, -1, 0])), Err(FiberError::TieError(_))));
        assert_eq!(slice_argmax(&cube(), &psi, 0, &point(&[1, -2, 0])).unwrap(), q3(frac(1, 2), int(0), int(0)));
        assert!(matches!(slice_argmax(&cube(), &psi, 5, &point(&[1, 0, 0])), Err(FiberError::EmptySlice(_))));
    }

    #[test]
    fn simplex_facet_offset() {
        let simplex = hull_i64(&[vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        let f = hull_i64(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        let ones = LinearFunctional::new(vec![1, 1, 1]).unwrap();
        // the slice at ½ is parallel to F, so w = (1,1,1) ties
        assert!(matches!(face_of_fiber_polytope(&simplex, &f, &ones, &point(&[1, 1, 1])), Err(FiberError::TieError(_))));
        let psi = LinearFunctional::new(vec![1, 2, 3]).unwrap();
        let w = point(&[1, 1, 1]);
        let t = face_of_fiber_polytope(&simplex, &f, &psi, &w).unwrap();
        assert_eq!(t, q3(frac(1, 2), int(0), int(0)));
        let full = fiber_polytope(&simplex, &psi).unwrap().polytope;
        let sf = fiber_polytope(&f, &psi).unwrap().polytope;
        assert_eq!(full.face_unchecked(&w), sf.translate(&t));
    }

    #[test]
    fn mixed_basics() {
        let psi = LinearFunctional::new(vec![1, 1, 1]).unwrap();
        let c = cube();
        let m = mixed_fiber_polytope(&[c.clone(), c.clone()], &psi).unwrap().polytope;
        assert_eq!(m, fiber_polytope(&c, &psi).unwrap().polytope.scale(&int(2)));
        let pt = hull_i64(&[vec![1, 2, 3]]).unwrap();
        assert!(mixed_fiber_polytope(&[c.clone(), pt], &psi).unwrap().polytope.is_point());
        // three factors of a degree-two valuation: the alternating sum is a point
        let seg = hull_i64(&[vec![0, 0, 0], vec![1, 2, 0]]).unwrap();
        assert!(mixed_fiber_polytope(&[c.clone(), seg.clone(), c], &psi).unwrap().polytope.is_point());
    }

    #[test]
    fn functional_validation() {
        assert_eq!(LinearFunctional::new(vec![0, 0]), Err(FiberError::ZeroFunctional));
        assert_eq!(LinearFunctional::new(vec![2, 4]), Err(FiberError::NotPrimitive));
        assert_eq!(LinearFunctional::primitive(&[2, -4]).unwrap().coeffs(), &[1, -2]);
    }

    #[test]
    fn patchwork_requires_facet() {
        let psi = LinearFunctional::new(vec![1, 1, 1]).unwrap();
        let seg = hull_i64(&[vec![0, 0, 0], vec![0, 1, 0]]).unwrap();
        // face_w(cube) + D is not a facet for w = e2 (D is not in the face)
        assert_eq!(patchwork_offset(&cube(), &seg, &psi, &point(&[0, 1, 0])), Err(FiberError::NotAFacet));
        let e1 = hull_i64(&[vec![0, 0, 0], vec![1, 0, 0]]).unwrap();
        // w constant on C: nothing truncated
        assert_eq!(patchwork_offset(&e1, &seg, &psi, &point(&[0, 0, 1])).unwrap(), point(&[0, 0, 0]));
        let tri = hull_i64(&[vec![0, 0, 0], vec![1, 0, 0], vec![0, 0, 1]]).unwrap();
        let w = point(&[-1, 0, 0]);
        let v = patchwork_offset(&tri, &seg, &psi, &w).unwrap();
        assert_eq!(v.len(), 3);
    }
}
