//! Facet enumeration by gift wrapping in arbitrary dimension.
//!
//! All routines take distinct points that are full-dimensional in their
//! ambient space and return facets as `normal·x <= offset` with the member
//! indices of every input point on the facet (not only vertices).

use std::collections::{BTreeSet, HashSet, VecDeque};

use num::{Signed, Zero};

use super::linalg::{affinely_independent_subset, nullspace, AffineHull};
use super::rational::{dot, lex_cmp, primitive, sub, Point, Rational};

#[derive(Clone, Debug)]
pub struct RawFacet {
    pub normal: Point,
    pub offset: Rational,
    pub members: Vec<usize>,
}

fn members_on(points: &[Point], normal: &[Rational], offset: &Rational) -> Vec<usize> {
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| dot(normal, p) == *offset)
        .map(|(i, _)| i)
        .collect()
}

fn make_facet(points: &[Point], normal: Point, anchor: &[Rational]) -> RawFacet {
    let normal = primitive(&normal);
    let offset = dot(&normal, anchor);
    let members = members_on(points, &normal, &offset);
    RawFacet { normal, offset, members }
}

/// Facets of the hull of full-dimensional distinct points.
pub fn full_dim_facets(points: &[Point]) -> Vec<RawFacet> {
    let d = points[0].len();
    let mut out = match d {
        0 => Vec::new(),
        1 => facets_1d(points),
        2 => facets_2d(points),
        _ => {
            let first = initial_facet(points, None);
            wrap(points, first, &|_| true)
        }
    };
    out.sort_by(|a, b| a.members.cmp(&b.members));
    out
}

/// Lower facets (outward normal with negative last coordinate) of lifted,
/// full-dimensional distinct points.
pub fn lower_facets(points: &[Point]) -> Vec<RawFacet> {
    let d = points[0].len();
    let is_lower = |f: &RawFacet| f.normal[d - 1].is_negative();
    let mut out: Vec<RawFacet> = if d <= 2 {
        full_dim_facets(points).into_iter().filter(is_lower).collect()
    } else {
        let first = initial_facet(points, Some(d - 1));
        wrap(points, first, &is_lower)
    };
    out.sort_by(|a, b| a.members.cmp(&b.members));
    out
}

fn facets_1d(points: &[Point]) -> Vec<RawFacet> {
    let lo = points.iter().min_by(|a, b| a[0].cmp(&b[0])).unwrap().clone();
    let hi = points.iter().max_by(|a, b| a[0].cmp(&b[0])).unwrap().clone();
    vec![
        make_facet(points, vec![-Rational::from_integer(1.into())], &lo),
        make_facet(points, vec![Rational::from_integer(1.into())], &hi),
    ]
}

fn cross(o: &[Rational], a: &[Rational], b: &[Rational]) -> Rational {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

/// Strict hull vertices in counter-clockwise order (monotone chain).
pub fn hull_2d_ccw(points: &[Point]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| lex_cmp(&points[a], &points[b]));
    if idx.len() < 3 {
        return idx;
    }
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2
            && !cross(&points[lower[lower.len() - 2]], &points[lower[lower.len() - 1]], &points[i]).is_positive()
        {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2
            && !cross(&points[upper[upper.len() - 2]], &points[upper[upper.len() - 1]], &points[i]).is_positive()
        {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn facets_2d(points: &[Point]) -> Vec<RawFacet> {
    let ring = hull_2d_ccw(points);
    let m = ring.len();
    (0..m)
        .map(|k| {
            let a = &points[ring[k]];
            let b = &points[ring[(k + 1) % m]];
            let normal = vec![&b[1] - &a[1], &a[0] - &b[0]];
            make_facet(points, normal, a)
        })
        .collect()
}

/// First facet by rotating a supporting hyperplane. With `lower = Some(k)`
/// the rotation keeps coordinate `k` of the normal fixed at -1, which yields
/// a lower facet.
fn initial_facet(points: &[Point], lower: Option<usize>) -> RawFacet {
    let d = points[0].len();
    let k = lower.unwrap_or(d - 1);
    let mut a: Point = vec![Rational::zero(); d];
    a[k] = -Rational::from_integer(1.into());
    let s0 = points.iter().min_by(|x, y| x[k].cmp(&y[k])).unwrap().clone();
    loop {
        let off = dot(&a, &s0);
        let members = members_on(points, &a, &off);
        let basis = affinely_independent_subset(points, &members);
        if basis.len() == d {
            return make_facet(points, a, &s0);
        }
        let base = &points[basis[0]];
        let mut rows: Vec<Point> = basis[1..].iter().map(|&i| sub(&points[i], base)).collect();
        match lower {
            Some(k) => {
                let mut e = vec![Rational::zero(); d];
                e[k] = Rational::from_integer(1.into());
                rows.push(e);
            }
            None => rows.push(a.clone()),
        }
        let w = nullspace(&rows, d);
        let mut b = w
            .into_iter()
            .find(|b| points.iter().any(|p| !dot(b, &sub(p, &s0)).is_zero()))
            .expect("points are full-dimensional");
        if !points.iter().any(|p| dot(&b, &sub(p, &s0)).is_positive()) {
            b = b.iter().map(|x| -x).collect();
        }
        let mut best: Option<Rational> = None;
        for p in points {
            let dp = sub(p, &s0);
            let beta = dot(&b, &dp);
            if beta.is_positive() {
                let t = -dot(&a, &dp) / beta;
                if best.as_ref().is_none_or(|bt| t < *bt) {
                    best = Some(t);
                }
            }
        }
        let t = best.unwrap();
        a = a.iter().zip(&b).map(|(x, y)| x + &t * y).collect();
        if lower.is_none() {
            a = primitive(&a);
        }
    }
}

fn ridges(points: &[Point], f: &RawFacet) -> Vec<Vec<usize>> {
    let sub_pts: Vec<Point> = f.members.iter().map(|&i| points[i].clone()).collect();
    let ah = AffineHull::of(&sub_pts);
    let red: Vec<Point> = sub_pts.iter().map(|p| ah.reduce(p)).collect();
    full_dim_facets(&red)
        .into_iter()
        .map(|r| r.members.iter().map(|&j| f.members[j]).collect())
        .collect()
}

/// Rotates facet `f` around `ridge` to the adjacent facet.
fn pivot(points: &[Point], f: &RawFacet, ridge: &[usize]) -> RawFacet {
    let d = points[0].len();
    let r0 = &points[ridge[0]];
    let mut rows: Vec<Point> = ridge[1..].iter().map(|&i| sub(&points[i], r0)).collect();
    rows.push(f.normal.clone());
    let ns = nullspace(&rows, d);
    debug_assert_eq!(ns.len(), 1);
    let mut b = ns.into_iter().next().unwrap();
    let ridge_set: BTreeSet<usize> = ridge.iter().copied().collect();
    let f0 = f.members.iter().find(|i| !ridge_set.contains(i)).expect("facet has a point off the ridge");
    if dot(&b, &sub(&points[*f0], r0)).is_positive() {
        b = b.iter().map(|x| -x).collect();
    }
    let a = &f.normal;
    let mut best: Option<(Rational, Rational)> = None;
    for p in points {
        let dp = sub(p, r0);
        let alpha = dot(a, &dp);
        if !alpha.is_negative() {
            continue;
        }
        let beta = dot(&b, &dp);
        match &best {
            None => best = Some((alpha, beta)),
            Some((aq, bq)) => {
                if (aq * &beta - bq * &alpha).is_negative() {
                    best = Some((alpha, beta));
                }
            }
        }
    }
    let (aq, bq) = best.expect("full-dimensional point set");
    let normal: Point = a.iter().zip(&b).map(|(x, y)| &bq * x - &aq * y).collect();
    make_facet(points, normal, r0)
}

fn wrap(points: &[Point], first: RawFacet, keep: &dyn Fn(&RawFacet) -> bool) -> Vec<RawFacet> {
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    seen.insert(first.members.clone());
    let mut queue = VecDeque::from([first]);
    let mut out = Vec::new();
    while let Some(f) = queue.pop_front() {
        for r in ridges(points, &f) {
            let nb = pivot(points, &f, &r);
            if keep(&nb) && seen.insert(nb.members.clone()) {
                queue.push_back(nb);
            }
        }
        out.push(f);
    }
    out
}
