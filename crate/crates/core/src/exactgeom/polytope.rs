//! Vertex-represented polytopes with exact coordinates.

use std::collections::{BTreeSet, HashMap};

use num::{Signed, Zero};

use super::hull::full_dim_facets;
use super::linalg::{det, AffineHull};
use super::rational::{add, dot, is_zero_vec, lex_cmp, scale, sub, Point, Rational};
use super::GeomError;

/// A facet in ambient coordinates: `normal·x <= offset` holds on the
/// polytope, with equality exactly on `vertices` (indices into the parent).
/// For lower-dimensional polytopes the normal is only meaningful modulo the
/// orthogonal complement of the affine hull.
#[derive(Clone, Debug)]
pub struct Facet {
    pub normal: Point,
    pub offset: Rational,
    pub vertices: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Polytope {
    ambient_dim: usize,
    vertices: Vec<Point>,
    dim: usize,
    facets: Vec<Facet>,
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.ambient_dim == other.ambient_dim && self.vertices == other.vertices
    }
}

impl Eq for Polytope {}

impl std::hash::Hash for Polytope {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.ambient_dim.hash(state);
        self.vertices.hash(state);
    }
}

/// Sorts and deduplicates points lexicographically.
pub fn canonical_points(points: &[Point]) -> Vec<Point> {
    let mut v = points.to_vec();
    v.sort_by(|a, b| lex_cmp(a, b));
    v.dedup();
    v
}

impl Polytope {
    /// Convex hull of a nonempty finite point set.
    pub fn hull(points: &[Point]) -> Result<Polytope, GeomError> {
        let Some(first) = points.first() else {
            return Err(GeomError::EmptyInput);
        };
        let n = first.len();
        if let Some(p) = points.iter().find(|p| p.len() != n) {
            return Err(GeomError::DimMismatch(n, p.len()));
        }
        let pts = canonical_points(points);
        let ah = AffineHull::of(&pts);
        let d = ah.dim();
        if d == 0 {
            return Ok(Polytope { ambient_dim: n, vertices: pts, dim: 0, facets: Vec::new() });
        }
        let red: Vec<Point> = pts.iter().map(|p| ah.reduce(p)).collect();
        let raw = full_dim_facets(&red);
        // a point is a vertex iff the facets through it meet only in it
        let mut through: Vec<Vec<usize>> = vec![Vec::new(); pts.len()];
        for (fi, f) in raw.iter().enumerate() {
            for &m in &f.members {
                through[m].push(fi);
            }
        }
        let is_vertex: Vec<bool> = (0..pts.len())
            .map(|i| {
                if through[i].is_empty() {
                    return false;
                }
                let mut common: BTreeSet<usize> = raw[through[i][0]].members.iter().copied().collect();
                for &fi in &through[i][1..] {
                    let s: BTreeSet<usize> = raw[fi].members.iter().copied().collect();
                    common = common.intersection(&s).copied().collect();
                }
                common.len() == 1
            })
            .collect();
        let mut new_index = vec![usize::MAX; pts.len()];
        let mut vertices = Vec::new();
        for (i, p) in pts.iter().enumerate() {
            if is_vertex[i] {
                new_index[i] = vertices.len();
                vertices.push(p.clone());
            }
        }
        let facets = raw
            .into_iter()
            .map(|f| Facet {
                normal: ah.lift_functional(&f.normal),
                offset: f.offset,
                vertices: f.members.iter().filter(|&&m| is_vertex[m]).map(|&m| new_index[m]).collect(),
            })
            .collect();
        Ok(Polytope { ambient_dim: n, vertices, dim: d, facets })
    }

    pub fn point(p: Point) -> Polytope {
        Polytope { ambient_dim: p.len(), vertices: vec![p], dim: 0, facets: Vec::new() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn is_point(&self) -> bool {
        self.dim == 0
    }

    /// Support function h(w) = max over vertices of w·v.
    pub fn support(&self, w: &[Rational]) -> Rational {
        self.vertices.iter().map(|v| dot(w, v)).max().unwrap()
    }

    /// Minimum of w·v over the polytope.
    pub fn min_value(&self, w: &[Rational]) -> Rational {
        self.vertices.iter().map(|v| dot(w, v)).min().unwrap()
    }

    pub fn face_in_direction(&self, w: &[Rational]) -> Result<Polytope, GeomError> {
        if w.len() != self.ambient_dim {
            return Err(GeomError::DimMismatch(self.ambient_dim, w.len()));
        }
        if is_zero_vec(w) {
            return Err(GeomError::ZeroDirection);
        }
        Ok(self.face_unchecked(w))
    }

    /// Like `face_in_direction` but w = 0 returns the whole polytope.
    pub fn face_unchecked(&self, w: &[Rational]) -> Polytope {
        let h = self.support(w);
        let pts: Vec<Point> = self.vertices.iter().filter(|v| dot(w, v) == h).cloned().collect();
        if pts.len() == self.vertices.len() {
            return self.clone();
        }
        Polytope::hull(&pts).expect("nonempty face")
    }

    pub fn minkowski_sum(&self, other: &Polytope) -> Result<Polytope, GeomError> {
        if self.ambient_dim != other.ambient_dim {
            return Err(GeomError::DimMismatch(self.ambient_dim, other.ambient_dim));
        }
        let mut pts = Vec::with_capacity(self.vertices.len() * other.vertices.len());
        for p in &self.vertices {
            for q in &other.vertices {
                pts.push(add(p, q));
            }
        }
        Polytope::hull(&pts)
    }

    /// R with `other + R = self`, certified by re-adding.
    pub fn minkowski_difference(&self, other: &Polytope) -> Result<Polytope, GeomError> {
        if self.ambient_dim != other.ambient_dim {
            return Err(GeomError::DimMismatch(self.ambient_dim, other.ambient_dim));
        }
        let n = self.ambient_dim;
        let mut pts = Vec::with_capacity(self.vertices.len());
        for (i, p) in self.vertices.iter().enumerate() {
            // a direction in the relative interior of the normal cone at p
            let mut w = vec![Rational::zero(); n];
            for f in self.facets.iter().filter(|f| f.vertices.contains(&i)) {
                w = add(&w, &f.normal);
            }
            let q = other.face_unchecked(&w);
            if !q.is_point() {
                return Err(GeomError::NotAPolytope);
            }
            pts.push(sub(p, &q.vertices[0]));
        }
        let r = Polytope::hull(&pts)?;
        if other.minkowski_sum(&r)? == *self {
            Ok(r)
        } else {
            Err(GeomError::NotAPolytope)
        }
    }

    pub fn scale(&self, s: &Rational) -> Polytope {
        assert!(!s.is_negative(), "nonnegative scaling only");
        if s.is_zero() {
            return Polytope::point(vec![Rational::zero(); self.ambient_dim]);
        }
        let vertices = self.vertices.iter().map(|v| scale(v, s)).collect();
        let facets = self
            .facets
            .iter()
            .map(|f| Facet { normal: f.normal.clone(), offset: &f.offset * s, vertices: f.vertices.clone() })
            .collect();
        Polytope { ambient_dim: self.ambient_dim, vertices, dim: self.dim, facets }
    }

    pub fn translate(&self, t: &[Rational]) -> Polytope {
        let vertices = self.vertices.iter().map(|v| add(v, t)).collect();
        let facets = self
            .facets
            .iter()
            .map(|f| Facet { normal: f.normal.clone(), offset: &f.offset + dot(&f.normal, t), vertices: f.vertices.clone() })
            .collect();
        Polytope { ambient_dim: self.ambient_dim, vertices, dim: self.dim, facets }
    }

    /// Image under a linear map given by its rows.
    pub fn map_linear(&self, rows: &[Point]) -> Polytope {
        let pts: Vec<Point> = self.vertices.iter().map(|v| rows.iter().map(|r| dot(r, v)).collect()).collect();
        Polytope::hull(&pts).expect("nonempty")
    }

    pub fn affine_hull(&self) -> AffineHull {
        AffineHull::of(&self.vertices)
    }

    /// Membership test (exact).
    pub fn contains(&self, p: &[Rational]) -> bool {
        let ah = self.affine_hull();
        if !ah.contains(p) {
            return false;
        }
        self.facets.iter().all(|f| dot(&f.normal, p) <= f.offset)
    }

    /// Facet as a polytope.
    pub fn facet_polytope(&self, f: &Facet) -> Polytope {
        let pts: Vec<Point> = f.vertices.iter().map(|&i| self.vertices[i].clone()).collect();
        Polytope::hull(&pts).expect("nonempty facet")
    }

    /// All nonempty faces as sorted vertex-index sets (including the polytope
    /// itself), each with its dimension.
    pub fn faces(&self) -> Vec<(Vec<usize>, usize)> {
        let mut memo: HashMap<Vec<usize>, usize> = HashMap::new();
        let all: Vec<usize> = (0..self.vertices.len()).collect();
        collect_faces(&self.vertices, &all, &mut memo);
        let mut out: Vec<(Vec<usize>, usize)> = memo.into_iter().collect();
        out.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
        out
    }

    /// Simplices of a pulling triangulation (vertex index tuples of size dim+1).
    pub fn triangulation(&self) -> Vec<Vec<usize>> {
        let all: Vec<usize> = (0..self.vertices.len()).collect();
        pulling(&self.vertices, &all)
    }

    /// Volume in the pivot coordinates of the affine hull (Euclidean volume for
    /// full-dimensional polytopes).
    pub fn volume(&self) -> Rational {
        if self.dim == 0 {
            return Rational::from_integer(1.into());
        }
        let ah = self.affine_hull();
        let red: Vec<Point> = self.vertices.iter().map(|v| ah.reduce(v)).collect();
        let mut fact = Rational::from_integer(1.into());
        for k in 2..=self.dim {
            fact *= Rational::from_integer(k.into());
        }
        self.triangulation()
            .iter()
            .map(|s| simplex_det(&red, s).abs())
            .fold(Rational::zero(), |a, b| a + b)
            / fact
    }

    /// Average of the vertices (a relative-interior point).
    pub fn centroid(&self) -> Point {
        let mut c = vec![Rational::zero(); self.ambient_dim];
        for v in &self.vertices {
            c = add(&c, v);
        }
        scale(&c, &Rational::new(1.into(), (self.vertices.len() as i64).into()))
    }
}

fn simplex_det(red: &[Point], s: &[usize]) -> Rational {
    let base = &red[s[0]];
    let rows: Vec<Point> = s[1..].iter().map(|&i| sub(&red[i], base)).collect();
    det(&rows)
}

fn collect_faces(points: &[Point], idx: &[usize], memo: &mut HashMap<Vec<usize>, usize>) {
    if memo.contains_key(idx) {
        return;
    }
    let sub_pts: Vec<Point> = idx.iter().map(|&i| points[i].clone()).collect();
    let ah = AffineHull::of(&sub_pts);
    let d = ah.dim();
    memo.insert(idx.to_vec(), d);
    if d == 0 {
        return;
    }
    let red: Vec<Point> = sub_pts.iter().map(|p| ah.reduce(p)).collect();
    for f in full_dim_facets(&red) {
        let face: Vec<usize> = f.members.iter().map(|&j| idx[j]).collect();
        collect_faces(points, &face, memo);
    }
}

fn pulling(points: &[Point], idx: &[usize]) -> Vec<Vec<usize>> {
    let sub_pts: Vec<Point> = idx.iter().map(|&i| points[i].clone()).collect();
    let ah = AffineHull::of(&sub_pts);
    let d = ah.dim();
    if d == 0 {
        return vec![vec![idx[0]]];
    }
    if idx.len() == d + 1 {
        return vec![idx.to_vec()];
    }
    let apex = idx[0];
    let red: Vec<Point> = sub_pts.iter().map(|p| ah.reduce(p)).collect();
    let mut out = Vec::new();
    for f in full_dim_facets(&red) {
        if f.members.contains(&0) {
            continue;
        }
        let face: Vec<usize> = f.members.iter().map(|&j| idx[j]).collect();
        for mut s in pulling(points, &face) {
            s.insert(0, apex);
            out.push(s);
        }
    }
    out
}

/// Convenience: hull of integer points.
pub fn hull_i64(points: &[Vec<i64>]) -> Result<Polytope, GeomError> {
    let pts: Vec<Point> = points.iter().map(|p| super::rational::point(p)).collect();
    Polytope::hull(&pts)
}
