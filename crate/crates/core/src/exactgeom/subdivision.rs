//! Regular subdivisions from lifted point configurations (lower hulls).

use std::collections::HashMap;

use num::{One, Zero};

use super::hull::{full_dim_facets, lower_facets};
use super::linalg::AffineHull;
use super::polytope::Polytope;
use super::rational::{dot, point, Point, Rational};
use super::GeomError;

/// A maximal cell of a regular subdivision.
#[derive(Clone, Debug, PartialEq)]
pub struct SubdivisionCell {
    /// Every support point lying on the cell, sorted.
    pub members: Vec<usize>,
    /// The cell's vertices (a subset of `members`), sorted.
    pub vertices: Vec<usize>,
    pub dim: usize,
    /// The point x in ambient coordinates at which exactly the members
    /// minimize `lift + α·x` (canonical representative: coordinates outside
    /// the pivots of the support's affine hull are zero).
    pub dual_point: Point,
}

#[derive(Clone, Debug)]
pub struct RegularSubdivision {
    pub points: Vec<Vec<i64>>,
    pub lifts: Vec<Rational>,
    pub cells: Vec<SubdivisionCell>,
    hull: AffineHull,
}

/// A face of the subdivision, identified by the support points lying on it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubdivisionFace {
    pub members: Vec<usize>,
    pub dim: usize,
}

impl RegularSubdivision {
    pub fn dim(&self) -> usize {
        self.hull.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.hull.base.len()
    }

    pub fn affine_hull(&self) -> &AffineHull {
        &self.hull
    }

    pub fn point_q(&self, i: usize) -> Point {
        point(&self.points[i])
    }

    pub fn newton_polytope(&self) -> Polytope {
        let pts: Vec<Point> = (0..self.points.len()).map(|i| self.point_q(i)).collect();
        Polytope::hull(&pts).expect("nonempty support")
    }

    pub fn cell_polytope(&self, members: &[usize]) -> Polytope {
        let pts: Vec<Point> = members.iter().map(|&i| self.point_q(i)).collect();
        Polytope::hull(&pts).expect("nonempty cell")
    }

    /// Every face of every maximal cell (deduplicated), sorted by dimension.
    pub fn faces(&self) -> Vec<SubdivisionFace> {
        let reduced: Vec<Point> = (0..self.points.len()).map(|i| self.hull.reduce(&self.point_q(i))).collect();
        let mut memo: HashMap<Vec<usize>, usize> = HashMap::new();
        for c in &self.cells {
            member_faces(&reduced, &c.members, &mut memo);
        }
        let mut out: Vec<SubdivisionFace> = memo.into_iter().map(|(members, dim)| SubdivisionFace { members, dim }).collect();
        out.sort_by(|a, b| a.dim.cmp(&b.dim).then(a.members.cmp(&b.members)));
        out
    }

    /// Indices of the maximal cells containing a face.
    pub fn cells_containing(&self, members: &[usize]) -> Vec<usize> {
        (0..self.cells.len())
            .filter(|&c| members.iter().all(|m| self.cells[c].members.binary_search(m).is_ok()))
            .collect()
    }

    /// Normalized volume (dim! times Euclidean volume in pivot coordinates).
    pub fn normalized_volume(&self, members: &[usize]) -> Rational {
        let reduced: Vec<Point> = members.iter().map(|&i| self.hull.reduce(&self.point_q(i))).collect();
        let p = Polytope::hull(&reduced).expect("nonempty");
        let mut f = Rational::one();
        for k in 2..=p.dim() {
            f *= Rational::from_integer(k.into());
        }
        p.volume() * f
    }

    /// True when every support point lies on or above the lower hull, i.e.
    /// `lift_j + α_j·x >= lift_i + α_i·x` for the dual point x of each cell.
    pub fn is_lower_hull_certified(&self) -> bool {
        self.cells.iter().all(|c| {
            let x = &c.dual_point;
            let val = |i: usize| &self.lifts[i] + dot(&self.point_q(i), x);
            let m = val(c.members[0]);
            (0..self.points.len()).all(|j| {
                let v = val(j);
                if c.members.binary_search(&j).is_ok() {
                    v == m
                } else {
                    v > m
                }
            })
        })
    }
}

fn member_faces(reduced: &[Point], idx: &[usize], memo: &mut HashMap<Vec<usize>, usize>) {
    if memo.contains_key(idx) {
        return;
    }
    let pts: Vec<Point> = idx.iter().map(|&i| reduced[i].clone()).collect();
    let ah = AffineHull::of(&pts);
    let d = ah.dim();
    memo.insert(idx.to_vec(), d);
    if d == 0 {
        return;
    }
    let red: Vec<Point> = pts.iter().map(|p| ah.reduce(p)).collect();
    for f in full_dim_facets(&red) {
        let face: Vec<usize> = f.members.iter().map(|&j| idx[j]).collect();
        member_faces(reduced, &face, memo);
    }
}

/// Lower-hull subdivision of lifted integer points.
pub fn lower_hull_subdivision(support: &[(Vec<i64>, Rational)]) -> Result<RegularSubdivision, GeomError> {
    if support.is_empty() {
        return Err(GeomError::EmptyInput);
    }
    let n = support[0].0.len();
    if let Some(p) = support.iter().find(|p| p.0.len() != n) {
        return Err(GeomError::DimMismatch(n, p.0.len()));
    }
    let mut sorted: Vec<Vec<i64>> = support.iter().map(|p| p.0.clone()).collect();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(GeomError::DuplicatePoint);
    }
    let points: Vec<Vec<i64>> = support.iter().map(|p| p.0.clone()).collect();
    let lifts: Vec<Rational> = support.iter().map(|p| p.1.clone()).collect();
    let q: Vec<Point> = points.iter().map(|p| point(p)).collect();
    let hull = AffineHull::of(&q);
    let d = hull.dim();
    let reduced: Vec<Point> = q.iter().map(|p| hull.reduce(p)).collect();
    let lifted: Vec<Point> = reduced
        .iter()
        .zip(&lifts)
        .map(|(r, l)| {
            let mut v = r.clone();
            v.push(l.clone());
            v
        })
        .collect();
    let all: Vec<usize> = (0..points.len()).collect();
    let lifted_dim = AffineHull::of(&lifted).dim();
    let raw_cells: Vec<(Vec<usize>, Point)> = if lifted_dim == d {
        // the lift is affine on the support: one cell; its dual point solves
        // the affine relation lift = c - x·α on the affine hull
        let x = flat_dual_point(&reduced, &lifts, d);
        vec![(all, x)]
    } else {
        lower_facets(&lifted)
            .into_iter()
            .map(|f| {
                // normal (u, t), t < 0: u·s + t·lift <= offset with equality on
                // the cell, so lift + (u/t)·s is minimized exactly there
                let t = f.normal[d].clone();
                let x: Point = f.normal[..d].iter().map(|u| u / &t).collect();
                (f.members, x)
            })
            .collect()
    };
    let mut cells: Vec<SubdivisionCell> = raw_cells
        .into_iter()
        .map(|(members, xr)| {
            let pts: Vec<Point> = members.iter().map(|&i| reduced[i].clone()).collect();
            let poly = Polytope::hull(&pts).expect("nonempty");
            let vertices: Vec<usize> = members.iter().copied().filter(|&i| poly.vertices().contains(&reduced[i])).collect();
            SubdivisionCell { members, vertices, dim: poly.dim(), dual_point: hull.lift_functional(&xr) }
        })
        .collect();
    cells.sort_by(|a, b| a.members.cmp(&b.members));
    Ok(RegularSubdivision { points, lifts, cells, hull })
}

/// For an affine lift l(s) = c + g·s on the reduced support, the point
/// minimizing l + x·s uniformly is x = -g.
fn flat_dual_point(reduced: &[Point], lifts: &[Rational], d: usize) -> Point {
    if d == 0 {
        return Vec::new();
    }
    let idx: Vec<usize> = (0..reduced.len()).collect();
    let basis = super::linalg::affinely_independent_subset(reduced, &idx);
    let base = &reduced[basis[0]];
    let rows: Vec<Point> = basis[1..].iter().map(|&i| super::rational::sub(&reduced[i], base)).collect();
    let rhs: Vec<Rational> = basis[1..].iter().map(|&i| &lifts[i] - &lifts[basis[0]]).collect();
    let g = super::linalg::solve(&rows, &rhs, d).expect("independent rows");
    g.into_iter().map(|x| -x).collect()
}

/// Sum of normalized cell volumes equals the normalized volume of the hull.
pub fn covers_hull(sub: &RegularSubdivision) -> bool {
    let all: Vec<usize> = (0..sub.points.len()).collect();
    let total = sub.normalized_volume(&all);
    let parts = sub.cells.iter().map(|c| sub.normalized_volume(&c.members)).fold(Rational::zero(), |a, b| a + b);
    total == parts
}
