//! Polyhedral complexes dual to regular subdivisions.

use num::{Signed, Zero};

use super::{lattice_length, to_i64_vec, TropError, ValuedPolynomial};
use crate::exactgeom::linalg::{nullspace, AffineHull};
use crate::exactgeom::rational::{add, point, primitive_integer, sub};
use crate::exactgeom::{lower_hull_subdivision, Point, Polytope, Rational, RegularSubdivision};

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexCell {
    /// Dimension including the lineality space.
    pub dim: usize,
    pub vertices: Vec<usize>,
    /// Primitive integer generators of the recession cone modulo lineality.
    pub rays: Vec<Vec<i64>>,
    pub weight: u64,
    /// Support indices (into `TropicalComplex::support`) of the dual face.
    pub dual: Vec<usize>,
    pub dual_dim: usize,
}

/// What a complex was computed from; used for membership and local cones.
#[derive(Clone, Debug, PartialEq)]
pub enum ComplexSource {
    Hypersurface(ValuedPolynomial),
    Intersection(Vec<ValuedPolynomial>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TropicalComplex {
    pub ambient_dim: usize,
    pub vertices: Vec<Point>,
    /// Integer basis of the lineality space (empty for pointed complexes).
    pub lineality: Vec<Vec<i64>>,
    pub cells: Vec<ComplexCell>,
    /// Exponents that dual references point into.
    pub support: Vec<Vec<i64>>,
    pub source: ComplexSource,
}

impl TropicalComplex {
    /// Dimension of the complex, `None` when empty.
    pub fn dim(&self) -> Option<usize> {
        self.cells.iter().map(|c| c.dim).max()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells_of_dim(&self, d: usize) -> impl Iterator<Item = (usize, &ComplexCell)> {
        self.cells.iter().enumerate().filter(move |(_, c)| c.dim == d)
    }

    /// Average of the vertices plus the sum of the rays.
    pub fn relative_interior_point(&self, cell: &ComplexCell) -> Point {
        let n = self.ambient_dim;
        let mut x = vec![Rational::zero(); n];
        for &v in &cell.vertices {
            x = add(&x, &self.vertices[v]);
        }
        if !cell.vertices.is_empty() {
            let k = Rational::from_integer((cell.vertices.len() as i64).into());
            x = x.iter().map(|c| c / &k).collect();
        }
        for r in &cell.rays {
            x = add(&x, &point(r));
        }
        x
    }

    /// Membership via the defining polynomials.
    pub fn contains(&self, x: &[Rational]) -> bool {
        match &self.source {
            ComplexSource::Hypersurface(f) => f.vanishes_at(x),
            ComplexSource::Intersection(fs) => fs.iter().all(|f| f.vanishes_at(x)),
        }
    }

    /// Positive-dimensional vertex-free cells cannot occur; this returns the
    /// vertex set of maximal dimension 0 cells for curves.
    pub fn zero_cells(&self) -> Vec<usize> {
        self.cells.iter().filter(|c| c.dim == 0).map(|c| c.vertices[0]).collect()
    }
}

/// Integer basis of the orthogonal complement of the support directions.
pub(crate) fn lineality_basis(hull: &AffineHull) -> Vec<Vec<i64>> {
    let n = hull.base.len();
    nullspace(&hull.dirs.rows, n).iter().map(|v| to_i64_vec(&primitive_integer(v))).collect()
}

/// All cells dual to faces of the subdivision (including maximal cells, which
/// give the vertices). Cells are sorted by dimension, then dual face.
pub(crate) fn cells_from_subdivision(sub: &RegularSubdivision) -> (Vec<Point>, Vec<ComplexCell>, Vec<Vec<i64>>) {
    let n = sub.ambient_dim();
    let hull = sub.affine_hull();
    let d = hull.dim();
    let vertices: Vec<Point> = sub.cells.iter().map(|c| c.dual_point.clone()).collect();
    let reduced: Vec<Point> = (0..sub.points.len()).map(|i| hull.reduce(&sub.point_q(i))).collect();
    let newton = if d > 0 { Some(Polytope::hull(&reduced).expect("nonempty")) } else { None };
    let mut cells = Vec::new();
    for face in sub.faces() {
        let dual_dim = face.dim;
        let verts = sub.cells_containing(&face.members);
        let mut rays: Vec<Vec<i64>> = Vec::new();
        if let Some(np) = &newton {
            for f in np.facets() {
                if face.members.iter().all(|&m| crate::exactgeom::rational::dot(&f.normal, &reduced[m]) == f.offset) {
                    let inner: Point = f.normal.iter().map(|x| -x).collect();
                    rays.push(to_i64_vec(&primitive_integer(&hull.lift_functional(&inner))));
                }
            }
        }
        rays.sort();
        let weight = if dual_dim == 1 {
            let seg = sub.cell_polytope(&face.members);
            let diff = sub_vec_i64(&seg.vertices()[1], &seg.vertices()[0]);
            lattice_length(&diff)
        } else {
            1
        };
        cells.push(ComplexCell { dim: n - dual_dim, vertices: verts, rays, weight, dual: face.members, dual_dim });
    }
    cells.sort_by(|a, b| a.dim.cmp(&b.dim).then(a.dual.cmp(&b.dual)));
    (vertices, cells, lineality_basis(hull))
}

fn sub_vec_i64(a: &[Rational], b: &[Rational]) -> Vec<i64> {
    sub(a, b).iter().map(|x| {
        debug_assert!(x.is_integer());
        num::ToPrimitive::to_i64(&x.to_integer()).expect("small")
    }).collect()
}

/// The tropical hypersurface of a valued polynomial.
pub fn hypersurface(f: &ValuedPolynomial) -> Result<TropicalComplex, TropError> {
    if f.terms().len() < 2 {
        return Err(TropError::EmptyHypersurface);
    }
    let sub = lower_hull_subdivision(&f.lifted_support())?;
    let (vertices, cells, lineality) = cells_from_subdivision(&sub);
    let cells = cells.into_iter().filter(|c| c.dual_dim >= 1).collect();
    Ok(TropicalComplex {
        ambient_dim: f.n_vars(),
        vertices,
        lineality,
        cells,
        support: f.support(),
        source: ComplexSource::Hypersurface(f.clone()),
    })
}

/// The fan of directions y with x + ρy in X for small ρ > 0, computed from
/// the initial forms of the defining polynomials at x.
pub fn local_cone(x_complex: &TropicalComplex, x: &[Rational]) -> Result<TropicalComplex, TropError> {
    if x.len() != x_complex.ambient_dim {
        return Err(TropError::ArityMismatch { expected: x_complex.ambient_dim, got: x.len() });
    }
    if !x_complex.contains(x) {
        return Err(TropError::PointNotOnComplex);
    }
    match &x_complex.source {
        ComplexSource::Hypersurface(f) => hypersurface(&f.initial_form(&f.active_terms(x))),
        ComplexSource::Intersection(fs) => {
            let locals: Vec<ValuedPolynomial> = fs.iter().map(|f| f.initial_form(&f.active_terms(x))).collect();
            let report = crate::arrangement::intersect_polynomials(&locals).map_err(|e| match e {
                crate::arrangement::ArrangementError::Trop(t) => t,
                other => TropError::Intersection(other.to_string()),
            })?;
            Ok(report.complex)
        }
    }
}

/// Weighted sum of primitive edge directions at a vertex of a fan or curve:
/// zero iff balanced. Only 1-dimensional cells through the vertex count.
pub fn balancing_defect(c: &TropicalComplex, vertex: usize) -> Vec<i64> {
    let n = c.ambient_dim;
    let mut total = vec![0i64; n];
    for cell in c.cells.iter().filter(|cell| cell.dim == 1 && cell.vertices.contains(&vertex)) {
        let dir: Vec<i64> = if cell.vertices.len() == 2 {
            let other = if cell.vertices[0] == vertex { cell.vertices[1] } else { cell.vertices[0] };
            let d = sub(&c.vertices[other], &c.vertices[vertex]);
            to_i64_vec(&primitive_integer(&d))
        } else {
            cell.rays[0].clone()
        };
        for (t, x) in total.iter_mut().zip(&dir) {
            *t += cell.weight as i64 * x;
        }
    }
    total
}

/// True when the conical hull of the rays of a fan is a linear subspace,
/// i.e. the origin lies in the relative interior of their convex hull.
pub fn rays_span_subspace(rays: &[Vec<i64>]) -> bool {
    if rays.is_empty() {
        return true;
    }
    let pts: Vec<Point> = rays.iter().map(|r| point(r)).collect();
    let p = Polytope::hull(&pts).expect("nonempty");
    let origin = vec![Rational::zero(); rays[0].len()];
    p.affine_hull().contains(&origin) && p.facets().iter().all(|f| f.offset.is_positive())
}
