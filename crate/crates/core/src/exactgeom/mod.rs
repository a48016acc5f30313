//! Exact rational convex geometry: hulls, faces, Minkowski sums and
//! differences, and lower-hull regular subdivisions.

mod hull;
pub mod linalg;
mod polytope;
pub mod rational;
mod subdivision;

use thiserror::Error;

pub use hull::hull_2d_ccw;
pub use polytope::{canonical_points, hull_i64, Facet, Polytope};
pub use rational::{format_rational, frac, int, parse_rational, point, Point, Rational};
pub use subdivision::{covers_hull, lower_hull_subdivision, RegularSubdivision, SubdivisionCell, SubdivisionFace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("empty input")]
    EmptyInput,
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("zero direction vector")]
    ZeroDirection,
    #[error("the Minkowski difference is not a polytope")]
    NotAPolytope,
    #[error("invalid rational literal `{0}`")]
    BadRational(String),
    #[error("duplicate support point")]
    DuplicatePoint,
}

pub fn convex_hull(points: &[Point]) -> Result<Polytope, GeomError> {
    Polytope::hull(points)
}

pub fn minkowski_sum(p: &Polytope, q: &Polytope) -> Result<Polytope, GeomError> {
    p.minkowski_sum(q)
}

pub fn minkowski_difference(p: &Polytope, q: &Polytope) -> Result<Polytope, GeomError> {
    p.minkowski_difference(q)
}

pub fn face_in_direction(p: &Polytope, w: &[Rational]) -> Result<Polytope, GeomError> {
    p.face_in_direction(w)
}
