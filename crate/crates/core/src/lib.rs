//! Exact tropical geometry: hypersurfaces and curves from valued polynomials,
//! rational projections of curves, self-intersection counts, and the dual
//! subdivision of projected curves via mixed fiber polytopes.

pub mod arrangement;
pub mod exactgeom;
pub mod fiber;
pub mod io;
pub mod lines;
pub mod project;
pub mod svg;
pub mod tropoly;
