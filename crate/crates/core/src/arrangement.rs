//! Finite intersections of tropical hypersurfaces.
//!
//! The intersection Y = T(f1) ∩ ... ∩ T(fk) is read off the union
//! U = T(f1 ⋯ fk): every cell C of U has dual cell C∨ in the subdivision of
//! new(f1 ⋯ fk), and C∨ = C1∨ + ... + Ck∨ where Ci∨ is the set of terms of fi
//! active on the relative interior of C. C lies in Y iff every Ci∨ has at
//! least two points.

use std::collections::BTreeMap;

use num::Zero;
use thiserror::Error;

use crate::exactgeom::linalg::rank;
use crate::exactgeom::rational::{point, sub};
use crate::exactgeom::{lower_hull_subdivision, GeomError, Point, Polytope};
use crate::tropoly::{
    cells_from_subdivision, hypersurface, tropical_product_all, ComplexCell, ComplexSource, TropError,
    TropicalComplex, ValuedPolynomial,
};

/// Largest number of hypersurfaces accepted (transversality inspects every
/// sub-collection).
pub const MAX_FACTORS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArrangementError {
    #[error("ambient dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("no hypersurfaces given")]
    Empty,
    #[error("{k} hypersurfaces exceed the limit (k <= min(n, {max}))")]
    TooManyFactors { k: usize, max: usize },
    #[error("hypersurface was not built from a polynomial")]
    MissingSource,
    #[error("the intersection is not proper")]
    NotProper,
    #[error(transparent)]
    Trop(#[from] TropError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellCertificate {
    pub cell: usize,
    pub dual_dim: usize,
    pub summand_dims: Vec<usize>,
    pub transversal: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntersectionReport {
    /// Y with dual references into the support of the tropical product.
    pub complex: TropicalComplex,
    pub factors: Vec<ValuedPolynomial>,
    pub product: ValuedPolynomial,
    /// `decomposition[c][i]` lists the term indices of factor i forming Ci∨
    /// for cell c of `complex`.
    pub decomposition: Vec<Vec<Vec<usize>>>,
    pub certificates: Vec<CellCertificate>,
    pub is_empty: bool,
    pub is_proper: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransversalityCertificate {
    pub transversal: bool,
    pub cells: Vec<CellCertificate>,
    /// Each proper sub-collection J (|J| >= 2) with its verdict.
    pub subcollections: Vec<(Vec<usize>, bool)>,
}

impl IntersectionReport {
    pub fn ambient_dim(&self) -> usize {
        self.complex.ambient_dim
    }

    pub fn k(&self) -> usize {
        self.factors.len()
    }

    /// Ci∨ as a polytope.
    pub fn summand(&self, cell: usize, factor: usize) -> Polytope {
        let f = &self.factors[factor];
        let pts: Vec<Point> = self.decomposition[cell][factor].iter().map(|&t| point(&f.terms()[t].exp)).collect();
        Polytope::hull(&pts).expect("nonempty active set")
    }

    /// C∨ as a polytope (from the product subdivision).
    pub fn dual_polytope(&self, cell: usize) -> Polytope {
        let pts: Vec<Point> = self.complex.cells[cell].dual.iter().map(|&i| point(&self.complex.support[i])).collect();
        Polytope::hull(&pts).expect("nonempty dual cell")
    }

    /// Checks C∨ = C1∨ + ... + Ck∨ for one cell.
    pub fn decomposition_consistent(&self, cell: usize) -> bool {
        let mut acc = self.summand(cell, 0);
        for i in 1..self.k() {
            acc = acc.minkowski_sum(&self.summand(cell, i)).expect("same ambient dim");
        }
        acc == self.dual_polytope(cell)
    }

    /// Index of the cell of dim 0 at a vertex.
    pub fn vertex_cell(&self, vertex: usize) -> Option<usize> {
        self.complex.cells.iter().position(|c| c.dim == 0 && c.vertices == [vertex])
    }

    pub fn is_curve(&self) -> bool {
        self.complex.lineality.is_empty() && self.complex.dim().is_none_or(|d| d <= 1)
    }
}

fn check_inputs(fs: &[ValuedPolynomial]) -> Result<usize, ArrangementError> {
    let first = fs.first().ok_or(ArrangementError::Empty)?;
    let n = first.n_vars();
    if let Some(f) = fs.iter().find(|f| f.n_vars() != n) {
        return Err(ArrangementError::DimMismatch(n, f.n_vars()));
    }
    if fs.len() > n.min(MAX_FACTORS) {
        return Err(ArrangementError::TooManyFactors { k: fs.len(), max: MAX_FACTORS });
    }
    Ok(n)
}

fn affine_dim(points: &[Vec<i64>]) -> usize {
    let base = point(&points[0]);
    let rows: Vec<Point> = points[1..].iter().map(|p| sub(&point(p), &base)).collect();
    if rows.is_empty() {
        0
    } else {
        rank(&rows, base.len())
    }
}

/// Gcd of the maximal minors of the summand edge vectors; the lattice index
/// used as the weight of a transversal curve edge.
fn edge_weight(report_factors: &[ValuedPolynomial], decomposition: &[Vec<usize>]) -> u64 {
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for (f, idx) in report_factors.iter().zip(decomposition) {
        let pts: Vec<Vec<i64>> = idx.iter().map(|&t| f.terms()[t].exp.clone()).collect();
        let poly = crate::exactgeom::hull_i64(&pts).expect("nonempty");
        if poly.dim() != 1 {
            return 1;
        }
        let v = sub(&poly.vertices()[1], &poly.vertices()[0]);
        rows.push(v.iter().map(|x| num::ToPrimitive::to_i64(&x.to_integer()).unwrap()).collect());
    }
    gcd_of_maximal_minors(&rows).max(1)
}

/// Core routine: Y as a subcomplex of U with decompositions.
fn intersect_raw(fs: &[ValuedPolynomial]) -> Result<IntersectionReport, ArrangementError> {
    let n = check_inputs(fs)?;
    let product = tropical_product_all(fs)?;
    let mut decomposition: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut kept: Vec<ComplexCell> = Vec::new();
    let (u_vertices, u_lineality) = if product.terms().len() < 2 {
        (Vec::new(), Vec::new())
    } else {
        let sub = lower_hull_subdivision(&product.lifted_support())?;
        let (verts, cells, lineality) = cells_from_subdivision(&sub);
        let probe = TropicalComplex {
            ambient_dim: n,
            vertices: verts.clone(),
            lineality: lineality.clone(),
            cells: Vec::new(),
            support: product.support(),
            source: ComplexSource::Hypersurface(product.clone()),
        };
        for cell in cells.into_iter().filter(|c| c.dual_dim >= 1) {
            let x = probe.relative_interior_point(&cell);
            let actives: Vec<Vec<usize>> = fs.iter().map(|f| f.active_terms(&x)).collect();
            if actives.iter().all(|a| a.len() >= 2) {
                decomposition.push(actives);
                kept.push(cell);
            }
        }
        (verts, lineality)
    };
    // reindex vertices used by Y
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    for c in &kept {
        for &v in &c.vertices {
            let next = map.len();
            map.entry(v).or_insert(next);
        }
    }
    let mut order: Vec<(usize, usize)> = map.iter().map(|(&old, &new)| (new, old)).collect();
    order.sort();
    let vertices: Vec<Point> = order.iter().map(|&(_, old)| u_vertices[old].clone()).collect();
    let mut certificates = Vec::new();
    for (ci, c) in kept.iter_mut().enumerate() {
        c.vertices = c.vertices.iter().map(|v| map[v]).collect();
        let summand_dims: Vec<usize> = fs
            .iter()
            .zip(&decomposition[ci])
            .map(|(f, idx)| affine_dim(&idx.iter().map(|&t| f.terms()[t].exp.clone()).collect::<Vec<_>>()))
            .collect();
        let transversal = summand_dims.iter().sum::<usize>() == c.dual_dim;
        if c.dim == 1 {
            c.weight = if transversal { edge_weight(fs, &decomposition[ci]) } else { 1 };
        }
        certificates.push(CellCertificate { cell: ci, dual_dim: c.dual_dim, summand_dims, transversal });
    }
    let is_empty = kept.is_empty();
    let k = fs.len();
    let dim = kept.iter().map(|c| c.dim).max();
    let is_proper = dim.is_none_or(|d| d + k == n);
    let complex = TropicalComplex {
        ambient_dim: n,
        vertices,
        lineality: if is_empty { Vec::new() } else { u_lineality },
        cells: kept,
        support: product.support(),
        source: ComplexSource::Intersection(fs.to_vec()),
    };
    Ok(IntersectionReport { complex, factors: fs.to_vec(), product, decomposition, certificates, is_empty, is_proper })
}

/// Intersection of the tropical hypersurfaces of the given polynomials.
pub fn intersect_polynomials(fs: &[ValuedPolynomial]) -> Result<IntersectionReport, ArrangementError> {
    intersect_raw(fs)
}

/// Intersection of hypersurface complexes (each must carry its polynomial).
pub fn intersect(hypersurfaces: &[TropicalComplex]) -> Result<IntersectionReport, ArrangementError> {
    let first = hypersurfaces.first().ok_or(ArrangementError::Empty)?;
    let n = first.ambient_dim;
    let mut fs = Vec::new();
    for h in hypersurfaces {
        if h.ambient_dim != n {
            return Err(ArrangementError::DimMismatch(n, h.ambient_dim));
        }
        match &h.source {
            ComplexSource::Hypersurface(f) => fs.push(f.clone()),
            ComplexSource::Intersection(_) => return Err(ArrangementError::MissingSource),
        }
    }
    intersect_raw(&fs)
}

pub fn is_proper(report: &IntersectionReport) -> bool {
    report.is_proper
}

/// Checks the dual-dimension equation on every cell and on every
/// sub-collection of at least two hypersurfaces.
pub fn is_transversal(report: &IntersectionReport) -> Result<TransversalityCertificate, ArrangementError> {
    if !report.is_proper {
        return Err(ArrangementError::NotProper);
    }
    let k = report.k();
    let own = report.certificates.iter().all(|c| c.transversal);
    let mut subcollections = Vec::new();
    for mask in 0u32..(1 << k) {
        let j: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        if j.len() < 2 || j.len() == k {
            continue;
        }
        let fs: Vec<ValuedPolynomial> = j.iter().map(|&i| report.factors[i].clone()).collect();
        let sub = intersect_raw(&fs)?;
        let ok = sub.is_proper && sub.certificates.iter().all(|c| c.transversal);
        subcollections.push((j, ok));
    }
    let transversal = own && subcollections.iter().all(|s| s.1);
    Ok(TransversalityCertificate { transversal, cells: report.certificates.clone(), subcollections })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixedCell {
    /// Index of the vertex of Y dual to this cell.
    pub vertex: usize,
    pub cell: Polytope,
    pub summands: Vec<Polytope>,
}

/// Top-dimensional dual cells whose summands all have dimension at least one.
pub fn mixed_cells(fs: &[ValuedPolynomial]) -> Result<Vec<MixedCell>, ArrangementError> {
    let report = intersect_raw(fs)?;
    let n = report.ambient_dim();
    Ok(report
        .complex
        .cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.dual_dim == n)
        .map(|(ci, c)| MixedCell {
            vertex: c.vertices[0],
            cell: report.dual_polytope(ci),
            summands: (0..report.k()).map(|i| report.summand(ci, i)).collect(),
        })
        .collect())
}

/// Weighted direction sums at every vertex of a curve; all zero iff balanced.
pub fn balancing_defects(report: &IntersectionReport) -> Vec<Vec<i64>> {
    (0..report.complex.vertices.len()).map(|v| crate::tropoly::balancing_defect(&report.complex, v)).collect()
}

pub fn is_balanced(report: &IntersectionReport) -> bool {
    balancing_defects(report).iter().all(|d| d.iter().all(Zero::is_zero))
}

/// One intersection per choice of one factor from each factored polynomial.
pub fn intersect_components(factored: &[Vec<ValuedPolynomial>]) -> Result<Vec<IntersectionReport>, ArrangementError> {
    let mut choices: Vec<Vec<usize>> = vec![Vec::new()];
    for fs in factored {
        if fs.is_empty() {
            return Err(ArrangementError::Empty);
        }
        let mut next = Vec::new();
        for c in &choices {
            for j in 0..fs.len() {
                let mut d = c.clone();
                d.push(j);
                next.push(d);
            }
        }
        choices = next;
    }
    choices
        .iter()
        .map(|c| {
            let fs: Vec<ValuedPolynomial> = c.iter().enumerate().map(|(i, &j)| factored[i][j].clone()).collect();
            intersect_raw(&fs)
        })
        .collect()
}

/// Hypersurface of each polynomial, for callers that want complexes first.
pub fn hypersurfaces(fs: &[ValuedPolynomial]) -> Result<Vec<TropicalComplex>, ArrangementError> {
    fs.iter().map(|f| hypersurface(f).map_err(ArrangementError::from)).collect()
}

/// Gcd of the maximal minors of an integer matrix with at most as many rows
/// as columns (0 when the rows are dependent).
pub fn gcd_of_maximal_minors(rows: &[Vec<i64>]) -> u64 {
    let k = rows.len();
    if k == 0 {
        return 1;
    }
    let n = rows[0].len();
    let mut g = num::BigInt::zero();
    let mut cols: Vec<usize> = (0..k).collect();
    if k > n {
        return 0;
    }
    loop {
        let m: Vec<Point> = rows.iter().map(|r| cols.iter().map(|&c| crate::exactgeom::int(r[c])).collect()).collect();
        let d = crate::exactgeom::linalg::det(&m).to_integer();
        g = num::integer::gcd(g, d);
        // next k-subset of 0..n in lex order
        let mut i = k;
        while i > 0 && cols[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        cols[i - 1] += 1;
        for j in i..k {
            cols[j] = cols[j - 1] + 1;
        }
    }
    num::ToPrimitive::to_u64(&g).unwrap_or(u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::int;

    fn poly(n: usize, terms: &[(Vec<i64>, i64)]) -> ValuedPolynomial {
        ValuedPolynomial::from_int_vals(n, terms).unwrap()
    }

    fn plane(vals: [i64; 4]) -> ValuedPolynomial {
        poly(3, &[(vec![1, 0, 0], vals[0]), (vec![0, 1, 0], vals[1]), (vec![0, 0, 1], vals[2]), (vec![0, 0, 0], vals[3])])
    }

    #[test]
    fn two_planes_give_a_line() {
        let r = intersect_polynomials(&[plane([0, 0, 0, 0]), plane([0, 1, 3, 2])]).unwrap();
        assert!(r.is_proper && !r.is_empty && r.is_curve());
        assert_eq!(r.complex.vertices.len(), 2);
        assert_eq!(r.complex.cells_of_dim(1).count(), 5);
        assert!(is_balanced(&r));
        for c in 0..r.complex.cells.len() {
            assert!(r.decomposition_consistent(c));
        }
        let cert = is_transversal(&r).unwrap();
        assert!(cert.transversal);
        assert_eq!(mixed_cells(&[plane([0, 0, 0, 0]), plane([0, 1, 3, 2])]).unwrap().len(), 2);
        for v in &r.complex.vertices {
            assert!(r.factors.iter().all(|f| f.vanishes_at(v)));
        }
    }

    #[test]
    fn identical_planes_not_proper() {
        let r = intersect_polynomials(&[plane([0, 0, 0, 0]), plane([0, 0, 0, 0])]).unwrap();
        assert!(!r.is_proper);
        assert_eq!(is_transversal(&r), Err(ArrangementError::NotProper));
    }

    #[test]
    fn disjoint_is_empty_and_proper() {
        // min(x, 0) and min(x, 1) never vanish together
        let f = poly(2, &[(vec![1, 0], 0), (vec![0, 0], 0)]);
        let g = poly(2, &[(vec![1, 0], 0), (vec![0, 0], 1)]);
        let r = intersect_polynomials(&[f, g]).unwrap();
        assert!(r.is_empty && r.is_proper);
    }

    #[test]
    fn plane_curves_meet_in_points_with_weights() {
        // lines min(x, y, 0) and min(x, 1+y, 2) meet in a single point
        let f = poly(2, &[(vec![1, 0], 0), (vec![0, 1], 0), (vec![0, 0], 0)]);
        let g = poly(2, &[(vec![2, 0], 0), (vec![0, 1], 1), (vec![0, 0], 3)]);
        let r = intersect_polynomials(&[f.clone(), g.clone()]).unwrap();
        assert!(r.is_proper);
        let mixed = mixed_cells(&[f, g]).unwrap();
        let total: u64 = mixed
            .iter()
            .map(|m| {
                let rows: Vec<Vec<i64>> = m
                    .summands
                    .iter()
                    .map(|s| {
                        let d = sub(&s.vertices()[1], &s.vertices()[0]);
                        d.iter().map(|x| num::ToPrimitive::to_i64(&x.to_integer()).unwrap()).collect()
                    })
                    .collect();
                gcd_of_maximal_minors(&rows)
            })
            .sum();
        // intersection multiplicities add up to the mixed area
        assert_eq!(total, 2);
        assert!(r.complex.vertices.iter().all(|v| v.len() == 2));
        let _ = int(0);
    }

    #[test]
    fn input_checks() {
        let f = plane([0, 0, 0, 0]);
        let g = poly(2, &[(vec![1, 0], 0), (vec![0, 0], 0)]);
        assert_eq!(intersect_polynomials(&[f.clone(), g]), Err(ArrangementError::DimMismatch(3, 2)));
        assert!(matches!(intersect_polynomials(&[f.clone(), f.clone(), f.clone(), f]), Err(ArrangementError::TooManyFactors { .. })));
        assert_eq!(intersect_polynomials(&[]), Err(ArrangementError::Empty));
    }

    #[test]
    fn minors() {
        assert_eq!(gcd_of_maximal_minors(&[vec![2, 0, 0], vec![0, 2, 0]]), 4);
        assert_eq!(gcd_of_maximal_minors(&[vec![1, 1, 0], vec![0, 1, 1]]), 1);
        assert_eq!(gcd_of_maximal_minors(&[vec![1, 1], vec![2, 2]]), 0);
    }
}
