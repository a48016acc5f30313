//! Rational projections of tropical curves to the plane: kernel bases, the
//! lifted polynomial, monomial pushforwards, image pieces, self-intersection
//! points and the dual subdivision of the image.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num::{Signed, Zero};
use thiserror::Error;

use crate::arrangement::IntersectionReport;
use crate::exactgeom::linalg::{det, nullspace, rank, rref, solve};
use crate::exactgeom::rational::{add, dot, lex_cmp, neg, primitive_integer, scale, sub};
use crate::exactgeom::{format_rational, int, point, GeomError, Point, Polytope, Rational};
use crate::fiber::{mixed_fiber_polytope, patchwork_offset, translation_between, FiberError, LinearFunctional};
use crate::tropoly::{Term, TropError, TropicalComplex, ValuedPolynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectError {
    #[error("matrix is empty or ragged")]
    BadMatrix,
    #[error("matrix does not have full row rank ({rank} < {rows})")]
    RankError { rank: usize, rows: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("projection to the plane needs a 2-row matrix, got {0} rows")]
    NotPlanar(usize),
    #[error("input is not a pointed one-dimensional complex")]
    NotACurve,
    #[error("face {0} is mapped to a point")]
    DegenerateProjection(usize),
    #[error("images of non-adjacent pieces {0} and {1} overlap in a segment")]
    OverlapDegenerate(usize, usize),
    #[error("images of pieces {0} and {1} touch at an endpoint")]
    NonGeneric(usize, usize),
    #[error("curve is not a transversal intersection at cell {0}")]
    NotTransversal(usize),
    #[error("dual cell at image vertex {vertex}: {source}")]
    Fiber { vertex: usize, source: FiberError },
    #[error("dual cells do not fit together: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Trop(#[from] TropError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Primitive integer vectors spanning ker A: one per free column of the
/// reduced row echelon form, first nonzero entry positive.
pub fn kernel_basis(a: &[Vec<i64>]) -> Result<Vec<Vec<i64>>, ProjectError> {
    let n = a.first().map(|r| r.len()).ok_or(ProjectError::BadMatrix)?;
    if n == 0 || a.iter().any(|r| r.len() != n) {
        return Err(ProjectError::BadMatrix);
    }
    let rows: Vec<Point> = a.iter().map(|r| point(r)).collect();
    let r = rank(&rows, n);
    if r < a.len() {
        return Err(ProjectError::RankError { rank: r, rows: a.len() });
    }
    let red = rref(&rows, n);
    Ok(nullspace(&red.rows, n)
        .iter()
        .map(|v| {
            let mut w: Vec<i64> = primitive_integer(v).iter().map(|x| num::ToPrimitive::to_i64(x).expect("small")).collect();
            if w.iter().find(|x| **x != 0).is_some_and(|x| *x < 0) {
                w.iter_mut().for_each(|x| *x = -*x);
            }
            w
        })
        .collect())
}

/// x ↦ Ax together with a kernel basis.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalProjection {
    a: Vec<Vec<i64>>,
    kernel: Vec<Vec<i64>>,
}

impl RationalProjection {
    pub fn new(a: Vec<Vec<i64>>) -> Result<Self, ProjectError> {
        let kernel = kernel_basis(&a)?;
        Ok(RationalProjection { a, kernel })
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.a
    }

    pub fn kernel(&self) -> &[Vec<i64>] {
        &self.kernel
    }

    pub fn source_dim(&self) -> usize {
        self.a[0].len()
    }

    pub fn target_dim(&self) -> usize {
        self.a.len()
    }

    pub fn apply(&self, x: &[Rational]) -> Point {
        self.a.iter().map(|r| dot(&point(r), x)).collect()
    }

    pub fn apply_i64(&self, x: &[i64]) -> Vec<i64> {
        self.a.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn apply_polytope(&self, p: &Polytope) -> Polytope {
        let rows: Vec<Point> = self.a.iter().map(|r| point(r)).collect();
        p.map_linear(&rows)
    }

    /// ψ(x) = Vx with the kernel vectors as rows.
    pub fn psi(&self, x: &[Rational]) -> Point {
        self.kernel.iter().map(|v| dot(&point(v), x)).collect()
    }
}

/// Pushes the support through α ↦ (α, v⁽¹⁾·α, …, v⁽ˡ⁾·α); valuations are kept.
pub fn lift_polynomial(f: &ValuedPolynomial, kernel: &[Vec<i64>]) -> Result<ValuedPolynomial, ProjectError> {
    let n = f.n_vars();
    if let Some(v) = kernel.iter().find(|v| v.len() != n) {
        return Err(ProjectError::DimMismatch { expected: n, got: v.len() });
    }
    let terms = f
        .terms()
        .iter()
        .map(|t| {
            let mut e = t.exp.clone();
            e.extend(kernel.iter().map(|v| v.iter().zip(&t.exp).map(|(a, b)| a * b).sum::<i64>()));
            Term { exp: e, val: t.val.clone(), coeff: t.coeff.clone() }
        })
        .collect();
    Ok(ValuedPolynomial::new(n + kernel.len(), terms, f.prime())?)
}

/// Substitutes monomials: α ↦ Aα. Merged exponents keep the smaller
/// valuation and raise the collision flag.
pub fn monomial_pushforward(f: &ValuedPolynomial, a: &[Vec<i64>]) -> Result<ValuedPolynomial, ProjectError> {
    let n = f.n_vars();
    if a.is_empty() || a.iter().any(|r| r.len() != n) {
        return Err(ProjectError::DimMismatch { expected: n, got: a.first().map_or(0, |r| r.len()) });
    }
    let mut merged: BTreeMap<Vec<i64>, (Rational, Option<Rational>, bool)> = BTreeMap::new();
    let mut order = Vec::new();
    for t in f.terms() {
        let e: Vec<i64> = a.iter().map(|r| r.iter().zip(&t.exp).map(|(x, y)| x * y).sum()).collect();
        match merged.get_mut(&e) {
            Some(slot) => {
                if t.val < slot.0 {
                    slot.0 = t.val.clone();
                }
                slot.1 = None;
                slot.2 = true;
            }
            None => {
                order.push(e.clone());
                merged.insert(e, (t.val.clone(), t.coeff.clone(), false));
            }
        }
    }
    let collision = merged.values().any(|s| s.2);
    let terms = order
        .into_iter()
        .map(|e| {
            let (val, coeff, _) = merged.remove(&e).unwrap();
            Term { exp: e, val, coeff }
        })
        .collect();
    Ok(ValuedPolynomial::new(a.len(), terms, f.prime())?.with_collision(collision))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PieceKind {
    Edge,
    Ray,
}

impl PieceKind {
    pub fn name(&self) -> &'static str {
        match self {
            PieceKind::Edge => "edge",
            PieceKind::Ray => "ray",
        }
    }
}

/// A bounded edge or a ray of an embedded curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveFace {
    pub kind: PieceKind,
    pub vertices: Vec<usize>,
    /// End minus start for edges, the primitive direction for rays.
    pub dir: Point,
    /// Index of the cell in the originating complex, if any.
    pub source_cell: Option<usize>,
}

/// A pointed one-dimensional polyhedral complex in ℝⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedCurve {
    pub vertices: Vec<Point>,
    pub faces: Vec<CurveFace>,
}

impl EmbeddedCurve {
    pub fn ambient_dim(&self) -> usize {
        self.vertices.first().map_or(0, |v| v.len())
    }

    pub fn from_complex(c: &TropicalComplex) -> Result<Self, ProjectError> {
        if !c.lineality.is_empty() || c.cells.iter().any(|cell| cell.dim > 1) {
            return Err(ProjectError::NotACurve);
        }
        let faces = c
            .cells
            .iter()
            .enumerate()
            .filter(|(_, cell)| cell.dim == 1)
            .map(|(i, cell)| {
                if cell.vertices.len() == 2 {
                    CurveFace {
                        kind: PieceKind::Edge,
                        vertices: cell.vertices.clone(),
                        dir: sub(&c.vertices[cell.vertices[1]], &c.vertices[cell.vertices[0]]),
                        source_cell: Some(i),
                    }
                } else {
                    CurveFace { kind: PieceKind::Ray, vertices: cell.vertices.clone(), dir: point(&cell.rays[0]), source_cell: Some(i) }
                }
            })
            .collect();
        Ok(EmbeddedCurve { vertices: c.vertices.clone(), faces })
    }
}

/// The image of one face of one component curve.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub id: usize,
    pub component: usize,
    pub face: usize,
    pub kind: PieceKind,
    pub vertices: Vec<usize>,
    pub source_start: Point,
    pub source_dir: Point,
    pub start: Point,
    pub dir: Point,
}

impl Piece {
    /// Upper parameter bound (None for rays).
    pub fn max_param(&self) -> Option<Rational> {
        match self.kind {
            PieceKind::Edge => Some(int(1)),
            PieceKind::Ray => None,
        }
    }

    pub fn at(&self, s: &Rational) -> Point {
        add(&self.start, &scale(&self.dir, s))
    }

    pub fn adjacent(&self, other: &Piece) -> bool {
        self.component == other.component && self.vertices.iter().any(|v| other.vertices.contains(v))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelfIntersection {
    pub point: Point,
    /// Every non-adjacent pair of pieces meeting here.
    pub pairs: Vec<(usize, usize)>,
    pub kinds: (PieceKind, PieceKind),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlaneCurveImage {
    pub projection: RationalProjection,
    pub curves: Vec<EmbeddedCurve>,
    pub pieces: Vec<Piece>,
    pub sips: Vec<SelfIntersection>,
    pub dual_subdivision: Option<ImageDualSubdivision>,
}

impl PlaneCurveImage {
    pub fn sip_count(&self) -> usize {
        self.sips.len()
    }
}

/// Maps every face of every component; sips are not computed yet.
pub fn project_curves(curves: &[EmbeddedCurve], proj: &RationalProjection) -> Result<PlaneCurveImage, ProjectError> {
    if proj.target_dim() != 2 {
        return Err(ProjectError::NotPlanar(proj.target_dim()));
    }
    let mut pieces = Vec::new();
    for (ci, c) in curves.iter().enumerate() {
        if c.ambient_dim() != proj.source_dim() {
            return Err(ProjectError::DimMismatch { expected: proj.source_dim(), got: c.ambient_dim() });
        }
        for (fi, f) in c.faces.iter().enumerate() {
            let id = pieces.len();
            let start_src = c.vertices[f.vertices[0]].clone();
            let dir = proj.apply(&f.dir);
            if dir.iter().all(Zero::is_zero) {
                return Err(ProjectError::DegenerateProjection(id));
            }
            pieces.push(Piece {
                id,
                component: ci,
                face: fi,
                kind: f.kind,
                vertices: f.vertices.clone(),
                start: proj.apply(&start_src),
                source_start: start_src,
                source_dir: f.dir.clone(),
                dir,
            });
        }
    }
    Ok(PlaneCurveImage { projection: proj.clone(), curves: curves.to_vec(), pieces, sips: Vec::new(), dual_subdivision: None })
}

pub fn project_curve(curve: &TropicalComplex, proj: &RationalProjection) -> Result<PlaneCurveImage, ProjectError> {
    project_curves(&[EmbeddedCurve::from_complex(curve)?], proj)
}

/// How the images of two pieces meet.
#[derive(Clone, Debug, PartialEq)]
pub enum Crossing {
    None,
    /// Relative interiors of both images cross at a single point.
    Interior { point: Point, s: Rational, t: Rational },
    /// A single common point that is an endpoint of at least one image.
    Touch { point: Point },
    /// The images share a segment of positive length.
    Overlap,
}

fn cross(a: &[Rational], b: &[Rational]) -> Rational {
    &a[0] * &b[1] - &a[1] * &b[0]
}

fn in_range(s: &Rational, max: &Option<Rational>) -> bool {
    !s.is_negative() && max.as_ref().is_none_or(|m| s <= m)
}

fn interior(s: &Rational, max: &Option<Rational>) -> bool {
    s.is_positive() && max.as_ref().is_none_or(|m| s < m)
}

pub fn pieces_cross(p: &Piece, q: &Piece) -> Crossing {
    let d = cross(&p.dir, &q.dir);
    let r = sub(&q.start, &p.start);
    let (pm, qm) = (p.max_param(), q.max_param());
    if !d.is_zero() {
        let s = cross(&r, &q.dir) / &d;
        let t = cross(&r, &p.dir) / &d;
        if !in_range(&s, &pm) || !in_range(&t, &qm) {
            return Crossing::None;
        }
        let point = p.at(&s);
        if interior(&s, &pm) && interior(&t, &qm) {
            return Crossing::Interior { point, s, t };
        }
        return Crossing::Touch { point };
    }
    if !cross(&r, &p.dir).is_zero() {
        return Crossing::None;
    }
    // collinear: intersect parameter intervals along p
    let dd = dot(&p.dir, &p.dir);
    let lam = |x: &Point| dot(&sub(x, &p.start), &p.dir) / &dd;
    let q0 = lam(&q.start);
    let forward = dot(&q.dir, &p.dir).is_positive();
    let (mut lo, mut hi): (Option<Rational>, Option<Rational>) = match &qm {
        Some(m) => {
            let q1 = lam(&q.at(m));
            if q0 <= q1 {
                (Some(q0), Some(q1))
            } else {
                (Some(q1), Some(q0))
            }
        }
        None if forward => (Some(q0), None),
        None => (None, Some(q0)),
    };
    // clip with [0, pm]
    lo = Some(match lo {
        Some(l) if l > Rational::zero() => l,
        _ => Rational::zero(),
    });
    hi = match (hi, &pm) {
        (Some(h), Some(m)) => Some(if &h < m { h } else { m.clone() }),
        (Some(h), None) => Some(h),
        (None, Some(m)) => Some(m.clone()),
        (None, None) => None,
    };
    let lo = lo.unwrap();
    match hi {
        Some(h) if h < lo => Crossing::None,
        Some(h) if h == lo => Crossing::Touch { point: p.at(&lo) },
        _ => Crossing::Overlap,
    }
}

fn check_adjacent(p: &Piece, q: &Piece) -> Result<(), ProjectError> {
    // two pieces leaving a common vertex overlap iff their image directions agree
    if p.adjacent(q) {
        if let Crossing::Overlap = pieces_cross(p, q) {
            return Err(ProjectError::OverlapDegenerate(p.id, q.id));
        }
    }
    Ok(())
}

/// Points where images of non-adjacent faces meet, deduplicated.
pub fn self_intersections(image: &PlaneCurveImage) -> Result<Vec<SelfIntersection>, ProjectError> {
    let mut found: BTreeMap<Point, Vec<(usize, usize)>> = BTreeMap::new();
    let ps = &image.pieces;
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            let (p, q) = (&ps[i], &ps[j]);
            if p.adjacent(q) {
                check_adjacent(p, q)?;
                continue;
            }
            match pieces_cross(p, q) {
                Crossing::None => {}
                Crossing::Interior { point, .. } => found.entry(point).or_default().push((i, j)),
                Crossing::Touch { .. } => return Err(ProjectError::NonGeneric(i, j)),
                Crossing::Overlap => return Err(ProjectError::OverlapDegenerate(i, j)),
            }
        }
    }
    Ok(found
        .into_iter()
        .map(|(point, pairs)| {
            let (a, b) = pairs[0];
            SelfIntersection { point, kinds: (ps[a].kind, ps[b].kind), pairs }
        })
        .collect())
}

/// Projects and computes the self-intersection points.
pub fn project_and_count(curves: &[EmbeddedCurve], proj: &RationalProjection) -> Result<PlaneCurveImage, ProjectError> {
    let mut image = project_curves(curves, proj)?;
    image.sips = self_intersections(&image)?;
    Ok(image)
}

// ---------------------------------------------------------------------------
// dual subdivision

/// A minimal face of the curve whose image contains an image vertex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Preimage {
    Vertex { component: usize, vertex: usize },
    Face { component: usize, face: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImageVertex {
    pub point: Point,
    pub preimages: Vec<Preimage>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImageEdge {
    pub a: usize,
    /// None for the unbounded end of a ray.
    pub b: Option<usize>,
    pub piece: usize,
    /// Source direction oriented from a towards b.
    pub source_dir: Point,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualCell {
    pub vertex: usize,
    pub p: usize,
    /// Per preimage face, the dual summands of the defining polynomials.
    pub summands: Vec<Vec<Polytope>>,
    /// The sum of (mixed) fiber polytopes in exponent space of the source.
    pub raw: Polytope,
    pub translation: Point,
    /// The placed cell in the plane.
    pub cell: Polytope,
    /// cell = A·raw + plane_translation.
    pub plane_translation: Point,
}

/// Offsets A·v(C_a, D_a, w) and A·v(C_b, D_b, −w) across a whole curve edge.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchworkRecord {
    pub a: usize,
    pub b: usize,
    pub offset_a: Point,
    pub offset_b: Point,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImageDualSubdivision {
    pub vertices: Vec<ImageVertex>,
    pub edges: Vec<ImageEdge>,
    pub cells: Vec<DualCell>,
    pub patchwork: Vec<PatchworkRecord>,
    /// Global shift applied in the plane (alignment to a pushforward).
    pub shift: Point,
}

impl ImageDualSubdivision {
    pub fn cells_with_p_at_least(&self, p: usize) -> usize {
        self.cells.iter().filter(|c| c.p >= p).count()
    }

    /// Cell-for-cell comparison with a regular subdivision in the plane.
    pub fn matches(&self, sub: &crate::exactgeom::RegularSubdivision) -> bool {
        let ours: BTreeSet<Vec<Point>> = self.cells.iter().map(|c| c.cell.vertices().to_vec()).collect();
        let theirs: BTreeSet<Vec<Point>> = sub.cells.iter().map(|c| sub.cell_polytope(&c.members).vertices().to_vec()).collect();
        ours.len() == self.cells.len() && ours == theirs
    }
}

/// Preimage faces of a plane point, found by solving on each face directly.
fn preimages_of(image: &PlaneCurveImage, x: &[Rational]) -> Vec<Preimage> {
    let proj = &image.projection;
    let mut out = Vec::new();
    for (ci, c) in image.curves.iter().enumerate() {
        for (vi, v) in c.vertices.iter().enumerate() {
            if proj.apply(v) == x {
                out.push(Preimage::Vertex { component: ci, vertex: vi });
            }
        }
    }
    for p in &image.pieces {
        let r = sub(x, &p.start);
        if !cross(&r, &p.dir).is_zero() {
            continue;
        }
        let s = dot(&r, &p.dir) / dot(&p.dir, &p.dir);
        if interior(&s, &p.max_param()) {
            out.push(Preimage::Face { component: p.component, face: p.face });
        }
    }
    out.sort();
    out
}

/// Σψ(P₀, S₁, …, S_l) up to translation for segments S_j with directions
/// u_j: |det ψ(U)|·φ_U(P₀), φ_U the projection onto ker ψ along span U.
fn segment_formula(p0: &Polytope, us: &[Point], proj: &RationalProjection) -> Option<Polytope> {
    let l = us.len();
    let m: Vec<Point> = (0..l).map(|i| us.iter().map(|u| proj.psi(u)[i].clone()).collect()).collect();
    let d = det(&m);
    if d.is_zero() {
        return None;
    }
    let pts: Vec<Point> = p0
        .vertices()
        .iter()
        .map(|x| {
            let c = solve(&m, &proj.psi(x), l).expect("nonsingular");
            let mut y = x.clone();
            for (cj, u) in c.iter().zip(us) {
                y = sub(&y, &scale(u, cj));
            }
            scale(&y, &d.abs())
        })
        .collect();
    Some(Polytope::hull(&pts).expect("nonempty"))
}

fn segment_dir(s: &Polytope) -> Point {
    sub(&s.vertices()[1], &s.vertices()[0])
}

/// The (mixed) fiber polytope of one preimage face, up to translation.
fn preimage_cell(summands: &[Polytope], proj: &RationalProjection, vertex: usize) -> Result<Polytope, ProjectError> {
    let l = proj.kernel().len();
    if l == 1 {
        let psi = LinearFunctional::new(proj.kernel()[0].clone()).map_err(|source| ProjectError::Fiber { vertex, source })?;
        return Ok(mixed_fiber_polytope(summands, &psi).map_err(|source| ProjectError::Fiber { vertex, source })?.polytope);
    }
    let big: Vec<usize> = (0..summands.len()).filter(|&i| summands[i].dim() != 1).collect();
    let fail = || ProjectError::Inconsistent(format!("degenerate dual cell at image vertex {vertex}"));
    match big.as_slice() {
        [i] => {
            let us: Vec<Point> = (0..summands.len()).filter(|j| j != i).map(|j| segment_dir(&summands[j])).collect();
            segment_formula(&summands[*i], &us, proj).ok_or_else(fail)
        }
        [] => (0..summands.len())
            .find_map(|i| {
                let us: Vec<Point> = (0..summands.len()).filter(|&j| j != i).map(|j| segment_dir(&summands[j])).collect();
                segment_formula(&summands[i], &us, proj)
            })
            .ok_or_else(fail),
        _ => Err(ProjectError::NotTransversal(vertex)),
    }
}

fn summands_of(reports: &[IntersectionReport], image: &PlaneCurveImage, pre: &Preimage) -> Result<Vec<Polytope>, ProjectError> {
    let (component, cell) = match pre {
        Preimage::Vertex { component, vertex } => {
            let c = reports[*component].vertex_cell(*vertex).ok_or(ProjectError::NotACurve)?;
            (*component, c)
        }
        Preimage::Face { component, face } => {
            let c = image.curves[*component].faces[*face].source_cell.ok_or(ProjectError::NotACurve)?;
            (*component, c)
        }
    };
    let r = &reports[component];
    if !r.certificates[cell].transversal {
        return Err(ProjectError::NotTransversal(cell));
    }
    Ok((0..r.k()).map(|i| r.summand(cell, i)).collect())
}

fn lex_min(points: impl Iterator<Item = Point>) -> Option<Point> {
    points.min_by(|a, b| lex_cmp(a, b))
}

/// Dual subdivision of the image of a union of transversal complete
/// intersection curves (one report per component). When the pushforward
/// polynomial is given, the cells are shifted so that the lexicographically
/// smallest vertices of the cell union and its Newton polygon agree.
pub fn image_dual_subdivision(
    reports: &[IntersectionReport],
    proj: &RationalProjection,
    pushforward: Option<&ValuedPolynomial>,
) -> Result<PlaneCurveImage, ProjectError> {
    let n = proj.source_dim();
    let curves: Vec<EmbeddedCurve> = reports.iter().map(|r| EmbeddedCurve::from_complex(&r.complex)).collect::<Result<_, _>>()?;
    let mut image = project_and_count(&curves, proj)?;
    for r in reports {
        if r.k() + 1 != n || !r.is_proper {
            return Err(ProjectError::NotACurve);
        }
    }

    // image vertices: vertex images and crossing points
    let mut points: BTreeSet<Point> = BTreeSet::new();
    for c in &curves {
        for v in &c.vertices {
            points.insert(proj.apply(v));
        }
    }
    for s in &image.sips {
        points.insert(s.point.clone());
    }
    let points: Vec<Point> = points.into_iter().collect();
    let vertices: Vec<ImageVertex> = points.iter().map(|x| ImageVertex { point: x.clone(), preimages: preimages_of(&image, x) }).collect();

    // image edges along each piece
    let mut edges = Vec::new();
    for p in &image.pieces {
        let mut on: Vec<(Rational, usize)> = Vec::new();
        for (i, x) in points.iter().enumerate() {
            let r = sub(x, &p.start);
            if cross(&r, &p.dir).is_zero() {
                let s = dot(&r, &p.dir) / dot(&p.dir, &p.dir);
                if in_range(&s, &p.max_param()) {
                    on.push((s, i));
                }
            }
        }
        on.sort();
        for w in on.windows(2) {
            edges.push(ImageEdge { a: w[0].1, b: Some(w[1].1), piece: p.id, source_dir: p.source_dir.clone() });
        }
        if p.kind == PieceKind::Ray {
            let last = on.last().expect("ray start is a vertex").1;
            edges.push(ImageEdge { a: last, b: None, piece: p.id, source_dir: p.source_dir.clone() });
        }
    }

    // raw cells
    let mut raws = Vec::with_capacity(vertices.len());
    let mut summand_lists = Vec::with_capacity(vertices.len());
    for (vi, v) in vertices.iter().enumerate() {
        let mut acc = Polytope::point(vec![Rational::zero(); n]);
        let mut lists = Vec::new();
        for pre in &v.preimages {
            let s = summands_of(reports, &image, pre)?;
            acc = acc.minkowski_sum(&preimage_cell(&s, proj, vi)?)?;
            lists.push(s);
        }
        raws.push(acc);
        summand_lists.push(lists);
    }

    // place cells by matching dual edges
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
    for (ei, e) in edges.iter().enumerate() {
        if let Some(b) = e.b {
            adj[e.a].push(ei);
            adj[b].push(ei);
        }
    }
    let mut trans: Vec<Option<Point>> = vec![None; vertices.len()];
    for root in 0..vertices.len() {
        if trans[root].is_some() {
            continue;
        }
        trans[root] = Some(vec![Rational::zero(); n]);
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            for &ei in &adj[x] {
                let e = &edges[ei];
                let b = e.b.unwrap();
                let (y, u) = if e.a == x { (b, e.source_dir.clone()) } else { (e.a, neg(&e.source_dir)) };
                let tx = trans[x].clone().unwrap();
                let ex = raws[x].translate(&tx).face_unchecked(&neg(&u));
                let ey = raws[y].face_unchecked(&u);
                let ty = translation_between(&ey, &ex)
                    .ok_or_else(|| ProjectError::Inconsistent(format!("dual edge of image edge {ei} differs between cells {x} and {y}")))?;
                match &trans[y] {
                    Some(old) if *old != ty => {
                        return Err(ProjectError::Inconsistent(format!("cell {y} placed inconsistently")));
                    }
                    Some(_) => {}
                    None => {
                        trans[y] = Some(ty);
                        queue.push_back(y);
                    }
                }
            }
        }
    }
    let trans: Vec<Point> = trans.into_iter().map(Option::unwrap).collect();

    // patchwork offsets across whole curve edges between single-preimage vertices
    let mut patchwork = Vec::new();
    if proj.kernel().len() == 1 {
        let psi = LinearFunctional::new(proj.kernel()[0].clone()).expect("primitive kernel vector");
        for e in &edges {
            let (Some(b), p) = (e.b, &image.pieces[e.piece]) else { continue };
            if p.kind != PieceKind::Edge {
                continue;
            }
            let is_vertex = |i: usize| matches!(vertices[i].preimages.as_slice(), [Preimage::Vertex { .. }]);
            if !is_vertex(e.a) || !is_vertex(b) {
                continue;
            }
            let split = |s: &[Polytope]| -> Option<(Polytope, Polytope)> {
                let seg = s.iter().position(|x| x.dim() == 1)?;
                Some((s[1 - seg].clone(), s[seg].clone()))
            };
            let (Some((ca, da)), Some((cb, db))) = (split(&summand_lists[e.a][0]), split(&summand_lists[b][0])) else { continue };
            let w = neg(&e.source_dir);
            let va = patchwork_offset(&ca, &da, &psi, &w).map_err(|source| ProjectError::Fiber { vertex: e.a, source })?;
            let vb = patchwork_offset(&cb, &db, &psi, &e.source_dir).map_err(|source| ProjectError::Fiber { vertex: b, source })?;
            if sub(&trans[e.a], &trans[b]) != sub(&va, &vb) {
                return Err(ProjectError::Inconsistent(format!("patchwork offset disagrees on edge {}-{}", e.a, b)));
            }
            patchwork.push(PatchworkRecord { a: e.a, b, offset_a: proj.apply(&va), offset_b: proj.apply(&vb) });
        }
    }

    let mut cells: Vec<DualCell> = Vec::with_capacity(vertices.len());
    for (vi, raw) in raws.into_iter().enumerate() {
        let cell = proj.apply_polytope(&raw.translate(&trans[vi]));
        cells.push(DualCell {
            vertex: vi,
            p: vertices[vi].preimages.len(),
            summands: summand_lists[vi].clone(),
            raw,
            plane_translation: proj.apply(&trans[vi]),
            translation: trans[vi].clone(),
            cell,
        });
    }
    let mut shift = vec![Rational::zero(); 2];
    if let Some(g) = pushforward {
        let target = lex_min(g.support().iter().map(|e| point(e))).expect("nonempty support");
        let current = lex_min(cells.iter().flat_map(|c| c.cell.vertices().to_vec())).expect("cells");
        shift = sub(&target, &current);
        for c in &mut cells {
            c.cell = c.cell.translate(&shift);
            c.plane_translation = add(&c.plane_translation, &shift);
        }
    }
    image.dual_subdivision = Some(ImageDualSubdivision { vertices, edges, cells, patchwork, shift });
    Ok(image)
}

/// Human-readable point "(a, b)".
pub fn format_point(p: &[Rational]) -> String {
    format!("({})", p.iter().map(format_rational).collect::<Vec<_>>().join(", "))
}
