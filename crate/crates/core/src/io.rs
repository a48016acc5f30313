//! JSON documents for polynomials, polytopes, complexes, images and lines.
//! Rationals are strings ("a" or "a/b"); every document carries the schema tag.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::arrangement::IntersectionReport;
use crate::exactgeom::{format_rational, parse_rational, GeomError, Point, Polytope, Rational, RegularSubdivision};
use crate::fiber::{FiberError, FiberPolytope, FiberSource, LinearFunctional};
use crate::lines::{LineTree, LinesError, TropicalLine};
use crate::project::PlaneCurveImage;
use crate::tropoly::{padic_valuation, TropError, TropicalComplex, ValuedPolynomial};

pub const SCHEMA: &str = "tropicast/1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema {0:?}")]
    Schema(String),
    #[error("term {0:?} has neither a valuation nor a coefficient with a prime")]
    MissingValuation(Vec<i64>),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Trop(#[from] TropError),
    #[error(transparent)]
    Fiber(#[from] FiberError),
    #[error(transparent)]
    Lines(#[from] LinesError),
}

/// A rational serialized as a string.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Q(pub Rational);

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Q;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational as \"a\" or \"a/b\", or an integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Q, E> {
                parse_rational(v).map(Q).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Q, E> {
                Ok(Q(Rational::from_integer(v.into())))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Q, E> {
                Ok(Q(Rational::from_integer(v.into())))
            }
        }
        d.deserialize_any(V)
    }
}

pub fn q_point(p: &[Rational]) -> Vec<Q> {
    p.iter().cloned().map(Q).collect()
}

pub fn from_q_point(p: &[Q]) -> Point {
    p.iter().map(|q| q.0.clone()).collect()
}

fn schema() -> String {
    SCHEMA.to_string()
}

fn check_schema(s: &Option<String>) -> Result<(), IoError> {
    match s {
        Some(s) if s != SCHEMA => Err(IoError::Schema(s.clone())),
        _ => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff: Option<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub val: Option<Q>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialJson {
    #[serde(default)]
    pub schema: Option<String>,
    pub n_vars: usize,
    #[serde(default)]
    pub prime: Option<u64>,
    pub terms: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub collision: bool,
}

impl PolynomialJson {
    pub fn from_poly(f: &ValuedPolynomial) -> Self {
        PolynomialJson {
            schema: Some(schema()),
            n_vars: f.n_vars(),
            prime: f.prime(),
            terms: f
                .terms()
                .iter()
                .map(|t| TermJson { exp: t.exp.clone(), coeff: t.coeff.clone().map(Q), val: Some(Q(t.val.clone())) })
                .collect(),
            collision: f.collision(),
        }
    }

    /// Terms without a valuation take the p-adic valuation of their coefficient;
    /// zero coefficients are dropped.
    pub fn to_poly(&self) -> Result<ValuedPolynomial, IoError> {
        check_schema(&self.schema)?;
        let mut terms = Vec::new();
        for t in &self.terms {
            let val = match (&t.val, &t.coeff, self.prime) {
                (Some(v), _, _) => v.0.clone(),
                (None, Some(c), Some(p)) => match padic_valuation(&c.0, p)? {
                    Some(v) => v,
                    None => continue,
                },
                _ => return Err(IoError::MissingValuation(t.exp.clone())),
            };
            terms.push(crate::tropoly::Term { exp: t.exp.clone(), val, coeff: t.coeff.as_ref().map(|c| c.0.clone()) });
        }
        Ok(ValuedPolynomial::new(self.n_vars, terms, self.prime)?.with_collision(self.collision))
    }
}

/// A list of polynomials, each optionally given as a list of factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemJson {
    #[serde(default)]
    pub schema: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub polynomials: Vec<PolynomialJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<Vec<PolynomialJson>>,
}

impl SystemJson {
    pub fn from_factors(factors: &[Vec<ValuedPolynomial>]) -> Self {
        SystemJson {
            schema: Some(schema()),
            polynomials: Vec::new(),
            factors: factors.iter().map(|fs| fs.iter().map(PolynomialJson::from_poly).collect()).collect(),
        }
    }

    pub fn from_polys(fs: &[ValuedPolynomial]) -> Self {
        SystemJson { schema: Some(schema()), polynomials: fs.iter().map(PolynomialJson::from_poly).collect(), factors: Vec::new() }
    }

    /// Factor lists; plain polynomials become single-factor lists.
    pub fn to_factors(&self) -> Result<Vec<Vec<ValuedPolynomial>>, IoError> {
        check_schema(&self.schema)?;
        let mut out: Vec<Vec<ValuedPolynomial>> =
            self.polynomials.iter().map(|p| p.to_poly().map(|f| vec![f])).collect::<Result<_, _>>()?;
        for fs in &self.factors {
            out.push(fs.iter().map(PolynomialJson::to_poly).collect::<Result<_, _>>()?);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolytopeJson {
    #[serde(default)]
    pub schema: Option<String>,
    pub ambient_dim: usize,
    pub vertices: Vec<Vec<Q>>,
}

impl PolytopeJson {
    pub fn from_polytope(p: &Polytope) -> Self {
        PolytopeJson { schema: Some(schema()), ambient_dim: p.ambient_dim(), vertices: p.vertices().iter().map(|v| q_point(v)).collect() }
    }

    /// The convex hull of the listed points.
    pub fn to_polytope(&self) -> Result<Polytope, IoError> {
        check_schema(&self.schema)?;
        let pts: Vec<Point> = self.vertices.iter().map(|v| from_q_point(v)).collect();
        if let Some(p) = pts.iter().find(|p| p.len() != self.ambient_dim) {
            return Err(GeomError::DimMismatch(self.ambient_dim, p.len()).into());
        }
        Ok(Polytope::hull(&pts)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberJson {
    pub schema: String,
    pub ambient_dim: usize,
    pub vertices: Vec<Vec<Q>>,
    pub psi: Vec<i64>,
    pub source: String,
    /// Indices of the input polytopes combined in a mixed fiber polytope.
    pub factors: Vec<usize>,
}

impl FiberJson {
    pub fn from_fiber(f: &FiberPolytope) -> Self {
        let (source, factors) = match f.source {
            FiberSource::Plain => ("plain", vec![0]),
            FiberSource::Mixed(r) => ("mixed", (0..r).collect()),
        };
        FiberJson {
            schema: schema(),
            ambient_dim: f.polytope.ambient_dim(),
            vertices: f.polytope.vertices().iter().map(|v| q_point(v)).collect(),
            psi: f.psi.coeffs().to_vec(),
            source: source.to_string(),
            factors,
        }
    }

    pub fn to_fiber(&self) -> Result<FiberPolytope, IoError> {
        check_schema(&Some(self.schema.clone()))?;
        let polytope = PolytopeJson { schema: None, ambient_dim: self.ambient_dim, vertices: self.vertices.clone() }.to_polytope()?;
        let source = if self.source == "mixed" { FiberSource::Mixed(self.factors.len()) } else { FiberSource::Plain };
        Ok(FiberPolytope { polytope, source, psi: LinearFunctional::new(self.psi.clone())? })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubdivisionCellJson {
    pub members: Vec<usize>,
    pub vertices: Vec<usize>,
    pub dim: usize,
    pub dual_point: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubdivisionJson {
    pub schema: String,
    pub ambient_dim: usize,
    pub points: Vec<Vec<i64>>,
    pub lifts: Vec<Q>,
    pub cells: Vec<SubdivisionCellJson>,
}

impl SubdivisionJson {
    pub fn from_subdivision(s: &RegularSubdivision) -> Self {
        SubdivisionJson {
            schema: schema(),
            ambient_dim: s.ambient_dim(),
            points: s.points.clone(),
            lifts: q_point(&s.lifts),
            cells: s
                .cells
                .iter()
                .map(|c| SubdivisionCellJson { members: c.members.clone(), vertices: c.vertices.clone(), dim: c.dim, dual_point: q_point(&c.dual_point) })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellJson {
    pub dim: usize,
    pub vertices: Vec<usize>,
    pub rays: Vec<Vec<i64>>,
    pub weight: u64,
    pub dual: Vec<usize>,
    pub dual_dim: usize,
    /// Per-factor support indices of the dual summands (intersections only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub decomposition: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transversal: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub schema: String,
    pub ambient_dim: usize,
    pub vertices: Vec<Vec<Q>>,
    pub lineality: Vec<Vec<i64>>,
    pub support: Vec<Vec<i64>>,
    pub cells: Vec<CellJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_empty: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_proper: Option<bool>,
}

impl ComplexJson {
    pub fn from_complex(c: &TropicalComplex) -> Self {
        ComplexJson {
            schema: schema(),
            ambient_dim: c.ambient_dim,
            vertices: c.vertices.iter().map(|v| q_point(v)).collect(),
            lineality: c.lineality.clone(),
            support: c.support.clone(),
            cells: c
                .cells
                .iter()
                .map(|cell| CellJson {
                    dim: cell.dim,
                    vertices: cell.vertices.clone(),
                    rays: cell.rays.clone(),
                    weight: cell.weight,
                    dual: cell.dual.clone(),
                    dual_dim: cell.dual_dim,
                    decomposition: Vec::new(),
                    transversal: None,
                })
                .collect(),
            is_empty: None,
            is_proper: None,
        }
    }

    pub fn from_report(r: &IntersectionReport) -> Self {
        let mut out = Self::from_complex(&r.complex);
        for (i, cell) in out.cells.iter_mut().enumerate() {
            cell.decomposition = r.decomposition[i].clone();
            cell.transversal = r.certificates.get(i).map(|c| c.transversal);
        }
        out.is_empty = Some(r.is_empty);
        out.is_proper = Some(r.is_proper);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SipPointJson {
    pub pt: Vec<Q>,
    pub faces: [usize; 2],
    pub kinds: [String; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceJson {
    pub id: usize,
    pub component: usize,
    pub face: usize,
    pub kind: String,
    pub start: Vec<Q>,
    pub dir: Vec<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<Vec<Q>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualCellJson {
    pub vertex: Vec<Q>,
    pub p: usize,
    pub cell: Vec<Vec<Q>>,
    pub plane_translation: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualSubdivisionJson {
    pub cells: Vec<DualCellJson>,
    pub shift: Vec<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matches_pushforward: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SipReportJson {
    pub schema: String,
    pub matrix: Vec<Vec<i64>>,
    pub count: usize,
    pub points: Vec<SipPointJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pieces: Vec<PieceJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_subdivision: Option<DualSubdivisionJson>,
}

impl SipReportJson {
    pub fn from_image(img: &PlaneCurveImage, with_pieces: bool) -> Self {
        let points = img
            .sips
            .iter()
            .map(|s| {
                let (a, b) = s.pairs[0];
                let (ka, kb) = (img.pieces[a].kind.name(), img.pieces[b].kind.name());
                SipPointJson { pt: q_point(&s.point), faces: [a, b], kinds: [ka.to_string(), kb.to_string()] }
            })
            .collect();
        let pieces = if with_pieces {
            img.pieces
                .iter()
                .map(|p| PieceJson {
                    id: p.id,
                    component: p.component,
                    face: p.face,
                    kind: p.kind.name().to_string(),
                    start: q_point(&p.start),
                    dir: q_point(&p.dir),
                    end: p.max_param().map(|t| q_point(&p.at(&t))),
                })
                .collect()
        } else {
            Vec::new()
        };
        let dual_subdivision = img.dual_subdivision.as_ref().map(|d| DualSubdivisionJson {
            cells: d
                .cells
                .iter()
                .map(|c| DualCellJson {
                    vertex: q_point(&d.vertices[c.vertex].point),
                    p: c.p,
                    cell: c.cell.vertices().iter().map(|v| q_point(v)).collect(),
                    plane_translation: q_point(&c.plane_translation),
                })
                .collect(),
            shift: q_point(&d.shift),
            matches_pushforward: None,
        });
        SipReportJson { schema: schema(), matrix: img.projection.matrix().to_vec(), count: img.sip_count(), points, pieces, dual_subdivision }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineJson {
    #[serde(default)]
    pub schema: Option<String>,
    pub n: usize,
    /// Parent of each node when rooted at leaf n+1; leaves come first.
    pub parent: Vec<Option<usize>>,
    /// Label of each leaf node (the first n+1 nodes).
    pub leaf_labels: Vec<usize>,
    /// Positions of the internal nodes, in node order.
    pub positions: Vec<Vec<Q>>,
}

impl LineJson {
    pub fn from_line(l: &TropicalLine) -> Self {
        let n = l.n();
        LineJson {
            schema: Some(schema()),
            n,
            parent: l.tree.parents(),
            leaf_labels: (1..=n + 1).collect(),
            positions: l.positions.iter().map(|p| q_point(p)).collect(),
        }
    }

    pub fn to_line(&self) -> Result<TropicalLine, IoError> {
        check_schema(&self.schema)?;
        if self.leaf_labels != (1..=self.n + 1).collect::<Vec<_>>() {
            return Err(LinesError::NotATree.into());
        }
        let tree = LineTree::from_parents(self.n, &self.parent)?;
        Ok(TropicalLine::new(tree, self.positions.iter().map(|p| from_q_point(p)).collect())?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorJson {
    pub schema: String,
    pub error: String,
    pub message: String,
}

impl ErrorJson {
    pub fn new(kind: &str, message: impl ToString) -> Self {
        ErrorJson { schema: schema(), error: kind.to_string(), message: message.to_string() }
    }
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("documents serialize")
}

pub fn from_json<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T, IoError> {
    Ok(serde_json::from_str(s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::{frac, hull_i64, int};
    use crate::lines::caterpillar;

    #[test]
    fn rationals_as_strings() {
        let s = serde_json::to_string(&vec![Q(frac(1, 2)), Q(int(-3))]).unwrap();
        assert_eq!(s, r#"["1/2","-3"]"#);
        let back: Vec<Q> = serde_json::from_str(r#"["1/2", 4]"#).unwrap();
        assert_eq!(back, vec![Q(frac(1, 2)), Q(int(4))]);
        assert!(serde_json::from_str::<Q>(r#""1/0""#).is_err());
    }

    #[test]
    fn polynomial_from_coefficients() {
        let doc = r#"{"n_vars":2,"prime":2,"terms":[{"exp":[1,0],"coeff":"12"},{"exp":[0,1],"coeff":"3/4"},{"exp":[0,0],"val":"5"}]}"#;
        let f = from_json::<PolynomialJson>(doc).unwrap().to_poly().unwrap();
        let vals: Vec<Rational> = f.terms().iter().map(|t| t.val.clone()).collect();
        assert_eq!(vals, vec![int(2), int(-2), int(5)]);
        let again = from_json::<PolynomialJson>(&to_json(&PolynomialJson::from_poly(&f))).unwrap().to_poly().unwrap();
        assert_eq!(again, f);
        let missing = r#"{"n_vars":1,"terms":[{"exp":[1]}]}"#;
        assert!(matches!(from_json::<PolynomialJson>(missing).unwrap().to_poly(), Err(IoError::MissingValuation(_))));
        let wrong = r#"{"schema":"other/2","n_vars":1,"terms":[{"exp":[1],"val":"0"}]}"#;
        assert!(matches!(from_json::<PolynomialJson>(wrong).unwrap().to_poly(), Err(IoError::Schema(_))));
    }

    #[test]
    fn polytope_and_line_round_trip() {
        let cube = hull_i64(&[vec![0, 0], vec![2, 0], vec![0, 1], vec![2, 1], vec![1, 0]]).unwrap();
        let j = to_json(&PolytopeJson::from_polytope(&cube));
        assert_eq!(from_json::<PolytopeJson>(&j).unwrap().to_polytope().unwrap(), cube);
        let line = caterpillar(5, None).unwrap().line;
        let j = to_json(&LineJson::from_line(&line));
        assert_eq!(from_json::<LineJson>(&j).unwrap().to_line().unwrap(), line);
    }
}
