//! SVG rendering of planar curve images and subdivisions. Coordinates are
//! converted to floating point only here, for drawing.

use std::fmt::Write;

use num::ToPrimitive;
use thiserror::Error;

use crate::exactgeom::{hull_2d_ccw, Point, Rational, RegularSubdivision};
use crate::project::{ImageDualSubdivision, PieceKind, PlaneCurveImage};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SvgError {
    #[error("payload is not planar (ambient dimension {0})")]
    NotPlanar(usize),
}

const SIZE: f64 = 600.0;
const MARGIN: f64 = 40.0;

pub enum SvgPayload<'a> {
    Image(&'a PlaneCurveImage),
    Subdivision(&'a RegularSubdivision),
    DualCells(&'a ImageDualSubdivision),
}

fn f(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(0.0)
}

struct Frame {
    min: (f64, f64),
    scale: f64,
}

impl Frame {
    fn fit(points: &[(f64, f64)]) -> Frame {
        if points.is_empty() {
            return Frame { min: (0.0, 0.0), scale: 1.0 };
        }
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for &(x, y) in points {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-9);
        Frame { min: (x0, y0), scale: (SIZE - 2.0 * MARGIN) / span }
    }

    // y grows upwards in the picture
    fn map(&self, p: (f64, f64)) -> (f64, f64) {
        (MARGIN + (p.0 - self.min.0) * self.scale, SIZE - MARGIN - (p.1 - self.min.1) * self.scale)
    }
}

fn header(out: &mut String) {
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

fn xy(p: &Point) -> (f64, f64) {
    (f(&p[0]), f(&p[1]))
}

fn image_svg(img: &PlaneCurveImage) -> String {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for p in &img.pieces {
        pts.push(xy(&p.start));
        if let Some(t) = p.max_param() {
            pts.push(xy(&p.at(&t)));
        }
    }
    pts.extend(img.sips.iter().map(|s| xy(&s.point)));
    // rays extend a fixed fraction of the picture beyond the bounded part
    let frame0 = Frame::fit(&pts);
    let reach = (SIZE / frame0.scale) * 0.25;
    let mut segs = Vec::new();
    for p in &img.pieces {
        let a = xy(&p.start);
        let b = match (p.kind, p.max_param()) {
            (PieceKind::Edge, Some(t)) => xy(&p.at(&t)),
            _ => {
                let d = xy(&p.dir);
                let len = (d.0 * d.0 + d.1 * d.1).sqrt().max(1e-12);
                (a.0 + d.0 / len * reach, a.1 + d.1 / len * reach)
            }
        };
        segs.push((a, b, p.kind));
    }
    let all: Vec<(f64, f64)> = segs.iter().flat_map(|s| [s.0, s.1]).chain(pts.iter().copied()).collect();
    let frame = Frame::fit(&all);
    let mut out = String::new();
    header(&mut out);
    for (a, b, kind) in segs {
        let (a, b) = (frame.map(a), frame.map(b));
        let dash = if kind == PieceKind::Ray { r#" stroke-dasharray="6 3""# } else { "" };
        let _ = writeln!(out, r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="black" stroke-width="2"{dash}/>"#, a.0, a.1, b.0, b.1);
    }
    for s in &img.sips {
        let c = frame.map(xy(&s.point));
        let _ = writeln!(out, r#"<circle class="sip" cx="{:.3}" cy="{:.3}" r="5" fill="red"/>"#, c.0, c.1);
    }
    out.push_str("</svg>\n");
    out
}

fn polygons_svg(polys: &[(Vec<(f64, f64)>, String)]) -> String {
    let all: Vec<(f64, f64)> = polys.iter().flat_map(|p| p.0.iter().copied()).collect();
    let frame = Frame::fit(&all);
    let mut out = String::new();
    header(&mut out);
    for (poly, label) in polys {
        let mapped: Vec<(f64, f64)> = poly.iter().map(|&p| frame.map(p)).collect();
        let path: Vec<String> = mapped.iter().map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
        let _ = writeln!(out, r#"<polygon class="cell" points="{}" fill="none" stroke="black" stroke-width="2"/>"#, path.join(" "));
        if !label.is_empty() && !mapped.is_empty() {
            let n = mapped.len() as f64;
            let c = mapped.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
            let _ = writeln!(out, r#"<text x="{:.3}" y="{:.3}" font-size="14" text-anchor="middle">{label}</text>"#, c.0, c.1);
        }
    }
    out.push_str("</svg>\n");
    out
}

fn ccw(points: &[Point]) -> Vec<(f64, f64)> {
    hull_2d_ccw(points).into_iter().map(|i| xy(&points[i])).collect()
}

pub fn render_svg(payload: SvgPayload) -> Result<String, SvgError> {
    match payload {
        SvgPayload::Image(img) => {
            let d = img.projection.target_dim();
            if d != 2 {
                return Err(SvgError::NotPlanar(d));
            }
            Ok(image_svg(img))
        }
        SvgPayload::Subdivision(sub) => {
            if sub.ambient_dim() != 2 {
                return Err(SvgError::NotPlanar(sub.ambient_dim()));
            }
            let polys = sub
                .cells
                .iter()
                .map(|c| {
                    let pts: Vec<Point> = c.vertices.iter().map(|&i| sub.point_q(i)).collect();
                    (ccw(&pts), String::new())
                })
                .collect::<Vec<_>>();
            Ok(polygons_svg(&polys))
        }
        SvgPayload::DualCells(d) => {
            if let Some(c) = d.cells.first() {
                if c.cell.ambient_dim() != 2 {
                    return Err(SvgError::NotPlanar(c.cell.ambient_dim()));
                }
            }
            let polys = d.cells.iter().map(|c| (ccw(c.cell.vertices()), format!("p={}", c.p))).collect::<Vec<_>>();
            Ok(polygons_svg(&polys))
        }
    }
}
