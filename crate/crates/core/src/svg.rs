//! SVG 1.1 figures of moment polygons.
//!
//! Exact coordinates are scaled by one factor so the longer side of the
//! bounding box spans the drawing width minus margins; the factor is printed
//! in the figure. The `y` axis points up.

use std::fmt::Write;

use crate::lattice::Rational;
use crate::rational::{format_rational, to_f64};
use crate::toric::{Point, Polytope};

pub const WIDTH: f64 = 640.0;
const MARGIN: f64 = 40.0;

#[derive(Clone, Debug)]
pub struct Region {
    pub polygon: Polytope,
    pub fill: String,
    pub label: String,
}

#[derive(Clone, Debug)]
pub struct Segment {
    pub from: Point,
    pub to: Point,
    pub label: String,
}

#[derive(Clone, Debug)]
pub struct Figure {
    pub title: String,
    pub outline: Polytope,
    pub regions: Vec<Region>,
    pub segments: Vec<Segment>,
}

impl Figure {
    pub fn new(title: impl Into<String>, outline: Polytope) -> Self {
        Self { title: title.into(), outline, regions: Vec::new(), segments: Vec::new() }
    }

    pub fn shade(mut self, polygon: Polytope, fill: &str, label: &str) -> Self {
        self.regions.push(Region { polygon, fill: fill.into(), label: label.into() });
        self
    }

    pub fn line(mut self, from: Point, to: Point, label: &str) -> Self {
        self.segments.push(Segment { from, to, label: label.into() });
        self
    }

    /// Pixels per unit of moment coordinate.
    pub fn scale(&self) -> f64 {
        let (x0, y0, x1, y1) = self.outline.bounds();
        let span = to_f64(&(x1 - x0)).max(to_f64(&(y1 - y0)));
        if span > 0.0 {
            (WIDTH - 2.0 * MARGIN) / span
        } else {
            1.0
        }
    }

    pub fn height(&self) -> f64 {
        let (_, y0, _, y1) = self.outline.bounds();
        (to_f64(&(y1 - y0)) * self.scale() + 2.0 * MARGIN + 30.0).ceil()
    }

    pub fn to_svg(&self) -> String {
        let scale = self.scale();
        let height = self.height();
        let (x0, y0, _, _) = self.outline.bounds();
        let (x0, y0) = (to_f64(&x0), to_f64(&y0));
        let map = |p: &Point| {
            let x = MARGIN + (to_f64(&p.x) - x0) * scale;
            let y = height - MARGIN - (to_f64(&p.y) - y0) * scale;
            (x, y)
        };
        let points = |poly: &Polytope| {
            poly.vertices()
                .iter()
                .map(|v| {
                    let (x, y) = map(v);
                    format!("{x:.3},{y:.3}")
                })
                .collect::<Vec<_>>()
                .join(" ")
        };

        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
        );
        let _ = writeln!(out, "  <title>{}</title>", escape(&self.title));
        let _ = writeln!(out, "  <desc>scale: 1 unit = {scale:.6} px</desc>");
        for r in &self.regions {
            let _ = writeln!(
                out,
                r#"  <polygon points="{}" fill="{}" fill-opacity="0.45" stroke="none"><title>{}</title></polygon>"#,
                points(&r.polygon),
                escape(&r.fill),
                escape(&r.label)
            );
        }
        let _ = writeln!(
            out,
            r#"  <polygon points="{}" fill="none" stroke="black" stroke-width="2"/>"#,
            points(&self.outline)
        );
        for s in &self.segments {
            let (ax, ay) = map(&s.from);
            let (bx, by) = map(&s.to);
            let _ = writeln!(
                out,
                r#"  <line x1="{ax:.3}" y1="{ay:.3}" x2="{bx:.3}" y2="{by:.3}" stroke="crimson" stroke-width="1.5" stroke-dasharray="6,4"><title>{}</title></line>"#,
                escape(&s.label)
            );
        }
        for v in self.outline.vertices() {
            let (x, y) = map(v);
            let _ = writeln!(
                out,
                r#"  <text x="{:.3}" y="{:.3}" font-family="monospace" font-size="11">({}, {})</text>"#,
                x + 4.0,
                y - 4.0,
                format_rational(&v.x),
                format_rational(&v.y)
            );
        }
        let _ = writeln!(
            out,
            r#"  <text x="{MARGIN}" y="{:.3}" font-family="monospace" font-size="12">scale 1 = {scale:.3}px</text>"#,
            height - 10.0
        );
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Area label helper for region titles.
pub fn area_label(name: &str, area: &Rational) -> String {
    format!("{name}: area {}", format_rational(area))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ratio;
    use crate::toric::{unit_triangle, ToricField};

    #[test]
    fn product_figure() {
        let f = ToricField::product(ratio(7, 10)).unwrap();
        let (lo, hi) = f.basin_polygons();
        let svg = Figure::new("product", f.rectangle())
            .shade(lo, "steelblue", "sigma_1")
            .shade(hi, "orange", "sigma_2")
            .line(f.rectangle().vertices()[0].clone(), f.rectangle().vertices()[2].clone(), "separatrix")
            .to_svg();
        assert!(svg.contains(r#"version="1.1""#));
        assert!(svg.contains(r#"width="640""#));
        assert!(svg.contains("scale: 1 unit = 560.000000 px"));
        assert_eq!(svg.matches("<polygon").count(), 3);
        assert!(svg.contains("<line"));
        assert!(svg.contains("(1, 7/10)"));
    }

    #[test]
    fn deterministic_output() {
        let a = Figure::new("t", unit_triangle()).to_svg();
        let b = Figure::new("t", unit_triangle()).to_svg();
        assert_eq!(a, b);
        assert!(Figure::new("a<b", unit_triangle()).to_svg().contains("a&lt;b"));
    }
}
