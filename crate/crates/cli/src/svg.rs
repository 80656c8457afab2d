//! Byte-deterministic SVG figures.  All coordinates are integers and every
//! marker carries `data-set`, `data-x`, `data-y` so figures can be read back.

use std::collections::BTreeSet;
use std::fmt::Write;

use clap::ValueEnum;
use tpoly_core::beta::BetaAssembly;
use tpoly_core::lattice::iso::{mirror, RegionSpec, SplitT1};
use tpoly_core::lattice::{Point, Triangle};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Crosses at `T_{1,1}`, bullets at `T_{1,2}`.
    Split,
    /// Bullets at `Y_0`, circles at `m(Y_0)`, crosses at the images of `T_{1,1}`.
    Mirror,
    /// Shaded `K_1`, `K_2`, `m(K_1)` with `Y_0` and `m(Y_0)` on top.
    Regions,
}

const CELL: i64 = 28;
const MARGIN: i64 = 40;

const STYLE: &str = ".grid{stroke:#e0e0e0;stroke-width:1}\
.edge{stroke:#000;stroke-width:1.5;fill:none}\
.frame{stroke:#888;stroke-width:1;fill:none;stroke-dasharray:4 3}\
.cross{stroke:#b22222;stroke-width:2}\
.bullet{fill:#111}\
.circle{fill:none;stroke:#1f5fbf;stroke-width:2}\
.k1{fill:#e6a817;fill-opacity:0.35}\
.k2{fill:#2a9d8f;fill-opacity:0.35}\
.mk1{fill:#9b5de5;fill-opacity:0.35}\
.s1{stroke:#e76f51;stroke-width:1.5}\
.s2{stroke:#2a9d8f;stroke-width:1.5}\
.s3{stroke:#264653;stroke-width:1.5}\
text{font-family:monospace;font-size:12px}";

struct Canvas {
    d: i64,
    body: String,
}

impl Canvas {
    fn new(d: i64, title: &str) -> Self {
        let mut c = Canvas { d, body: String::new() };
        let _ = writeln!(c.body, "<title>{}</title>", escape(title));
        let _ = writeln!(c.body, "<text x=\"{MARGIN}\" y=\"{}\">{}</text>", MARGIN / 2, escape(title));
        c
    }

    fn px(&self, x: i64) -> i64 {
        MARGIN + x * CELL
    }

    fn py(&self, y: i64) -> i64 {
        MARGIN + (self.d - y) * CELL
    }

    fn grid(&mut self) {
        let d = self.d;
        for i in 0..=d {
            let (a, b0, b1) = (self.px(i), self.py(0), self.py(d));
            let _ = writeln!(self.body, "<line class=\"grid\" x1=\"{a}\" y1=\"{b0}\" x2=\"{a}\" y2=\"{b1}\"/>");
            let (a, b0, b1) = (self.py(i), self.px(0), self.px(d));
            let _ = writeln!(self.body, "<line class=\"grid\" x1=\"{b0}\" y1=\"{a}\" x2=\"{b1}\" y2=\"{a}\"/>");
        }
        let (x0, y0, xd, yd) = (self.px(0), self.py(0), self.px(d), self.py(d));
        let _ = writeln!(self.body, "<rect class=\"frame\" x=\"{x0}\" y=\"{yd}\" width=\"{}\" height=\"{}\"/>", xd - x0, y0 - yd);
        let _ = writeln!(self.body, "<polygon class=\"edge\" points=\"{x0},{y0} {xd},{y0} {x0},{yd}\"/>");
    }

    fn attrs(set: &str, q: Point) -> String {
        format!("data-set=\"{set}\" data-x=\"{}\" data-y=\"{}\"", q.x, q.y)
    }

    fn cross(&mut self, set: &str, q: Point) {
        let (x, y, r) = (self.px(q.x), self.py(q.y), 5);
        let _ = writeln!(
            self.body,
            "<path class=\"cross\" {} d=\"M{} {}L{} {}M{} {}L{} {}\"/>",
            Self::attrs(set, q),
            x - r,
            y - r,
            x + r,
            y + r,
            x - r,
            y + r,
            x + r,
            y - r
        );
    }

    fn bullet(&mut self, set: &str, q: Point) {
        let (x, y) = (self.px(q.x), self.py(q.y));
        let _ = writeln!(self.body, "<circle class=\"bullet\" {} cx=\"{x}\" cy=\"{y}\" r=\"4\"/>", Self::attrs(set, q));
    }

    fn circle(&mut self, set: &str, q: Point) {
        let (x, y) = (self.px(q.x), self.py(q.y));
        let _ = writeln!(self.body, "<circle class=\"circle\" {} cx=\"{x}\" cy=\"{y}\" r=\"8\"/>", Self::attrs(set, q));
    }

    fn shade(&mut self, class: &str, q: Point) {
        let (x, y, h) = (self.px(q.x), self.py(q.y), CELL / 2);
        let _ = writeln!(
            self.body,
            "<rect class=\"{class}\" {} x=\"{}\" y=\"{}\" width=\"{CELL}\" height=\"{CELL}\"/>",
            Self::attrs(class, q),
            x - h,
            y - h
        );
    }

    fn arrow(&mut self, class: &str, a: Point, b: Point) {
        let _ = writeln!(
            self.body,
            "<line class=\"{class}\" data-from=\"{},{}\" data-to=\"{},{}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" marker-end=\"url(#head)\"/>",
            a.x,
            a.y,
            b.x,
            b.y,
            self.px(a.x),
            self.py(a.y),
            self.px(b.x),
            self.py(b.y)
        );
    }

    fn legend(&mut self, lines: &[&str]) {
        let y0 = self.py(0) + 24;
        for (i, l) in lines.iter().enumerate() {
            let _ = writeln!(self.body, "<text x=\"{MARGIN}\" y=\"{}\">{}</text>", y0 + 16 * i as i64, escape(l));
        }
    }

    fn finish(self, legend_lines: usize) -> String {
        let w = 2 * MARGIN + self.d * CELL;
        let h = 2 * MARGIN + self.d * CELL + 16 * legend_lines as i64;
        let mut s = String::new();
        let _ = writeln!(s, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
        let _ = writeln!(s, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">");
        let _ = writeln!(s, "<style>{STYLE}</style>");
        let _ = writeln!(
            s,
            "<defs><marker id=\"head\" markerWidth=\"8\" markerHeight=\"8\" refX=\"7\" refY=\"4\" orient=\"auto\"><path d=\"M0 0L8 4L0 8z\" fill=\"#444\"/></marker></defs>"
        );
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(which: Figure, d: i64, p: i64) -> Result<String, CliError> {
    let tri = Triangle::isosceles(d)?;
    let split = SplitT1::new(&tri, p)?;
    Ok(match which {
        Figure::Split => {
            let mut c = Canvas::new(d, &format!("T_(1,1) and T_(1,2) at d={d}, p={p}"));
            c.grid();
            for &q in &split.t11 {
                c.cross("t11", q);
            }
            for &q in &split.t12 {
                c.bullet("t12", q);
            }
            let legend = ["cross: T_(1,1), (pP)% stays in T_1", "bullet: T_(1,2)"];
            c.legend(&legend);
            c.finish(legend.len())
        }
        Figure::Mirror => {
            let mut c = Canvas::new(d, &format!("Y_0 and m(Y_0) at d={d}, p={p}"));
            c.grid();
            for q in split.t11_images(&tri) {
                c.cross("t11-image", q);
            }
            for &q in &split.y0 {
                c.bullet("y0", q);
            }
            for &q in &split.my0 {
                c.circle("my0", q);
            }
            let legend = ["cross: (pP)% for P in T_(1,1)", "bullet: Y_0", "circle: m(Y_0)"];
            c.legend(&legend);
            c.finish(legend.len())
        }
        Figure::Regions => {
            let regions = RegionSpec::new(d, p);
            let mut c = Canvas::new(d, &format!("K_1, K_2 and m(K_1) at d={d}, p={p}"));
            let mut k1 = Vec::new();
            let mut k2 = Vec::new();
            for x in 0..=d {
                for y in 0..=d {
                    let q = Point::new(x, y);
                    if regions.in_k1(q) {
                        k1.push(q);
                    }
                    if regions.in_k2(q) {
                        k2.push(q);
                    }
                }
            }
            let mut mk1: Vec<Point> = k1.iter().map(|&q| mirror(d, q)).collect();
            mk1.sort();
            for &q in &k1 {
                c.shade("k1", q);
            }
            for &q in &k2 {
                c.shade("k2", q);
            }
            for &q in &mk1 {
                c.shade("mk1", q);
            }
            c.grid();
            for &q in &split.y0 {
                c.bullet("y0", q);
            }
            for &q in &split.my0 {
                c.circle("my0", q);
            }
            let legend = [
                "amber: K_1 = W[2d-3p0, 2d] ∩ D[-p0, p0) ∩ Y",
                "teal: K_2 = W[d-3p0, d-1] ∩ D[c, c+2p0), D_k: y = x + k",
                "violet: m(K_1)",
                "bullet: Y_0, circle: m(Y_0)",
            ];
            c.legend(&legend);
            c.finish(legend.len())
        }
    })
}

/// The pairs of `β̃` as arrows, coloured by stage.
pub fn render_beta(asm: &BetaAssembly) -> String {
    let d = asm.d;
    let mut c = Canvas::new(d, &format!("β̃ at d={d}, p={}: {} pairs", asm.p, asm.beta.len()));
    c.grid();
    let y0: BTreeSet<Point> = asm.beta.iter().map(|&(a, _)| a).collect();
    let my0: BTreeSet<Point> = asm.beta.iter().map(|&(_, b)| b).collect();
    for &q in &y0 {
        c.bullet("y0", q);
    }
    for &q in &my0 {
        c.circle("my0", q);
    }
    for (class, pairs) in [("s1", &asm.beta1.pairs), ("s2", &asm.sbeta2), ("s3", &asm.beta3)] {
        for &(a, b) in pairs.iter() {
            c.arrow(class, a, b);
        }
    }
    let legend = ["orange: β̃_1 on L_1", "teal: s(β̃_2)", "dark: β̃_3 on the remainder"];
    c.legend(&legend);
    c.finish(legend.len())
}

/// Points of the markers with `data-set="set"`.
pub fn markers(svg: &str, set: &str) -> BTreeSet<Point> {
    let key = format!("data-set=\"{set}\" data-x=\"");
    let mut out = BTreeSet::new();
    let mut rest = svg;
    while let Some(i) = rest.find(&key) {
        rest = &rest[i + key.len()..];
        let coord = |s: &str| -> Option<(i64, usize)> {
            let end = s.find('"')?;
            Some((s[..end].parse().ok()?, end))
        };
        if let Some((x, e)) = coord(rest) {
            let tail = &rest[e..];
            if let Some(j) = tail.find("data-y=\"") {
                if let Some((y, _)) = coord(&tail[j + 8..]) {
                    out.insert(Point::new(x, y));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figures_are_deterministic_and_readable() {
        for which in [Figure::Split, Figure::Mirror, Figure::Regions] {
            assert_eq!(render(which, 7, 17).unwrap(), render(which, 7, 17).unwrap());
        }
        let s = render(Figure::Split, 7, 17).unwrap();
        let tri = Triangle::isosceles(7).unwrap();
        let split = SplitT1::new(&tri, 17).unwrap();
        assert_eq!(markers(&s, "t12"), split.t12.iter().copied().collect());
        assert_eq!(markers(&s, "t11").len() + markers(&s, "t12").len(), 28);
    }

    #[test]
    fn regions_at_16_19() {
        let s = render(Figure::Regions, 16, 19).unwrap();
        let k1 = markers(&s, "k1");
        let mk1 = markers(&s, "mk1");
        assert!(!k1.is_empty() && !markers(&s, "k2").is_empty());
        assert_eq!(mk1, k1.iter().map(|&q| mirror(16, q)).collect());
        assert!(k1.iter().all(|q| q.x + q.y >= 17));
    }
}
