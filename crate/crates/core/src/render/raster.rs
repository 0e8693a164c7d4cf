use tiny_skia::{Color, LineCap, LineJoin, Paint, PathBuilder, Pixmap, Stroke, StrokeDash, Transform};

use super::layout::{Layout, Point};
use super::{RenderStyle, Texture};

pub const CANVAS: u32 = 800;
const MARGIN: f64 = 48.0;

/// One arc in pixel coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PlacedArc {
    pub label: u32,
    /// Full centreline, crossing to crossing.
    pub centerline: Vec<Point>,
    /// What gets stroked: the centreline with under-ends cut back.
    pub drawn: Vec<Point>,
}

/// A layout rotated, scaled and centred on the canvas (y grows downwards).
#[derive(Clone, Debug, PartialEq)]
pub struct Placed {
    pub size: u32,
    pub crossings: Vec<Point>,
    pub arcs: Vec<PlacedArc>,
    pub stroke_width: f32,
}

fn polyline_len(p: &[Point]) -> f64 {
    p.windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])).sum()
}

/// Removes length `cut` from the start of a polyline.
fn cut_front(p: &[Point], mut cut: f64) -> Vec<Point> {
    for i in 0..p.len() - 1 {
        let (a, b) = (p[i], p[i + 1]);
        let l = (b[0] - a[0]).hypot(b[1] - a[1]);
        if l > cut {
            let t = cut / l;
            let mut out = vec![[a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]];
            out.extend_from_slice(&p[i + 1..]);
            return out;
        }
        cut -= l;
    }
    vec![p[p.len() - 1]]
}

fn trim(p: &[Point], front: f64, back: f64) -> Vec<Point> {
    let total = polyline_len(p);
    if front + back >= total {
        // too short to break cleanly; keep a dot in the middle
        let mid = cut_front(p, total / 2.0)[0];
        return vec![mid, mid];
    }
    let a = cut_front(p, front);
    let mut r: Vec<Point> = a.into_iter().rev().collect();
    r = cut_front(&r, back);
    r.reverse();
    r
}

/// Rotates by the style's bin, fits into the canvas and breaks under-strands.
pub fn place(lay: &Layout, style: &RenderStyle, size: u32) -> Placed {
    let th = style.rotation_degrees().to_radians();
    let (s, c) = th.sin_cos();
    let rot = |p: Point| [c * p[0] - s * p[1], s * p[0] + c * p[1]];
    let all: Vec<Point> = lay.arcs.iter().flat_map(|a| a.points.iter().map(|&p| rot(p))).collect();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &all {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    let scale = (size as f64 - 2.0 * MARGIN) / span;
    let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    let half = size as f64 / 2.0;
    let to_px = |p: Point| {
        let q = rot(p);
        [half + (q[0] - mid[0]) * scale, half - (q[1] - mid[1]) * scale]
    };
    let cut = style.under_gap as f64 / 2.0 + style.stroke_width as f64 / 2.0;
    let arcs = lay
        .arcs
        .iter()
        .map(|a| {
            let centerline: Vec<Point> = a.points.iter().map(|&p| to_px(p)).collect();
            let drawn = trim(
                &centerline,
                if a.under_at_tail { cut } else { 0.0 },
                if a.under_at_head { cut } else { 0.0 },
            );
            PlacedArc { label: a.label, centerline, drawn }
        })
        .collect();
    Placed { size, crossings: lay.crossings.iter().map(|&p| to_px(p)).collect(), arcs, stroke_width: style.stroke_width }
}

pub struct Raster {
    pub pixmap: Pixmap,
}

impl Raster {
    pub fn width(&self) -> u32 {
        self.pixmap.width()
    }

    pub fn height(&self) -> u32 {
        self.pixmap.height()
    }

    pub fn rgb(&self, x: u32, y: u32) -> [u8; 3] {
        let p = self.pixmap.pixel(x, y).expect("pixel in range").demultiply();
        [p.red(), p.green(), p.blue()]
    }

    pub fn to_png(&self) -> Vec<u8> {
        self.pixmap.encode_png().expect("PNG encoding of an in-memory pixmap")
    }
}

fn path_of(points: &[Point]) -> Option<tiny_skia::Path> {
    let mut pb = PathBuilder::new();
    pb.move_to(points[0][0] as f32, points[0][1] as f32);
    for p in &points[1..] {
        pb.line_to(p[0] as f32, p[1] as f32);
    }
    pb.finish()
}

fn base_stroke(width: f32) -> Stroke {
    Stroke { width, line_cap: LineCap::Round, line_join: LineJoin::Round, ..Stroke::default() }
}

pub fn rasterize(placed: &Placed, style: &RenderStyle) -> Raster {
    let mut pm = Pixmap::new(placed.size, placed.size).expect("non-zero canvas");
    pm.fill(Color::WHITE);
    let [r, g, b] = style.color();
    let mut paint = Paint::default();
    paint.anti_alias = true;
    paint.set_color_rgba8(r, g, b, 255);
    let stroke = base_stroke(style.stroke_width);
    let light = |c: u8| (c as u16 + (255 - c as u16) * 11 / 20) as u8;
    let mut light_paint = Paint::default();
    light_paint.anti_alias = true;
    light_paint.set_color_rgba8(light(r), light(g), light(b), 255);
    let w = style.stroke_width;
    let mut twist = Stroke { width: w * 0.45, line_cap: LineCap::Butt, ..base_stroke(w) };
    twist.dash = StrokeDash::new(vec![w * 1.2, w * 1.2], 0.0);
    for a in &placed.arcs {
        let Some(path) = path_of(&a.drawn) else { continue };
        pm.stroke_path(&path, &paint, &stroke, Transform::identity(), None);
        if style.texture == Texture::RopeTwist {
            pm.stroke_path(&path, &light_paint, &twist, Transform::identity(), None);
        }
    }
    Raster { pixmap: pm }
}

/// Strand pixels: the drawn geometry stroked solid, coverage at least one half.
pub fn strand_mask(placed: &Placed) -> Vec<bool> {
    let mut pm = Pixmap::new(placed.size, placed.size).expect("non-zero canvas");
    let mut paint = Paint::default();
    paint.anti_alias = true;
    paint.set_color_rgba8(0, 0, 0, 255);
    let stroke = base_stroke(placed.stroke_width);
    for a in &placed.arcs {
        if let Some(path) = path_of(&a.drawn) {
            pm.stroke_path(&path, &paint, &stroke, Transform::identity(), None);
        }
    }
    pm.pixels().iter().map(|p| p.alpha() >= 128).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trimming() {
        let p = vec![[0.0, 0.0], [10.0, 0.0], [10.0, 10.0]];
        let t = trim(&p, 2.0, 3.0);
        assert_eq!(t, vec![[2.0, 0.0], [10.0, 0.0], [10.0, 7.0]]);
        assert_eq!(trim(&p, 15.0, 10.0).len(), 2);
    }
}
