use std::fmt::Write;

use super::raster::Placed;
use super::{RenderStyle, Texture};

fn hex([r, g, b]: [u8; 3]) -> String {
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// SVG with one `<path>` per arc (under-ends already cut back).
pub fn to_svg(placed: &Placed, style: &RenderStyle) -> String {
    let s = placed.size;
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#);
    let _ = writeln!(out, r##"<rect width="{s}" height="{s}" fill="#ffffff"/>"##);
    let color = hex(style.color());
    let w = style.stroke_width;
    for a in &placed.arcs {
        let mut d = String::new();
        for (i, p) in a.drawn.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, p[0], p[1]);
        }
        let d = d.trim_end();
        let _ = writeln!(
            out,
            r#"<path data-arc="{}" d="{d}" fill="none" stroke="{color}" stroke-width="{w:.2}" stroke-linecap="round" stroke-linejoin="round"/>"#,
            a.label
        );
        if style.texture == Texture::RopeTwist {
            let _ = writeln!(
                out,
                r##"<path d="{d}" fill="none" stroke="#ffffff" stroke-opacity="0.55" stroke-width="{:.2}" stroke-dasharray="{:.2} {:.2}"/>"##,
                w * 0.45,
                w * 1.2,
                w * 1.2
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
