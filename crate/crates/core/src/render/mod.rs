//! Layout, rasterisation, SVG export and visual lint.

mod layout;
mod lint;
mod pack;
mod raster;
mod svg;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use layout::{intersection_points, layout, verify, ArcPath, Infidelity, Layout, LayoutError, Point};
pub use lint::{distance_transform, lint, lint_parts, parallel_close, fixtures as lint_fixtures, LintReport, OVERLAP_MAX, PARALLEL_MAX};
pub use raster::{place, rasterize, strand_mask, Placed, Raster, CANVAS};
pub use svg::to_svg;

/// Seven stroke colours (RGB) on a white background.
pub const PALETTE: [[u8; 3]; 7] = [
    [0x1f, 0x3a, 0x93],
    [0xb2, 0x22, 0x22],
    [0x2e, 0x7d, 0x32],
    [0x6a, 0x1b, 0x9a],
    [0xef, 0x6c, 0x00],
    [0x00, 0x83, 0x8f],
    [0x21, 0x21, 0x21],
];

pub const ROTATION_BINS: u8 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Texture {
    Solid,
    /// A base stroke with a lighter dashed stroke down its middle.
    RopeTwist,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderStyle {
    pub palette: u8,
    /// Rotation by `bin × 30°`.
    pub rotation_bin: u8,
    pub texture: Texture,
    pub stroke_width: f32,
    pub under_gap: f32,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle { palette: 0, rotation_bin: 0, texture: Texture::Solid, stroke_width: 3.0, under_gap: 8.0 }
    }
}

/// Sampling intervals for the continuous style parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StyleRanges {
    pub stroke_width: (f32, f32),
    pub under_gap: (f32, f32),
}

impl Default for StyleRanges {
    fn default() -> Self {
        StyleRanges { stroke_width: (2.5, 4.0), under_gap: (6.0, 10.0) }
    }
}

impl RenderStyle {
    /// Uniform palette and rotation; the texture is passed in because the
    /// corpus balances it exactly rather than sampling it.
    pub fn sample(rng: &mut impl Rng, texture: Texture, ranges: &StyleRanges) -> Self {
        RenderStyle {
            palette: rng.gen_range(0..PALETTE.len() as u8),
            rotation_bin: rng.gen_range(0..ROTATION_BINS),
            texture,
            stroke_width: rng.gen_range(ranges.stroke_width.0..=ranges.stroke_width.1),
            under_gap: rng.gen_range(ranges.under_gap.0..=ranges.under_gap.1),
        }
    }

    pub fn rotation_degrees(&self) -> f64 {
        30.0 * self.rotation_bin as f64
    }

    pub fn color(&self) -> [u8; 3] {
        PALETTE[self.palette as usize % PALETTE.len()]
    }
}
