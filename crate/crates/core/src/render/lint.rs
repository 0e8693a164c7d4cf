//! The two render-lint metrics.
//!
//! * overlap ratio: `max(DT) / p99(DT)` over the strand mask, where `DT` is
//!   the Euclidean distance to the nearest background pixel and `p99` is the
//!   nearest-rank 99th percentile;
//! * parallel-close: the share of centreline samples (1 px apart) lying
//!   within 5 px of a different arc's centreline. Samples within 10 px of a
//!   crossing are skipped, since two strands necessarily meet there.

use serde::{Deserialize, Serialize};

use super::layout::Point;
use super::raster::{strand_mask, Placed};

pub const OVERLAP_MAX: f64 = 1.5;
pub const PARALLEL_MAX: f64 = 0.05;
const CLOSE_PX: f64 = 5.0;
const CROSSING_SKIP_PX: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LintReport {
    pub overlap_ratio: f64,
    pub parallel_close: f64,
    pub pass: bool,
}

/// Squared 1-D distance transform (Felzenszwalb–Huttenlocher).
fn edt_1d(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0f64; n + 1];
    let mut k = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let mut first = None;
    for q in 0..n {
        if f[q].is_finite() {
            first = Some(q);
            break;
        }
    }
    let Some(q0) = first else {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    };
    v[0] = q0;
    for q in q0 + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                k -= 1;
                continue;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        *o = (q as f64 - p as f64).powi(2) + f[p];
    }
}

/// Distance from every mask pixel to the nearest background pixel centre
/// (0 on background).
pub fn distance_transform(mask: &[bool], w: usize, h: usize) -> Vec<f64> {
    let mut g: Vec<f64> = mask.iter().map(|&m| if m { f64::INFINITY } else { 0.0 }).collect();
    let mut col = vec![0.0; h];
    let mut out = vec![0.0; h.max(w)];
    for x in 0..w {
        for y in 0..h {
            col[y] = g[y * w + x];
        }
        edt_1d(&col, &mut out[..h]);
        for y in 0..h {
            g[y * w + x] = out[y];
        }
    }
    let mut row = vec![0.0; w];
    for y in 0..h {
        row.copy_from_slice(&g[y * w..(y + 1) * w]);
        edt_1d(&row, &mut out[..w]);
        g[y * w..(y + 1) * w].copy_from_slice(&out[..w]);
    }
    g.into_iter().map(f64::sqrt).collect()
}

fn overlap_ratio(mask: &[bool], w: usize, h: usize) -> f64 {
    let dt = distance_transform(mask, w, h);
    let mut vals: Vec<f64> = dt.iter().zip(mask).filter(|(_, &m)| m).map(|(&d, _)| d).collect();
    if vals.is_empty() {
        return 0.0;
    }
    vals.sort_by(f64::total_cmp);
    let rank = ((0.99 * vals.len() as f64).ceil() as usize).clamp(1, vals.len());
    vals[vals.len() - 1] / vals[rank - 1]
}

fn seg_dist(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let l2 = dx * dx + dy * dy;
    let t = if l2 == 0.0 { 0.0 } else { (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / l2).clamp(0.0, 1.0) };
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

/// Parallel-close score of a placed drawing.
pub fn parallel_close(placed: &Placed) -> f64 {
    let near_crossing = |p: Point| placed.crossings.iter().any(|c| (c[0] - p[0]).hypot(c[1] - p[1]) < CROSSING_SKIP_PX);
    let (mut total, mut close) = (0usize, 0usize);
    for (i, a) in placed.arcs.iter().enumerate() {
        for w in a.centerline.windows(2) {
            let len = (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
            let steps = len.floor() as usize;
            for k in 0..steps.max(1) {
                let t = if steps == 0 { 0.0 } else { k as f64 / len };
                let p = [w[0][0] + t * (w[1][0] - w[0][0]), w[0][1] + t * (w[1][1] - w[0][1])];
                if near_crossing(p) {
                    continue;
                }
                total += 1;
                let hit = placed.arcs.iter().enumerate().any(|(j, b)| {
                    j != i && b.centerline.windows(2).any(|v| seg_dist(p, v[0], v[1]) <= CLOSE_PX)
                });
                close += hit as usize;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        close as f64 / total as f64
    }
}

/// Both metrics from a given mask and placed centrelines.
pub fn lint_parts(mask: &[bool], size: u32, placed: &Placed) -> LintReport {
    let overlap_ratio = overlap_ratio(mask, size as usize, size as usize);
    let parallel_close = parallel_close(placed);
    LintReport { overlap_ratio, parallel_close, pass: overlap_ratio <= OVERLAP_MAX && parallel_close <= PARALLEL_MAX }
}

pub fn lint(placed: &Placed) -> LintReport {
    lint_parts(&strand_mask(placed), placed.size, placed)
}

/// Synthetic drawings that must fail lint.
pub mod fixtures {
    use super::super::raster::{Placed, PlacedArc};
    use super::Point;

    fn arc(label: u32, pts: Vec<Point>) -> PlacedArc {
        PlacedArc { label, centerline: pts.clone(), drawn: pts }
    }

    /// Twelve strokes overdrawn through the canvas centre.
    pub fn blob(size: u32, stroke_width: f32) -> Placed {
        let c = size as f64 / 2.0;
        let r = size as f64 * 0.42;
        let arcs = (0..6)
            .map(|k| {
                let t = std::f64::consts::PI * k as f64 / 6.0;
                let (s, co) = t.sin_cos();
                arc(k + 1, vec![[c - r * co, c - r * s], [c, c], [c + r * co, c + r * s]])
            })
            .collect();
        Placed { size, crossings: Vec::new(), arcs, stroke_width }
    }

    /// Two strands running 3 px apart along about a fifth of their length.
    pub fn parallel(size: u32, stroke_width: f32) -> Placed {
        let s = size as f64 / 800.0;
        let p = |x: f64, y: f64| [x * s, y * s];
        let a = arc(1, vec![p(100.0, 400.0), p(620.0, 400.0)]);
        let b = arc(2, vec![p(100.0, 560.0), p(300.0, 403.0), p(420.0, 403.0), p(620.0, 560.0)]);
        Placed { size, crossings: Vec::new(), arcs: vec![a, b], stroke_width }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_dt(mask: &[bool], w: usize, h: usize) -> Vec<f64> {
        let bg: Vec<(usize, usize)> = (0..w * h).filter(|&i| !mask[i]).map(|i| (i % w, i / w)).collect();
        (0..w * h)
            .map(|i| {
                if !mask[i] {
                    return 0.0;
                }
                let (x, y) = (i % w, i / w);
                bg.iter().map(|&(a, b)| ((a as f64 - x as f64).powi(2) + (b as f64 - y as f64).powi(2)).sqrt()).fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn dt_matches_brute_force() {
        let (w, h) = (13, 9);
        let mask: Vec<bool> = (0..w * h).map(|i| (i * 7919 % 11) < 8 && i % w != 0).collect();
        let a = distance_transform(&mask, w, h);
        let b = brute_dt(&mask, w, h);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn p99_nearest_rank() {
        // 100 pixels of a 1-wide line have DT 1; a 5x5 block adds larger values
        let w = 200;
        let mut mask = vec![false; w * 20];
        for x in 10..190 {
            mask[10 * w + x] = true;
        }
        assert!((overlap_ratio(&mask, w, 20) - 1.0).abs() < 1e-12);
    }
}
