//! Circle-packing layout.
//!
//! The diagram is refined into a triangulation of the sphere with one vertex
//! per crossing, per crossing corner, two per arc and one per face. Corners
//! sit between a crossing and its faces, so the triangulation has no
//! multiple edges even when a face meets a crossing twice (kinks). The
//! largest face is removed, its neighbours get unit radii, and the rest is
//! packed by the Collins–Stephenson iteration. Strands are drawn through
//! circle centres and tangency points, so every segment lies inside one
//! circle and the drawing is planar by construction.

use std::collections::HashMap;
use std::f64::consts::TAU;

use crate::pd::{Diagram, Slot};

use super::layout::{ArcPath, Layout, Point};

const TOLERANCE: f64 = 1e-10;
const MAX_SWEEPS: usize = 100_000;

struct Complex {
    n: usize,
    /// Counter-clockwise triangles.
    triangles: Vec<[usize; 3]>,
    /// Vertex of the removed outer face.
    outer: usize,
    nv: usize,
}

fn corner(n: usize, c: usize, p: usize) -> usize {
    n + 4 * c + p
}

fn arc_point(n: usize, label: u32, k: usize) -> usize {
    5 * n + 2 * (label as usize - 1) + k
}

/// The arc point next to crossing slot `s`.
fn arc_end(d: &Diagram, tails: &[Slot], s: Slot) -> usize {
    let l = d.label(s);
    arc_point(d.len(), l, if tails[l as usize - 1] == s { 0 } else { 1 })
}

fn complex(d: &Diagram) -> Complex {
    let n = d.len();
    let inc = d.incidence();
    let fs = d.faces();
    let mut triangles = Vec::new();
    for c in 0..n {
        for p in 0..4 {
            let e = arc_end(d, &inc.tail, Slot::new(c, p));
            let e_next = arc_end(d, &inc.tail, Slot::new(c, (p + 1) % 4));
            triangles.push([c, e, corner(n, c, p)]);
            triangles.push([c, corner(n, c, p), e_next]);
        }
    }
    let base = 9 * n;
    let mut outer = (0, 0);
    for (fi, f) in fs.faces.iter().enumerate() {
        let mut cyc = Vec::new();
        for i in 0..f.len() {
            let s = f.corners[i];
            cyc.push(corner(n, s.c(), s.p()));
            let ks = if f.forward[i] { [0, 1] } else { [1, 0] };
            cyc.extend(ks.map(|k| arc_point(n, f.arcs[i], k)));
        }
        // the face is on the right of its walk, so the walk runs clockwise
        for i in 0..cyc.len() {
            triangles.push([base + fi, cyc[(i + 1) % cyc.len()], cyc[i]]);
        }
        if cyc.len() > outer.1 {
            outer = (base + fi, cyc.len());
        }
    }
    Complex { n, triangles, outer: outer.0, nv: base + fs.len() }
}

fn angle(x: f64, y: f64, z: f64) -> f64 {
    // angle at the centre of circle x in the triangle of mutually tangent x, y, z
    (1.0 - 2.0 * y * z / ((x + y) * (x + z))).clamp(-1.0, 1.0).acos()
}

fn radii(cx: &Complex) -> Option<Vec<f64>> {
    let mut flowers: Vec<Vec<(usize, usize)>> = vec![Vec::new(); cx.nv];
    let mut boundary = vec![false; cx.nv];
    for t in &cx.triangles {
        if t.contains(&cx.outer) {
            for &v in t {
                boundary[v] = true;
            }
            continue;
        }
        for i in 0..3 {
            flowers[t[i]].push((t[(i + 1) % 3], t[(i + 2) % 3]));
        }
    }
    let interior: Vec<usize> = (0..cx.nv).filter(|&v| v != cx.outer && !boundary[v]).collect();
    let mut r = vec![1.0; cx.nv];
    for _ in 0..MAX_SWEEPS {
        let mut worst: f64 = 0.0;
        for &v in &interior {
            let k = flowers[v].len() as f64;
            let theta: f64 = flowers[v].iter().map(|&(a, b)| angle(r[v], r[a], r[b])).sum();
            worst = worst.max((theta - TAU).abs());
            // uniform-neighbour model: the radius whose k equal petals would close up
            let beta = (theta / (2.0 * k)).sin();
            let delta = (TAU / (2.0 * k)).sin();
            let hat = r[v] * beta / (1.0 - beta);
            r[v] = hat * (1.0 - delta) / delta;
        }
        if worst < TOLERANCE {
            return Some(r);
        }
    }
    None
}

fn centres(cx: &Complex, r: &[f64]) -> Vec<Option<Point>> {
    let mut pos: Vec<Option<Point>> = vec![None; cx.nv];
    let live: Vec<[usize; 3]> = cx.triangles.iter().copied().filter(|t| !t.contains(&cx.outer)).collect();
    let t0 = live[0];
    pos[t0[0]] = Some([0.0, 0.0]);
    pos[t0[1]] = Some([r[t0[0]] + r[t0[1]], 0.0]);
    let mut progress = true;
    while progress {
        progress = false;
        for t in &live {
            for i in 0..3 {
                let (a, b, c) = (t[i], t[(i + 1) % 3], t[(i + 2) % 3]);
                let (Some(pa), Some(pb), None) = (pos[a], pos[b], pos[c]) else { continue };
                let th = angle(r[a], r[b], r[c]);
                let ux = pb[0] - pa[0];
                let uy = pb[1] - pa[1];
                let l = ux.hypot(uy);
                let (s, co) = th.sin_cos();
                let d = r[a] + r[c];
                pos[c] = Some([pa[0] + d * (co * ux - s * uy) / l, pa[1] + d * (s * ux + co * uy) / l]);
                progress = true;
            }
        }
    }
    pos
}

/// Circle-packing layout, or `None` if the packing did not converge.
pub(super) fn pack(d: &Diagram) -> Option<Layout> {
    let cx = complex(d);
    let r = radii(&cx)?;
    let pos = centres(&cx, &r);
    let n = cx.n;
    let at = |v: usize| pos[v];
    let mut tangency = HashMap::new();
    let mut touch = |a: usize, b: usize| -> Option<Point> {
        let (pa, pb) = (at(a)?, at(b)?);
        let key = (a.min(b), a.max(b));
        Some(*tangency.entry(key).or_insert_with(|| {
            // computed once per pair so both neighbours share the exact point
            let (lo, hi) = (at(key.0).unwrap(), at(key.1).unwrap());
            let l = (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
            let t = r[key.0] / l;
            [lo[0] + t * (hi[0] - lo[0]), lo[1] + t * (hi[1] - lo[1])]
        }))
        .filter(|_| pa != pb)
    };
    let inc = d.incidence();
    let mut arcs = Vec::with_capacity(d.num_arcs());
    for l in 1..=d.num_arcs() as u32 {
        let t = inc.tail[l as usize - 1];
        let h = inc.head[l as usize - 1];
        let (e0, e1) = (arc_point(n, l, 0), arc_point(n, l, 1));
        let points = vec![
            at(t.c())?,
            touch(t.c(), e0)?,
            at(e0)?,
            touch(e0, e1)?,
            at(e1)?,
            touch(e1, h.c())?,
            at(h.c())?,
        ];
        arcs.push(ArcPath { label: l, points, under_at_tail: t.p() == 2, under_at_head: h.p() == 0 });
    }
    let crossings = (0..n).map(at).collect::<Option<Vec<_>>>()?;
    Some(Layout { crossings, arcs })
}
