//! Straight-line planar layout of a diagram.
//!
//! The circle packing in `pack` is tried first. The fallback is a Tutte
//! drawing: every crossing becomes a centre with four port vertices joined in
//! a square, every arc is subdivided twice, every face gets a centre vertex
//! joined to its whole boundary, the largest face is pinned to the unit
//! circle and the rest is placed barycentrically (random edge weights on
//! retries). Either result is checked geometrically: crossing rotations must
//! match the PD slot order and no two segments may meet away from a shared
//! vertex.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::pd::{Diagram, Slot};

pub type Point = [f64; 2];

/// Interior points per arc.
const SUBDIV: usize = 2;
const ATTEMPTS: u64 = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcPath {
    pub label: u32,
    /// From the tail crossing to the head crossing.
    pub points: Vec<Point>,
    /// The arc ends as an under-strand at its tail / head.
    pub under_at_tail: bool,
    pub under_at_head: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub crossings: Vec<Point>,
    pub arcs: Vec<ArcPath>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LayoutError {
    #[error("no straight-line embedding found after {0} attempts")]
    Unrenderable(u64),
}

struct Graph {
    nv: usize,
    edges: Vec<(usize, usize)>,
    pinned: Vec<(usize, Point)>,
}

fn port(n: usize, c: usize, p: usize) -> usize {
    n + 4 * c + p
}

fn arc_vertex(n: usize, label: u32, k: usize) -> usize {
    5 * n + (label as usize - 1) * SUBDIV + k
}

/// Boundary vertices of each face, in walk order.
fn face_cycles(d: &Diagram) -> Vec<Vec<usize>> {
    let n = d.len();
    let fs = d.faces();
    fs.faces
        .iter()
        .map(|f| {
            let mut cyc = Vec::new();
            for i in 0..f.len() {
                let s = f.corners[i];
                cyc.push(port(n, s.c(), s.p()));
                if f.len() == 1 {
                    // a monogon also touches its crossing's centre, so the loop
                    // hangs on three vertices rather than two
                    cyc.push(s.c());
                }
                cyc.push(port(n, s.c(), s.rot(1).p()));
                let ks: Vec<usize> = if f.forward[i] { (0..SUBDIV).collect() } else { (0..SUBDIV).rev().collect() };
                cyc.extend(ks.into_iter().map(|k| arc_vertex(n, f.arcs[i], k)));
            }
            cyc
        })
        .collect()
}

fn build_graph(d: &Diagram, outer_rank: usize) -> Option<Graph> {
    let n = d.len();
    let m = d.num_arcs();
    let inc = d.incidence();
    let cycles = face_cycles(d);
    let mut order: Vec<usize> = (0..cycles.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(cycles[i].len()), i));
    let outer = *order.get(outer_rank)?;
    let base = 5 * n + m * SUBDIV;
    let monogon_corners: Vec<Slot> = d.faces().faces.iter().filter(|f| f.len() == 1).map(|f| f.corners[0]).collect();
    let mut edges = Vec::new();
    for c in 0..n {
        for p in 0..4 {
            edges.push((c, port(n, c, p)));
            if !monogon_corners.contains(&Slot::new(c, p)) {
                edges.push((port(n, c, p), port(n, c, (p + 1) % 4)));
            }
        }
    }
    for l in 1..=m as u32 {
        let t = inc.tail[l as usize - 1];
        let h = inc.head[l as usize - 1];
        let mut prev = port(n, t.c(), t.p());
        for k in 0..SUBDIV {
            let v = arc_vertex(n, l, k);
            edges.push((prev, v));
            prev = v;
        }
        edges.push((prev, port(n, h.c(), h.p())));
    }
    let mut fv = base;
    for (i, cyc) in cycles.iter().enumerate() {
        if i == outer {
            continue;
        }
        for &v in cyc {
            edges.push((fv, v));
        }
        fv += 1;
    }
    // walking with the outer face on the right goes counter-clockwise
    let k = cycles[outer].len();
    let pinned = cycles[outer]
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let t = std::f64::consts::TAU * j as f64 / k as f64;
            (v, [t.cos(), t.sin()])
        })
        .collect();
    Some(Graph { nv: fv, edges, pinned })
}

fn tutte(g: &Graph, weights: &[f64]) -> Option<Vec<Point>> {
    let mut fixed: Vec<Option<Point>> = vec![None; g.nv];
    for &(v, p) in &g.pinned {
        fixed[v] = Some(p);
    }
    let free: Vec<usize> = (0..g.nv).filter(|&v| fixed[v].is_none()).collect();
    let mut idx = vec![usize::MAX; g.nv];
    for (i, &v) in free.iter().enumerate() {
        idx[v] = i;
    }
    let k = free.len();
    let mut a = DMatrix::<f64>::zeros(k, k);
    let mut bx = DVector::<f64>::zeros(k);
    let mut by = DVector::<f64>::zeros(k);
    for (e, &(u, v)) in g.edges.iter().enumerate() {
        let w = weights[e];
        for (s, t) in [(u, v), (v, u)] {
            if idx[s] == usize::MAX {
                continue;
            }
            let i = idx[s];
            a[(i, i)] += w;
            match fixed[t] {
                Some(p) => {
                    bx[i] += w * p[0];
                    by[i] += w * p[1];
                }
                None => a[(i, idx[t])] -= w,
            }
        }
    }
    let lu = a.lu();
    let x = lu.solve(&bx)?;
    let y = lu.solve(&by)?;
    let mut pos = vec![[0.0; 2]; g.nv];
    for v in 0..g.nv {
        pos[v] = match fixed[v] {
            Some(p) => p,
            None => [x[idx[v]], y[idx[v]]],
        };
    }
    Some(pos)
}

fn to_layout(d: &Diagram, pos: &[Point]) -> Layout {
    let n = d.len();
    let inc = d.incidence();
    let arcs = (1..=d.num_arcs() as u32)
        .map(|l| {
            let t = inc.tail[l as usize - 1];
            let h = inc.head[l as usize - 1];
            let mut points = vec![pos[t.c()], pos[port(n, t.c(), t.p())]];
            points.extend((0..SUBDIV).map(|k| pos[arc_vertex(n, l, k)]));
            points.push(pos[port(n, h.c(), h.p())]);
            points.push(pos[h.c()]);
            // slot 0 is the incoming under-strand, slot 2 the outgoing one
            ArcPath { label: l, points, under_at_tail: t.p() == 2, under_at_head: h.p() == 0 }
        })
        .collect();
    Layout { crossings: pos[..n].to_vec(), arcs }
}

/// Lays out `d`; deterministic in `d`.
pub fn layout(d: &Diagram) -> Result<Layout, LayoutError> {
    if let Some(lay) = super::pack::pack(d) {
        match verify(d, &lay) {
            Ok(()) => return Ok(lay),
            Err(e) => log::debug!("circle packing rejected for {d}: {e:?}"),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b6e6f74);
    for attempt in 0..ATTEMPTS {
        let Some(g) = build_graph(d, (attempt as usize) % 2) else { continue };
        // jitter: random positive edge weights after the first attempt
        let weights: Vec<f64> =
            g.edges.iter().map(|_| if attempt == 0 { 1.0 } else { rng.gen_range(0.5..2.0) }).collect();
        let Some(pos) = tutte(&g, &weights) else { continue };
        let lay = to_layout(d, &pos);
        if verify(d, &lay).is_ok() {
            return Ok(lay);
        }
        log::debug!("layout attempt {attempt} rejected for {d}");
    }
    Err(LayoutError::Unrenderable(ATTEMPTS))
}

/// Why a layout is not faithful to its diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Infidelity {
    Rotation(usize),
    Intersection(u32, u32),
    Degenerate(u32),
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Whether segments `pq` and `rs` meet anywhere (closed segments).
fn segments_meet(p: Point, q: Point, r: Point, s: Point) -> bool {
    let d1 = cross(r, s, p);
    let d2 = cross(r, s, q);
    let d3 = cross(p, q, r);
    let d4 = cross(p, q, s);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Point, b: Point, c: Point, dd: f64| {
        dd == 0.0 && c[0] >= a[0].min(b[0]) && c[0] <= a[0].max(b[0]) && c[1] >= a[1].min(b[1]) && c[1] <= a[1].max(b[1])
    };
    on(r, s, p, d1) || on(r, s, q, d2) || on(p, q, r, d3) || on(p, q, s, d4)
}

/// Two segments of the drawing may touch only at a shared endpoint; shared
/// vertices are copies of one solved position, so equality is exact.
fn segments_ok(mut p: Point, mut q: Point, mut r: Point, mut s: Point) -> bool {
    // pull an endpoint a hair towards the other end
    let pull = |a: Point, b: Point| [a[0] + (b[0] - a[0]) * 1e-6, a[1] + (b[1] - a[1]) * 1e-6];
    for x in [p, q] {
        if x == r || x == s {
            if x == p {
                p = pull(p, q);
            } else {
                q = pull(q, p);
            }
            if x == r {
                r = pull(r, s);
            } else {
                s = pull(s, r);
            }
        }
    }
    !segments_meet(p, q, r, s)
}

/// Checks crossing rotations and planarity of the drawing.
pub fn verify(d: &Diagram, lay: &Layout) -> Result<(), Infidelity> {
    let inc = d.incidence();
    for a in &lay.arcs {
        if a.points.windows(2).any(|w| w[0] == w[1]) {
            return Err(Infidelity::Degenerate(a.label));
        }
    }
    for c in 0..d.len() {
        let angle = |p: usize| {
            let s = Slot::new(c, p);
            let l = d.label(s) as usize - 1;
            let pts = &lay.arcs[l].points;
            let q = if inc.tail[l] == s { pts[1] } else { pts[pts.len() - 2] };
            let o = lay.crossings[c];
            (q[1] - o[1]).atan2(q[0] - o[0])
        };
        let t0 = angle(0);
        let rel: Vec<f64> = (1..4).map(|p| (angle(p) - t0).rem_euclid(std::f64::consts::TAU)).collect();
        if !(rel[0] < rel[1] && rel[1] < rel[2]) {
            return Err(Infidelity::Rotation(c));
        }
    }
    let segs: Vec<(u32, Point, Point)> =
        lay.arcs.iter().flat_map(|a| a.points.windows(2).map(move |w| (a.label, w[0], w[1]))).collect();
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            let (la, p, q) = segs[i];
            let (lb, r, s) = segs[j];
            if !segments_ok(p, q, r, s) {
                return Err(Infidelity::Intersection(la, lb));
            }
        }
    }
    Ok(())
}

/// Points where centerlines of different arcs meet, each counted once.
/// For a faithful layout these are exactly the crossings.
pub fn intersection_points(lay: &Layout) -> Vec<Point> {
    let mut pts: Vec<Point> = Vec::new();
    let mut add = |p: Point| {
        if !pts.contains(&p) {
            pts.push(p);
        }
    };
    for (i, a) in lay.arcs.iter().enumerate() {
        for b in &lay.arcs[i + 1..] {
            for w in a.points.windows(2) {
                for v in b.points.windows(2) {
                    if let Some(p) = meet_point(w[0], w[1], v[0], v[1]) {
                        add(p);
                    }
                }
            }
        }
    }
    // a crossing between an arc and itself (a kink) is shared by its two ends
    for a in &lay.arcs {
        let (s, e) = (a.points[0], a.points[a.points.len() - 1]);
        if s == e {
            add(s);
        }
    }
    pts
}

/// Where two closed segments meet, using exact orientation signs. A shared
/// endpoint is reported as itself; a touch that is neither a shared endpoint
/// nor a proper crossing reports the touching endpoint.
fn meet_point(p: Point, q: Point, r: Point, s: Point) -> Option<Point> {
    for x in [p, q] {
        if x == r || x == s {
            return Some(x);
        }
    }
    let (d1, d2, d3, d4) = (cross(r, s, p), cross(r, s, q), cross(p, q, r), cross(p, q, s));
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        let t = d1 / (d1 - d2);
        return Some([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
    }
    let within = |a: Point, b: Point, c: Point| {
        c[0] >= a[0].min(b[0]) && c[0] <= a[0].max(b[0]) && c[1] >= a[1].min(b[1]) && c[1] <= a[1].max(b[1])
    };
    [(d1, p, r, s), (d2, q, r, s), (d3, r, p, q), (d4, s, p, q)]
        .into_iter()
        .find(|&(d, c, a, b)| d == 0.0 && within(a, b, c))
        .map(|(_, c, _, _)| c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pd::fixtures::*;
    use crate::pd::parse_pd;

    #[test]
    fn fixtures_lay_out() {
        for s in [TREFOIL, FIGURE_EIGHT, KINK, CINQUEFOIL, THREE_TWIST, STEVEDORE, K6_2, K6_3, K7_1, K7_2, K8_17, K11N34, K11N42] {
            let d = parse_pd(s).unwrap();
            let lay = layout(&d).unwrap_or_else(|e| panic!("{s}: {e}"));
            assert_eq!(intersection_points(&lay).len(), d.len(), "{s}");
            let m = layout(&d.mirror()).unwrap();
            assert_eq!(intersection_points(&m).len(), d.len());
        }
    }

    #[test]
    fn trefoil_has_three_broken_crossings() {
        let lay = layout(&trefoil()).unwrap();
        let under_ends = lay.arcs.iter().map(|a| a.under_at_tail as usize + a.under_at_head as usize).sum::<usize>();
        assert_eq!(under_ends, 6);
        assert_eq!(intersection_points(&lay).len(), 3);
    }

    #[test]
    fn kink_is_one_loop_with_one_self_intersection() {
        let d = parse_pd("[[1,1,2,2]]").unwrap();
        let lay = layout(&d).unwrap();
        assert_eq!(lay.arcs.len(), 2);
        assert_eq!(intersection_points(&lay).len(), 1);
    }

    #[test]
    fn verify_rejects_a_mirrored_drawing() {
        let d = trefoil();
        let mut lay = layout(&d).unwrap();
        for p in lay.crossings.iter_mut().chain(lay.arcs.iter_mut().flat_map(|a| a.points.iter_mut())) {
            p[0] = -p[0];
        }
        assert!(matches!(verify(&d, &lay), Err(Infidelity::Rotation(_))));
    }
}
