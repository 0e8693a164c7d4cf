//! Reidemeister moves as PD-code surgery.
//!
//! Each move edits a scratch copy of the crossing tuples (arc ids may exceed
//! `2n` while editing) and then renumbers arcs densely in traversal order.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::pd::{Diagram, FaceSet, Slot};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoveKind {
    R1Plus,
    R1Minus,
    R2Plus,
    R2Minus,
    R3,
    /// Applied as an R3 swap; kept apart only in trajectory records.
    Flype,
}

impl MoveKind {
    pub const ALL: [MoveKind; 6] =
        [MoveKind::R3, MoveKind::R2Plus, MoveKind::R2Minus, MoveKind::R1Plus, MoveKind::R1Minus, MoveKind::Flype];

    /// Signed change in crossing count.
    pub fn delta(self) -> i32 {
        match self {
            MoveKind::R1Plus => 1,
            MoveKind::R1Minus => -1,
            MoveKind::R2Plus => 2,
            MoveKind::R2Minus => -2,
            MoveKind::R3 | MoveKind::Flype => 0,
        }
    }

    pub fn relation(self) -> Relation {
        match self {
            MoveKind::R1Plus => Relation::R1Plus,
            MoveKind::R1Minus => Relation::R1Minus,
            MoveKind::R2Plus => Relation::R2Plus,
            MoveKind::R2Minus => Relation::R2Minus,
            MoveKind::R3 | MoveKind::Flype => Relation::R3,
        }
    }
}

/// The six answer labels relating two consecutive walk states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    R1Plus,
    R1Minus,
    R2Plus,
    R2Minus,
    R3,
    NotConnected,
}

impl Relation {
    pub const ALL: [Relation; 6] =
        [Relation::R1Plus, Relation::R1Minus, Relation::R2Plus, Relation::R2Minus, Relation::R3, Relation::NotConnected];

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::R1Plus => "R1+",
            Relation::R1Minus => "R1-",
            Relation::R2Plus => "R2+",
            Relation::R2Minus => "R2-",
            Relation::R3 => "R3",
            Relation::NotConnected => "NOT-CONNECTED",
        }
    }

    pub fn inverse(self) -> Relation {
        match self {
            Relation::R1Plus => Relation::R1Minus,
            Relation::R1Minus => Relation::R1Plus,
            Relation::R2Plus => Relation::R2Minus,
            Relation::R2Minus => Relation::R2Plus,
            r => r,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Relation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Relation::ALL.into_iter().find(|r| r.as_str() == s).ok_or_else(|| format!("unknown relation {s:?}"))
    }
}

impl Serialize for Relation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Relation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Which side of an oriented arc something lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// A concrete applicable edit. Arc labels and crossing indices refer to the
/// source diagram.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum MoveSite {
    /// New kink on `arc`, lying on `side`, with crossing sign `sign`.
    R1Plus { arc: u32, side: Side, sign: i8 },
    /// Remove the kink at `crossing`.
    R1Minus { crossing: u32 },
    /// Push `upper` over `lower` across the face on `upper_side` of `upper`
    /// (which is the face on `lower_side` of `lower`).
    R2Plus { upper: u32, upper_side: Side, lower: u32, lower_side: Side },
    /// Push a finger of `arc` over a later (or, with `ahead`, an earlier)
    /// stretch of the same arc, through the face on `side`.
    R2PlusSelf { arc: u32, side: Side, ahead: bool },
    /// Remove the bigon between two crossings.
    R2Minus { crossings: [u32; 2] },
    /// Slide across the triangular face bounded by these arcs (sorted).
    R3 { arcs: [u32; 3] },
    Flype { arcs: [u32; 3] },
}

impl MoveSite {
    pub fn kind(&self) -> MoveKind {
        match self {
            MoveSite::R1Plus { .. } => MoveKind::R1Plus,
            MoveSite::R1Minus { .. } => MoveKind::R1Minus,
            MoveSite::R2Plus { .. } | MoveSite::R2PlusSelf { .. } => MoveKind::R2Plus,
            MoveSite::R2Minus { .. } => MoveKind::R2Minus,
            MoveSite::R3 { .. } => MoveKind::R3,
            MoveSite::Flype { .. } => MoveKind::Flype,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("move site {0:?} does not apply to this diagram")]
pub struct Inapplicable(pub MoveSite);

/// Scratch diagram with free-form arc ids.
#[derive(Clone)]
struct Work {
    xs: Vec<[u32; 4]>,
    over_in: Vec<u8>,
    next_id: u32,
}

impl Work {
    fn from(d: &Diagram) -> Work {
        Work {
            xs: d.crossings().to_vec(),
            over_in: (0..d.len()).map(|c| d.over_in(c) as u8).collect(),
            next_id: d.num_arcs() as u32 + 1,
        }
    }

    fn fresh(&mut self) -> u32 {
        self.next_id += 1;
        self.next_id - 1
    }

    fn is_in(&self, c: usize, p: usize) -> bool {
        p == 0 || p == self.over_in[c] as usize
    }

    /// Dense relabeling by traversal, starting from the smallest id.
    fn finish(self) -> Vec<[u32; 4]> {
        let mut in_slot: HashMap<u32, (usize, usize)> = HashMap::with_capacity(self.xs.len() * 2);
        for (c, x) in self.xs.iter().enumerate() {
            for p in 0..4 {
                if self.is_in(c, p) {
                    in_slot.insert(x[p], (c, p));
                }
            }
        }
        let start = *in_slot.keys().min().expect("nonempty diagram");
        let mut label: HashMap<u32, u32> = HashMap::with_capacity(in_slot.len());
        let mut cur = start;
        let mut k = 1;
        loop {
            label.insert(cur, k);
            let (c, p) = in_slot[&cur];
            cur = self.xs[c][(p + 2) % 4];
            if cur == start {
                break;
            }
            k += 1;
        }
        assert_eq!(label.len(), in_slot.len(), "move produced a multi-component diagram");
        self.xs.iter().map(|x| x.map(|id| label[&id])).collect()
    }
}

/// Deletes crossings by splicing both strands straight through them.
fn splice_out(d: &Diagram, del: &[usize]) -> Vec<[u32; 4]> {
    let m = d.num_arcs();
    let inc = d.incidence();
    let gone = |c: usize| del.contains(&c);
    let start = (1..=m).find(|&l| !gone(inc.tail[l - 1].c())).expect("some crossing survives");
    let mut xs = d.crossings().to_vec();
    let mut run = start as u32;
    for k in 0..m {
        let l = (start - 1 + k) % m + 1;
        let h = inc.head[l - 1];
        if !gone(h.c()) {
            xs[h.c()][h.p()] = run;
            run = (l % m + 1) as u32;
        }
    }
    let mut w = Work { xs: Vec::new(), over_in: Vec::new(), next_id: 0 };
    for c in 0..d.len() {
        if !gone(c) {
            w.xs.push(xs[c]);
            w.over_in.push(d.over_in(c) as u8);
        }
    }
    w.finish()
}

fn side_of(forward: bool) -> Side {
    if forward {
        Side::Right
    } else {
        Side::Left
    }
}

fn r1_plus(d: &Diagram, arc: u32, side: Side, sign: i8) -> Vec<[u32; 4]> {
    let inc = d.incidence();
    let mut w = Work::from(d);
    let head = inc.head[arc as usize - 1];
    let lp = w.fresh();
    let y = w.fresh();
    w.xs[head.c()][head.p()] = y;
    let (x, o) = match (side, sign) {
        (Side::Right, -1) => ([arc, lp, lp, y], 1),
        (Side::Left, 1) => ([arc, y, lp, lp], 3),
        (Side::Left, -1) => ([lp, arc, y, lp], 1),
        (Side::Right, 1) => ([lp, lp, y, arc], 3),
        _ => unreachable!("sign is ±1"),
    };
    w.xs.push(x);
    w.over_in.push(o);
    w.finish()
}

/// Face and edge positions for an R2+ site.
fn locate_r2(fs: &FaceSet, upper: u32, upper_side: Side, lower: u32, lower_side: Side) -> Option<(usize, usize, usize)> {
    for (fi, f) in fs.faces.iter().enumerate() {
        let i = (0..f.len()).find(|&i| f.arcs[i] == upper && side_of(f.forward[i]) == upper_side);
        let j = (0..f.len()).find(|&j| f.arcs[j] == lower && side_of(f.forward[j]) == lower_side);
        if let (Some(i), Some(j)) = (i, j) {
            return Some((fi, i, j));
        }
    }
    None
}

/// Pushes a finger of arc `a` over arc `b` across a common face.
///
/// Local model: the face lies between `a` (north) and `b` (south); new
/// crossings `L` (west) and `R` (east) sit on `b` and the finger tip runs
/// south of `b` between them.
fn r2_plus(d: &Diagram, a: u32, a_fwd: bool, b: u32, b_fwd: bool) -> Vec<[u32; 4]> {
    let inc = d.incidence();
    let mut w = Work::from(d);
    // a heads east iff the face is on its right; b heads east iff the face is on its left
    let a_east = a_fwd;
    let b_east = !b_fwd;
    let a_head = inc.head[a as usize - 1];
    let b_head = inc.head[b as usize - 1];
    let a_tip = w.fresh();
    let a_last = w.fresh();
    let b_m = w.fresh();
    let b_last = w.fresh();
    w.xs[a_head.c()][a_head.p()] = a_last;
    w.xs[b_head.c()][b_head.p()] = b_last;
    let (a_l, a_r) = if a_east { (a, a_last) } else { (a_last, a) };
    let (b_w, b_e) = if b_east { (b, b_last) } else { (b_last, b) };
    let (xl, xr) = if b_east {
        ([b_w, a_tip, b_m, a_l], [b_m, a_tip, b_e, a_r])
    } else {
        ([b_m, a_l, b_w, a_tip], [b_e, a_r, b_m, a_tip])
    };
    // slot where a enters each crossing
    let pos = |x: &[u32; 4], id: u32| x.iter().position(|&v| v == id).unwrap() as u8;
    let (ol, or) = if a_east { (pos(&xl, a_l), pos(&xr, a_tip)) } else { (pos(&xl, a_tip), pos(&xr, a_r)) };
    w.xs.push(xl);
    w.over_in.push(ol);
    w.xs.push(xr);
    w.over_in.push(or);
    w.finish()
}

/// Finger of arc `x` over itself. Local model: `x` heads east with the face
/// to the south (side `Right`); the finger leaves at `P`, runs through the
/// face and crosses `x` at two new crossings `W`, `E` near `Q`. Side `Left`
/// is the vertical reflection, which swaps slots 1 and 3.
fn r2_plus_self(d: &Diagram, x: u32, side: Side, ahead: bool) -> Vec<[u32; 4]> {
    let inc = d.incidence();
    let mut w = Work::from(d);
    let head = inc.head[x as usize - 1];
    let [s2, s3, s4, s5] = [w.fresh(), w.fresh(), w.fresh(), w.fresh()];
    let s1 = x;
    w.xs[head.c()][head.p()] = s5;
    // P before Q: strand goes over E, over W, around the monogon, under W, under E
    // P after Q:  under W, under E, around the monogon, over E, over W
    let (mut xw, mut ow, mut xe, mut oe) = if !ahead {
        ([s3, s3, s4, s2], 3, [s4, s1, s5, s2], 1)
    } else {
        ([s1, s5, s2, s4], 3, [s2, s3, s3, s4], 1)
    };
    if side == Side::Left {
        xw.swap(1, 3);
        xe.swap(1, 3);
        ow = 4 - ow;
        oe = 4 - oe;
    }
    w.xs.push(xw);
    w.over_in.push(ow);
    w.xs.push(xe);
    w.over_in.push(oe);
    w.finish()
}

/// Positions of a triangle face admitting R3, if any.
fn triangle_admissible(corners: &[Slot]) -> bool {
    (0..3).any(|i| Diagram::is_over(corners[i].rot(1)) && Diagram::is_over(corners[(i + 1) % 3]))
}

fn r3(d: &Diagram, corners: &[Slot]) -> Vec<[u32; 4]> {
    let inc = d.incidence();
    let mut w = Work::from(d);
    for i in 0..3 {
        // the triangle edge leaving corner i arrives at corner i+1
        let s_out = corners[i].rot(1);
        let s_in = corners[(i + 1) % 3];
        let t = d.label(s_out);
        let t_tail = inc.tail[t as usize - 1];
        let t_head = inc.head[t as usize - 1];
        debug_assert!(t_tail == s_out || t_tail == s_in);
        let (p_slot, q_slot) = (t_tail, t_head);
        let e_in = d.label(p_slot.rot(2));
        let e_out = d.label(q_slot.rot(2));
        w.xs[q_slot.c()][q_slot.p()] = e_in;
        w.xs[q_slot.c()][q_slot.rot(2).p()] = t;
        w.xs[p_slot.c()][p_slot.rot(2).p()] = t;
        w.xs[p_slot.c()][p_slot.p()] = e_out;
    }
    w.finish()
}

fn r3_faces(fs: &FaceSet) -> Vec<(usize, [u32; 3])> {
    let mut out = Vec::new();
    for (fi, f) in fs.faces.iter().enumerate() {
        if f.len() != 3 {
            continue;
        }
        let cs = [f.corners[0].crossing, f.corners[1].crossing, f.corners[2].crossing];
        if cs[0] == cs[1] || cs[1] == cs[2] || cs[0] == cs[2] {
            continue;
        }
        let mut arcs = [f.arcs[0], f.arcs[1], f.arcs[2]];
        if arcs[0] == arcs[1] || arcs[1] == arcs[2] || arcs[0] == arcs[2] {
            continue;
        }
        if !triangle_admissible(&f.corners) {
            continue;
        }
        arcs.sort_unstable();
        out.push((fi, arcs));
    }
    out
}

fn monogon_crossings(fs: &FaceSet) -> Vec<u32> {
    let mut v: Vec<u32> = fs.faces.iter().filter(|f| f.len() == 1).map(|f| f.corners[0].crossing).collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn reducible_bigons(fs: &FaceSet) -> Vec<[u32; 2]> {
    let mut v: Vec<[u32; 2]> = fs
        .faces
        .iter()
        .filter(|f| crate::pd::faces::is_reducible_bigon(f))
        .map(|f| {
            let (a, b) = (f.corners[0].crossing, f.corners[1].crossing);
            [a.min(b), a.max(b)]
        })
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn raw_sites(d: &Diagram, fs: &FaceSet, kind: MoveKind) -> Vec<MoveSite> {
    let n = d.len();
    match kind {
        MoveKind::R1Plus => (1..=d.num_arcs() as u32)
            .flat_map(|arc| {
                [(Side::Left, 1), (Side::Left, -1), (Side::Right, 1), (Side::Right, -1)]
                    .map(|(side, sign)| MoveSite::R1Plus { arc, side, sign })
            })
            .collect(),
        MoveKind::R1Minus if n >= 2 => {
            monogon_crossings(fs).into_iter().map(|crossing| MoveSite::R1Minus { crossing }).collect()
        }
        MoveKind::R2Minus if n >= 3 => {
            reducible_bigons(fs).into_iter().map(|crossings| MoveSite::R2Minus { crossings }).collect()
        }
        MoveKind::R2Plus => {
            let mut out = Vec::new();
            for f in &fs.faces {
                for i in 0..f.len() {
                    for j in 0..f.len() {
                        if i == j || f.arcs[i] == f.arcs[j] {
                            continue;
                        }
                        out.push(MoveSite::R2Plus {
                            upper: f.arcs[i],
                            upper_side: side_of(f.forward[i]),
                            lower: f.arcs[j],
                            lower_side: side_of(f.forward[j]),
                        });
                    }
                }
            }
            for arc in 1..=d.num_arcs() as u32 {
                for side in [Side::Left, Side::Right] {
                    for ahead in [false, true] {
                        out.push(MoveSite::R2PlusSelf { arc, side, ahead });
                    }
                }
            }
            out
        }
        MoveKind::R3 => r3_faces(fs).into_iter().map(|(_, arcs)| MoveSite::R3 { arcs }).collect(),
        MoveKind::Flype => r3_faces(fs).into_iter().map(|(_, arcs)| MoveSite::Flype { arcs }).collect(),
        _ => Vec::new(),
    }
}

fn apply_raw(d: &Diagram, fs: &FaceSet, site: &MoveSite) -> Result<Vec<[u32; 4]>, Inapplicable> {
    let bad = || Inapplicable(site.clone());
    let n = d.len() as u32;
    match *site {
        MoveSite::R1Plus { arc, side, sign } => {
            if arc == 0 || arc > 2 * n || sign.abs() != 1 {
                return Err(bad());
            }
            Ok(r1_plus(d, arc, side, sign))
        }
        MoveSite::R1Minus { crossing } => {
            if n < 2 || !monogon_crossings(fs).contains(&crossing) {
                return Err(bad());
            }
            Ok(splice_out(d, &[crossing as usize]))
        }
        MoveSite::R2Minus { crossings } => {
            if n < 3 || !reducible_bigons(fs).contains(&crossings) {
                return Err(bad());
            }
            Ok(splice_out(d, &[crossings[0] as usize, crossings[1] as usize]))
        }
        MoveSite::R2Plus { upper, upper_side, lower, lower_side } => {
            if upper == lower {
                return Err(bad());
            }
            locate_r2(fs, upper, upper_side, lower, lower_side).ok_or_else(bad)?;
            Ok(r2_plus(d, upper, upper_side == Side::Right, lower, lower_side == Side::Right))
        }
        MoveSite::R2PlusSelf { arc, side, ahead } => {
            if arc == 0 || arc > 2 * n {
                return Err(bad());
            }
            Ok(r2_plus_self(d, arc, side, ahead))
        }
        MoveSite::R3 { arcs } | MoveSite::Flype { arcs } => {
            let (fi, _) = r3_faces(fs).into_iter().find(|(_, a)| *a == arcs).ok_or_else(bad)?;
            Ok(r3(d, &fs.faces[fi].corners))
        }
    }
}

/// Every site of `kind` whose result is a valid diagram.
pub fn enumerate_sites(d: &Diagram, kind: MoveKind) -> Vec<MoveSite> {
    let fs = d.faces();
    raw_sites(d, &fs, kind)
        .into_iter()
        .filter(|s| apply_raw(d, &fs, s).map_or(false, |x| Diagram::from_crossings(x).is_ok()))
        .collect()
}

/// Candidate sites before the validity filter; exposed for consistency tests.
pub fn enumerate_raw_sites(d: &Diagram, kind: MoveKind) -> Vec<MoveSite> {
    raw_sites(d, &d.faces(), kind)
}

pub fn apply(d: &Diagram, site: &MoveSite) -> Result<Diagram, Inapplicable> {
    let fs = d.faces();
    let x = apply_raw(d, &fs, site)?;
    Diagram::from_crossings(x).map_err(|_| Inapplicable(site.clone()))
}

/// Applies every candidate site of `kind` and returns the valid results.
fn results_of(d: &Diagram, kind: MoveKind) -> impl Iterator<Item = Diagram> + '_ {
    let fs = d.faces();
    let sites = raw_sites(d, &fs, kind);
    sites.into_iter().filter_map(move |s| apply_raw(d, &fs, &s).ok().and_then(|x| Diagram::from_crossings(x).ok()))
}

/// Which single move, if any, turns `a` into `b` (up to relabeling).
pub fn classify_pair(a: &Diagram, b: &Diagram) -> Relation {
    let kind = match b.len() as i64 - a.len() as i64 {
        -1 => MoveKind::R1Minus,
        -2 => MoveKind::R2Minus,
        0 => MoveKind::R3,
        1 => MoveKind::R1Plus,
        2 => MoveKind::R2Plus,
        _ => return Relation::NotConnected,
    };
    let target = b.canonical_code();
    let profile = b.faces().size_profile();
    for r in results_of(a, kind) {
        if r.faces().size_profile() == profile && r.canonical_code() == target {
            return kind.relation();
        }
    }
    Relation::NotConnected
}
