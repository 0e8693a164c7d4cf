//! Planar diagram (PD) codes.
//!
//! A crossing is a 4-tuple `[a, b, c, d]` of arc labels read counter-clockwise
//! starting from the incoming under-arc. Labels run `1..=2n` in traversal order,
//! so the under-strand always satisfies `c = a + 1 (mod 2n)`; the over-strand
//! runs `b -> d` or `d -> b`, whichever is consecutive.

mod canonical;
pub mod dt;
pub(crate) mod faces;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use canonical::CanonicalCode;
pub use dt::{from_dt, to_dt, DtCode, DtError};
pub use faces::{Face, FaceSet};

/// A crossing position: crossing index and slot `0..4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub crossing: u32,
    pub pos: u8,
}

impl Slot {
    pub fn new(crossing: usize, pos: usize) -> Self {
        Slot { crossing: crossing as u32, pos: (pos % 4) as u8 }
    }

    pub fn c(self) -> usize {
        self.crossing as usize
    }

    pub fn p(self) -> usize {
        self.pos as usize
    }

    /// Slot rotated `k` steps counter-clockwise at the same crossing.
    pub fn rot(self, k: usize) -> Slot {
        Slot::new(self.c(), self.p() + k)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PdError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("invalid diagram: {0}")]
    Invalid(String),
}

/// A validated single-component knot diagram.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Diagram {
    crossings: Vec<[u32; 4]>,
    /// Slot (1 or 3) where the over-strand enters, per crossing.
    over_in: Vec<u8>,
}

/// For every arc, the slot it leaves from (`tail`) and the slot it enters (`head`).
#[derive(Clone, Debug)]
pub struct Incidence {
    pub tail: Vec<Slot>,
    pub head: Vec<Slot>,
}

impl Incidence {
    /// Slot at the other end of the arc occupying `s`.
    pub fn partner(&self, d: &Diagram, s: Slot) -> Slot {
        let l = d.label(s);
        let i = (l - 1) as usize;
        if self.tail[i] == s {
            self.head[i]
        } else {
            self.tail[i]
        }
    }
}

#[inline]
fn succ(l: u32, m: u32) -> u32 {
    l % m + 1
}

impl Diagram {
    /// Builds and validates a diagram from raw tuples.
    pub fn from_crossings(crossings: Vec<[u32; 4]>) -> Result<Self, PdError> {
        let n = crossings.len();
        if n == 0 {
            return Err(PdError::Invalid("no crossings".into()));
        }
        let m = 2 * n as u32;
        let mut count = vec![0u8; m as usize + 1];
        for x in &crossings {
            for &l in x {
                if l == 0 || l > m {
                    return Err(PdError::Invalid(format!("label {l} outside 1..={m}")));
                }
                count[l as usize] += 1;
            }
        }
        let bad: Vec<u32> = (1..=m).filter(|&l| count[l as usize] != 2).collect();
        if !bad.is_empty() {
            let shown: Vec<String> = bad.iter().map(|l| l.to_string()).collect();
            return Err(PdError::Invalid(format!(
                "labels {} do not appear exactly twice",
                shown.join(",")
            )));
        }
        let mut over_in = Vec::with_capacity(n);
        for (i, &[a, b, c, d]) in crossings.iter().enumerate() {
            if c != succ(a, m) {
                return Err(PdError::Invalid(format!(
                    "crossing {i}: under-strand {a} -> {c} is not consecutive"
                )));
            }
            let slot = if n == 1 {
                // both orders are consecutive mod 2; the under-strand fixes it
                if b == c {
                    1
                } else {
                    3
                }
            } else if d == succ(b, m) {
                1
            } else if b == succ(d, m) {
                3
            } else {
                return Err(PdError::Invalid(format!(
                    "crossing {i}: over-strand {b},{d} is not consecutive"
                )));
            };
            over_in.push(slot);
        }
        let d = Diagram { crossings, over_in };
        // each label must be entered once and left once
        let mut seen_in = vec![false; m as usize + 1];
        let mut seen_out = vec![false; m as usize + 1];
        for c in 0..n {
            for p in 0..4 {
                let s = Slot::new(c, p);
                let l = d.label(s) as usize;
                let flag = if d.is_incoming(s) { &mut seen_in[l] } else { &mut seen_out[l] };
                if *flag {
                    return Err(PdError::Invalid(format!("label {l} has inconsistent orientation")));
                }
                *flag = true;
            }
        }
        let faces = d.count_faces();
        if faces != n + 2 {
            return Err(PdError::Invalid(format!(
                "not planar: {faces} faces, expected {}",
                n + 2
            )));
        }
        Ok(d)
    }

    /// Skips validation; for internal callers that construct diagrams known to be valid.
    pub(crate) fn from_crossings_unchecked(crossings: Vec<[u32; 4]>) -> Self {
        let n = crossings.len();
        let m = 2 * n as u32;
        let over_in = crossings
            .iter()
            .map(|&[_, b, c, d]| {
                if n == 1 {
                    if b == c {
                        1
                    } else {
                        3
                    }
                } else if d == succ(b, m) {
                    1
                } else {
                    3
                }
            })
            .collect();
        Diagram { crossings, over_in }
    }

    pub fn crossings(&self) -> &[[u32; 4]] {
        &self.crossings
    }

    /// Crossing count `n`.
    pub fn len(&self) -> usize {
        self.crossings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.crossings.is_empty()
    }

    pub fn num_arcs(&self) -> usize {
        2 * self.crossings.len()
    }

    pub fn label(&self, s: Slot) -> u32 {
        self.crossings[s.c()][s.p()]
    }

    pub fn over_in(&self, c: usize) -> usize {
        self.over_in[c] as usize
    }

    pub fn is_over(s: Slot) -> bool {
        s.pos % 2 == 1
    }

    pub fn is_incoming(&self, s: Slot) -> bool {
        match s.pos {
            0 => true,
            2 => false,
            p => p == self.over_in[s.c()],
        }
    }

    /// +1 when the over-strand runs `d -> b`, −1 when it runs `b -> d`.
    pub fn sign(&self, c: usize) -> i32 {
        if self.over_in[c] == 3 {
            1
        } else {
            -1
        }
    }

    pub fn writhe(&self) -> i32 {
        (0..self.len()).map(|c| self.sign(c)).sum()
    }

    pub fn incidence(&self) -> Incidence {
        let m = self.num_arcs();
        let mut tail = vec![Slot::new(0, 0); m];
        let mut head = vec![Slot::new(0, 0); m];
        for c in 0..self.len() {
            for p in 0..4 {
                let s = Slot::new(c, p);
                let l = (self.label(s) - 1) as usize;
                if self.is_incoming(s) {
                    head[l] = s;
                } else {
                    tail[l] = s;
                }
            }
        }
        Incidence { tail, head }
    }

    fn count_faces(&self) -> usize {
        let inc = self.incidence();
        let n = self.len();
        let mut seen = vec![false; 4 * n];
        let mut faces = 0;
        for start in 0..4 * n {
            if seen[start] {
                continue;
            }
            faces += 1;
            let mut cur = Slot::new(start / 4, start % 4);
            loop {
                let idx = cur.c() * 4 + cur.p();
                if seen[idx] {
                    break;
                }
                seen[idx] = true;
                cur = inc.partner(self, cur.rot(1));
            }
        }
        faces
    }

    pub fn faces(&self) -> FaceSet {
        FaceSet::of(self)
    }

    /// Flips every crossing; labels are kept.
    pub fn mirror(&self) -> Diagram {
        let crossings = self
            .crossings
            .iter()
            .zip(&self.over_in)
            .map(|(&[a, b, c, d], &o)| if o == 1 { [b, c, d, a] } else { [d, a, b, c] })
            .collect();
        Diagram::from_crossings_unchecked(crossings)
    }

    /// Flips crossing `c` alone. Usually changes the knot type.
    pub fn flip_crossing(&self, c: usize) -> Diagram {
        let mut crossings = self.crossings.clone();
        let [a, b, x, d] = crossings[c];
        crossings[c] = if self.over_in[c] == 1 { [b, x, d, a] } else { [d, a, b, x] };
        Diagram::from_crossings_unchecked(crossings)
    }

    /// Renumbers arcs so that `start` becomes arc 1, traversing backwards when
    /// `reverse` is set. The crossing order is kept.
    pub fn relabel(&self, start: u32, reverse: bool) -> Diagram {
        Diagram::from_crossings_unchecked(canonical::relabeled(self, start, reverse))
    }

    /// Reorders the crossing list: new position `i` holds old crossing `perm[i]`.
    pub fn permute_crossings(&self, perm: &[usize]) -> Diagram {
        assert_eq!(perm.len(), self.len());
        Diagram {
            crossings: perm.iter().map(|&i| self.crossings[i]).collect(),
            over_in: perm.iter().map(|&i| self.over_in[i]).collect(),
        }
    }

    pub fn canonical_code(&self) -> CanonicalCode {
        CanonicalCode::of(self)
    }

    pub fn to_pd_text(&self) -> String {
        let body: Vec<String> = self
            .crossings
            .iter()
            .map(|[a, b, c, d]| format!("[{a},{b},{c},{d}]"))
            .collect();
        format!("[{}]", body.join(","))
    }

    pub fn to_dt(&self) -> DtCode {
        to_dt(self)
    }
}

/// Parses `[[a,b,c,d],...]`, whitespace allowed anywhere.
pub fn parse_pd(text: &str) -> Result<Diagram, PdError> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let syntax = |msg: &str| PdError::Syntax(format!("{msg} in {text:?}"));
    let inner = s
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| syntax("missing outer brackets"))?;
    let mut crossings = Vec::new();
    let mut rest = inner;
    while !rest.is_empty() {
        let body = rest.strip_prefix('[').ok_or_else(|| syntax("expected '['"))?;
        let close = body.find(']').ok_or_else(|| syntax("unclosed tuple"))?;
        let nums: Vec<&str> = body[..close].split(',').collect();
        if nums.len() != 4 {
            return Err(syntax("tuple does not have 4 entries"));
        }
        let mut t = [0u32; 4];
        for (k, v) in nums.iter().enumerate() {
            t[k] = v.parse().map_err(|_| syntax("non-integer label"))?;
        }
        crossings.push(t);
        rest = &body[close + 1..];
        if let Some(r) = rest.strip_prefix(',') {
            if r.is_empty() {
                return Err(syntax("trailing comma"));
            }
            rest = r;
        } else if !rest.is_empty() {
            return Err(syntax("expected ','"));
        }
    }
    Diagram::from_crossings(crossings)
}

impl FromStr for Diagram {
    type Err = PdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_pd(s)
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_pd_text())
    }
}

impl fmt::Debug for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Diagram({})", self.to_pd_text())
    }
}

impl Serialize for Diagram {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_pd_text())
    }
}

impl<'de> Deserialize<'de> for Diagram {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_pd(&s).map_err(serde::de::Error::custom)
    }
}

/// Standard diagrams used throughout tests and docs.
pub mod fixtures {
    use super::{parse_pd, Diagram};

    /// The 3-crossing trefoil seed; all crossings negative.
    pub const TREFOIL: &str = "[[2,5,3,6],[4,1,5,2],[6,3,1,4]]";
    /// The alternative trefoil listing `(1,4,2,5),(3,6,4,1),(5,2,6,3)`.
    pub const TREFOIL_ALT: &str = "[[1,4,2,5],[3,6,4,1],[5,2,6,3]]";
    pub const FIGURE_EIGHT: &str = "[[8,5,1,6],[4,1,5,2],[2,8,3,7],[6,4,7,3]]";
    pub const KINK: &str = "[[1,1,2,2]]";
    pub const CINQUEFOIL: &str = "[[10,5,1,6],[6,1,7,2],[2,7,3,8],[8,3,9,4],[4,9,5,10]]";
    pub const THREE_TWIST: &str = "[[5,1,6,10],[1,7,2,6],[9,3,10,2],[3,9,4,8],[7,5,8,4]]";
    pub const STEVEDORE: &str =
        "[[7,12,8,1],[1,6,2,7],[11,3,12,2],[3,11,4,10],[9,5,10,4],[5,9,6,8]]";
    pub const K6_2: &str = "[[12,8,1,7],[8,2,9,1],[2,10,3,9],[6,4,7,3],[4,11,5,12],[10,5,11,6]]";
    pub const K6_3: &str = "[[9,12,10,1],[1,5,2,4],[7,3,8,2],[3,9,4,8],[5,10,6,11],[11,6,12,7]]";
    pub const K7_1: &str =
        "[[14,7,1,8],[8,1,9,2],[2,9,3,10],[10,3,11,4],[4,11,5,12],[12,5,13,6],[6,13,7,14]]";
    pub const K7_2: &str =
        "[[14,11,1,12],[10,1,11,2],[2,9,3,10],[8,3,9,4],[4,7,5,8],[12,5,13,6],[6,13,7,14]]";
    pub const K8_17: &str = "[[16,7,1,8],[12,2,13,1],[2,10,3,9],[14,3,15,4],[4,15,5,16],[10,6,11,5],[6,12,7,11],[8,13,9,14]]";
    /// Kinoshita–Terasaka and Conway knots: a mutant pair.
    pub const K11N34: &str = "[[3,1,4,22],[1,7,2,6],[7,3,8,2],[11,4,12,5],[5,12,6,13],[8,16,9,15],[20,9,21,10],[10,17,11,18],[18,13,19,14],[14,19,15,20],[16,22,17,21]]";
    pub const K11N42: &str = "[[3,1,4,22],[1,7,2,6],[7,3,8,2],[11,4,12,5],[5,12,6,13],[8,17,9,18],[14,9,15,10],[10,20,11,19],[18,14,19,13],[20,15,21,16],[16,21,17,22]]";

    pub fn trefoil() -> Diagram {
        parse_pd(TREFOIL).unwrap()
    }

    pub fn figure_eight() -> Diagram {
        parse_pd(FIGURE_EIGHT).unwrap()
    }
}
