use super::{Diagram, Slot};

/// A face of the planar map, traced with the face on the right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    /// Corner `(c, p)` is the sector between slots `p` and `p+1` of crossing `c`.
    pub corners: Vec<Slot>,
    /// Boundary arcs; `arcs[i]` leaves corner `i` through slot `p+1`.
    pub arcs: Vec<u32>,
    /// Whether `arcs[i]` is walked along its orientation (face on its right).
    pub forward: Vec<bool>,
}

impl Face {
    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }
}

/// Faces of a diagram together with the small-face counts used by the walk energy.
///
/// `monogons` counts 1-faces (kinks). `bigons` counts every 2-face, while
/// `reducible_bigons` only counts 2-faces on which one strand passes over at
/// both corners — those removable by a single R2 move. Alternating bigons, as
/// in the standard trefoil, are not reducible.
#[derive(Clone, Debug)]
pub struct FaceSet {
    pub faces: Vec<Face>,
    pub monogons: usize,
    pub bigons: usize,
    pub reducible_bigons: usize,
}

impl FaceSet {
    pub fn of(d: &Diagram) -> FaceSet {
        let inc = d.incidence();
        let n = d.len();
        let mut seen = vec![false; 4 * n];
        let mut faces = Vec::with_capacity(n + 2);
        for start in 0..4 * n {
            if seen[start] {
                continue;
            }
            let mut face = Face { corners: Vec::new(), arcs: Vec::new(), forward: Vec::new() };
            let mut cur = Slot::new(start / 4, start % 4);
            while !seen[cur.c() * 4 + cur.p()] {
                seen[cur.c() * 4 + cur.p()] = true;
                let out = cur.rot(1);
                face.corners.push(cur);
                face.arcs.push(d.label(out));
                face.forward.push(!d.is_incoming(out));
                cur = inc.partner(d, out);
            }
            faces.push(face);
        }
        let monogons = faces.iter().filter(|f| f.len() == 1).count();
        let bigons = faces.iter().filter(|f| f.len() == 2).count();
        let reducible_bigons = faces.iter().filter(|f| is_reducible_bigon(f)).count();
        FaceSet { faces, monogons, bigons, reducible_bigons }
    }

    /// `N1` of the walk energy.
    pub fn n1(&self) -> usize {
        self.monogons
    }

    /// `N2` of the walk energy: R2-reducible bigons.
    pub fn n2(&self) -> usize {
        self.reducible_bigons
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Multiset of face sizes, sorted; a cheap isomorphism filter.
    pub fn size_profile(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.faces.iter().map(Face::len).collect();
        v.sort_unstable();
        v
    }
}

/// A 2-face between two distinct crossings where the same strand is over at both.
pub(crate) fn is_reducible_bigon(f: &Face) -> bool {
    if f.len() != 2 {
        return false;
    }
    let (x, y) = (f.corners[0], f.corners[1]);
    if x.crossing == y.crossing {
        return false;
    }
    // arc 0 leaves x through slot p+1 and arrives at y through slot q (= y.pos)
    let at_x = Diagram::is_over(x.rot(1));
    let at_y = Diagram::is_over(y);
    at_x == at_y
}

#[cfg(test)]
mod tests {
    use crate::pd::fixtures::*;
    use crate::pd::parse_pd;

    #[test]
    fn trefoil_faces() {
        let f = trefoil().faces();
        assert_eq!(f.len(), 5);
        assert_eq!(f.monogons, 0);
        // the trefoil shadow has three bigons, none of them R2-reducible
        assert_eq!(f.bigons, 3);
        assert_eq!(f.reducible_bigons, 0);
        assert_eq!(f.size_profile(), vec![2, 2, 2, 3, 3]);
    }

    #[test]
    fn kink_faces() {
        // one crossing: two monogons and the outer 2-face around the crossing
        let f = parse_pd(KINK).unwrap().faces();
        assert_eq!(f.len(), 3);
        assert_eq!(f.n1(), 2);
        assert_eq!(f.size_profile(), vec![1, 1, 2]);
        assert_eq!(f.n2(), 0);
    }

    #[test]
    fn face_arcs_cover_each_side_once() {
        for s in [TREFOIL, FIGURE_EIGHT, K11N34, K8_17] {
            let d = parse_pd(s).unwrap();
            let f = d.faces();
            assert_eq!(f.len(), d.len() + 2);
            let mut fwd = vec![0; d.num_arcs() + 1];
            let mut back = vec![0; d.num_arcs() + 1];
            for face in &f.faces {
                for (&a, &dir) in face.arcs.iter().zip(&face.forward) {
                    if dir {
                        fwd[a as usize] += 1;
                    } else {
                        back[a as usize] += 1;
                    }
                }
            }
            assert!(fwd[1..].iter().all(|&c| c == 1));
            assert!(back[1..].iter().all(|&c| c == 1));
        }
    }
}
