//! Signature and determinant from the Goeritz form.
//!
//! Checkerboard-shade the faces. For the spanning surface made of the shaded
//! faces, the Gordon–Litherland formula gives `σ = sign(G) − μ`, where `G` is
//! the Goeritz matrix on the unshaded faces and `μ` sums the crossing
//! incidences `η` over crossings where the surface's two local sheets meet
//! with incoherent orientations (type II). `|det G|` is the knot determinant.

use std::collections::VecDeque;

use crate::pd::{Diagram, Slot};

pub(crate) struct Goeritz {
    pub matrix: Vec<Vec<i64>>,
    pub mu: i32,
}

/// Face index of every corner `(c, p)`.
fn corner_faces(d: &Diagram) -> (Vec<[usize; 4]>, usize) {
    let fs = d.faces();
    let mut out = vec![[usize::MAX; 4]; d.len()];
    for (i, f) in fs.faces.iter().enumerate() {
        for s in &f.corners {
            out[s.c()][s.p()] = i;
        }
    }
    (out, fs.len())
}

pub(crate) fn goeritz(d: &Diagram, shade_first: bool) -> Goeritz {
    let n = d.len();
    let (cf, nf) = corner_faces(d);
    // neighbouring corners at a crossing lie in faces of opposite colour
    let mut colour: Vec<Option<bool>> = vec![None; nf];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nf];
    for c in 0..n {
        for p in 0..4 {
            adj[cf[c][p]].push(cf[c][(p + 1) % 4]);
        }
    }
    colour[cf[0][0]] = Some(shade_first);
    let mut queue = VecDeque::from([cf[0][0]]);
    while let Some(f) = queue.pop_front() {
        let cur = colour[f].unwrap();
        for &g in &adj[f] {
            match colour[g] {
                None => {
                    colour[g] = Some(!cur);
                    queue.push_back(g);
                }
                Some(x) => debug_assert!(x != cur, "faces are not 2-colourable"),
            }
        }
    }
    let white: Vec<usize> = (0..nf).filter(|&f| colour[f] == Some(false)).collect();
    let mut index = vec![usize::MAX; nf];
    for (i, &f) in white.iter().enumerate() {
        index[f] = i;
    }
    let w = white.len();
    let mut full = vec![vec![0i64; w]; w];
    let mut mu = 0;
    for c in 0..n {
        let odd_shaded = colour[cf[c][1]] == Some(true);
        // sweeping the over-strand (slots 1, 3) counter-clockwise passes corners 1 and 3
        let eta: i64 = if odd_shaded { 1 } else { -1 };
        let (s0, u0) = if odd_shaded { (1, 0) } else { (0, 1) };
        let i = index[cf[c][u0]];
        let j = index[cf[c][u0 + 2]];
        if i != j {
            full[i][j] -= eta;
            full[j][i] -= eta;
            full[i][i] += eta;
            full[j][j] += eta;
        }
        let a = d.is_incoming(Slot::new(c, s0));
        let b = d.is_incoming(Slot::new(c, s0 + 1));
        if a == b {
            mu += eta as i32;
        }
    }
    let matrix = full.iter().skip(1).map(|r| r[1..].to_vec()).collect();
    Goeritz { matrix, mu }
}

/// Exact inertia of a symmetric rational matrix: (positive, negative, zero).
fn inertia(m: &[Vec<i64>]) -> (usize, usize, usize) {
    let k = m.len();
    let mut a: Vec<Vec<Q>> = m.iter().map(|r| r.iter().map(|&x| Q::int(x as i128)).collect()).collect();
    let (mut pos, mut neg) = (0, 0);
    let mut size = k;
    let mut start = 0;
    while start < size {
        let piv = (start..size).find(|&i| !a[i][i].is_zero());
        let piv = match piv {
            Some(p) => p,
            None => {
                // all diagonal entries vanish; a congruence creates one unless the block is zero
                let hit = (start..size).flat_map(|i| (start..size).map(move |j| (i, j))).find(|&(i, j)| !a[i][j].is_zero());
                let Some((i, j)) = hit else { break };
                for r in 0..size {
                    let v = a[r][j];
                    a[r][i] = a[r][i].add(v);
                }
                for c in 0..size {
                    let v = a[j][c];
                    a[i][c] = a[i][c].add(v);
                }
                i
            }
        };
        a.swap(start, piv);
        for r in a.iter_mut() {
            r.swap(start, piv);
        }
        let p = a[start][start];
        if p.num > 0 {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in start + 1..size {
            let f = a[i][start].div(p);
            if f.is_zero() {
                continue;
            }
            for j in start..size {
                let v = a[start][j].mul(f);
                a[i][j] = a[i][j].sub(v);
            }
        }
        for i in start + 1..size {
            a[start][i] = Q::int(0);
            a[i][start] = Q::int(0);
        }
        start += 1;
        if start == size {
            break;
        }
        // drop fully zero trailing block early
        if (start..size).all(|i| (start..size).all(|j| a[i][j].is_zero())) {
            size = start;
        }
    }
    (pos, neg, k - pos - neg)
}

/// Exact integer determinant by Bareiss elimination.
fn det_i128(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[k][k] * a[i][j] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

pub fn signature(d: &Diagram) -> i32 {
    let g = goeritz(d, true);
    let (p, q, _) = inertia(&g.matrix);
    p as i32 - q as i32 - g.mu
}

/// `|det G|`; equals `|Δ(−1)|`.
pub fn goeritz_determinant(d: &Diagram) -> u64 {
    let g = goeritz(d, true);
    det_i128(&g.matrix).unsigned_abs() as u64
}

#[derive(Clone, Copy, Debug)]
struct Q {
    num: i128,
    den: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Q {
    fn int(x: i128) -> Q {
        Q { num: x, den: 1 }
    }

    fn new(num: i128, den: i128) -> Q {
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Q { num: s * num / g, den: s * den / g }
    }

    fn is_zero(self) -> bool {
        self.num == 0
    }

    fn add(self, o: Q) -> Q {
        Q::new(
            self.num.checked_mul(o.den).and_then(|x| x.checked_add(o.num.checked_mul(self.den)?)).expect("rational overflow"),
            self.den.checked_mul(o.den).expect("rational overflow"),
        )
    }

    fn sub(self, o: Q) -> Q {
        self.add(Q { num: -o.num, den: o.den })
    }

    fn mul(self, o: Q) -> Q {
        let g1 = gcd(self.num, o.den).max(1);
        let g2 = gcd(o.num, self.den).max(1);
        Q::new(
            (self.num / g1).checked_mul(o.num / g2).expect("rational overflow"),
            (self.den / g2).checked_mul(o.den / g1).expect("rational overflow"),
        )
    }

    fn div(self, o: Q) -> Q {
        self.mul(Q::new(o.den, o.num))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pd::fixtures::*;
    use crate::pd::parse_pd;

    #[test]
    fn inertia_small() {
        assert_eq!(inertia(&[vec![0, 1], vec![1, 0]]), (1, 1, 0));
        assert_eq!(inertia(&[vec![2, 1], vec![1, 2]]), (2, 0, 0));
        assert_eq!(inertia(&[vec![1, 2], vec![2, 1]]), (1, 1, 0));
        assert_eq!(inertia(&[vec![0, 0], vec![0, 0]]), (0, 0, 2));
        assert_eq!(inertia(&[vec![-3]]), (0, 1, 0));
    }

    #[test]
    fn determinant_integer() {
        assert_eq!(det_i128(&[vec![2, 1], vec![1, 2]]), 3);
        assert_eq!(det_i128(&[vec![0, 1], vec![1, 0]]), -1);
        assert_eq!(det_i128(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]]), -3);
    }

    #[test]
    fn shading_choice_does_not_matter() {
        for s in [TREFOIL, FIGURE_EIGHT, CINQUEFOIL, THREE_TWIST, STEVEDORE, K6_2, K6_3, K7_1, K7_2, K8_17, K11N34, KINK] {
            let d = parse_pd(s).unwrap();
            let a = goeritz(&d, true);
            let b = goeritz(&d, false);
            let sa = { let (p, q, _) = inertia(&a.matrix); p as i32 - q as i32 - a.mu };
            let sb = { let (p, q, _) = inertia(&b.matrix); p as i32 - q as i32 - b.mu };
            assert_eq!(sa, sb, "{s}");
            assert_eq!(det_i128(&a.matrix).abs(), det_i128(&b.matrix).abs(), "{s}");
        }
    }

    #[test]
    fn table_signatures() {
        // all-negative torus knots have positive signature in this convention
        let cases = [
            (TREFOIL, 2),
            (FIGURE_EIGHT, 0),
            (CINQUEFOIL, 4),
            (THREE_TWIST, -2),
            (STEVEDORE, 0),
            (K6_3, 0),
            (K7_1, 6),
            (K7_2, 2),
            (K8_17, 0),
            (K11N34, 0),
            (K11N42, 0),
            (KINK, 0),
        ];
        for (s, want) in cases {
            let d = parse_pd(s).unwrap();
            assert_eq!(signature(&d), want, "{s}");
            assert_eq!(signature(&d.mirror()), -want, "mirror {s}");
        }
    }

    #[test]
    fn table_determinants() {
        let cases = [(TREFOIL, 3), (FIGURE_EIGHT, 5), (CINQUEFOIL, 5), (THREE_TWIST, 7), (STEVEDORE, 9), (K6_2, 11), (K6_3, 13), (K7_1, 7), (K7_2, 11), (K8_17, 37), (K11N34, 1), (KINK, 1)];
        for (s, want) in cases {
            assert_eq!(goeritz_determinant(&parse_pd(s).unwrap()), want, "{s}");
        }
    }
}
