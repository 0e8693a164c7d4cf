//! Jones polynomial via the Kauffman bracket, contracted crossing by crossing.
//!
//! The partial state sum over a set of processed crossings is a map from
//! boundary matchings to bracket polynomials in `A`; each new crossing splits
//! every entry into its two smoothings and closed loops are traded for
//! `d = -A^2 - A^-2` immediately.

use std::collections::HashMap;

use crate::pd::Diagram;
use crate::poly::Laurent;

/// Crossing count above which [`jones`] returns `None`.
pub const JONES_CUTOFF: usize = 16;

fn loop_value() -> Laurent {
    Laurent::new(-2, vec![-1, 0, 0, 0, -1])
}

/// Joins a matching with new pairs; returns the resulting matching on the
/// labels of degree one and the number of closed loops.
fn merge(matching: &[u32], new_pairs: [(u32, u32); 2]) -> (Vec<u32>, usize) {
    let mut edges: Vec<(u32, u32)> = matching.chunks(2).map(|p| (p[0], p[1])).collect();
    edges.extend(new_pairs);
    let mut used = vec![false; edges.len()];
    let degree = |l: u32, edges: &[(u32, u32)]| edges.iter().map(|&(a, b)| (a == l) as usize + (b == l) as usize).sum::<usize>();
    let mut out = Vec::new();
    let mut loops = 0;
    // open paths first
    for start in 0..edges.len() {
        for end_is_first in [true, false] {
            if used[start] {
                continue;
            }
            let (s, _) = if end_is_first { edges[start] } else { (edges[start].1, edges[start].0) };
            if degree(s, &edges) != 1 {
                continue;
            }
            let mut cur_edge = start;
            let mut cur = s;
            loop {
                used[cur_edge] = true;
                let (a, b) = edges[cur_edge];
                let other = if a == cur { b } else { a };
                match (0..edges.len()).find(|&e| !used[e] && (edges[e].0 == other || edges[e].1 == other)) {
                    Some(e) => {
                        cur_edge = e;
                        cur = other;
                    }
                    None => {
                        out.push(s.min(other));
                        out.push(s.max(other));
                        break;
                    }
                }
            }
        }
    }
    // whatever remains is a union of cycles
    for start in 0..edges.len() {
        if used[start] {
            continue;
        }
        loops += 1;
        let mut cur_edge = start;
        let mut cur = edges[start].0;
        loop {
            used[cur_edge] = true;
            let (a, b) = edges[cur_edge];
            let other = if a == cur { b } else { a };
            match (0..edges.len()).find(|&e| !used[e] && (edges[e].0 == other || edges[e].1 == other)) {
                Some(e) => {
                    cur_edge = e;
                    cur = other;
                }
                None => break,
            }
        }
    }
    let mut pairs: Vec<[u32; 2]> = out.chunks(2).map(|p| [p[0], p[1]]).collect();
    pairs.sort_unstable();
    (pairs.into_iter().flatten().collect(), loops)
}

/// Greedy contraction order: keep the open boundary small.
fn contraction_order(d: &Diagram) -> Vec<usize> {
    let n = d.len();
    let mut open = vec![0u8; d.num_arcs() + 1];
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let best = (0..n)
            .filter(|&c| !done[c])
            .max_by_key(|&c| {
                let shared = d.crossings()[c].iter().filter(|&&l| open[l as usize] == 1).count();
                (shared, std::cmp::Reverse(c))
            })
            .unwrap();
        done[best] = true;
        order.push(best);
        for &l in &d.crossings()[best] {
            open[l as usize] += 1;
        }
    }
    order
}

/// Kauffman bracket `<D>` in the variable `A`, normalized so the round circle is 1.
pub fn kauffman_bracket(d: &Diagram) -> Laurent {
    let dv = loop_value();
    let mut dpow = vec![Laurent::one()];
    let mut states: HashMap<Vec<u32>, Laurent> = HashMap::new();
    states.insert(Vec::new(), Laurent::one());
    for c in contraction_order(d) {
        let [a, b, cc, e] = d.crossings()[c];
        let smoothings = [(1, [(a, b), (cc, e)]), (-1, [(a, e), (b, cc)])];
        let mut next: HashMap<Vec<u32>, Laurent> = HashMap::with_capacity(states.len() * 2);
        for (key, poly) in &states {
            for &(pw, pairs) in &smoothings {
                let (m, loops) = merge(key, pairs);
                while dpow.len() <= loops {
                    let last = dpow.last().unwrap() * &dv;
                    dpow.push(last);
                }
                let term = &poly.shift(pw) * &dpow[loops];
                let slot = next.entry(m).or_default();
                *slot = &*slot + &term;
            }
        }
        next.retain(|_, p| !p.is_zero());
        states = next;
    }
    let total = states.remove(&Vec::new()).unwrap_or_default();
    // the last closed component was counted as a loop
    total.div_exact(&dv).expect("bracket divisible by the loop value")
}

/// Jones polynomial in `t`, or `None` when `n` exceeds `cutoff`.
pub fn jones_with_cutoff(d: &Diagram, cutoff: usize) -> Option<Laurent> {
    if d.len() > cutoff {
        return None;
    }
    let w = d.writhe();
    let sign = if w.rem_euclid(2) == 0 { 1 } else { -1 };
    let f = kauffman_bracket(d).shift(-3 * w).scale(sign);
    Some(f.compress_exponents(-4).expect("Jones exponents are multiples of 4"))
}

pub fn jones(d: &Diagram) -> Option<Laurent> {
    jones_with_cutoff(d, JONES_CUTOFF)
}

/// Plain `2^n` state sum, kept as an independent check of the contraction.
pub fn bracket_state_sum(d: &Diagram) -> Laurent {
    let n = d.len();
    assert!(n <= 20, "state sum is exponential");
    let m = d.num_arcs();
    let dv = loop_value();
    let mut total = Laurent::zero();
    for mask in 0u32..(1 << n) {
        let mut parent: Vec<usize> = (0..=m).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        let mut pw = 0;
        for (i, &[a, b, c, e]) in d.crossings().iter().enumerate() {
            let pairs = if mask >> i & 1 == 0 {
                pw += 1;
                [(a, b), (c, e)]
            } else {
                pw -= 1;
                [(a, e), (b, c)]
            };
            for (x, y) in pairs {
                let (rx, ry) = (find(&mut parent, x as usize), find(&mut parent, y as usize));
                parent[rx] = ry;
            }
        }
        let loops = (1..=m).filter(|&l| find(&mut parent, l) == l).count();
        let mut term = Laurent::monomial(1, pw);
        for _ in 1..loops {
            term = &term * &dv;
        }
        total = &total + &term;
    }
    total
}
