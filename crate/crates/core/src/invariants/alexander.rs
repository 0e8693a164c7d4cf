//! Alexander polynomial from the Wirtinger presentation's Fox matrix.

use crate::pd::{Diagram, Slot};
use crate::poly::Laurent;

type P = Vec<i128>;

fn trim(mut p: P) -> P {
    while p.last() == Some(&0) {
        p.pop();
    }
    p
}

fn mul(a: &P, b: &P) -> P {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut c = vec![0i128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            c[i + j] += x * y;
        }
    }
    trim(c)
}

fn sub(a: &P, b: &P) -> P {
    let mut c = vec![0i128; a.len().max(b.len())];
    for (i, &x) in a.iter().enumerate() {
        c[i] += x;
    }
    for (i, &y) in b.iter().enumerate() {
        c[i] -= y;
    }
    trim(c)
}

fn div_exact(a: &P, b: &P) -> P {
    if a.is_empty() {
        return Vec::new();
    }
    let lead = *b.last().expect("nonzero divisor");
    let mut rem = a.clone();
    assert!(rem.len() >= b.len(), "inexact Bareiss division");
    let mut q = vec![0i128; rem.len() - b.len() + 1];
    for i in (0..q.len()).rev() {
        let r = rem[i + b.len() - 1];
        assert!(r % lead == 0, "inexact Bareiss division");
        let f = r / lead;
        q[i] = f;
        for (j, &y) in b.iter().enumerate() {
            rem[i + j] -= f * y;
        }
    }
    debug_assert!(rem.iter().all(|&x| x == 0));
    trim(q)
}

/// Fraction-free determinant of a square matrix over `Z[t]`.
fn bareiss_det(mut m: Vec<Vec<P>>) -> P {
    let n = m.len();
    if n == 0 {
        return vec![1];
    }
    let mut sign = 1i128;
    let mut prev: P = vec![1];
    for k in 0..n {
        if m[k][k].is_empty() {
            match (k + 1..n).find(|&r| !m[r][k].is_empty()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return Vec::new(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = sub(&mul(&m[k][k], &m[i][j]), &mul(&m[i][k], &m[k][j]));
                m[i][j] = div_exact(&num, &prev);
            }
        }
        prev = m[k][k].clone();
    }
    m[n - 1][n - 1].iter().map(|&c| c * sign).collect()
}

/// Over-arc index of every arc label (`1..=2n`), and the number of over-arcs.
pub(crate) fn over_arcs(d: &Diagram) -> (Vec<usize>, usize) {
    let m = d.num_arcs();
    let mut parent: Vec<usize> = (0..=m).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for &[_, b, _, e] in d.crossings() {
        let (x, y) = (find(&mut parent, b as usize), find(&mut parent, e as usize));
        parent[x] = y;
    }
    let mut idx = vec![usize::MAX; m + 1];
    let mut comp = vec![0; m + 1];
    let mut k = 0;
    for l in 1..=m {
        let r = find(&mut parent, l);
        if idx[r] == usize::MAX {
            idx[r] = k;
            k += 1;
        }
        comp[l] = idx[r];
    }
    (comp, k)
}

/// Alexander polynomial, normalized to be symmetric with `Δ(1) = 1`.
pub fn alexander(d: &Diagram) -> Laurent {
    let n = d.len();
    let (comp, k) = over_arcs(d);
    let mut rows: Vec<Vec<P>> = vec![vec![Vec::new(); k]; n];
    let add = |e: &mut P, p: &[i128]| {
        let s = sub(e, &p.iter().map(|x| -x).collect());
        *e = s;
    };
    for c in 0..n {
        let a = comp[d.label(Slot::new(c, 0)) as usize];
        let b = comp[d.label(Slot::new(c, 2)) as usize];
        let o = comp[d.label(Slot::new(c, 1)) as usize];
        let (tin, tout) = if d.sign(c) > 0 { (a, b) } else { (b, a) };
        add(&mut rows[c][o], &[1, -1]);
        add(&mut rows[c][tin], &[0, 1]);
        add(&mut rows[c][tout], &[-1]);
    }
    let minor: Vec<Vec<P>> = rows[..n - 1].iter().map(|r| r[..k - 1].to_vec()).collect();
    let det = bareiss_det(minor);
    normalize(&det)
}

fn normalize(p: &P) -> Laurent {
    let coeffs: Vec<i64> = p.iter().map(|&c| i64::try_from(c).expect("Alexander coefficient overflow")).collect();
    let mut q = Laurent::new(0, coeffs);
    if q.is_zero() {
        return q;
    }
    let span = q.low_degree() + q.high_degree();
    q = q.shift(-span.div_euclid(2));
    if q.eval_unit(1) < 0 {
        q = q.scale(-1);
    }
    q
}
