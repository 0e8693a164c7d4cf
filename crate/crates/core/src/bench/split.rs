//! Prototype-level train/val/test split that keeps mutant components whole.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::census::Prototype;
use crate::digest::blake2b_u64;
use crate::invariants::MutantRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    /// Target shares, in percent.
    pub fn target(self) -> f64 {
        match self {
            Split::Train => 70.78,
            Split::Val => 15.84,
            Split::Test => 13.38,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub splits: BTreeMap<String, Split>,
    /// Set when the census is too small to get near the targets.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl SplitAssignment {
    pub fn get(&self, id: &str) -> Option<Split> {
        self.splits.get(id).copied()
    }

    pub fn count(&self, s: Split) -> usize {
        self.splits.values().filter(|&&x| x == s).count()
    }

    pub fn members(&self, s: Split) -> impl Iterator<Item = &str> {
        self.splits.iter().filter(move |(_, &x)| x == s).map(|(k, _)| k.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("mutant record names unknown prototype {0:?}")]
pub struct UnknownPrototype(pub String);

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Splits prototypes 70.78/15.84/13.38.
///
/// Mutant components are unioned and placed as units. Components are
/// shuffled by `seed`, ordered by (smallest rc, shuffle), and each goes to
/// the split with the largest running deficit, so every rc band is split
/// in roughly the target proportions.
pub fn make_split(protos: &[Prototype], mutants: &[MutantRecord], seed: u64) -> Result<SplitAssignment, UnknownPrototype> {
    let index: HashMap<&str, usize> = protos.iter().enumerate().map(|(i, p)| (p.id.as_str(), i)).collect();
    let mut parent: Vec<usize> = (0..protos.len()).collect();
    for m in mutants {
        let a = *index.get(m.a.as_str()).ok_or_else(|| UnknownPrototype(m.a.clone()))?;
        let b = *index.get(m.b.as_str()).ok_or_else(|| UnknownPrototype(m.b.clone()))?;
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra.max(rb)] = ra.min(rb);
    }
    let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..protos.len() {
        let r = find(&mut parent, i);
        comps.entry(r).or_default().push(i);
    }
    let mut comps: Vec<Vec<usize>> = comps.into_values().collect();
    // shuffle from a fixed order so the result depends only on the ids
    comps.sort_by(|a, b| protos[a[0]].id.cmp(&protos[b[0]].id));
    let mut rng = ChaCha8Rng::seed_from_u64(blake2b_u64(&[&seed.to_le_bytes(), b"split"]));
    comps.shuffle(&mut rng);
    comps.sort_by_key(|c| c.iter().map(|&i| protos[i].rc).min());

    let mut counts = [0usize; 3];
    let mut out = SplitAssignment::default();
    let mut placed = 0usize;
    for c in &comps {
        placed += c.len();
        let deficit = |k: usize| Split::ALL[k].target() / 100.0 * placed as f64 - counts[k] as f64;
        let k = (0..3).fold(0, |best, k| if deficit(k) > deficit(best) { k } else { best });
        counts[k] += c.len();
        for &i in c {
            out.splits.insert(protos[i].id.clone(), Split::ALL[k]);
        }
    }

    let total = protos.len();
    if total > 0 {
        for (k, s) in Split::ALL.iter().enumerate() {
            let share = 100.0 * counts[k] as f64 / total as f64;
            if (share - s.target()).abs() > 1.0 {
                let msg = format!("{s:?} share {share:.2}% is more than 1 point off the {:.2}% target ({total} prototypes)", s.target());
                log::warn!("{msg}");
                out.warnings.push(msg);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::Strictness;
    use crate::pd::fixtures;

    fn proto(id: &str, rc: usize) -> Prototype {
        let seed = fixtures::trefoil();
        Prototype {
            id: id.into(),
            name: id.into(),
            rc,
            amphichiral: false,
            invariants: crate::InvariantSet::compute(&seed),
            seed,
            identity: id.into(),
        }
    }

    #[test]
    fn ten_singletons_split_seven_two_one() {
        let protos: Vec<_> = (0..10).map(|i| proto(&format!("p{i}"), 3)).collect();
        let a = make_split(&protos, &[], 1).unwrap();
        assert_eq!([a.count(Split::Train), a.count(Split::Val), a.count(Split::Test)], [7, 2, 1]);
        assert_eq!(a, make_split(&protos, &[], 1).unwrap());
        assert!(!a.warnings.is_empty());
    }

    #[test]
    fn mutant_components_stay_together() {
        let protos: Vec<_> = (0..40).map(|i| proto(&format!("p{i:02}"), 3 + i % 5)).collect();
        let chain = ["p03", "p17", "p29"];
        let mutants: Vec<_> = chain
            .windows(2)
            .map(|w| MutantRecord { a: w[0].into(), b: w[1].into(), strictness: Strictness::Loose })
            .collect();
        for seed in 0..20 {
            let a = make_split(&protos, &mutants, seed).unwrap();
            let s = a.get("p03");
            assert!(chain.iter().all(|c| a.get(c) == s));
        }
    }

    #[test]
    fn census_scale_ratios_are_within_one_point() {
        let protos: Vec<_> = (0..2000).map(|i| proto(&format!("k{i}"), 3 + i % 17)).collect();
        let mutants: Vec<_> = (0..100)
            .map(|i| MutantRecord { a: format!("k{}", 2 * i), b: format!("k{}", 2 * i + 1), strictness: Strictness::Strict })
            .collect();
        let a = make_split(&protos, &mutants, 42).unwrap();
        assert!(a.warnings.is_empty(), "{:?}", a.warnings);
        for s in Split::ALL {
            let share = 100.0 * a.count(s) as f64 / 2000.0;
            assert!((share - s.target()).abs() <= 1.0, "{s:?} {share}");
        }
    }

    #[test]
    fn unknown_mutant_member_is_an_error() {
        let protos = vec![proto("a", 3)];
        let m = MutantRecord { a: "a".into(), b: "zz".into(), strictness: Strictness::Strict };
        assert!(make_split(&protos, &[m], 0).is_err());
    }
}
