//! Classical knot invariants of a diagram.

mod alexander;
mod goeritz;
mod jones;

use serde::{Deserialize, Serialize};

use crate::bench::Prototype;
use crate::pd::Diagram;
use crate::poly::Laurent;

pub use alexander::alexander;
pub use goeritz::{goeritz_determinant, signature};
pub use jones::{bracket_state_sum, jones, jones_with_cutoff, kauffman_bracket, JONES_CUTOFF};

pub fn writhe(d: &Diagram) -> i32 {
    d.writhe()
}

/// `|Δ(−1)|`.
pub fn determinant(d: &Diagram) -> u64 {
    alexander(d).eval_unit(-1).unsigned_abs()
}

/// Classical signature `σ(K)`. Positive-crossing knots have negative signature
/// (the right-handed trefoil has `σ = −2`).
pub fn signature_sigma(d: &Diagram) -> i32 {
    signature(d)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InvariantSet {
    pub determinant: u64,
    pub signature: i32,
    pub alexander: Laurent,
    /// `None` when the crossing count exceeded the Jones cutoff.
    pub jones: Option<Laurent>,
}

impl InvariantSet {
    pub fn compute(d: &Diagram) -> Self {
        Self::compute_with_cutoff(d, JONES_CUTOFF)
    }

    pub fn compute_with_cutoff(d: &Diagram, cutoff: usize) -> Self {
        let alexander = alexander(d);
        InvariantSet {
            determinant: alexander.eval_unit(-1).unsigned_abs(),
            signature: signature(d),
            alexander,
            jones: jones_with_cutoff(d, cutoff),
        }
    }

    /// Equality on every field computed on both sides.
    pub fn agrees_with(&self, other: &InvariantSet) -> bool {
        self.determinant == other.determinant
            && self.signature == other.signature
            && self.alexander == other.alexander
            && match (&self.jones, &other.jones) {
                (Some(a), Some(b)) => a == b,
                _ => true,
            }
    }

    /// The invariants of the mirror image.
    pub fn mirrored(&self) -> InvariantSet {
        InvariantSet {
            determinant: self.determinant,
            signature: -self.signature,
            alexander: self.alexander.clone(),
            jones: self.jones.as_ref().map(Laurent::invert_variable),
        }
    }

    /// Equal to `other` or to its mirror.
    pub fn matches_up_to_mirror(&self, other: &InvariantSet) -> bool {
        self.agrees_with(other) || self.agrees_with(&other.mirrored())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strictness {
    /// Jones, Alexander, signature and determinant all coincide.
    Strict,
    /// Only the Jones polynomials coincide.
    Loose,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutantRecord {
    pub a: String,
    pub b: String,
    pub strictness: Strictness,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("prototype {0} has no Jones polynomial (crossing count above the cutoff)")]
pub struct MissingInvariant(pub String);

/// All unordered pairs of distinct prototypes whose invariants collide.
///
/// Signatures are compared up to mirror, since a prototype stands for both
/// chiralities. Pairs sharing an identity token are the same knot, not mutants.
pub fn find_mutant_collisions(protos: &[Prototype]) -> Result<Vec<MutantRecord>, MissingInvariant> {
    if let Some(p) = protos.iter().find(|p| p.invariants.jones.is_none()) {
        return Err(MissingInvariant(p.id.clone()));
    }
    let mut out = Vec::new();
    for (i, p) in protos.iter().enumerate() {
        for q in &protos[i + 1..] {
            if p.id == q.id || p.identity == q.identity {
                continue;
            }
            let (a, b) = (&p.invariants, &q.invariants);
            let jones_match = |b: &InvariantSet| a.jones == b.jones;
            let strict = a == b || *a == b.mirrored();
            let record = |strictness| MutantRecord { a: p.id.clone(), b: q.id.clone(), strictness };
            if strict {
                out.push(record(Strictness::Strict));
            } else if jones_match(b) || jones_match(&b.mirrored()) {
                out.push(record(Strictness::Loose));
            }
        }
    }
    Ok(out)
}
