//! Plain-text exports for external cross-checking.
//!
//! Everything here is JSON-lines over PD and DT text, so a checker written
//! against another topology library never links against this crate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::census::Prototype;
use super::corpus::ManifestRecord;
use crate::digest::blake2b_8_hex;
use crate::invariants::{InvariantSet, MutantRecord};
use crate::pd::{from_dt, parse_pd, PdError};
use crate::score::permissive_c1;
use crate::walker::Chirality;

/// A census prototype with its seed diagram in both notations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedExport {
    pub id: String,
    pub name: String,
    pub rc: usize,
    pub amphichiral: bool,
    pub pd: String,
    pub dt: String,
    pub invariants: InvariantSet,
}

/// A walk state the checker should find equivalent to its prototype.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateExport {
    pub subject: String,
    pub prototype: String,
    pub chirality: Chirality,
    pub walk: u64,
    pub state: usize,
    pub n: usize,
    pub pd: String,
}

/// A seed with one crossing switched; the checker should tell it apart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipExport {
    pub subject: String,
    pub prototype: String,
    pub crossing: usize,
    pub pd: String,
    /// Whether our invariants already separate it from the prototype.
    pub invariants_differ: bool,
}

/// One DT string judged against one prototype, with our verdicts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DtFixture {
    pub id: String,
    pub dt: String,
    pub truth: String,
    pub truth_pd: String,
    /// `None` when [`from_dt`] decoded the string, else the error text.
    pub decode_error: Option<String>,
    pub permissive: bool,
    pub note: String,
}

pub fn seeds(protos: &[Prototype]) -> Vec<SeedExport> {
    protos
        .iter()
        .map(|p| SeedExport {
            id: p.id.clone(),
            name: p.name.clone(),
            rc: p.rc,
            amphichiral: p.amphichiral,
            pd: p.seed.to_pd_text(),
            dt: p.seed.to_dt().0,
            invariants: p.invariants.clone(),
        })
        .collect()
}

/// Up to `per_prototype` states per prototype, picked by render-id digest
/// so the choice is stable and independent of manifest order.
pub fn sample_states(records: &[ManifestRecord], per_prototype: usize, seed: u64) -> Vec<StateExport> {
    let mut by_proto: BTreeMap<&str, Vec<(String, &ManifestRecord)>> = BTreeMap::new();
    for r in records {
        let key = blake2b_8_hex(&[r.render_id.as_bytes(), &seed.to_le_bytes(), b"sample"]);
        by_proto.entry(&r.prototype).or_default().push((key, r));
    }
    let mut out = Vec::new();
    for (_, mut v) in by_proto {
        v.sort_by(|a, b| a.0.cmp(&b.0));
        out.extend(v.into_iter().take(per_prototype).map(|(_, r)| StateExport {
            subject: r.render_id.clone(),
            prototype: r.prototype.clone(),
            chirality: r.chirality,
            walk: r.walk,
            state: r.state,
            n: r.n,
            pd: r.pd.clone(),
        }));
    }
    out
}

pub fn flipped(protos: &[Prototype]) -> Vec<FlipExport> {
    protos
        .iter()
        .map(|p| {
            let f = p.seed.flip_crossing(0);
            let inv = InvariantSet::compute(&f);
            FlipExport {
                subject: format!("{}-flip0", p.id),
                prototype: p.id.clone(),
                crossing: 0,
                pd: f.to_pd_text(),
                invariants_differ: !inv.matches_up_to_mirror(&p.invariants),
            }
        })
        .collect()
}

fn fixture(id: String, dt: &str, truth: &Prototype, note: &str) -> DtFixture {
    DtFixture {
        id,
        dt: dt.to_string(),
        truth: truth.id.clone(),
        truth_pd: truth.seed.to_pd_text(),
        decode_error: from_dt(dt).err().map(|e| e.to_string()),
        permissive: permissive_c1(dt, &truth.invariants),
        note: note.to_string(),
    }
}

const MALFORMED: [&str; 4] = ["", "ab1", "aab", "a-c"];

/// The DT fixture set: every seed code against its own prototype and the
/// next one, its mirror-case variant, lowercased codes of sampled walk
/// states (`n ≤ 12`), and malformed or non-planar strings.
pub fn dt_fixtures(protos: &[Prototype], states: &[StateExport]) -> Result<Vec<DtFixture>, PdError> {
    let mut out = Vec::new();
    let by_id: BTreeMap<&str, &Prototype> = protos.iter().map(|p| (p.id.as_str(), p)).collect();
    for (i, p) in protos.iter().enumerate() {
        let dt = p.seed.to_dt();
        out.push(fixture(format!("{}-seed", p.id), &dt.to_lowercase(), p, "seed code, lowercased"));
        out.push(fixture(format!("{}-seed-upper", p.id), &dt.0, p, "seed code with over/under case"));
        out.push(fixture(format!("{}-mirror", p.id), &p.seed.mirror().to_dt().0, p, "mirror image"));
        if protos.len() > 1 {
            let q = &protos[(i + 1) % protos.len()];
            out.push(fixture(format!("{}-vs-{}", q.id, p.id), &q.seed.to_dt().to_lowercase(), p, "another prototype"));
        }
        for (k, bad) in MALFORMED.iter().enumerate() {
            out.push(fixture(format!("{}-bad{k}", p.id), bad, p, "malformed"));
        }
    }
    if let Some(f8) = protos.iter().find(|p| p.name == "4_1") {
        out.push(fixture("4_1-abcde".into(), "abcde", f8, "five letters for a four-crossing knot"));
    }
    if let Some(t) = protos.iter().find(|p| p.name == "3_1") {
        out.push(fixture("3_1-bca".into(), "bca", t, "trefoil"));
        // well-formed but not planar: the decoders must agree on rejecting it
        out.push(fixture("3_1-bcdea".into(), "bcdea", t, "not realizable"));
    }
    for s in states.iter().filter(|s| s.n <= 12) {
        let Some(p) = by_id.get(s.prototype.as_str()) else { continue };
        let d = parse_pd(&s.pd)?;
        out.push(fixture(format!("{}-dt", s.subject), &d.to_dt().to_lowercase(), p, "walk state, lowercased"));
    }
    Ok(out)
}

/// Mutant pairs with both seed codes, for the signature-separation check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutantExport {
    #[serde(flatten)]
    pub pair: MutantRecord,
    pub pd_a: String,
    pub pd_b: String,
}

pub fn mutant_pairs(protos: &[Prototype], mutants: &[MutantRecord]) -> Vec<MutantExport> {
    let by_id: BTreeMap<&str, &Prototype> = protos.iter().map(|p| (p.id.as_str(), p)).collect();
    mutants
        .iter()
        .filter_map(|m| {
            let (a, b) = (by_id.get(m.a.as_str())?, by_id.get(m.b.as_str())?);
            Some(MutantExport { pair: m.clone(), pd_a: a.seed.to_pd_text(), pd_b: b.seed.to_pd_text() })
        })
        .collect()
}
