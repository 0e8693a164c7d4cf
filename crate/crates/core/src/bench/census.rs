use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::invariants::InvariantSet;
use crate::pd::{parse_pd, Diagram, Slot};

/// A prime knot together with its seed diagram.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Prototype {
    pub id: String,
    pub name: String,
    pub rc: usize,
    pub amphichiral: bool,
    pub seed: Diagram,
    pub invariants: InvariantSet,
    /// Knot identity used to tell mutants from duplicates; the census name.
    pub identity: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CensusError {
    #[error("duplicate prototype id {id:?} on line {line}")]
    DuplicateId { id: String, line: usize },
}

/// Per-rc counts next to the production sampling plan.
#[derive(Clone, Debug, Serialize)]
pub struct RcRow {
    pub rc: usize,
    pub count: usize,
    /// `None` = take every prototype of this rc.
    pub planned: Option<usize>,
    pub alternating_share: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusIngest {
    pub prototypes: Vec<Prototype>,
    pub errors: Vec<LineError>,
    pub rc_report: Vec<RcRow>,
}

pub fn planned_count(rc: usize) -> Option<usize> {
    match rc {
        0..=11 => None,
        12 | 13 => Some(200),
        14..=16 => Some(150),
        _ => Some(100),
    }
}

/// Over and under passages alternate along the whole traversal.
pub fn is_alternating(d: &Diagram) -> bool {
    let inc = d.incidence();
    let over: Vec<bool> = inc.head.iter().map(|&s: &Slot| Diagram::is_over(s)).collect();
    (0..over.len()).all(|i| over[i] != over[(i + 1) % over.len()])
}

fn parse_flag(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "y" | "a" => Some(true),
        "0" | "false" | "no" | "n" | "" | "c" => Some(false),
        _ => None,
    }
}

fn parse_line(line: &str) -> Result<Prototype, String> {
    let mut parts = line.splitn(5, ',');
    let mut next = |what: &str| parts.next().map(str::trim).ok_or_else(|| format!("missing field {what}"));
    let id = next("id")?.to_string();
    let name = next("name")?.to_string();
    let rc: usize = next("rc")?.parse().map_err(|_| "rc is not an integer".to_string())?;
    let flag = next("amphichiral_flag")?;
    let amphichiral = parse_flag(flag).ok_or_else(|| format!("bad amphichiral flag {flag:?}"))?;
    let pd = next("pd_text")?;
    if id.is_empty() {
        return Err("empty id".into());
    }
    if !(3..=19).contains(&rc) {
        return Err(format!("rc {rc} outside 3..=19"));
    }
    let seed = parse_pd(pd).map_err(|e| e.to_string())?;
    if seed.len() != rc {
        return Err(format!("rc {rc} but seed has {} crossings", seed.len()));
    }
    let invariants = InvariantSet::compute(&seed);
    Ok(Prototype { identity: name.clone(), id, name, rc, amphichiral, seed, invariants })
}

/// Parses a census: one `id, name, rc, amphichiral_flag, pd_text` record per
/// line; blank lines and `#` comments are skipped. Bad lines are collected.
pub fn ingest_census(text: &str) -> Result<CensusIngest, CensusError> {
    let mut prototypes = Vec::new();
    let mut errors = Vec::new();
    let mut ids = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_line(line) {
            Ok(p) => {
                if !ids.insert(p.id.clone()) {
                    return Err(CensusError::DuplicateId { id: p.id, line: i + 1 });
                }
                prototypes.push(p);
            }
            Err(message) => errors.push(LineError { line: i + 1, message }),
        }
    }
    let mut by_rc: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for p in &prototypes {
        let e = by_rc.entry(p.rc).or_default();
        e.0 += 1;
        e.1 += is_alternating(&p.seed) as usize;
    }
    let rc_report = by_rc
        .into_iter()
        .map(|(rc, (count, alt))| RcRow { rc, count, planned: planned_count(rc), alternating_share: alt as f64 / count as f64 })
        .collect();
    Ok(CensusIngest { prototypes, errors, rc_report })
}
