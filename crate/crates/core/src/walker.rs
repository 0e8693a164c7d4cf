//! Metropolis–Hastings random walks over knot diagrams.
//!
//! Each step proposes a move kind by weight, picks a site uniformly, and
//! accepts with `min(1, exp(-β ΔE))` where
//! `E(D) = λ_size |D| + λ_tiny (N1 + N2/2)`. Diagrams above the crossing cap
//! are rejected outright.

use std::collections::VecDeque;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digest::{blake2b_8_hex, blake2b_u64};
use crate::moves::{self, MoveKind};
use crate::pd::Diagram;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub lambda_size: f64,
    pub lambda_tiny: f64,
    pub beta: f64,
    pub crossing_cap: usize,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams { lambda_size: 0.05, lambda_tiny: 1.0, beta: 1.0, crossing_cap: 30 }
    }
}

/// What the Metropolis step needs from a state: its size and small faces.
pub trait WalkState: Clone {
    fn crossings(&self) -> usize;
    /// `(N1, N2)`: monogons and reducible bigons.
    fn small_faces(&self) -> (usize, usize);
}

impl WalkState for Diagram {
    fn crossings(&self) -> usize {
        self.len()
    }

    fn small_faces(&self) -> (usize, usize) {
        let f = self.faces();
        (f.n1(), f.n2())
    }
}

pub fn energy<S: WalkState>(d: &S, p: &EnergyParams) -> f64 {
    let (n1, n2) = d.small_faces();
    p.lambda_size * d.crossings() as f64 + p.lambda_tiny * (n1 as f64 + 0.5 * n2 as f64)
}

pub fn acceptance_probability(delta_e: f64, beta: f64) -> f64 {
    if delta_e <= 0.0 {
        1.0
    } else {
        (-beta * delta_e).exp().min(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chirality {
    Orig,
    Mirror,
}

impl Chirality {
    pub fn as_str(self) -> &'static str {
        match self {
            Chirality::Orig => "orig",
            Chirality::Mirror => "mirror",
        }
    }
}

/// Base seed from `blake2b(prototype ‖ chirality ‖ "walk")`, first 8 bytes
/// little-endian, plus `9973 · walk_idx` (wrapping).
pub fn derive_seed(prototype_id: &[u8], chirality: Chirality, walk_idx: u64) -> u64 {
    let base = blake2b_u64(&[prototype_id, chirality.as_str().as_bytes(), b"walk"]);
    base.wrapping_add(9973u64.wrapping_mul(walk_idx))
}

/// Proposal weights, in the order of [`MoveKind::ALL`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProposalWeights {
    pub r3: f64,
    pub r2_plus: f64,
    pub r2_minus: f64,
    pub r1_plus: f64,
    pub r1_minus: f64,
    pub flype: f64,
}

impl Default for ProposalWeights {
    fn default() -> Self {
        ProposalWeights { r3: 0.40, r2_plus: 0.20, r2_minus: 0.15, r1_plus: 0.10, r1_minus: 0.10, flype: 0.05 }
    }
}

impl ProposalWeights {
    pub fn as_array(&self) -> [f64; 6] {
        [self.r3, self.r2_plus, self.r2_minus, self.r1_plus, self.r1_minus, self.flype]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub prototype: String,
    pub chirality: Chirality,
    pub walk_idx: u64,
    pub min_len: u32,
    pub max_len: u32,
    pub weights: ProposalWeights,
    pub energy: EnergyParams,
}

impl WalkConfig {
    pub fn new(prototype: impl Into<String>, chirality: Chirality, walk_idx: u64) -> Self {
        WalkConfig {
            prototype: prototype.into(),
            chirality,
            walk_idx,
            min_len: 80,
            max_len: 160,
            weights: ProposalWeights::default(),
            energy: EnergyParams::default(),
        }
    }

    pub fn seed(&self) -> u64 {
        derive_seed(self.prototype.as_bytes(), self.chirality, self.walk_idx)
    }

    fn validate(&self) -> Result<(), WalkError> {
        let w = self.weights.as_array();
        if w.iter().any(|&x| !(x >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(WalkError::Config("proposal weights must be non-negative and sum to 1".into()));
        }
        if self.min_len > self.max_len {
            return Err(WalkError::Config("empty walk-length range".into()));
        }
        let e = &self.energy;
        if !(e.lambda_size >= 0.0 && e.lambda_tiny >= 0.0 && e.beta >= 0.0) {
            return Err(WalkError::Config("energy parameters must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum WalkError {
    #[error("invalid walk configuration: {0}")]
    Config(String),
    #[error("seed diagram has {n} crossings, above the cap of {cap}")]
    SeedAboveCap { n: usize, cap: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Step 0: the starting diagram.
    Seed,
    Accepted,
    Rejected,
    /// Candidate exceeded the crossing cap.
    Capped,
    /// No applicable site; no energy was computed.
    DroppedInvalid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord<S = Diagram> {
    pub step: u32,
    pub kind: Option<MoveKind>,
    pub outcome: Outcome,
    pub accepted: bool,
    pub delta_e: Option<f64>,
    pub p_accept: Option<f64>,
    pub u: Option<f64>,
    /// Crossings and energy of the state after this step.
    pub n: usize,
    pub energy: f64,
    /// The new state; present on the seed and accepted records only.
    pub pd: Option<S>,
}

/// Where a walk gets its randomness from. The production source is a
/// seeded generator; tests inject scripted schedules.
pub trait ProposalSource<S = Diagram> {
    fn walk_length(&mut self, range: RangeInclusive<u32>) -> u32;
    fn kind(&mut self, weights: &ProposalWeights) -> MoveKind;
    /// The candidate state, or `None` when the proposal is structurally invalid.
    fn propose(&mut self, cur: &S, kind: MoveKind) -> Option<S>;
    fn uniform(&mut self) -> f64;
}

pub struct RngSource {
    rng: ChaCha8Rng,
}

impl RngSource {
    pub fn new(seed: u64) -> Self {
        RngSource { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl ProposalSource for RngSource {
    fn walk_length(&mut self, range: RangeInclusive<u32>) -> u32 {
        self.rng.gen_range(range)
    }

    fn kind(&mut self, weights: &ProposalWeights) -> MoveKind {
        let dist = WeightedIndex::new(weights.as_array()).expect("validated weights");
        MoveKind::ALL[dist.sample(&mut self.rng)]
    }

    fn propose(&mut self, cur: &Diagram, kind: MoveKind) -> Option<Diagram> {
        // raw candidates are always applicable (checked by the move tests);
        // a failure to apply is still treated as a dropped proposal
        let sites = moves::enumerate_raw_sites(cur, kind);
        if sites.is_empty() {
            return None;
        }
        let i = self.rng.gen_range(0..sites.len());
        moves::apply(cur, &sites[i]).ok()
    }

    fn uniform(&mut self) -> f64 {
        self.rng.gen()
    }
}

/// Replays a fixed schedule of kinds, candidates and uniform draws.
/// Panics when the walk asks for more than was scripted.
#[derive(Clone, Debug)]
pub struct ScriptedSource<S = Diagram> {
    pub length: u32,
    pub kinds: VecDeque<MoveKind>,
    /// `None` marks a structurally invalid proposal.
    pub candidates: VecDeque<Option<S>>,
    pub draws: VecDeque<f64>,
}

impl<S: Clone> ProposalSource<S> for ScriptedSource<S> {
    fn walk_length(&mut self, _range: RangeInclusive<u32>) -> u32 {
        self.length
    }

    fn kind(&mut self, _weights: &ProposalWeights) -> MoveKind {
        self.kinds.pop_front().expect("script ran out of kinds")
    }

    fn propose(&mut self, _cur: &S, _kind: MoveKind) -> Option<S> {
        self.candidates.pop_front().expect("script ran out of candidates")
    }

    fn uniform(&mut self) -> f64 {
        self.draws.pop_front().expect("script ran out of draws")
    }
}

/// Runs one walk. The first record is the seed; the walk then takes a
/// length drawn from `[min_len, max_len]` steps.
pub fn run_walk_with<S: WalkState>(
    seed: &S,
    cfg: &WalkConfig,
    src: &mut impl ProposalSource<S>,
) -> Result<Vec<TrajectoryRecord<S>>, WalkError> {
    cfg.validate()?;
    let p = &cfg.energy;
    if seed.crossings() > p.crossing_cap {
        return Err(WalkError::SeedAboveCap { n: seed.crossings(), cap: p.crossing_cap });
    }
    let len = src.walk_length(cfg.min_len..=cfg.max_len);
    let mut cur = seed.clone();
    let mut e_cur = energy(&cur, p);
    let mut out = Vec::with_capacity(len as usize + 1);
    out.push(TrajectoryRecord {
        step: 0,
        kind: None,
        outcome: Outcome::Seed,
        accepted: true,
        delta_e: None,
        p_accept: None,
        u: None,
        n: cur.crossings(),
        energy: e_cur,
        pd: Some(cur.clone()),
    });
    for step in 1..=len {
        let kind = src.kind(&cfg.weights);
        let cand = src.propose(&cur, kind);
        let mut rec = TrajectoryRecord {
            step,
            kind: Some(kind),
            outcome: Outcome::DroppedInvalid,
            accepted: false,
            delta_e: None,
            p_accept: None,
            u: None,
            n: cur.crossings(),
            energy: e_cur,
            pd: None,
        };
        if let Some(cand) = cand {
            let e_new = energy(&cand, p);
            let de = e_new - e_cur;
            let pa = acceptance_probability(de, p.beta);
            rec.delta_e = Some(de);
            rec.p_accept = Some(pa);
            if cand.crossings() > p.crossing_cap {
                rec.outcome = Outcome::Capped;
            } else {
                let u = src.uniform();
                rec.u = Some(u);
                if u < pa {
                    rec.outcome = Outcome::Accepted;
                    rec.accepted = true;
                    rec.n = cand.crossings();
                    rec.energy = e_new;
                    rec.pd = Some(cand.clone());
                    cur = cand;
                    e_cur = e_new;
                } else {
                    rec.outcome = Outcome::Rejected;
                }
            }
        }
        log::trace!("step {step}: {kind:?} -> {:?}", rec.outcome);
        out.push(rec);
    }
    Ok(out)
}

/// Runs one walk with the generator seeded by [`derive_seed`].
pub fn run_walk(seed: &Diagram, cfg: &WalkConfig) -> Result<Vec<TrajectoryRecord>, WalkError> {
    run_walk_with(seed, cfg, &mut RngSource::new(cfg.seed()))
}

/// The accepted states of a walk, seed first.
pub fn accepted_states(records: &[TrajectoryRecord]) -> Vec<&Diagram> {
    records.iter().filter_map(|r| r.pd.as_ref()).collect()
}

/// One line of a trajectory archive file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchiveLine {
    pub prototype: String,
    pub chirality: Chirality,
    pub walk_idx: u64,
    #[serde(flatten)]
    pub record: TrajectoryRecord,
}

/// `<dir>/<blake2b-8 hex of the prototype id>_<chirality>.jsonl`.
pub fn archive_path(dir: &Path, prototype: &str, chirality: Chirality) -> PathBuf {
    dir.join(format!("{}_{}.jsonl", blake2b_8_hex(&[prototype.as_bytes()]), chirality.as_str()))
}

/// Appends a walk's records to its archive file.
pub fn append_walk(dir: &Path, cfg: &WalkConfig, records: &[TrajectoryRecord]) -> std::io::Result<PathBuf> {
    let path = archive_path(dir, &cfg.prototype, cfg.chirality);
    let file = OpenOptions::new().create(true).append(true).open(&path)?;
    let mut w = BufWriter::new(file);
    for r in records {
        let line = ArchiveLine {
            prototype: cfg.prototype.clone(),
            chirality: cfg.chirality,
            walk_idx: cfg.walk_idx,
            record: r.clone(),
        };
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(path)
}

pub fn read_archive(path: &Path) -> std::io::Result<Vec<ArchiveLine>> {
    let r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?);
    }
    Ok(out)
}

/// Splits archive lines into walks, keyed by walk index, in file order.
pub fn group_walks(lines: Vec<ArchiveLine>) -> Vec<(u64, Vec<TrajectoryRecord>)> {
    let mut out: Vec<(u64, Vec<TrajectoryRecord>)> = Vec::new();
    for l in lines {
        match out.iter_mut().find(|(w, _)| *w == l.walk_idx) {
            Some((_, v)) => v.push(l.record),
            None => out.push((l.walk_idx, vec![l.record])),
        }
    }
    out
}

/// Runs every `(seed, config)` walk in parallel. Results keep input order.
pub fn run_walks(jobs: &[(Diagram, WalkConfig)]) -> Vec<Result<Vec<TrajectoryRecord>, WalkError>> {
    jobs.par_iter().map(|(d, cfg)| run_walk(d, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pd::fixtures::trefoil;

    #[test]
    fn energies() {
        let p = EnergyParams::default();
        assert!((energy(&trefoil(), &p) - 0.15).abs() < 1e-12);
    }

    #[test]
    fn acceptance() {
        assert!((acceptance_probability(1.05, 1.0) - 0.350).abs() < 1e-3);
        assert!((acceptance_probability(0.60, 1.0) - 0.549).abs() < 1e-3);
        assert_eq!(acceptance_probability(0.0, 1.0), 1.0);
        assert_eq!(acceptance_probability(-0.5, 1.0), 1.0);
        assert_eq!(acceptance_probability(3.0, 0.0), 1.0);
    }

    #[test]
    fn seeds() {
        let a = derive_seed(b"3_1", Chirality::Orig, 0);
        assert_eq!(a, derive_seed(b"3_1", Chirality::Orig, 0));
        assert_eq!(derive_seed(b"3_1", Chirality::Orig, 1).wrapping_sub(a), 9973);
        assert_ne!(a, derive_seed(b"3_1", Chirality::Mirror, 0));
        assert_eq!(derive_seed(b"x", Chirality::Orig, u64::MAX), derive_seed(b"x", Chirality::Orig, 0).wrapping_add(9973u64.wrapping_mul(u64::MAX)));
    }

    #[test]
    fn config_checks() {
        let mut cfg = WalkConfig::new("3_1", Chirality::Orig, 0);
        cfg.weights.r3 = 0.5;
        assert!(matches!(run_walk(&trefoil(), &cfg), Err(WalkError::Config(_))));
        let mut cfg = WalkConfig::new("3_1", Chirality::Orig, 0);
        cfg.energy.crossing_cap = 2;
        assert!(matches!(run_walk(&trefoil(), &cfg), Err(WalkError::SeedAboveCap { .. })));
    }

    #[test]
    fn deterministic() {
        let cfg = WalkConfig::new("3_1", Chirality::Orig, 3);
        let a = run_walk(&trefoil(), &cfg).unwrap();
        let b = run_walk(&trefoil(), &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!((81..=161).contains(&a.len()));
    }
}
