//! Building evaluation items from the render manifest.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::census::Prototype;
use super::corpus::ManifestRecord;
use super::split::{Split, SplitAssignment};
use super::tasks::{EvalItem, Stratum, TaskId};
use crate::digest::blake2b_u64;
use crate::invariants::MutantRecord;
use crate::moves::{classify_pair, Relation};
use crate::pd::{parse_pd, CanonicalCode, Diagram};
use crate::walker::Chirality;

/// Amphichiral flags are trusted up to this crossing number.
pub const AMPHICHIRAL_WHITELIST_MAX_RC: usize = 10;
/// Minimum accepted-state distance of a NOT-CONNECTED pair.
pub const NOT_CONNECTED_MIN_GAP: usize = 5;
const TRIES: usize = 400;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemConfig {
    pub seed: u64,
    /// Which prototypes items may draw from.
    pub splits: Vec<Split>,
    /// Share of A0 negatives drawn from mutant pairs, when any are available.
    pub mutant_negative_share: f64,
    pub not_connected_share: f64,
    pub d0_positive_share: f64,
    /// Share of A1 positives that pair an amphichiral knot with its mirror.
    pub amphichiral_positive_share: f64,
}

impl Default for ItemConfig {
    fn default() -> Self {
        ItemConfig {
            seed: 0,
            splits: vec![Split::Test],
            mutant_negative_share: 0.25,
            not_connected_share: 1.0 / 6.0,
            d0_positive_share: 0.5,
            amphichiral_positive_share: 0.5,
        }
    }
}

/// Items a stratum should have had but could not be built.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shortfall {
    pub task: TaskId,
    pub stratum: Stratum,
    pub wanted: usize,
    pub built: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ItemBuild {
    pub items: Vec<EvalItem>,
    pub shortfalls: Vec<Shortfall>,
}

struct Entry<'a> {
    rec: &'a ManifestRecord,
    d: Diagram,
    code: CanonicalCode,
}

type Bucket<'a> = (&'a str, Chirality, usize);

/// Parsed and indexed manifest records of the allowed splits.
pub struct Pool<'a> {
    entries: Vec<Entry<'a>>,
    protos: HashMap<&'a str, &'a Prototype>,
    /// (prototype, chirality, walk, state) -> entry
    by_state: HashMap<(&'a str, Chirality, u64, usize), usize>,
    by_bucket: HashMap<Bucket<'a>, Vec<usize>>,
    by_proto: HashMap<&'a str, Vec<usize>>,
    partners: HashMap<&'a str, Vec<&'a str>>,
}

impl<'a> Pool<'a> {
    pub fn new(
        records: &'a [ManifestRecord],
        protos: &'a [Prototype],
        split: &SplitAssignment,
        mutants: &'a [MutantRecord],
        splits: &[Split],
    ) -> Result<Self, crate::pd::PdError> {
        let allowed = |id: &str| split.get(id).is_some_and(|s| splits.contains(&s));
        let chosen: Vec<&ManifestRecord> = records.iter().filter(|r| allowed(&r.prototype)).collect();
        let entries: Result<Vec<Entry>, _> = chosen
            .par_iter()
            .map(|&rec| {
                let d = parse_pd(&rec.pd)?;
                let code = d.canonical_code();
                Ok(Entry { rec, d, code })
            })
            .collect();
        let entries = entries?;
        let mut pool = Pool {
            protos: protos.iter().map(|p| (p.id.as_str(), p)).collect(),
            by_state: HashMap::new(),
            by_bucket: HashMap::new(),
            by_proto: HashMap::new(),
            partners: HashMap::new(),
            entries,
        };
        for (i, e) in pool.entries.iter().enumerate() {
            let r = e.rec;
            pool.by_state.insert((r.prototype.as_str(), r.chirality, r.walk, r.state), i);
            pool.by_bucket.entry((r.prototype.as_str(), r.chirality, r.n)).or_default().push(i);
            pool.by_proto.entry(r.prototype.as_str()).or_default().push(i);
        }
        for m in mutants {
            if allowed(&m.a) && allowed(&m.b) {
                pool.partners.entry(m.a.as_str()).or_default().push(m.b.as_str());
                pool.partners.entry(m.b.as_str()).or_default().push(m.a.as_str());
            }
        }
        Ok(pool)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A built item before ids are assigned.
struct Draft {
    entries: Vec<usize>,
    /// PD texts, when they are not simply the entries' own.
    pds: Option<Vec<String>>,
    label: String,
    subtype: Option<&'static str>,
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

struct Builder<'p, 'a> {
    pool: &'p Pool<'a>,
    task: TaskId,
    cfg: &'p ItemConfig,
    rng: ChaCha8Rng,
}

impl<'p, 'a> Builder<'p, 'a> {
    fn e(&self, i: usize) -> &'p Entry<'a> {
        &self.pool.entries[i]
    }

    fn usable(&self, i: usize) -> bool {
        !self.task.uses_images() || self.e(i).rec.lint_pass()
    }

    fn pick(&mut self, from: impl Iterator<Item = usize>) -> Option<usize> {
        let v: Vec<usize> = from.filter(|&i| self.usable(i)).collect();
        v.choose(&mut self.rng).copied()
    }

    fn whitelisted_amphichiral(&self, id: &str) -> bool {
        self.pool.protos.get(id).is_some_and(|p| p.amphichiral && p.rc <= AMPHICHIRAL_WHITELIST_MAX_RC)
    }

    /// Draws one item for anchor `a`; `want` is the planned label for
    /// binary tasks and the NOT-CONNECTED flag for B0.
    fn draft(&mut self, a: usize, s: Stratum, want: bool) -> Option<Draft> {
        let ea = self.e(a);
        let (pa, ca, na) = (ea.rec.prototype.as_str(), ea.rec.chirality, ea.rec.n);
        let pool = self.pool;
        let ins = move |j: usize| Stratum::of(pool.entries[j].rec.n) == Some(s);
        let draft = |entries: Vec<usize>, label: String, subtype: Option<&'static str>| Draft { entries, pds: None, label, subtype };
        match self.task {
            TaskId::A0I | TaskId::A0S => {
                if want {
                    let amph = self.whitelisted_amphichiral(pa);
                    let b = self.pick(
                        pool.by_proto[pa]
                            .iter()
                            .copied()
                            .filter(|&j| j != a && ins(j) && (amph || pool.entries[j].rec.chirality == ca)),
                    )?;
                    Some(draft(vec![a, b], yes_no(true), None))
                } else {
                    let partners = pool.partners.get(pa).cloned().unwrap_or_default();
                    if !partners.is_empty() && self.rng.gen_bool(self.cfg.mutant_negative_share) {
                        let b = self.pick(partners.iter().flat_map(|q| pool.by_proto.get(q).into_iter().flatten().copied()).filter(|&j| ins(j)));
                        if let Some(b) = b {
                            return Some(draft(vec![a, b], yes_no(false), Some("mutant-negative")));
                        }
                    }
                    let mut others: Vec<&str> = pool.by_proto.keys().copied().filter(|&q| q != pa).collect();
                    others.sort_unstable();
                    let q = *others.choose(&mut self.rng)?;
                    let b = self.pick(pool.by_proto[q].iter().copied().filter(|&j| ins(j)))?;
                    Some(draft(vec![a, b], yes_no(false), None))
                }
            }
            TaskId::A1I | TaskId::A1S => {
                let amph = self.whitelisted_amphichiral(pa);
                let flagged = pool.protos.get(pa).is_some_and(|p| p.amphichiral);
                if flagged && !amph {
                    // chirality of an unlisted amphichiral knot is not a usable label
                    return None;
                }
                let same_proto = pool.by_proto[pa].iter().copied().filter(|&j| j != a && ins(j));
                if want {
                    if amph && self.rng.gen_bool(self.cfg.amphichiral_positive_share) {
                        let b = self.pick(same_proto.filter(|&j| pool.entries[j].rec.chirality != ca))?;
                        return Some(draft(vec![a, b], yes_no(true), Some("amphichiral-positive")));
                    }
                    let b = self.pick(same_proto.filter(|&j| pool.entries[j].rec.chirality == ca))?;
                    Some(draft(vec![a, b], yes_no(true), None))
                } else {
                    if amph {
                        return None;
                    }
                    let b = self.pick(same_proto.filter(|&j| pool.entries[j].rec.chirality != ca))?;
                    Some(draft(vec![a, b], yes_no(false), None))
                }
            }
            TaskId::A2I | TaskId::A2S => {
                let b = self.pick(pool.by_proto[pa].iter().copied().filter(|&j| {
                    let r = pool.entries[j].rec;
                    j != a && r.chirality == ca && (r.n == na) == want && Stratum::of(r.n).is_some()
                }))?;
                Some(draft(vec![a, b], yes_no(want), None))
            }
            TaskId::A3I | TaskId::A3S => {
                let code = &ea.code;
                let b = self.pick(pool.by_bucket[&(pa, ca, na)].iter().copied().filter(|&j| j != a && (pool.entries[j].code == *code) == want))?;
                let mut d = draft(vec![a, b], yes_no(want), None);
                if self.task == TaskId::A3S {
                    // relabel the second code so equal diagrams never show equal text
                    let db = &pool.entries[b].d;
                    let start = self.rng.gen_range(1..=db.num_arcs() as u32);
                    let mut perm: Vec<usize> = (0..db.len()).collect();
                    perm.shuffle(&mut self.rng);
                    let shown = db.relabel(start, self.rng.gen_bool(0.5)).permute_crossings(&perm);
                    d.pds = Some(vec![ea.rec.pd.clone(), shown.to_pd_text()]);
                }
                Some(d)
            }
            TaskId::B0I | TaskId::B0S => {
                let key = |k: usize| (pa, ca, ea.rec.walk, k);
                if !want {
                    let b = self.pick(pool.by_state.get(&key(ea.rec.state + 1)).copied().into_iter())?;
                    let rel = classify_pair(&ea.d, &pool.entries[b].d);
                    if rel == Relation::NotConnected {
                        log::warn!("consecutive states {} -> {} are not one move apart", ea.rec.render_id, pool.entries[b].rec.render_id);
                        return None;
                    }
                    return Some(draft(vec![a, b], rel.as_str().to_string(), None));
                }
                let st = ea.rec.state;
                let far = (0..st.saturating_sub(NOT_CONNECTED_MIN_GAP - 1))
                    .chain(st + NOT_CONNECTED_MIN_GAP..st + 400)
                    .filter_map(|k| pool.by_state.get(&key(k)).copied());
                let b = self.pick(far)?;
                // exhaustive check; connected pairs are resampled by the caller
                if classify_pair(&ea.d, &pool.entries[b].d) != Relation::NotConnected {
                    return None;
                }
                Some(draft(vec![a, b], Relation::NotConnected.as_str().to_string(), Some("not-connected")))
            }
            TaskId::C0 => Some(draft(vec![a], na.to_string(), None)),
            TaskId::C1 => Some(draft(vec![a], ea.d.to_dt().to_lowercase(), None)),
            TaskId::D0 => {
                if want {
                    return Some(Draft { entries: vec![a], pds: Some(vec![ea.rec.pd.clone()]), label: yes_no(true), subtype: None });
                }
                let b = self.pick_any(pool.by_bucket[&(pa, ca, na)].iter().copied().filter(|&j| pool.entries[j].code != ea.code))?;
                Some(Draft {
                    entries: vec![a, b],
                    pds: Some(vec![pool.entries[b].rec.pd.clone()]),
                    label: yes_no(false),
                    subtype: Some("same-task-mismatch"),
                })
            }
            TaskId::D1 => {
                // distinct canonical codes, the anchor's first
                let mut seen: HashSet<&CanonicalCode> = HashSet::from([&ea.code]);
                let mut cands: Vec<usize> = pool.by_bucket[&(pa, ca, na)].clone();
                cands.shuffle(&mut self.rng);
                let mut opts = vec![a];
                for j in cands {
                    if opts.len() == 4 {
                        break;
                    }
                    if seen.insert(&pool.entries[j].code) {
                        opts.push(j);
                    }
                }
                if opts.len() < 4 {
                    return None;
                }
                let pds = opts.iter().map(|&j| pool.entries[j].rec.pd.clone()).collect();
                Some(Draft { entries: opts, pds: Some(pds), label: "A".into(), subtype: None })
            }
        }
    }

    /// Like `pick` but without the lint filter: PD-only payload.
    fn pick_any(&mut self, from: impl Iterator<Item = usize>) -> Option<usize> {
        let v: Vec<usize> = from.collect();
        v.choose(&mut self.rng).copied()
    }

    fn wants_flag(&self) -> bool {
        !matches!(self.task, TaskId::C0 | TaskId::C1 | TaskId::D1)
    }

    fn share(&self) -> f64 {
        match self.task {
            TaskId::B0I | TaskId::B0S => self.cfg.not_connected_share,
            TaskId::D0 => self.cfg.d0_positive_share,
            _ => 0.5,
        }
    }
}

/// How many of each stratum's items get the flag: `round(n · share)` in
/// total, spread by largest remainder.
fn flag_quota(quota: [usize; 4], share: f64) -> [usize; 4] {
    let n: usize = quota.iter().sum();
    let total = (n as f64 * share).round() as usize;
    let exact = quota.map(|q| q as f64 * share);
    let mut on = exact.map(|x| x.floor() as usize);
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    let mut left = total.saturating_sub(on.iter().sum());
    for k in order {
        if left == 0 {
            break;
        }
        if on[k] < quota[k] {
            on[k] += 1;
            left -= 1;
        }
    }
    on
}

/// Splits `n` over the strata as evenly as possible, earlier strata first.
pub fn stratum_quota(n: usize) -> [usize; 4] {
    let mut q = [n / 4; 4];
    for x in q.iter_mut().take(n % 4) {
        *x += 1;
    }
    q
}

/// Builds `n` items of one task.
///
/// Items are spread evenly over the four crossing-count strata. A stratum
/// that runs out of material contributes fewer items, and the gap is
/// reported rather than filled from other strata.
pub fn build_items(task: TaskId, pool: &Pool, n: usize, cfg: &ItemConfig) -> ItemBuild {
    let seed = blake2b_u64(&[&cfg.seed.to_le_bytes(), task.as_str().as_bytes(), b"items"]);
    let mut b = Builder { pool, task, cfg, rng: ChaCha8Rng::seed_from_u64(seed) };
    let mut drafts: Vec<(Stratum, Draft)> = Vec::new();
    let mut shortfalls = Vec::new();
    let mut used: HashSet<Vec<usize>> = HashSet::new();
    let mut by_stratum: BTreeMap<Stratum, Vec<usize>> = BTreeMap::new();
    for (i, e) in pool.entries.iter().enumerate() {
        if let Some(s) = Stratum::of(e.rec.n) {
            by_stratum.entry(s).or_default().push(i);
        }
    }
    let quota = stratum_quota(n);
    let flags = flag_quota(quota, b.share());
    for (k, s) in Stratum::ALL.into_iter().enumerate() {
        let want = quota[k];
        let anchors: Vec<usize> = by_stratum.get(&s).map(|v| v.iter().copied().filter(|&i| b.usable(i)).collect()).unwrap_or_default();
        let mut plan: Vec<bool> = (0..want).map(|i| i < flags[k]).collect();
        plan.shuffle(&mut b.rng);
        let mut built = 0;
        let mut failed: BTreeMap<bool, usize> = BTreeMap::new();
        for &flag in &plan {
            let mut ok = false;
            for _ in 0..TRIES {
                let Some(&a) = anchors.choose(&mut b.rng) else { break };
                let Some(d) = b.draft(a, s, flag) else { continue };
                let mut key = d.entries.clone();
                if task == TaskId::D0 {
                    key.push(flag as usize);
                }
                if used.insert(key) {
                    drafts.push((s, d));
                    ok = true;
                    break;
                }
            }
            if ok {
                built += 1;
            } else {
                *failed.entry(flag).or_default() += 1;
            }
        }
        if built < want {
            let what = |f: bool| match (task, f) {
                (TaskId::B0I | TaskId::B0S, true) => "NOT-CONNECTED",
                (TaskId::B0I | TaskId::B0S, false) => "consecutive",
                (_, _) if !b.wants_flag() => "any",
                (_, true) => "positive",
                (_, false) => "negative",
            };
            let reason = if anchors.is_empty() {
                "no usable renders in this stratum".to_string()
            } else {
                let parts: Vec<String> = failed.iter().rev().map(|(&f, k)| format!("{k} {}", what(f))).collect();
                format!("could not build {}", parts.join(", "))
            };
            log::warn!("{task} stratum {}: {built}/{want} items ({reason})", s.as_str());
            shortfalls.push(Shortfall { task, stratum: s, wanted: want, built, reason });
        }
    }

    let items = drafts
        .into_iter()
        .enumerate()
        .map(|(k, (s, d))| {
            let id = format!("{}-{:04}", task.as_str(), k + 1);
            finish(pool, task, id, s, d)
        })
        .collect();
    ItemBuild { items, shortfalls }
}

pub const LETTERS: [&str; 4] = ["A", "B", "C", "D"];

fn finish(pool: &Pool, task: TaskId, id: String, stratum: Stratum, mut d: Draft) -> EvalItem {
    let rec = |i: usize| pool.entries[i].rec;
    if task == TaskId::D1 {
        let mut order: Vec<usize> = (0..4).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(blake2b_u64(&[id.as_bytes(), b"letters"])));
        let pds = d.pds.take().expect("D1 options");
        d.pds = Some(order.iter().map(|&k| pds[k].clone()).collect());
        let at = order.iter().position(|&k| k == 0).unwrap();
        d.label = LETTERS[at].to_string();
        d.entries = vec![d.entries[0]];
    }
    let images = if task.uses_images() {
        // only the anchor is shown for D0/D1; the rest are PD donors
        let shown = if matches!(task, TaskId::D0 | TaskId::D1) { &d.entries[..1] } else { &d.entries[..] };
        shown.iter().map(|&i| rec(i).render_id.clone()).collect()
    } else {
        Vec::new()
    };
    let pds = match (&d.pds, task.uses_images()) {
        (Some(p), _) => p.clone(),
        (None, false) => d.entries.iter().map(|&i| rec(i).pd.clone()).collect(),
        (None, true) => Vec::new(),
    };
    let mut prototypes: Vec<String> = d.entries.iter().map(|&i| rec(i).prototype.clone()).collect();
    prototypes.sort();
    prototypes.dedup();
    EvalItem {
        id,
        task,
        modality: task.modality(),
        images,
        pds,
        label: d.label,
        stratum,
        n_x: rec(d.entries[0]).n,
        subtype: d.subtype.map(str::to_string),
        prototypes,
    }
}

/// Per-task counts, defaulting to the standard table.
pub fn counts_with(overrides: &[(TaskId, usize)]) -> Vec<(TaskId, usize)> {
    TaskId::ALL
        .iter()
        .map(|&t| (t, overrides.iter().find(|(o, _)| *o == t).map_or(t.default_count(), |&(_, n)| n)))
        .collect()
}

/// Builds every task in parallel; output keeps task order.
pub fn build_all(pool: &Pool, counts: &[(TaskId, usize)], cfg: &ItemConfig) -> ItemBuild {
    let parts: Vec<ItemBuild> = counts.par_iter().map(|&(t, n)| build_items(t, pool, n, cfg)).collect();
    let mut out = ItemBuild::default();
    for p in parts {
        out.items.extend(p.items);
        out.shortfalls.extend(p.shortfalls);
    }
    out
}

/// Hashes pinning an eval set to its inputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lockfile {
    /// SHA-256 of the eval-set JSON-lines file, byte for byte.
    pub eval_set_sha256: String,
    pub items: usize,
    pub template_sha256: String,
    pub manifest_pd_sha256: String,
    pub counts: BTreeMap<TaskId, usize>,
}

impl Lockfile {
    pub fn new(eval_jsonl: &str, items: &[EvalItem], manifest: &[ManifestRecord]) -> Self {
        let mut counts = BTreeMap::new();
        for it in items {
            *counts.entry(it.task).or_default() += 1;
        }
        Lockfile {
            eval_set_sha256: crate::digest::sha256_hex(eval_jsonl.as_bytes()),
            items: items.len(),
            template_sha256: super::prompts::template_digest(),
            manifest_pd_sha256: super::corpus::pd_digest(manifest),
            counts,
        }
    }

    /// Whether `eval_jsonl` is the locked file.
    pub fn verify(&self, eval_jsonl: &str) -> bool {
        crate::digest::sha256_hex(eval_jsonl.as_bytes()) == self.eval_set_sha256
    }
}
