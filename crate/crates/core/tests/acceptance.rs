//! Release acceptance checks. One line per criterion; nonzero exit if any fails.
//!
//! Run with `cargo test --test acceptance` (the test profile is optimised).

mod common;

use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use knotforge::bench::corpus::from_jsonl;
use knotforge::bench::{
    build_items, generate, ingest_census, make_split, pd_digest, EvalItem, GenerateConfig, ItemConfig, Pool, Split,
    Stratum, TaskId,
};
use knotforge::moves::{apply, classify_pair, enumerate_sites, MoveKind};
use knotforge::pd::fixtures::{figure_eight, trefoil, FIGURE_EIGHT};
use knotforge::pd::from_dt;
use knotforge::render::{layout, lint, lint_fixtures, place, LintReport, RenderStyle, CANVAS};
use knotforge::score::synthetic::{constant, uniform_random};
use knotforge::score::{aggregate, read_response, score_item, wilson};
use knotforge::walker::{
    accepted_states, energy, run_walk_with, run_walks, Chirality, EnergyParams, Outcome, ProposalWeights,
    TrajectoryRecord, WalkConfig, WalkState,
};
use knotforge::{parse_pd, Diagram, InvariantSet};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

const MINI_CENSUS: &str = include_str!("data/mini_census.csv");
const CAP: usize = 30;

// largest archived state over every walk this suite runs
static MAX_N: AtomicUsize = AtomicUsize::new(0);
static ARCHIVED: AtomicUsize = AtomicUsize::new(0);

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn walks(jobs: &[(Diagram, WalkConfig)]) -> Vec<Vec<TrajectoryRecord>> {
    let out: Vec<Vec<TrajectoryRecord>> = run_walks(jobs).into_iter().map(|r| r.expect("walk config is valid")).collect();
    for recs in &out {
        for d in accepted_states(recs) {
            MAX_N.fetch_max(d.len(), Ordering::Relaxed);
            ARCHIVED.fetch_add(1, Ordering::Relaxed);
        }
    }
    out
}

fn mini_seeds() -> Vec<(String, Diagram)> {
    ingest_census(MINI_CENSUS).unwrap().prototypes.into_iter().map(|p| (p.id, p.seed)).collect()
}

fn jobs_from(seeds: &[(String, Diagram)], per_seed: u64, tweak: impl Fn(&mut WalkConfig)) -> Vec<(Diagram, WalkConfig)> {
    let mut jobs = Vec::new();
    for (id, d) in seeds {
        for w in 0..per_seed {
            let (seed, chir) = if w % 2 == 0 { (d.clone(), Chirality::Orig) } else { (d.mirror(), Chirality::Mirror) };
            let mut cfg = WalkConfig::new(id.clone(), chir, w);
            tweak(&mut cfg);
            jobs.push((seed, cfg));
        }
    }
    jobs
}

fn worked_example() -> Check {
    let cfg = WalkConfig::new("3_1", Chirality::Orig, 0);
    let recs = run_walk_with(&common::Profile(3, 0, 0), &cfg, &mut common::worked_example_script()).map_err(|e| e.to_string())?;
    ensure(recs.len() == 11, || format!("{} records", recs.len()))?;
    for (r, want) in recs.iter().zip(common::WORKED_EXAMPLE_ENERGIES) {
        ensure((r.energy - want).abs() <= 1e-3, || format!("step {}: E = {} vs {want}", r.step, r.energy))?;
    }
    for (step, want) in [(1, 0.350), (2, 0.549), (3, 1.0)] {
        let p = recs[step].p_accept.ok_or(format!("step {step} has no acceptance probability"))?;
        ensure((p - want).abs() <= 1e-3, || format!("step {step}: p = {p} vs {want}"))?;
    }
    Ok("11 energies, p = 0.350 / 0.549 / 1.0".into())
}

fn energy_formula() -> Check {
    let p = EnergyParams::default();
    let t = trefoil();
    let e0 = energy(&t, &p);
    let kinked = enumerate_sites(&t, MoveKind::R1Plus)
        .iter()
        .map(|s| apply(&t, s).unwrap())
        .find(|d| d.small_faces() == (1, 0))
        .ok_or("no single-kink trefoil")?;
    let bigon = enumerate_sites(&t, MoveKind::R2Plus)
        .iter()
        .map(|s| apply(&t, s).unwrap())
        .find(|d| d.small_faces() == (0, 1))
        .ok_or("no single-bigon trefoil")?;
    let (e1, e2) = (energy(&kinked, &p), energy(&bigon, &p));
    for (name, got, want) in [("trefoil", e0, 0.15), ("trefoil+kink", e1, 1.20), ("trefoil+bigon", e2, 0.75)] {
        ensure((got - want).abs() < 1e-12, || format!("E({name}) = {got}, want {want}"))?;
    }
    Ok(format!("E = {e0:.2} / {e1:.2} / {e2:.2}"))
}

fn face_law() -> Check {
    let jobs = jobs_from(&mini_seeds(), 6, |_| {});
    let mut checked = 0;
    for recs in walks(&jobs) {
        for d in accepted_states(&recs) {
            let f = d.faces().len();
            ensure(f == d.len() + 2, || format!("{d}: {f} faces for {} crossings", d.len()))?;
            checked += 1;
        }
    }
    ensure(checked >= 1000, || format!("only {checked} diagrams"))?;
    Ok(format!("{checked} diagrams from 5 prototypes"))
}

fn move_round_trip() -> Check {
    let jobs = jobs_from(&mini_seeds(), 2, |_| {});
    let states: Vec<Diagram> = walks(&jobs).iter().flat_map(|r| accepted_states(r).into_iter().cloned().collect::<Vec<_>>()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut per_kind: BTreeMap<&str, usize> = BTreeMap::new();
    let mut n = 0;
    while n < 10_000 {
        let d = states.choose(&mut rng).unwrap();
        let kind = *MoveKind::ALL.choose(&mut rng).unwrap();
        let sites = enumerate_sites(d, kind);
        let Some(site) = sites.choose(&mut rng) else { continue };
        let e = apply(d, site).map_err(|e| format!("{kind:?} on {d}: {e:?}"))?;
        let got = classify_pair(d, &e);
        ensure(got == site.kind().relation(), || format!("{kind:?} on {d} classified as {}", got.as_str()))?;
        *per_kind.entry(got.as_str()).or_default() += 1;
        n += 1;
    }
    Ok(format!("{n} instances, {per_kind:?}"))
}

fn conservation() -> Check {
    let seeds = [("3_1".to_string(), trefoil()), ("4_1".to_string(), figure_eight())];
    let jobs = jobs_from(&seeds, 100, |c| {
        c.min_len = 160;
        c.max_len = 160;
    });
    let mut compared = 0;
    let mut with_jones = 0;
    for ((seed, cfg), recs) in jobs.iter().zip(walks(&jobs)) {
        ensure(recs.len() == 161, || format!("{} walk {}: {} records", cfg.prototype, cfg.walk_idx, recs.len()))?;
        let want = InvariantSet::compute(seed);
        for d in accepted_states(&recs) {
            let got = InvariantSet::compute(d);
            let same = match got.jones {
                Some(_) => got == want,
                None => got.agrees_with(&want),
            };
            ensure(same, || format!("{} walk {}: {d} has {got:?}", cfg.prototype, cfg.walk_idx))?;
            with_jones += got.jones.is_some() as usize;
            compared += 1;
        }
    }
    Ok(format!("200 walks x 160 steps, {compared} states, {with_jones} with Jones, 0 violations"))
}

fn proposal_mix() -> Check {
    let jobs = jobs_from(&mini_seeds(), 200, |_| {});
    let mut counts = [0usize; 6];
    let mut total = 0usize;
    'outer: for recs in walks(&jobs) {
        for r in &recs {
            if let Some(k) = r.kind {
                counts[MoveKind::ALL.iter().position(|&m| m == k).unwrap()] += 1;
                total += 1;
                if total == 100_000 {
                    break 'outer;
                }
            }
        }
    }
    ensure(total == 100_000, || format!("only {total} proposals"))?;
    let w = ProposalWeights::default().as_array();
    let mut worst = 0.0f64;
    for (i, (&c, &p)) in counts.iter().zip(&w).enumerate() {
        let sigma = (total as f64 * p * (1.0 - p)).sqrt();
        let z = (c as f64 - total as f64 * p) / sigma;
        worst = worst.max(z.abs());
        ensure(z.abs() <= 3.0, || format!("{:?}: {c} of {total}, z = {z:.2}", MoveKind::ALL[i]))?;
    }
    Ok(format!("{total} proposals, max |z| = {worst:.2}"))
}

fn crossing_cap() -> Check {
    // unbiased acceptance drives walks up against the cap
    let jobs = jobs_from(&mini_seeds(), 4, |c| {
        c.energy.beta = 0.0;
        c.min_len = 400;
        c.max_len = 400;
    });
    let capped: usize = walks(&jobs).iter().flatten().filter(|r| r.outcome == Outcome::Capped).count();
    let max = MAX_N.load(Ordering::Relaxed);
    ensure(max <= CAP, || format!("archived state with {max} crossings"))?;
    ensure(capped > 0, || "the stress walks never reached the cap".to_string())?;
    Ok(format!("{} archived states, max n = {max}, {capped} capped proposals", ARCHIVED.load(Ordering::Relaxed)))
}

fn dt_codes() -> Check {
    let t = trefoil().to_dt().to_lowercase();
    ensure(t == "bca", || format!("trefoil: {t}"))?;
    let f = parse_pd(FIGURE_EIGHT).unwrap().to_dt().to_lowercase();
    ensure(f == "bcda", || format!("figure-eight: {f}"))?;
    let jobs = jobs_from(&mini_seeds(), 4, |_| {});
    let mut seen = HashSet::new();
    let mut checked = 0;
    for recs in walks(&jobs) {
        for d in accepted_states(&recs).into_iter().filter(|d| d.len() <= 12) {
            if !seen.insert(d.canonical_code()) {
                continue;
            }
            let dt = d.to_dt();
            let back = from_dt(dt.as_str()).map_err(|e| format!("{dt:?} from {d}: {e}"))?;
            let (a, b) = (InvariantSet::compute(d), InvariantSet::compute(&back));
            ensure(a == b, || format!("{d} -> {dt:?} -> {back}: invariants differ"))?;
            checked += 1;
        }
    }
    Ok(format!("bca, bcda; {checked} distinct walk states with n <= 12 round-trip"))
}

#[derive(Deserialize)]
struct Case {
    task: String,
    response: String,
    expected: Option<String>,
    empty: bool,
    refusal: bool,
    rule: String,
}

fn scorer_conformance() -> Check {
    let cases: Vec<Case> = from_jsonl(include_str!("data/scorer_conformance.jsonl")).map_err(|e| e.to_string())?;
    ensure(cases.len() >= 25, || format!("{} cases", cases.len()))?;
    let rules = [
        "answer line",
        "fallback",
        "whitelist",
        "collapses",
        "first signed integer",
        "unadvertised notation rejected",
        "empty response",
    ];
    for r in rules {
        ensure(cases.iter().any(|c| c.rule.contains(r)), || format!("no case for {r:?}"))?;
    }
    for c in &cases {
        let task: TaskId = c.task.parse().map_err(|e| format!("{e}"))?;
        let r = read_response(task, &c.response);
        let got = r.parsed.as_ref().map(|p| p.to_string());
        ensure(got == c.expected && r.empty == c.empty && r.refusal == c.refusal, || {
            format!("{} {:?}: got {got:?}, want {:?} ({})", c.task, c.response, c.expected, c.rule)
        })?;
    }
    Ok(format!("{} of {} cases", cases.len(), cases.len()))
}

fn synthetic_items(task: TaskId, n: usize) -> Vec<EvalItem> {
    let vocab: &[&str] = match task.random_baseline() {
        b if b == 0.5 => &["yes", "no"],
        b if b == 0.25 => &["A", "B", "C", "D"],
        b if b > 0.0 => &["R1+", "R1-", "R2+", "R2-", "R3", "NOT-CONNECTED"],
        _ if task == TaskId::C0 => &["9", "12", "15", "18"],
        _ => &["bca", "bcda", "bcdea"],
    };
    (0..n)
        .map(|k| EvalItem {
            id: format!("{task}-{k:04}"),
            task,
            modality: task.modality(),
            images: vec![],
            pds: vec![],
            label: vocab[k % vocab.len()].to_string(),
            stratum: Stratum::ALL[k % 4],
            n_x: [9, 12, 15, 18][k % 4],
            subtype: None,
            prototypes: vec![],
        })
        .collect()
}

fn baseline_calibration() -> Check {
    const ROUNDS: u64 = 10_000;
    let mut out = Vec::new();
    for t in TaskId::ALL {
        let n = t.default_count();
        let items = synthetic_items(t, n);
        let mut correct = 0usize;
        for round in 0..ROUNDS {
            for (it, tr) in items.iter().zip(uniform_random(&items, 0, round, "uniform")) {
                correct += score_item(it, read_response(t, &tr.response).parsed.as_ref()).strict as usize;
            }
        }
        let mean = correct as f64 / (ROUNDS as usize * n) as f64;
        let base = t.random_baseline();
        let (lo, hi) = wilson((base * n as f64).round() as usize, n);
        ensure(lo <= mean && mean <= hi, || format!("{t}: {mean:.4} outside [{lo:.4}, {hi:.4}] (n = {n})"))?;
        out.push(format!("{t} {mean:.3}"));
    }
    Ok(format!("{ROUNDS} resamples per task: {}", out.join(", ")))
}

fn shortcut_signature() -> Check {
    let protos = ingest_census(MINI_CENSUS).unwrap().prototypes;
    let cfg = GenerateConfig { walks: 6, skip_render: true, ..Default::default() };
    let mut records = generate(&protos, &cfg).map_err(|e| e.to_string())?.records;
    // the signature is about labels, not pictures: stand in for lint
    for r in &mut records {
        r.lint = Some(LintReport { overlap_ratio: 1.0, parallel_close: 0.0, pass: true });
    }
    let split = make_split(&protos, &[], 0).map_err(|e| e.to_string())?;
    let pool = Pool::new(&records, &protos, &split, &[], &Split::ALL).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for task in [TaskId::B0I, TaskId::B0S] {
        let items = build_items(task, &pool, 120, &ItemConfig::default()).items;
        let report = aggregate(&items, &constant(&items, "R3", "always-R3"));
        let b0 = &report.models["always-R3"].tasks[&task];
        let share = items.iter().filter(|i| i.label == "R3").count() as f64 / items.len() as f64;
        ensure(b0.overall.accuracy == share, || format!("{task}: accuracy {} vs R3 share {share}", b0.overall.accuracy))?;
        for (label, c) in &b0.per_class {
            let want = if label == "R3" { 1.0 } else { 0.0 };
            ensure(c.accuracy == want, || format!("{task} class {label}: {}", c.accuracy))?;
        }
        ensure(b0.per_class.len() > 1, || format!("{task}: a single class"))?;
        out.push(format!("{task} {} items, accuracy = R3 share = {share:.3}", items.len()));
    }
    Ok(out.join("; "))
}

fn lint_fixtures_fail_correctly() -> Check {
    let style = RenderStyle::default();
    let clean = lint(&place(&layout(&trefoil()).map_err(|e| format!("{e:?}"))?, &style, CANVAS));
    ensure(clean.pass, || format!("clean trefoil: {clean:?}"))?;
    let blob = lint(&lint_fixtures::blob(CANVAS, style.stroke_width));
    ensure(!blob.pass && blob.overlap_ratio > 1.5, || format!("blob: {blob:?}"))?;
    let par = lint(&lint_fixtures::parallel(CANVAS, style.stroke_width));
    ensure(!par.pass && par.parallel_close > 0.05 && par.overlap_ratio <= 1.5, || format!("parallel: {par:?}"))?;
    Ok(format!(
        "trefoil {:.2}/{:.3}; blob overlap {:.2}; parallel close {:.3}",
        clean.overlap_ratio, clean.parallel_close, blob.overlap_ratio, par.parallel_close
    ))
}

fn generate_determinism() -> Check {
    let protos = ingest_census(MINI_CENSUS).unwrap().prototypes;
    // one walk per (prototype, chirality) keeps two full render+lint passes short
    let cfg = GenerateConfig { walks: 1, ..Default::default() };
    let a = generate(&protos, &cfg).map_err(|e| e.to_string())?.records;
    let b = generate(&protos, &cfg).map_err(|e| e.to_string())?.records;
    let (da, db) = (pd_digest(&a), pd_digest(&b));
    ensure(da == db, || format!("{da} vs {db}"))?;
    ensure(a == b, || "manifests differ beyond the PD level".to_string())?;
    let linted = a.iter().filter(|r| r.lint.is_some()).count();
    Ok(format!("{} records ({linted} linted), digest {}", a.len(), &da[..16]))
}

fn main() {
    let criteria: [(&str, Option<u64>, fn() -> Check); 13] = [
        ("worked-example walk trace", Some(1), worked_example),
        ("energy formula", Some(1), energy_formula),
        ("face law", Some(30), face_law),
        ("move round-trip", Some(120), move_round_trip),
        ("invariant conservation", Some(600), conservation),
        ("proposal mix", Some(60), proposal_mix),
        ("crossing cap", None, crossing_cap),
        ("DT codes", None, dt_codes),
        ("scorer conformance", None, scorer_conformance),
        ("baseline calibration", None, baseline_calibration),
        ("always-R3 shortcut signature", None, shortcut_signature),
        ("render lint", None, lint_fixtures_fail_correctly),
        ("generate determinism", None, generate_determinism),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let t0 = Instant::now();
        let res = f();
        let took = t0.elapsed();
        let res = match (res, limit) {
            (Ok(d), Some(s)) if took > Duration::from_secs(s) => Err(format!("{d}; took {took:.1?}, limit {s} s")),
            (r, _) => r,
        };
        match res {
            Ok(detail) => println!("PASS  {name}: {detail} [{took:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{took:.2?}]");
            }
        }
    }
    println!("{} of {} criteria pass", 13 - failed, 13);
    if failed > 0 {
        std::process::exit(1);
    }
}
