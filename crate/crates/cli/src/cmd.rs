use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use itertools::Itertools;
use knotforge::bench::corpus::{draw, from_jsonl, lint_render, to_jsonl};
use knotforge::bench::{
    build_all, counts_with, export, generate as run_generate, ingest_census, make_split, pd_digest, render_prompt,
    template_digest, CensusIngest, EvalItem, GenerateConfig, GenerateError, ItemConfig, Lockfile, ManifestRecord, Pool,
    Prototype,
};
use knotforge::digest::sha256_hex;
use knotforge::invariants::{find_mutant_collisions, InvariantSet, MutantRecord};
use knotforge::render::{LintReport, RenderStyle};
use knotforge::score::synthetic::{constant, oracle, uniform_random};
use knotforge::score::{aggregate_with, read_response, score_item_against, text_table, ScoreReport, Transcript};
use knotforge::walker::append_walk;
use knotforge::{parse_pd, walker::archive_path, walker::Chirality};
use serde::Serialize;

use crate::error::CliError;
use crate::run_manifest::RunManifest;
use crate::{
    Answerer, ExportArgs, GenerateArgs, Graded, LintArgs, RenderArgs, ReportArgs, ScoreArgs, SplitArg, SynthArgs,
    TasksArgs, WalkArgs,
};

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn jsonl<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    from_jsonl(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn census(path: &Path) -> Result<(CensusIngest, String), CliError> {
    let text = read(path)?;
    let ingest = ingest_census(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    for e in &ingest.errors {
        log::warn!("{}:{}: {}", path.display(), e.line, e.message);
    }
    if ingest.prototypes.is_empty() {
        return Err(CliError::Input(format!("{}: no usable prototypes", path.display())));
    }
    log::info!("{} prototypes from {}", ingest.prototypes.len(), path.display());
    Ok((ingest, sha256_hex(text.as_bytes())))
}

/// Mutant collisions among prototypes small enough to carry a Jones polynomial.
fn mutants(protos: &[Prototype]) -> Vec<MutantRecord> {
    let with_jones: Vec<Prototype> = protos.iter().filter(|p| p.invariants.jones.is_some()).cloned().collect();
    if with_jones.len() < protos.len() {
        log::warn!("{} prototypes above the Jones cutoff are left out of mutant detection", protos.len() - with_jones.len());
    }
    find_mutant_collisions(&with_jones).expect("filtered to prototypes with Jones")
}

fn generate_config(a: &WalkArgs, skip_render: bool) -> Result<GenerateConfig, CliError> {
    if a.length_min > a.length_max {
        return Err(CliError::input("--length-min exceeds --length-max"));
    }
    Ok(GenerateConfig {
        walks: a.walks,
        min_len: a.length_min,
        max_len: a.length_max,
        crossing_cap: a.cap,
        skip_render,
        ..Default::default()
    })
}

fn generate_error(e: GenerateError) -> CliError {
    match e {
        GenerateError::Invariant { .. } => CliError::Internal(e.to_string()),
        GenerateError::Walk { .. } => CliError::Input(e.to_string()),
    }
}

/// Walks every prototype and writes the trajectory archives; returns the
/// corpus records for the caller to extend.
fn walk_into(a: &WalkArgs, skip_render: bool, m: &mut RunManifest) -> Result<Vec<ManifestRecord>, CliError> {
    let (ingest, digest) = census(&a.census)?;
    let cfg = generate_config(a, skip_render)?;
    m.census_sha256 = Some(digest);
    m.config("generate", &cfg);
    m.config("seed_scheme", &a.seed_scheme);
    let dir = a.out.join("trajectories");
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    for p in &ingest.prototypes {
        for chir in [Chirality::Orig, Chirality::Mirror] {
            let path = archive_path(&dir, &p.id, chir);
            if path.exists() {
                return Err(CliError::Input(format!("{} exists; archives are append-only", path.display())));
            }
        }
    }
    let corpus = run_generate(&ingest.prototypes, &cfg).map_err(generate_error)?;
    let mut files = Vec::new();
    // one writer, walks in order: appends to an archive never interleave
    for (wc, recs) in &corpus.walks {
        let path = append_walk(&dir, wc, recs).map_err(|e| CliError::io(&dir, e))?;
        if files.last() != Some(&path) && !files.contains(&path) {
            files.push(path);
        }
    }
    for f in &files {
        m.record(f)?;
    }
    log::info!("{} walks, {} accepted states", corpus.walks.len(), corpus.records.len());
    Ok(corpus.records)
}

pub fn walk(a: &WalkArgs) -> Result<(), CliError> {
    let mut m = RunManifest::new("walk", &a.out);
    walk_into(a, true, &mut m)?;
    m.finish()
}

pub fn generate(a: &GenerateArgs) -> Result<(), CliError> {
    let mut m = RunManifest::new("generate", &a.walk.out);
    let records = walk_into(&a.walk, a.no_render, &mut m)?;
    m.digests.insert("manifest_pd".into(), pd_digest(&records));
    m.digests.insert("templates".into(), template_digest());
    m.write("manifest.jsonl", to_jsonl(&records).as_bytes())?;
    if a.images {
        let passing: Vec<&ManifestRecord> = records.iter().filter(|r| r.lint_pass()).collect();
        write_drawings(&passing, "images", &mut m)?;
    }
    let passed = records.iter().filter(|r| r.lint_pass()).count();
    println!("{} records, {} pass lint, PD digest {}", records.len(), passed, m.digests["manifest_pd"]);
    m.finish()
}

fn write_drawings(records: &[&ManifestRecord], sub: &str, m: &mut RunManifest) -> Result<usize, CliError> {
    use rayon::prelude::*;
    let drawn: Vec<Option<(Vec<u8>, String)>> = records
        .par_iter()
        .map(|r| parse_pd(&r.pd).ok().and_then(|d| draw(&d, &r.style)))
        .collect();
    let mut n = 0;
    for (r, d) in records.iter().zip(drawn) {
        match d {
            Some((png, svg)) => {
                m.write(&format!("{sub}/{}.png", r.render_id), &png)?;
                m.write(&format!("{sub}/{}.svg", r.render_id), svg.as_bytes())?;
                n += 1;
            }
            None => log::warn!("{}: no faithful layout", r.render_id),
        }
    }
    Ok(n)
}

pub fn render(a: &RenderArgs) -> Result<(), CliError> {
    let records: Vec<ManifestRecord> = jsonl(&a.manifest)?;
    let chosen: Vec<&ManifestRecord> = if a.ids.is_empty() {
        records.iter().collect()
    } else {
        let by_id: HashMap<&str, &ManifestRecord> = records.iter().map(|r| (r.render_id.as_str(), r)).collect();
        a.ids
            .iter()
            .map(|id| by_id.get(id.as_str()).copied().ok_or_else(|| CliError::Input(format!("unknown render id {id}"))))
            .collect::<Result<_, _>>()?
    };
    let mut m = RunManifest::new("render", &a.out);
    m.digests.insert("manifest_pd".into(), pd_digest(&records));
    let n = write_drawings(&chosen, "images", &mut m)?;
    println!("{n} of {} drawn", chosen.len());
    m.finish()
}

#[derive(Serialize)]
struct LintLine<'a> {
    render_id: &'a str,
    lint: Option<LintReport>,
    /// The manifest's stored report differs from the recomputed one.
    changed: bool,
}

pub fn lint(a: &LintArgs) -> Result<(), CliError> {
    use rayon::prelude::*;
    if let Some(pd) = &a.pd {
        let d = parse_pd(pd).map_err(CliError::input)?;
        let report = lint_render(&d, &RenderStyle::default());
        let json = serde_json::to_string(&report).expect("report serializes");
        println!("{json}");
        if let Some(out) = &a.out {
            fs::write(out, json + "\n").map_err(|e| CliError::io(out, e))?;
        }
        return Ok(());
    }
    let path = a.manifest.as_ref().expect("clap requires --manifest or --pd");
    let records: Vec<ManifestRecord> = jsonl(path)?;
    let lints: Vec<Option<LintReport>> = records
        .par_iter()
        .map(|r| Ok(lint_render(&parse_pd(&r.pd).map_err(|e| CliError::Input(format!("{}: {e}", r.render_id)))?, &r.style)))
        .collect::<Result<_, CliError>>()?;
    let lines: Vec<LintLine> = records
        .iter()
        .zip(&lints)
        .map(|(r, l)| LintLine { render_id: &r.render_id, lint: *l, changed: r.lint != *l })
        .collect();
    let pass = lints.iter().filter(|l| l.is_some_and(|l| l.pass)).count();
    let changed = lines.iter().filter(|l| l.changed).count();
    println!("{pass} of {} pass lint; {changed} differ from the manifest", records.len());
    if let Some(out) = &a.out {
        fs::write(out, to_jsonl(&lines)).map_err(|e| CliError::io(out, e))?;
    }
    Ok(())
}

pub fn tasks(a: &TasksArgs) -> Result<(), CliError> {
    for (name, v) in [("--not-connected-share", a.not_connected_share), ("--d0-positive-share", a.d0_positive_share)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(CliError::Input(format!("{name} must lie in [0, 1]")));
        }
    }
    let (ingest, census_digest) = census(&a.census)?;
    let protos = &ingest.prototypes;
    let mut records: Vec<ManifestRecord> = jsonl(&a.manifest)?;
    if a.allow_unlinted {
        for r in records.iter_mut().filter(|r| r.lint.is_none()) {
            r.lint = Some(LintReport { overlap_ratio: 0.0, parallel_close: 0.0, pass: true });
        }
    }
    let mutants = mutants(protos);
    let split = make_split(protos, &mutants, a.seed).map_err(CliError::input)?;
    let splits = SplitArg::expand(&a.splits);
    let cfg = ItemConfig {
        seed: a.seed,
        splits: splits.clone(),
        not_connected_share: a.not_connected_share,
        d0_positive_share: a.d0_positive_share,
        ..Default::default()
    };
    let pool = Pool::new(&records, protos, &split, &mutants, &splits)
        .map_err(|e| CliError::Input(format!("{}: {e}", a.manifest.display())))?;
    let counts = if a.counts.is_empty() { counts_with(&[]) } else { a.counts.clone() };
    let built = build_all(&pool, &counts, &cfg);
    for s in &built.shortfalls {
        log::warn!("{} {}: built {} of {} ({})", s.task, s.stratum.as_str(), s.built, s.wanted, s.reason);
    }
    let eval = to_jsonl(&built.items);
    let prompts: Vec<_> = built.items.iter().map(|it| (it.id.clone(), render_prompt(it))).collect();
    let lock = Lockfile::new(&eval, &built.items, &records);

    let mut m = RunManifest::new("tasks", &a.out);
    m.census_sha256 = Some(census_digest);
    m.config("items", &cfg);
    m.config("counts", &counts);
    m.digests.insert("manifest_pd".into(), lock.manifest_pd_sha256.clone());
    m.digests.insert("templates".into(), lock.template_sha256.clone());
    m.digests.insert("eval_set".into(), lock.eval_set_sha256.clone());
    m.write("eval.jsonl", eval.as_bytes())?;
    m.write("prompts.jsonl", to_jsonl(&prompts.iter().map(|(id, p)| PromptLine { id, prompt: p }).collect_vec()).as_bytes())?;
    m.write("split.json", json_pretty(&split).as_bytes())?;
    m.write("shortfalls.json", json_pretty(&built.shortfalls).as_bytes())?;
    let lock_json = json_pretty(&lock);
    match &a.lock {
        Some(p) => {
            fs::write(p, &lock_json).map_err(|e| CliError::io(p, e))?;
            m.record(p)?;
        }
        None => m.write("eval.lock.json", lock_json.as_bytes())?,
    }
    let per_task = built.items.iter().counts_by(|i| i.task);
    println!(
        "{} items ({}); eval set sha256 {}",
        built.items.len(),
        counts.iter().map(|(t, _)| format!("{t}={}", per_task.get(t).copied().unwrap_or(0))).join(", "),
        lock.eval_set_sha256
    );
    m.finish()
}

#[derive(Serialize)]
struct PromptLine<'a> {
    id: &'a str,
    #[serde(flatten)]
    prompt: &'a knotforge::bench::Prompt,
}

fn json_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn synth(a: &SynthArgs) -> Result<(), CliError> {
    let items: Vec<EvalItem> = jsonl(&a.eval)?;
    let (default_model, transcripts) = match &a.answerer {
        Answerer::Oracle => ("oracle".to_string(), oracle(&items, "")),
        Answerer::Uniform => ("uniform".to_string(), uniform_random(&items, a.seed, a.round, "")),
        Answerer::Constant(ans) => (format!("always-{ans}"), constant(&items, ans, "")),
    };
    let model = a.model.clone().unwrap_or(default_model);
    let transcripts: Vec<Transcript> = transcripts.into_iter().map(|t| Transcript { model: model.clone(), ..t }).collect();
    fs::write(&a.out, to_jsonl(&transcripts)).map_err(|e| CliError::io(&a.out, e))?;
    println!("{} transcripts for {model}", transcripts.len());
    Ok(())
}

struct Loaded {
    items: Vec<EvalItem>,
    transcripts: Vec<Transcript>,
    knots: HashMap<String, InvariantSet>,
}

fn load(g: &Graded) -> Result<Loaded, CliError> {
    let eval_text = read(&g.eval)?;
    if let Some(lock) = &g.lock {
        let lock: Lockfile =
            serde_json::from_str(&read(lock)?).map_err(|e| CliError::Input(format!("{}: {e}", lock.display())))?;
        if !lock.verify(&eval_text) {
            return Err(CliError::Input(format!("{} does not match its lockfile", g.eval.display())));
        }
    }
    let items: Vec<EvalItem> = from_jsonl(&eval_text).map_err(|e| CliError::Input(format!("{}: {e}", g.eval.display())))?;
    let mut transcripts = Vec::new();
    for p in &g.transcripts {
        transcripts.extend(jsonl::<Transcript>(p)?);
    }
    let knots = match &g.census {
        Some(c) => census(c)?.0.prototypes.into_iter().map(|p| (p.id, p.invariants)).collect(),
        None => HashMap::new(),
    };
    Ok(Loaded { items, transcripts, knots })
}

fn graded(l: &Loaded) -> ScoreReport {
    let report = aggregate_with(&l.items, &l.transcripts, &l.knots);
    for w in &report.warnings {
        log::warn!("{w}");
    }
    report
}

#[derive(Serialize)]
struct ScoredLine<'a> {
    item_id: &'a str,
    model: &'a str,
    task: knotforge::bench::TaskId,
    answer: Option<String>,
    parsed: Option<String>,
    empty: bool,
    refusal: bool,
    strict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    permissive: Option<bool>,
}

pub fn score(a: &ScoreArgs) -> Result<(), CliError> {
    let l = load(&a.graded)?;
    let report = graded(&l);
    let by_id: HashMap<&str, &EvalItem> = l.items.iter().map(|i| (i.id.as_str(), i)).collect();
    // last transcript wins, as in the aggregate
    let mut latest: BTreeMap<(&str, &str), &Transcript> = BTreeMap::new();
    for t in &l.transcripts {
        if by_id.contains_key(t.item_id.as_str()) {
            latest.insert((t.model.as_str(), t.item_id.as_str()), t);
        }
    }
    let lines: Vec<ScoredLine> = latest
        .values()
        .map(|t| {
            let it = by_id[t.item_id.as_str()];
            let r = read_response(it.task, &t.response);
            let truth = it.prototypes.first().and_then(|p| l.knots.get(p));
            let s = score_item_against(it, r.parsed.as_ref(), truth);
            ScoredLine {
                item_id: &it.id,
                model: &t.model,
                task: it.task,
                parsed: r.parsed.as_ref().map(|p| p.to_string()),
                answer: r.answer,
                empty: r.empty,
                refusal: r.refusal,
                strict: s.strict,
                permissive: s.permissive,
            }
        })
        .collect();
    let mut m = RunManifest::new("score", &a.out);
    m.digests.insert("eval_set".into(), sha256_hex(read(&a.graded.eval)?.as_bytes()));
    m.write("report.json", (report.to_json() + "\n").as_bytes())?;
    m.write("scored.jsonl", to_jsonl(&lines).as_bytes())?;
    print!("{}", text_table(&report));
    m.finish()
}

pub fn report(a: &ReportArgs) -> Result<(), CliError> {
    let l = load(&a.graded)?;
    let table = text_table(&graded(&l));
    print!("{table}");
    if let Some(out) = &a.out {
        fs::write(out, &table).map_err(|e| CliError::io(out, e))?;
    }
    Ok(())
}

pub fn export(a: &ExportArgs) -> Result<(), CliError> {
    let (ingest, census_digest) = census(&a.census)?;
    let protos = &ingest.prototypes;
    let records: Vec<ManifestRecord> = jsonl(&a.manifest)?;
    let states = export::sample_states(&records, a.per_prototype, a.seed);
    let fixtures = export::dt_fixtures(protos, &states).map_err(|e| CliError::Input(format!("{}: {e}", a.manifest.display())))?;
    let mut m = RunManifest::new("export", &a.out);
    m.census_sha256 = Some(census_digest);
    m.digests.insert("manifest_pd".into(), pd_digest(&records));
    m.write("seeds.jsonl", to_jsonl(&export::seeds(protos)).as_bytes())?;
    m.write("states.jsonl", to_jsonl(&states).as_bytes())?;
    m.write("flipped.jsonl", to_jsonl(&export::flipped(protos)).as_bytes())?;
    m.write("dt_fixtures.jsonl", to_jsonl(&fixtures).as_bytes())?;
    m.write("mutants.jsonl", to_jsonl(&export::mutant_pairs(protos, &mutants(protos))).as_bytes())?;
    println!("{} seeds, {} states, {} DT fixtures", protos.len(), states.len(), fixtures.len());
    m.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use knotforge::walker::WalkError;

    #[test]
    fn invariant_breaches_exit_2() {
        let breach = GenerateError::Invariant {
            prototype: "3_1".into(),
            chirality: Chirality::Orig,
            walk: 0,
            step: 4,
            what: "face count".into(),
        };
        assert_eq!(generate_error(breach).code(), 2);
        let bad = GenerateError::Walk {
            prototype: "3_1".into(),
            chirality: Chirality::Orig,
            walk: 0,
            source: WalkError::SeedAboveCap { n: 3, cap: 2 },
        };
        assert_eq!(generate_error(bad).code(), 1);
    }
}
