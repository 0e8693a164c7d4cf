use std::collections::BTreeMap;

use knotforge::bench::corpus::from_jsonl;
use knotforge::bench::{
    build_items, generate, ingest_census, make_split, EvalItem, GenerateConfig, ItemConfig, Pool, Split, Stratum, TaskId,
};
use knotforge::render::LintReport;
use knotforge::score::synthetic::{bootstrap_mean, constant, oracle, uniform_random};
use knotforge::score::{aggregate, read_response, score_item, text_table, wilson};
use serde::Deserialize;

#[derive(Deserialize)]
struct Case {
    task: String,
    response: String,
    expected: Option<String>,
    empty: bool,
    refusal: bool,
    rule: String,
}

#[test]
fn conformance_fixture() {
    let cases: Vec<Case> = from_jsonl(include_str!("data/scorer_conformance.jsonl")).unwrap();
    assert!(cases.len() >= 25);
    for c in &cases {
        let task: TaskId = c.task.parse().unwrap();
        let r = read_response(task, &c.response);
        assert_eq!(r.parsed.as_ref().map(|p| p.to_string()), c.expected, "{}: {:?}", c.rule, c.response);
        assert_eq!(r.empty, c.empty, "{}", c.rule);
        assert_eq!(r.refusal, c.refusal, "{}", c.rule);
    }
}

fn synthetic_items() -> Vec<EvalItem> {
    let mut out = Vec::new();
    for t in TaskId::ALL {
        for k in 0..40usize {
            let label = match t.random_baseline() {
                b if b == 0.5 => ["yes", "no"][k % 2].to_string(),
                _ if t == TaskId::D1 => ["A", "B", "C", "D"][k % 4].to_string(),
                _ if t == TaskId::C0 => (8 + k % 13).to_string(),
                _ if t == TaskId::C1 => "bcda".to_string(),
                _ => ["R1+", "R1-", "R2+", "R2-", "R3", "NOT-CONNECTED"][k % 6].to_string(),
            };
            out.push(EvalItem {
                id: format!("{t}-{k:04}"),
                task: t,
                modality: t.modality(),
                images: vec![],
                pds: vec![],
                label,
                stratum: Stratum::ALL[k % 4],
                n_x: [9, 12, 15, 18][k % 4],
                subtype: None,
                prototypes: vec!["4_1".into()],
            });
        }
    }
    out
}

#[test]
fn all_correct_answers_score_one() {
    let items = synthetic_items();
    let r = aggregate(&items, &oracle(&items, "oracle"));
    let m = &r.models["oracle"];
    for (t, tr) in &m.tasks {
        assert_eq!(tr.overall.accuracy, 1.0, "{t}");
        assert_eq!(tr.permissive_accuracy.unwrap_or(1.0), 1.0);
        for b in tr.by_stratum.values() {
            assert!(b.wilson95.0 <= b.accuracy && b.accuracy <= b.wilson95.1);
        }
    }
    assert_eq!(m.mean_accuracy, 1.0);
    assert!(r.warnings.is_empty());
}

#[test]
fn scoring_is_pure() {
    let items = synthetic_items();
    let tr = uniform_random(&items, 3, 0, "rand");
    assert_eq!(aggregate(&items, &tr).to_json(), aggregate(&items, &tr).to_json());
}

#[test]
fn uniform_answers_sit_at_the_baselines() {
    let items = synthetic_items();
    for t in TaskId::ALL {
        let its: Vec<EvalItem> = items.iter().filter(|i| i.task == t).cloned().collect();
        let mut outcomes = Vec::new();
        for round in 0..50 {
            for (it, tr) in its.iter().zip(uniform_random(&its, 11, round, "u")) {
                let r = read_response(t, &tr.response);
                outcomes.push(score_item(it, r.parsed.as_ref()).strict);
            }
        }
        let mean = bootstrap_mean(&outcomes, 200, 5);
        let k = (t.random_baseline() * outcomes.len() as f64).round() as usize;
        let (lo, hi) = wilson(k, outcomes.len());
        assert!(lo <= mean && mean <= hi, "{t}: {mean} not in [{lo}, {hi}]");
    }
}

#[test]
fn always_r3_reproduces_the_shortcut_signature() {
    let census = include_str!("data/mini_census.csv");
    let protos = ingest_census(census).unwrap().prototypes;
    let cfg = GenerateConfig { walks: 4, skip_render: true, ..Default::default() };
    let mut records = generate(&protos, &cfg).unwrap().records;
    for r in &mut records {
        r.lint = Some(LintReport { overlap_ratio: 1.0, parallel_close: 0.0, pass: true });
    }
    let split = make_split(&protos, &[], 0).unwrap();
    let pool = Pool::new(&records, &protos, &split, &[], &Split::ALL).unwrap();
    let items = build_items(TaskId::B0S, &pool, 60, &ItemConfig::default()).items;
    let report = aggregate(&items, &constant(&items, "R3", "always-r3"));
    let b0 = &report.models["always-r3"].tasks[&TaskId::B0S];
    let mut share: BTreeMap<&str, usize> = BTreeMap::new();
    for it in &items {
        *share.entry(it.label.as_str()).or_default() += 1;
    }
    let r3_share = share.get("R3").copied().unwrap_or(0) as f64 / items.len() as f64;
    assert!(r3_share > 0.0);
    assert_eq!(b0.overall.accuracy, r3_share);
    for (label, c) in &b0.per_class {
        assert_eq!(c.accuracy, if label == "R3" { 1.0 } else { 0.0 }, "{label}");
    }
    assert_eq!(b0.answer_marginals.len(), 1);
    assert!(text_table(&report).contains("B0-S per class: "));
}
