use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const TWO: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/two_census.csv");
const MINI: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/data/mini_census.csv");

fn knotforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knotforge"))
        .args(args)
        .env("KNOTFORGE_DETERMINISTIC", "1")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = knotforge(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn run_manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("run_manifest.json")).unwrap()).unwrap()
}

fn lines(p: &Path) -> Vec<Value> {
    fs::read_to_string(p).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

/// A PD-only corpus of the mini census, for the item-level commands.
fn desk(tmp: &Path) -> PathBuf {
    let out = tmp.join("gen");
    ok(&["generate", "--census", MINI, "--out", s(&out), "--walks", "3", "--no-render"]);
    out.join("manifest.jsonl")
}

#[test]
fn walk_writes_one_archive_per_prototype_and_chirality() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        ok(&["walk", "--census", TWO, "--out", s(d), "--walks", "8", "--seed-scheme", "paper"]);
    }
    let ma = run_manifest(&a);
    assert_eq!(ma, run_manifest(&b));
    assert!(ma.get("created_unix").is_none());
    let arts = ma["artifacts"].as_array().unwrap();
    assert_eq!(arts.len(), 4);
    for art in arts {
        let path = a.join(art["path"].as_str().unwrap());
        let recs = lines(&path);
        let mut walks: Vec<u64> = recs.iter().map(|r| r["walk_idx"].as_u64().unwrap()).collect();
        walks.dedup();
        assert_eq!(walks, (0..8).collect::<Vec<_>>(), "{}", path.display());
        // every walk opens with its seed record
        assert!(recs.iter().filter(|r| r["outcome"] == "seed").count() == 8);
    }
    let again = knotforge(&["walk", "--census", TWO, "--out", s(&a), "--walks", "8"]);
    assert_eq!(again.status.code(), Some(1), "archives are append-only");
}

#[test]
fn generate_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        ok(&["generate", "--census", MINI, "--out", s(d), "--walks", "2", "--no-render"]);
    }
    let ma = run_manifest(&a);
    assert_eq!(ma, run_manifest(&b));
    assert_eq!(ma["digests"]["templates"].as_str().unwrap().len(), 64);
    let paths: Vec<&str> = ma["artifacts"].as_array().unwrap().iter().map(|a| a["path"].as_str().unwrap()).collect();
    assert!(paths.contains(&"manifest.jsonl"));
    assert_eq!(paths.iter().filter(|p| p.starts_with("trajectories/")).count(), 10);
}

#[test]
fn tasks_builds_a_balanced_locked_set() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = desk(tmp.path());
    let out = tmp.path().join("tasks");
    let stdout = ok(&[
        "tasks", "--census", MINI, "--manifest", s(&manifest), "--out", s(&out), "--n", "A2_S=10", "--splits", "all",
        "--allow-unlinted",
    ]);
    assert!(stdout.contains("A2-S=10"), "{stdout}");
    let items = lines(&out.join("eval.jsonl"));
    assert_eq!(items.len(), 10);
    assert!(items.iter().all(|i| i["task"] == "A2-S"));
    assert_eq!(items.iter().filter(|i| i["label"] == "yes").count(), 5);
    assert_eq!(lines(&out.join("prompts.jsonl")).len(), 10);

    let lock = out.join("eval.lock.json");
    let t = tmp.path().join("t.jsonl");
    ok(&["synth", "--eval", s(&out.join("eval.jsonl")), "--answerer", "oracle", "--out", s(&t)]);
    ok(&["report", "--eval", s(&out.join("eval.jsonl")), "--transcripts", s(&t), "--lock", s(&lock)]);

    // an edited eval set no longer matches its lock
    let edited = tmp.path().join("edited.jsonl");
    fs::write(&edited, fs::read_to_string(out.join("eval.jsonl")).unwrap().replacen("\"yes\"", "\"no\"", 1)).unwrap();
    let bad = knotforge(&["report", "--eval", s(&edited), "--transcripts", s(&t), "--lock", s(&lock)]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn report_shows_the_always_r3_signature() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = desk(tmp.path());
    let out = tmp.path().join("tasks");
    ok(&[
        "tasks", "--census", MINI, "--manifest", s(&manifest), "--out", s(&out), "--n", "B0_S=30", "--splits", "all",
        "--allow-unlinted",
    ]);
    let eval = out.join("eval.jsonl");
    let t = tmp.path().join("r3.jsonl");
    ok(&["synth", "--eval", s(&eval), "--answerer", "constant:R3", "--out", s(&t)]);
    let table = ok(&["report", "--eval", s(&eval), "--transcripts", s(&t)]);
    let class_line = table.lines().find(|l| l.starts_with("always-R3 B0-S per class:")).expect(&table);
    assert!(class_line.contains("R3 100.0%"), "{class_line}");
    for other in ["R1+", "R1-", "R2+", "R2-", "NOT-CONNECTED"] {
        assert!(!class_line.contains(&format!("{other} ")) || class_line.contains(&format!("{other} 0.0%")), "{class_line}");
    }

    let scored = tmp.path().join("scored");
    ok(&["score", "--eval", s(&eval), "--transcripts", s(&t), "--out", s(&scored)]);
    let report: Value = serde_json::from_str(&fs::read_to_string(scored.join("report.json")).unwrap()).unwrap();
    let b0 = &report["models"]["always-R3"]["tasks"]["B0-S"];
    let r3 = lines(&eval).iter().filter(|i| i["label"] == "R3").count() as f64 / 30.0;
    assert!((b0["accuracy"].as_f64().unwrap() - r3).abs() < 1e-12);
    assert_eq!(lines(&scored.join("scored.jsonl")).len(), 30);
}

#[test]
fn export_feeds_an_external_checker() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = desk(tmp.path());
    let out = tmp.path().join("x");
    ok(&["export", "--census", MINI, "--manifest", s(&manifest), "--out", s(&out), "--per-prototype", "4"]);
    assert_eq!(lines(&out.join("seeds.jsonl")).len(), 5);
    assert_eq!(lines(&out.join("states.jsonl")).len(), 20);
    let flips = lines(&out.join("flipped.jsonl"));
    assert!(flips.iter().all(|f| f["invariants_differ"] == true));
    let fixtures = lines(&out.join("dt_fixtures.jsonl"));
    let bca = fixtures.iter().find(|f| f["id"] == "3_1-bca").unwrap();
    assert_eq!((bca["permissive"].as_bool(), bca["decode_error"].is_null()), (Some(true), true));
    let abcde = fixtures.iter().find(|f| f["id"] == "4_1-abcde").unwrap();
    assert_eq!(abcde["permissive"], false);
}

#[test]
fn input_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    for args in [
        vec!["walk", "--census", "/no/such/census.csv", "--out", s(&out)],
        vec!["walk", "--census", TWO, "--out", s(&out), "--length-min", "9", "--length-max", "3"],
        vec!["tasks", "--census", MINI, "--manifest", MINI, "--out", s(&out)],
        vec!["tasks", "--census", MINI, "--manifest", MINI, "--out", s(&out), "--n", "Z9=3"],
        vec!["lint", "--pd", "[[1,2,3]]"],
        vec!["frobnicate"],
    ] {
        let o = knotforge(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(knotforge(&["--help"]).status.code(), Some(0));
}
