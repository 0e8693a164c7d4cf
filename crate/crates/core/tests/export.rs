use std::collections::HashMap;

use knotforge::bench::corpus::{from_jsonl, to_jsonl};
use knotforge::bench::export::{dt_fixtures, flipped, sample_states, seeds, DtFixture};
use knotforge::bench::{generate, ingest_census, is_alternating, GenerateConfig, Prototype};
use knotforge::invariants::determinant;
use knotforge::{parse_pd, InvariantSet};

const CENSUS: &str = include_str!("data/mini_census.csv");
const FIXTURES: &str = include_str!("data/dt_fixtures.jsonl");

fn protos() -> Vec<Prototype> {
    ingest_census(CENSUS).unwrap().prototypes
}

// `knotforge generate --walks 2 --no-render` then `export --per-prototype 10`
fn regenerate(protos: &[Prototype]) -> (Vec<DtFixture>, HashMap<String, String>) {
    let cfg = GenerateConfig { walks: 2, skip_render: true, ..Default::default() };
    let records = generate(protos, &cfg).unwrap().records;
    let states = sample_states(&records, 10, 0);
    let pds = states.iter().map(|s| (format!("{}-dt", s.subject), s.pd.clone())).collect();
    (dt_fixtures(protos, &states).unwrap(), pds)
}

#[test]
fn checked_in_fixture_set_is_current() {
    let (fx, _) = regenerate(&protos());
    assert_eq!(to_jsonl(&fx), FIXTURES, "regenerate tests/data/dt_fixtures.jsonl");
}

#[test]
fn fixture_verdicts_follow_from_first_principles() {
    let protos = protos();
    let by_id: HashMap<&str, &Prototype> = protos.iter().map(|p| (p.id.as_str(), p)).collect();
    let fx: Vec<DtFixture> = from_jsonl(FIXTURES).unwrap();
    let (_, state_pds) = regenerate(&protos);
    assert!(fx.len() >= 50);
    for f in &fx {
        let truth = by_id[f.truth.as_str()];
        match f.note.as_str() {
            "malformed" => assert!(f.decode_error.is_some() && !f.permissive, "{}", f.id),
            // a lowercased code keeps the crossings' order; only an alternating
            // diagram is guaranteed to decode back to the same knot
            "walk state, lowercased" => {
                assert!(f.decode_error.is_none(), "{}", f.id);
                let d = parse_pd(&state_pds[&f.id]).unwrap();
                if is_alternating(&d) {
                    assert!(f.permissive, "{}", f.id);
                }
            }
            "another prototype" => {
                let other = by_id[f.id.split("-vs-").next().unwrap()];
                let differ = determinant(&other.seed) != determinant(&truth.seed)
                    || other.invariants.alexander != truth.invariants.alexander;
                assert!(differ && !f.permissive, "{}", f.id);
            }
            _ => {}
        }
    }
    for p in &protos {
        assert!(is_alternating(&p.seed));
        for suffix in ["seed", "seed-upper", "mirror"] {
            let f = fx.iter().find(|f| f.id == format!("{}-{suffix}", p.id)).unwrap();
            assert!(f.permissive, "{}", f.id);
        }
    }
    let bca = fx.iter().find(|f| f.id == "3_1-bca").unwrap();
    assert!(bca.permissive);
    let abcde = fx.iter().find(|f| f.id == "4_1-abcde").unwrap();
    assert!(!abcde.permissive);
}

#[test]
fn flipped_seeds_are_unknots_here() {
    // every mini-census seed is a minimal alternating diagram; switching one
    // crossing of 3_1 or 4_1 unknots it (determinant 1)
    let protos = protos();
    let flips = flipped(&protos);
    for f in &flips {
        assert!(f.invariants_differ, "{}", f.subject);
    }
    for id in ["3_1", "4_1"] {
        let f = flips.iter().find(|f| f.prototype == id).unwrap();
        let d = parse_pd(&f.pd).unwrap();
        assert_eq!(determinant(&d), 1);
        assert_eq!(InvariantSet::compute(&d).signature, 0);
    }
}

#[test]
fn seed_exports_round_trip() {
    let protos = protos();
    let text = to_jsonl(&seeds(&protos));
    let back: Vec<knotforge::bench::export::SeedExport> = from_jsonl(&text).unwrap();
    for (s, p) in back.iter().zip(&protos) {
        assert_eq!(parse_pd(&s.pd).unwrap(), p.seed);
        assert_eq!(s.dt, p.seed.to_dt().0);
        assert_eq!(s.invariants, p.invariants);
    }
}
