//! Answer extraction, normalisation, scoring and report aggregation.

mod parse;
pub mod synthetic;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::{EvalItem, Stratum, TaskId};
use crate::invariants::InvariantSet;
use crate::pd::from_dt;

pub use parse::{extract_answer, is_refusal, normalize, parse_label, read_response, ParsedAnswer, Reading, ANSWER_PREFIX};

/// One model response to one item.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub item_id: String,
    pub model: String,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<u64>,
}

/// DT strings longer than this are not decoded for the permissive tier.
pub const PERMISSIVE_MAX_DT: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ItemScore {
    pub strict: bool,
    /// C1 only: the answer decodes to a diagram of the same knot.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permissive: Option<bool>,
}

/// The permissive C1 verdict: `answer` decodes to the knot `truth`
/// describes, either handedness.
pub fn permissive_c1(answer: &str, truth: &InvariantSet) -> bool {
    if answer.len() > PERMISSIVE_MAX_DT {
        return false;
    }
    let Ok(a) = from_dt(answer) else { return false };
    // the handedness of a lowercased code is not meaningful
    InvariantSet::compute(&a).matches_up_to_mirror(truth)
}

/// Strict score, plus the permissive C1 tier judged against the knot of
/// the label's own decoding.
pub fn score_item(item: &EvalItem, parsed: Option<&ParsedAnswer>) -> ItemScore {
    score_item_against(item, parsed, None)
}

/// As [`score_item`], with the C1 knot given by `truth` (the prototype's
/// invariants) when known. Lowercased labels of non-alternating diagrams
/// decode to a different knot, so the prototype is the better reference.
pub fn score_item_against(item: &EvalItem, parsed: Option<&ParsedAnswer>, truth: Option<&InvariantSet>) -> ItemScore {
    let label = parse_label(item.task, &item.label);
    let strict = parsed.is_some() && parsed == label.as_ref();
    let permissive = (item.task == TaskId::C1).then(|| match parsed {
        Some(ParsedAnswer::Dt(s)) => {
            strict
                || match truth {
                    Some(t) => permissive_c1(s, t),
                    None => from_dt(&item.label).is_ok_and(|d| permissive_c1(s, &InvariantSet::compute(&d))),
                }
        }
        _ => false,
    });
    ItemScore { strict, permissive }
}

const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval at 95% for `k` successes in `n` trials.
pub fn wilson(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // exact at the ends, where rounding could leave p outside
    let lo = if k == 0.0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Binned {
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub wilson95: (f64, f64),
}

impl Binned {
    fn add(&mut self, ok: bool) {
        self.n += 1;
        self.correct += ok as usize;
    }

    fn finish(&mut self) {
        self.accuracy = if self.n == 0 { 0.0 } else { self.correct as f64 / self.n as f64 };
        self.wilson95 = wilson(self.correct, self.n);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct YesBias {
    pub answered_yes: f64,
    pub truth_yes: f64,
    /// `answered_yes - truth_yes`.
    pub bias: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaskReport {
    #[serde(flatten)]
    pub overall: Binned,
    pub random_baseline: f64,
    pub deviation_from_random: f64,
    pub empty: usize,
    pub refusals: usize,
    pub unparsed: usize,
    /// Items with no transcript; scored wrong.
    pub missing: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permissive_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub yes_bias: Option<YesBias>,
    pub by_stratum: BTreeMap<Stratum, Binned>,
    /// Accuracy conditioned on the true label (B0).
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub per_class: BTreeMap<String, Binned>,
    /// How often each answer was given (B0, D1).
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub answer_marginals: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub by_subtype: BTreeMap<String, Binned>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelReport {
    pub tasks: BTreeMap<TaskId, TaskReport>,
    /// Unweighted mean of the task accuracies.
    pub mean_accuracy: f64,
    pub empty: usize,
    pub refusals: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoreReport {
    pub items: usize,
    pub models: BTreeMap<String, ModelReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ScoreReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// One scored (item, model) pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scored {
    pub reading: Option<Reading>,
    pub score: ItemScore,
}

/// Scores every (item, model) pair. A model is any tag that appears in the
/// transcripts; each is scored against the full item set.
pub fn aggregate(items: &[EvalItem], transcripts: &[Transcript]) -> ScoreReport {
    aggregate_with(items, transcripts, &HashMap::new())
}

/// As [`aggregate`], with prototype invariants for the permissive C1 tier.
pub fn aggregate_with(items: &[EvalItem], transcripts: &[Transcript], knots: &HashMap<String, InvariantSet>) -> ScoreReport {
    let mut warnings = Vec::new();
    let known: HashMap<&str, &EvalItem> = items.iter().map(|i| (i.id.as_str(), i)).collect();
    let mut by_model: BTreeMap<&str, HashMap<&str, &Transcript>> = BTreeMap::new();
    for t in transcripts {
        if !known.contains_key(t.item_id.as_str()) {
            warnings.push(format!("transcript for unknown item {:?} ({})", t.item_id, t.model));
            continue;
        }
        let m = by_model.entry(t.model.as_str()).or_default();
        if m.insert(t.item_id.as_str(), t).is_some() {
            warnings.push(format!("duplicate transcript for {} ({}); the last one is used", t.item_id, t.model));
        }
    }
    let mut models = BTreeMap::new();
    for (model, responses) in by_model {
        let scored: Vec<Scored> = items
            .par_iter()
            .map(|it| match responses.get(it.id.as_str()) {
                None => Scored { reading: None, score: score_item(it, None) },
                Some(t) => {
                    let r = read_response(it.task, &t.response);
                    let truth = it.prototypes.first().and_then(|p| knots.get(p));
                    let score = score_item_against(it, r.parsed.as_ref(), truth);
                    Scored { reading: Some(r), score }
                }
            })
            .collect();
        let missing = scored.iter().filter(|s| s.reading.is_none()).count();
        if missing > 0 {
            warnings.push(format!("{model}: {missing} of {} items have no transcript and count as wrong", items.len()));
        }
        models.insert(model.to_string(), model_report(items, &scored));
    }
    ScoreReport { items: items.len(), models, warnings }
}

fn model_report(items: &[EvalItem], scored: &[Scored]) -> ModelReport {
    let mut tasks: BTreeMap<TaskId, TaskReport> = BTreeMap::new();
    let mut yes: BTreeMap<TaskId, (usize, usize, usize)> = BTreeMap::new();
    let mut permissive: BTreeMap<TaskId, usize> = BTreeMap::new();
    for (it, s) in items.iter().zip(scored) {
        let t = tasks.entry(it.task).or_insert_with(|| TaskReport {
            overall: Binned::default(),
            random_baseline: it.task.random_baseline(),
            deviation_from_random: 0.0,
            empty: 0,
            refusals: 0,
            unparsed: 0,
            missing: 0,
            permissive_accuracy: None,
            yes_bias: None,
            by_stratum: BTreeMap::new(),
            per_class: BTreeMap::new(),
            answer_marginals: BTreeMap::new(),
            by_subtype: BTreeMap::new(),
        });
        let ok = s.score.strict;
        t.overall.add(ok);
        t.by_stratum.entry(it.stratum).or_default().add(ok);
        if let Some(sub) = &it.subtype {
            t.by_subtype.entry(sub.clone()).or_default().add(ok);
        }
        if s.score.permissive == Some(true) {
            *permissive.entry(it.task).or_default() += 1;
        }
        let parsed = match &s.reading {
            None => {
                t.missing += 1;
                None
            }
            Some(r) => {
                t.empty += r.empty as usize;
                t.refusals += r.refusal as usize;
                t.unparsed += (!r.empty && r.parsed.is_none()) as usize;
                r.parsed.as_ref()
            }
        };
        match it.task {
            TaskId::B0I | TaskId::B0S | TaskId::D1 => {
                if matches!(it.task, TaskId::B0I | TaskId::B0S) {
                    t.per_class.entry(it.label.clone()).or_default().add(ok);
                }
                let key = parsed.map_or_else(|| "none".to_string(), |p| p.to_string());
                *t.answer_marginals.entry(key).or_default() += 1;
            }
            _ => {}
        }
        if it.task.random_baseline() == 0.5 {
            let e = yes.entry(it.task).or_default();
            e.0 += 1;
            e.1 += (parsed == Some(&ParsedAnswer::YesNo(true))) as usize;
            e.2 += (it.label == "yes") as usize;
        }
    }
    for (task, t) in tasks.iter_mut() {
        t.overall.finish();
        t.by_stratum.values_mut().for_each(Binned::finish);
        t.per_class.values_mut().for_each(Binned::finish);
        t.by_subtype.values_mut().for_each(Binned::finish);
        t.deviation_from_random = t.overall.accuracy - t.random_baseline;
        if *task == TaskId::C1 {
            t.permissive_accuracy = Some(permissive.get(task).copied().unwrap_or(0) as f64 / t.overall.n as f64);
        }
        if let Some(&(n, said, truth)) = yes.get(task) {
            let (a, b) = (said as f64 / n as f64, truth as f64 / n as f64);
            t.yes_bias = Some(YesBias { answered_yes: a, truth_yes: b, bias: a - b });
        }
    }
    let mean_accuracy =
        if tasks.is_empty() { 0.0 } else { tasks.values().map(|t| t.overall.accuracy).sum::<f64>() / tasks.len() as f64 };
    let empty = tasks.values().map(|t| t.empty).sum();
    let refusals = tasks.values().map(|t| t.refusals).sum();
    ModelReport { tasks, mean_accuracy, empty, refusals }
}

/// Per-task accuracy table, one column per model.
pub fn text_table(report: &ScoreReport) -> String {
    let models: Vec<&String> = report.models.keys().collect();
    let mut tasks: Vec<TaskId> = report.models.values().flat_map(|m| m.tasks.keys().copied()).collect();
    tasks.sort();
    tasks.dedup();
    let w = models.iter().map(|m| m.len()).max().unwrap_or(0).max(7);
    let mut out = String::new();
    let _ = write!(out, "{:<6} {:>5} {:>7}", "task", "n", "random");
    for m in &models {
        let _ = write!(out, " {m:>w$}");
    }
    out.push('\n');
    for t in &tasks {
        let n = report.models.values().find_map(|m| m.tasks.get(t)).map_or(0, |r| r.overall.n);
        let _ = write!(out, "{:<6} {:>5} {:>7.1}", t.as_str(), n, 100.0 * t.random_baseline());
        for m in &models {
            match report.models[*m].tasks.get(t) {
                Some(r) => {
                    let _ = write!(out, " {:>w$.1}", 100.0 * r.overall.accuracy);
                }
                None => {
                    let _ = write!(out, " {:>w$}", "-");
                }
            }
        }
        out.push('\n');
    }
    let _ = write!(out, "{:<6} {:>5} {:>7}", "mean", "", "");
    for m in &models {
        let _ = write!(out, " {:>w$.1}", 100.0 * report.models[*m].mean_accuracy);
    }
    out.push('\n');
    for (m, r) in &report.models {
        for (t, tr) in &r.tasks {
            if tr.per_class.is_empty() {
                continue;
            }
            let _ = write!(out, "\n{m} {t} per class:");
            for (label, b) in &tr.per_class {
                let _ = write!(out, " {label} {:.1}% (n={})", 100.0 * b.accuracy, b.n);
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(task: TaskId, label: &str) -> EvalItem {
        EvalItem {
            id: format!("{task}-{label}"),
            task,
            modality: task.modality(),
            images: vec![],
            pds: vec![],
            label: label.into(),
            stratum: Stratum::S8to10,
            n_x: 9,
            subtype: None,
            prototypes: vec![],
        }
    }

    #[test]
    fn wilson_solves_its_quadratic() {
        for (k, n) in [(0, 10), (3, 10), (10, 10), (57, 200), (1, 1), (500, 1000)] {
            let (lo, hi) = wilson(k, n);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi);
            let nf = n as f64;
            for x in [lo, hi] {
                // (p - x)^2 = z^2 x (1 - x) / n
                let lhs = (p - x).powi(2);
                let rhs = Z95 * Z95 * x * (1.0 - x) / nf;
                assert!((lhs - rhs).abs() < 1e-9, "{k}/{n}: {lhs} {rhs}");
            }
        }
    }

    #[test]
    fn c1_tiers() {
        let it = item(TaskId::C1, "bcda");
        let s = |a: &str| score_item(&it, normalize(TaskId::C1, a).as_ref());
        assert_eq!(s("bcda"), ItemScore { strict: true, permissive: Some(true) });
        assert_eq!(s("abcde"), ItemScore { strict: false, permissive: Some(false) });
        // a valid code of a different knot decodes but does not match
        assert_eq!(s("bca"), ItemScore { strict: false, permissive: Some(false) });
        assert_eq!(score_item(&it, None), ItemScore { strict: false, permissive: Some(false) });
    }

    #[test]
    fn c1_permissive_accepts_another_code_of_the_same_knot() {
        use crate::pd::fixtures;
        let t = fixtures::trefoil();
        let it = item(TaskId::C1, "bca");
        // the mirror trefoil has the same alphabetical code
        let other = t.mirror().to_dt().to_lowercase();
        assert!(score_item(&it, normalize(TaskId::C1, &other).as_ref()).permissive.unwrap());
    }

    #[test]
    fn aggregate_counts_missing_as_wrong() {
        let items = vec![item(TaskId::A0S, "yes"), item(TaskId::A0S, "no")];
        let tr = vec![Transcript { item_id: items[0].id.clone(), model: "m".into(), response: "ANSWER: yes".into(), tokens: None }];
        let r = aggregate(&items, &tr);
        let a = &r.models["m"].tasks[&TaskId::A0S];
        assert_eq!((a.overall.n, a.overall.correct, a.missing), (2, 1, 1));
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(r.to_json(), aggregate(&items, &tr).to_json());
    }
}
