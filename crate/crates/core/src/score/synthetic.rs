//! Synthetic answerers for calibrating the scorer.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Transcript;
use crate::bench::{AnswerKind, EvalItem};
use crate::digest::blake2b_u64;
use crate::moves::Relation;

fn transcript(it: &EvalItem, model: &str, answer: &str) -> Transcript {
    Transcript { item_id: it.id.clone(), model: model.to_string(), response: format!("ANSWER: {answer}"), tokens: None }
}

/// A uniform draw from the task's answer vocabulary. Integer and DT
/// vocabularies are unbounded, so those draw from a wide range (integers
/// below 2^31, 1–20 random letters) and are almost never right.
pub fn random_answer(kind: AnswerKind, rng: &mut impl Rng) -> String {
    match kind {
        AnswerKind::YesNo => ["yes", "no"].choose(rng).unwrap().to_string(),
        AnswerKind::Move => Relation::ALL.choose(rng).unwrap().as_str().to_string(),
        AnswerKind::Letter => ["A", "B", "C", "D"].choose(rng).unwrap().to_string(),
        AnswerKind::Integer => rng.gen_range(0..1u64 << 31).to_string(),
        AnswerKind::Dt => {
            let len = rng.gen_range(1..=20);
            (0..len).map(|_| rng.gen_range(b'a'..=b'z') as char).collect()
        }
    }
}

/// One uniform-random answer per item; `round` gives independent replicas.
pub fn uniform_random(items: &[EvalItem], seed: u64, round: u64, model: &str) -> Vec<Transcript> {
    let mut rng = ChaCha8Rng::seed_from_u64(blake2b_u64(&[&seed.to_le_bytes(), &round.to_le_bytes(), b"uniform"]));
    items.iter().map(|it| transcript(it, model, &random_answer(it.task.answer_kind(), &mut rng))).collect()
}

/// The same answer to every item.
pub fn constant(items: &[EvalItem], answer: &str, model: &str) -> Vec<Transcript> {
    items.iter().map(|it| transcript(it, model, answer)).collect()
}

/// The ground truth for every item.
pub fn oracle(items: &[EvalItem], model: &str) -> Vec<Transcript> {
    items.iter().map(|it| transcript(it, model, &it.label)).collect()
}

/// Mean of `resamples` bootstrap means of `outcomes`.
pub fn bootstrap_mean(outcomes: &[bool], resamples: usize, seed: u64) -> f64 {
    if outcomes.is_empty() || resamples == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = outcomes.len();
    let mut total = 0.0;
    for _ in 0..resamples {
        let k = (0..n).filter(|_| outcomes[rng.gen_range(0..n)]).count();
        total += k as f64 / n as f64;
    }
    total / resamples as f64
}
