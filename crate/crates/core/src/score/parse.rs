use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::Serialize;

use crate::bench::{AnswerKind, TaskId};
use crate::moves::Relation;

pub const ANSWER_PREFIX: &str = "ANSWER:";

/// The answer line of a response: the text after the last line starting
/// with `ANSWER:` (case-sensitive, leading whitespace ignored), else the
/// last non-empty line, else `None`.
pub fn extract_answer(raw: &str) -> Option<&str> {
    if let Some(line) = raw.lines().rev().find(|l| l.trim_start().starts_with(ANSWER_PREFIX)) {
        return Some(line.trim_start()[ANSWER_PREFIX.len()..].trim());
    }
    raw.lines().rev().map(str::trim).find(|l| !l.is_empty())
}

/// A normalised answer, typed by task.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ParsedAnswer {
    YesNo(bool),
    Move(Relation),
    Integer(i64),
    Dt(String),
    Letter(char),
}

impl fmt::Display for ParsedAnswer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParsedAnswer::YesNo(true) => f.write_str("yes"),
            ParsedAnswer::YesNo(false) => f.write_str("no"),
            ParsedAnswer::Move(r) => f.write_str(r.as_str()),
            ParsedAnswer::Integer(k) => write!(f, "{k}"),
            ParsedAnswer::Dt(s) => f.write_str(s),
            ParsedAnswer::Letter(c) => write!(f, "{c}"),
        }
    }
}

// Serialized as its label text; the task supplies the type.
impl Serialize for ParsedAnswer {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

const TRAILING: &[char] = &['.', ',', '!', '?', ';', ':', '"', '\'', '`'];
const QUOTES: &[char] = &['"', '\'', '`'];

const YES: [&str; 5] = ["yes", "y", "true", "same", "matching"];
const NO: [&str; 5] = ["no", "n", "false", "different", "not"];

fn binary(text: &str) -> Option<ParsedAnswer> {
    let t = text.to_lowercase();
    let t = t.trim().trim_end_matches(TRAILING).trim_start_matches(QUOTES).trim();
    if YES.contains(&t) {
        return Some(ParsedAnswer::YesNo(true));
    }
    if NO.contains(&t) {
        return Some(ParsedAnswer::YesNo(false));
    }
    if t.starts_with("yes") {
        Some(ParsedAnswer::YesNo(true))
    } else if t.starts_with("no") {
        Some(ParsedAnswer::YesNo(false))
    } else {
        None
    }
}

fn relation(text: &str) -> Option<ParsedAnswer> {
    let t: String = text.to_uppercase().chars().filter(|c| !c.is_whitespace() && *c != '(' && *c != ')').collect();
    let r = match t.as_str() {
        "R1+" => Relation::R1Plus,
        "R1-" => Relation::R1Minus,
        "R2+" => Relation::R2Plus,
        "R2-" => Relation::R2Minus,
        "R3" => Relation::R3,
        // whitespace is already gone, so "NOT CONNECTED" lands here too
        "NOT-CONNECTED" | "NOTCONNECTED" | "NOT_CONNECTED" => Relation::NotConnected,
        _ => return None,
    };
    Some(ParsedAnswer::Move(r))
}

fn integer(text: &str) -> Option<ParsedAnswer> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"-?\d+").unwrap());
    re.find(text)?.as_str().parse().ok().map(ParsedAnswer::Integer)
}

fn dt(text: &str) -> Option<ParsedAnswer> {
    let t = text.to_lowercase();
    let t = t.trim().trim_end_matches(TRAILING).trim_start_matches(QUOTES).trim();
    (!t.is_empty()).then(|| ParsedAnswer::Dt(t.to_string()))
}

fn letter(text: &str) -> Option<ParsedAnswer> {
    text.trim().to_uppercase().chars().find(|c| matches!(c, 'A'..='D')).map(ParsedAnswer::Letter)
}

/// Normalises an answer line for `task`; `None` when it does not parse.
pub fn normalize(task: TaskId, answer: &str) -> Option<ParsedAnswer> {
    match task.answer_kind() {
        AnswerKind::YesNo => binary(answer),
        AnswerKind::Move => relation(answer),
        AnswerKind::Integer => integer(answer),
        AnswerKind::Dt => dt(answer),
        AnswerKind::Letter => letter(answer),
    }
}

/// Parses a ground-truth label into the task's answer type.
pub fn parse_label(task: TaskId, label: &str) -> Option<ParsedAnswer> {
    normalize(task, label)
}

const REFUSALS: [&str; 8] = [
    "unknown",
    "unsure",
    "uncertain",
    "cannot determine",
    "can't determine",
    "i don't know",
    "unable to determine",
    "n/a",
];

/// An answer line that declines to answer.
pub fn is_refusal(answer: &str) -> bool {
    let t = answer.to_lowercase();
    let t = t.trim().trim_end_matches(TRAILING).trim_start_matches(QUOTES).trim();
    REFUSALS.iter().any(|r| t.starts_with(r))
}

/// Everything the scorer reads from one response.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Reading {
    pub answer: Option<String>,
    pub parsed: Option<ParsedAnswer>,
    pub empty: bool,
    pub refusal: bool,
}

pub fn read_response(task: TaskId, raw: &str) -> Reading {
    let Some(answer) = extract_answer(raw) else {
        return Reading { answer: None, parsed: None, empty: true, refusal: false };
    };
    let parsed = normalize(task, answer);
    let refusal = parsed.is_none() && is_refusal(answer);
    Reading { answer: Some(answer.to_string()), parsed, empty: false, refusal }
}
