use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The fourteen evaluation tasks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskId {
    #[serde(rename = "A0-I")]
    A0I,
    #[serde(rename = "A0-S")]
    A0S,
    #[serde(rename = "A1-I")]
    A1I,
    #[serde(rename = "A1-S")]
    A1S,
    #[serde(rename = "A2-I")]
    A2I,
    #[serde(rename = "A2-S")]
    A2S,
    #[serde(rename = "A3-I")]
    A3I,
    #[serde(rename = "A3-S")]
    A3S,
    #[serde(rename = "B0-I")]
    B0I,
    #[serde(rename = "B0-S")]
    B0S,
    C0,
    C1,
    D0,
    D1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modality {
    I,
    S,
    #[serde(rename = "I+S")]
    IS,
}

/// What kind of answer a task expects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AnswerKind {
    YesNo,
    Move,
    Integer,
    Dt,
    Letter,
}

impl TaskId {
    pub const ALL: [TaskId; 14] = [
        TaskId::A0I,
        TaskId::A0S,
        TaskId::A1I,
        TaskId::A1S,
        TaskId::A2I,
        TaskId::A2S,
        TaskId::A3I,
        TaskId::A3S,
        TaskId::B0I,
        TaskId::B0S,
        TaskId::C0,
        TaskId::C1,
        TaskId::D0,
        TaskId::D1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskId::A0I => "A0-I",
            TaskId::A0S => "A0-S",
            TaskId::A1I => "A1-I",
            TaskId::A1S => "A1-S",
            TaskId::A2I => "A2-I",
            TaskId::A2S => "A2-S",
            TaskId::A3I => "A3-I",
            TaskId::A3S => "A3-S",
            TaskId::B0I => "B0-I",
            TaskId::B0S => "B0-S",
            TaskId::C0 => "C0",
            TaskId::C1 => "C1",
            TaskId::D0 => "D0",
            TaskId::D1 => "D1",
        }
    }

    pub fn modality(self) -> Modality {
        match self {
            TaskId::A0I | TaskId::A1I | TaskId::A2I | TaskId::A3I | TaskId::B0I | TaskId::C0 | TaskId::C1 => Modality::I,
            TaskId::A0S | TaskId::A1S | TaskId::A2S | TaskId::A3S | TaskId::B0S => Modality::S,
            TaskId::D0 | TaskId::D1 => Modality::IS,
        }
    }

    pub fn uses_images(self) -> bool {
        self.modality() != Modality::S
    }

    /// Default item count.
    pub fn default_count(self) -> usize {
        match self {
            TaskId::A1I | TaskId::A1S | TaskId::A2I | TaskId::A2S | TaskId::A3S | TaskId::B0S | TaskId::C0 | TaskId::C1 => 100,
            _ => 200,
        }
    }

    pub fn answer_kind(self) -> AnswerKind {
        match self {
            TaskId::B0I | TaskId::B0S => AnswerKind::Move,
            TaskId::C0 => AnswerKind::Integer,
            TaskId::C1 => AnswerKind::Dt,
            TaskId::D1 => AnswerKind::Letter,
            _ => AnswerKind::YesNo,
        }
    }

    /// Accuracy of a uniform guess over the answer vocabulary.
    pub fn random_baseline(self) -> f64 {
        match self.answer_kind() {
            AnswerKind::YesNo => 0.5,
            AnswerKind::Move => 1.0 / 6.0,
            AnswerKind::Letter => 0.25,
            AnswerKind::Integer | AnswerKind::Dt => 0.0,
        }
    }

    /// Name of the prompt template.
    pub fn template(self) -> &'static str {
        match self {
            TaskId::A0I => "A0_I",
            TaskId::A0S => "A0_S",
            TaskId::A1I => "A1_I",
            TaskId::A1S => "A1_S",
            TaskId::A2I => "A2_I",
            TaskId::A2S => "A2_S",
            TaskId::A3I => "A3_I",
            TaskId::A3S => "A3_S",
            TaskId::B0I => "B0_I",
            TaskId::B0S => "B0_S",
            TaskId::C0 => "C0",
            TaskId::C1 => "C1",
            TaskId::D0 => "D0",
            TaskId::D1 => "D1",
        }
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown task {0:?}")]
pub struct UnknownTask(pub String);

impl FromStr for TaskId {
    type Err = UnknownTask;

    /// Accepts `A0-I`, `A0_I` and `a0i` spellings.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_uppercase();
        TaskId::ALL
            .into_iter()
            .find(|t| t.as_str().replace('-', "") == key)
            .ok_or_else(|| UnknownTask(s.to_string()))
    }
}

/// Crossing-count bins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stratum {
    #[serde(rename = "8-10")]
    S8to10,
    #[serde(rename = "11-13")]
    S11to13,
    #[serde(rename = "14-16")]
    S14to16,
    #[serde(rename = "17-20")]
    S17to20,
}

impl Stratum {
    pub const ALL: [Stratum; 4] = [Stratum::S8to10, Stratum::S11to13, Stratum::S14to16, Stratum::S17to20];

    pub fn of(n: usize) -> Option<Stratum> {
        match n {
            8..=10 => Some(Stratum::S8to10),
            11..=13 => Some(Stratum::S11to13),
            14..=16 => Some(Stratum::S14to16),
            17..=20 => Some(Stratum::S17to20),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stratum::S8to10 => "8-10",
            Stratum::S11to13 => "11-13",
            Stratum::S14to16 => "14-16",
            Stratum::S17to20 => "17-20",
        }
    }
}

/// One evaluation question with its ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalItem {
    pub id: String,
    pub task: TaskId,
    pub modality: Modality,
    /// Render ids, in placeholder order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub images: Vec<String>,
    /// PD texts, in placeholder order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pds: Vec<String>,
    pub label: String,
    pub stratum: Stratum,
    /// Crossing count of the first diagram.
    pub n_x: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtype: Option<String>,
    /// Prototype ids behind the payload, for leakage audits.
    pub prototypes: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_ids_round_trip() {
        for t in TaskId::ALL {
            assert_eq!(t.as_str().parse::<TaskId>(), Ok(t));
            assert_eq!(t.template().parse::<TaskId>(), Ok(t));
            let j = serde_json::to_string(&t).unwrap();
            assert_eq!(j, format!("\"{}\"", t.as_str()));
        }
        assert!("A4-I".parse::<TaskId>().is_err());
    }

    #[test]
    fn default_counts_total_two_thousand() {
        assert_eq!(TaskId::ALL.iter().map(|t| t.default_count()).sum::<usize>(), 2000);
    }

    #[test]
    fn strata_cover_eight_to_twenty() {
        assert_eq!(Stratum::of(7), None);
        assert_eq!(Stratum::of(8), Some(Stratum::S8to10));
        assert_eq!(Stratum::of(13), Some(Stratum::S11to13));
        assert_eq!(Stratum::of(20), Some(Stratum::S17to20));
        assert_eq!(Stratum::of(21), None);
    }
}
