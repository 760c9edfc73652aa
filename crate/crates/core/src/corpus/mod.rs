//! Uniform instance model for the three benchmarks, the CondQA oracle
//! retriever and seeded demonstration sampling.

mod load;
mod sample;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::pseudocode::{complexity_stats, ComplexityStats};
pub use load::{load_dataset, load_records};
pub use sample::sample_demonstrations;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DatasetKind {
    #[serde(rename = "condqa")]
    CondQa,
    #[serde(rename = "bgqa-1")]
    Bgqa1,
    #[serde(rename = "bgqa-2")]
    Bgqa2,
    #[serde(rename = "bgqa-3")]
    Bgqa3,
    #[serde(rename = "sharc")]
    Sharc,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 5] = [
        DatasetKind::CondQa,
        DatasetKind::Sharc,
        DatasetKind::Bgqa1,
        DatasetKind::Bgqa2,
        DatasetKind::Bgqa3,
    ];

    pub fn id(self) -> &'static str {
        match self {
            DatasetKind::CondQa => "condqa",
            DatasetKind::Bgqa1 => "bgqa-1",
            DatasetKind::Bgqa2 => "bgqa-2",
            DatasetKind::Bgqa3 => "bgqa-3",
            DatasetKind::Sharc => "sharc",
        }
    }

    pub fn is_bgqa(self) -> bool {
        matches!(
            self,
            DatasetKind::Bgqa1 | DatasetKind::Bgqa2 | DatasetKind::Bgqa3
        )
    }

    /// Answer classes in the fixed order used for sampling and reporting.
    pub fn classes(self) -> &'static [AnswerClass] {
        match self {
            DatasetKind::CondQa => &[AnswerClass::Yes, AnswerClass::No, AnswerClass::Span],
            _ => &[
                AnswerClass::Yes,
                AnswerClass::No,
                AnswerClass::NotEnoughInfo,
            ],
        }
    }

    /// Span-extraction tasks are scored with token F1, the rest with macro F1.
    pub fn is_span_task(self) -> bool {
        self == DatasetKind::CondQa
    }
}

impl std::fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for DatasetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        DatasetKind::ALL
            .into_iter()
            .find(|d| d.id() == norm || d.id().replace('-', "") == norm)
            .ok_or_else(|| format!("unknown dataset `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AnswerClass {
    Yes,
    No,
    NotEnoughInfo,
    Span,
}

impl AnswerClass {
    pub fn label(self) -> &'static str {
        match self {
            AnswerClass::Yes => "yes",
            AnswerClass::No => "no",
            AnswerClass::NotEnoughInfo => "not enough information",
            AnswerClass::Span => "span",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentSection {
    pub id: String,
    /// Markup is kept verbatim.
    pub text: String,
    pub is_rationale: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryTurn {
    pub question: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub dataset: DatasetKind,
    pub question: String,
    #[serde(default)]
    pub scenario: String,
    #[serde(default)]
    pub document: Vec<DocumentSection>,
    #[serde(default)]
    pub history: Vec<HistoryTurn>,
    pub gold_answers: Vec<String>,
    #[serde(default)]
    pub gold_cot: String,
    pub answer_class: AnswerClass,
    #[serde(default)]
    pub rationale_ids: Vec<String>,
    /// BGQA only: the pre-rendered `example` input, used verbatim as the text prompt.
    #[serde(default)]
    pub source_text: String,
    /// BGQA only: the stated facts, one sentence each.
    #[serde(default)]
    pub facts: Vec<String>,
}

impl Instance {
    /// Scenario and question as one string, the way both appear after `Question:`.
    pub fn query(&self) -> String {
        if self.scenario.trim().is_empty() {
            self.question.clone()
        } else {
            format!("{} {}", self.scenario.trim_end(), self.question)
        }
    }

    pub fn document_text(&self) -> String {
        self.document
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join("\n\n")
    }

    /// Whether the instance belongs to the yes/no partition.
    pub fn is_yes_no(&self) -> bool {
        matches!(self.answer_class, AnswerClass::Yes | AnswerClass::No)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let fail = |reason: &str| {
            Err(CorpusError::Invalid {
                id: self.id.clone(),
                reason: reason.to_string(),
            })
        };
        if self.gold_answers.is_empty() {
            return fail("gold_answers is empty");
        }
        let has = |w: &str| {
            self.gold_answers
                .iter()
                .any(|g| g.trim().eq_ignore_ascii_case(w))
        };
        let consistent = match self.answer_class {
            AnswerClass::Yes => has("yes"),
            AnswerClass::No => has("no"),
            AnswerClass::NotEnoughInfo => has("not enough information") || has("unknown"),
            AnswerClass::Span => true,
        };
        if !consistent {
            return fail("answer_class disagrees with gold_answers");
        }
        if !self.dataset.classes().contains(&self.answer_class) {
            return fail("answer_class not used by this dataset");
        }
        if !self.history.is_empty() && self.dataset != DatasetKind::Sharc {
            return fail("history is only defined for ShARC");
        }
        if !self.rationale_ids.is_empty() && self.dataset != DatasetKind::CondQa {
            return fail("rationale_ids are only defined for CondQA");
        }
        if self.document.iter().any(|s| s.text.is_empty()) {
            return fail("document section with empty text");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("record `{id}`: missing required field `{field}`")]
    MissingField { id: String, field: String },
    #[error("record `{id}`: unknown answer label `{label}`")]
    UnknownLabel { id: String, label: String },
    #[error("record `{id}`: {reason}")]
    Invalid { id: String, reason: String },
    #[error("instance `{0}`: no rationale resolves against the document")]
    NoRationale(String),
    #[error("oracle retrieval only applies to CondQA, got {0}")]
    NotCondQa(DatasetKind),
    #[error("demonstration pool is empty")]
    EmptyPool,
    #[error("demonstration pool has {available} instance(s) of class {class:?}, need {needed}")]
    InsufficientPool {
        class: AnswerClass,
        available: usize,
        needed: usize,
    },
}

/// Keeps the sections that hold at least one rationale sentence, in document order.
pub fn oracle_retrieve(instance: &Instance) -> Result<Vec<DocumentSection>, CorpusError> {
    if instance.dataset != DatasetKind::CondQa {
        return Err(CorpusError::NotCondQa(instance.dataset));
    }
    if instance
        .rationale_ids
        .iter()
        .any(|r| !instance.document.iter().any(|s| &s.id == r))
    {
        return Err(CorpusError::NoRationale(instance.id.clone()));
    }
    let kept: Vec<DocumentSection> = instance
        .document
        .iter()
        .filter(|s| instance.rationale_ids.contains(&s.id))
        .cloned()
        .collect();
    if kept.is_empty() {
        return Err(CorpusError::NoRationale(instance.id.clone()));
    }
    Ok(kept)
}

/// Returns a copy of `instance` whose document is the oracle-retrieved passage.
pub fn with_oracle_document(instance: &Instance) -> Result<Instance, CorpusError> {
    let document = oracle_retrieve(instance)?;
    Ok(Instance {
        document,
        ..instance.clone()
    })
}
