//! Line-delimited loaders for the published record layouts.
//!
//! Field mapping:
//!
//! | source | field | instance |
//! |---|---|---|
//! | CondQA | `id` (optional) | `id`, else `condqa-<line>` |
//! | CondQA | `scenario`, `question` | same |
//! | CondQA | `contents` | one section per heading (`<h1>`..`<h6>`), elements joined by a blank line |
//! | CondQA | `evidences` | `rationale_ids` (sections holding them), `gold_cot` (joined by `\n`) |
//! | CondQA | `answers` `[[text, conditions], ..]` | `gold_answers` (texts only) |
//! | CondQA | `url` | ignored |
//! | BGQA | `example` | `source_text`; last sentence is the `question` |
//! | BGQA | `proof` | `gold_cot` |
//! | BGQA | `label` proved/disproved/unknown | Yes/No/NotEnoughInfo |
//! | BGQA | `facts`, `rules` | `facts` and two document sections |
//! | ShARC | `snippet` | single document section |
//! | ShARC | `history` `[{follow_up_question, follow_up_answer}]` | `history` |
//! | ShARC | `answer` yes/no/irrelevant/follow-up question | Yes/No/NotEnoughInfo |
//! | ShARC | `utterance_id` (optional) | `id`, else `sharc-<line>` |

use std::path::Path;

use serde_json::{Map, Value};

use super::{AnswerClass, CorpusError, DatasetKind, DocumentSection, HistoryTurn, Instance};

pub fn load_dataset(kind: DatasetKind, path: &Path) -> Result<Vec<Instance>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_records(kind, &text)
}

/// Parses the contents of a dataset file. Blank lines are skipped.
pub fn load_records(kind: DatasetKind, text: &str) -> Result<Vec<Instance>, CorpusError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let value: Value = serde_json::from_str(line).map_err(|e| CorpusError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        let Value::Object(record) = value else {
            return Err(CorpusError::Malformed {
                line: line_no,
                message: "record is not an object".into(),
            });
        };
        let instance = match kind {
            DatasetKind::CondQa => condqa(&record, line_no)?,
            DatasetKind::Sharc => sharc(&record, line_no)?,
            _ => bgqa(kind, &record, line_no)?,
        };
        instance.validate()?;
        out.push(instance);
    }
    Ok(out)
}

struct Fields<'a> {
    id: String,
    record: &'a Map<String, Value>,
}

impl Fields<'_> {
    fn missing(&self, field: &str) -> CorpusError {
        CorpusError::MissingField {
            id: self.id.clone(),
            field: field.into(),
        }
    }

    fn str(&self, field: &str) -> Result<String, CorpusError> {
        self.opt_str(field)?.ok_or_else(|| self.missing(field))
    }

    fn opt_str(&self, field: &str) -> Result<Option<String>, CorpusError> {
        match self.record.get(field) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(self.invalid(field, "expected a string")),
        }
    }

    fn array(&self, field: &str) -> Result<&Vec<Value>, CorpusError> {
        match self.record.get(field) {
            None | Some(Value::Null) => Err(self.missing(field)),
            Some(Value::Array(a)) => Ok(a),
            Some(_) => Err(self.invalid(field, "expected an array")),
        }
    }

    fn invalid(&self, field: &str, what: &str) -> CorpusError {
        CorpusError::Invalid {
            id: self.id.clone(),
            reason: format!("field `{field}`: {what}"),
        }
    }

    fn strings(&self, field: &str) -> Result<Vec<String>, CorpusError> {
        self.array(field)?
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| self.invalid(field, "expected strings"))
            })
            .collect()
    }
}

fn record_id(record: &Map<String, Value>, keys: &[&str], kind: DatasetKind, line: usize) -> String {
    keys.iter()
        .find_map(|k| match record.get(*k) {
            Some(Value::String(s)) if !s.is_empty() => Some(s.clone()),
            Some(Value::Number(n)) => Some(n.to_string()),
            _ => None,
        })
        .unwrap_or_else(|| format!("{}-{line}", kind.id()))
}

fn is_heading(element: &str) -> bool {
    let t = element.trim_start().as_bytes();
    t.len() >= 4 && t[0] == b'<' && (t[1] | 0x20) == b'h' && (b'1'..=b'6').contains(&t[2])
}

fn condqa(record: &Map<String, Value>, line: usize) -> Result<Instance, CorpusError> {
    let f = Fields {
        id: record_id(record, &["id", "qid"], DatasetKind::CondQa, line),
        record,
    };
    let question = f.str("question")?;
    let scenario = f.opt_str("scenario")?.unwrap_or_default();
    let contents = f.strings("contents")?;
    let evidences = match record.get("evidences") {
        None | Some(Value::Null) => Vec::new(),
        Some(_) => f.strings("evidences")?,
    };

    let mut sections: Vec<(String, Vec<String>)> = Vec::new();
    for element in &contents {
        if sections.is_empty() || is_heading(element) {
            sections.push((format!("s{}", sections.len()), Vec::new()));
        }
        sections.last_mut().expect("pushed above").1.push(element.clone());
    }

    let mut rationale_ids: Vec<String> = Vec::new();
    for ev in &evidences {
        let needle = ev.trim();
        let hit = sections.iter().find(|(_, els)| {
            els.iter().any(|e| e.trim() == needle)
        });
        let hit = hit.or_else(|| {
            sections
                .iter()
                .find(|(_, els)| els.iter().any(|e| !needle.is_empty() && e.contains(needle)))
        });
        match hit {
            Some((sid, _)) if !rationale_ids.contains(sid) => rationale_ids.push(sid.clone()),
            Some(_) => {}
            None => tracing::warn!(id = %f.id, evidence = %needle, "evidence not found in contents"),
        }
    }
    // Keep document order regardless of evidence order.
    rationale_ids.sort_by_key(|id| id[1..].parse::<usize>().unwrap_or(usize::MAX));

    let document = sections
        .into_iter()
        .filter(|(_, els)| els.iter().any(|e| !e.is_empty()))
        .map(|(id, els)| DocumentSection {
            is_rationale: rationale_ids.contains(&id),
            text: els.join("\n\n"),
            id,
        })
        .collect();

    let mut gold_answers = Vec::new();
    for a in f.array("answers")? {
        let text = match a {
            Value::Array(pair) => pair.first().and_then(Value::as_str),
            Value::String(s) => Some(s.as_str()),
            _ => None,
        };
        gold_answers.push(
            text.ok_or_else(|| f.invalid("answers", "expected [text, conditions] pairs"))?
                .to_string(),
        );
    }
    let answer_class = match gold_answers.first().map(|a| a.trim().to_ascii_lowercase()) {
        Some(a) if a == "yes" => AnswerClass::Yes,
        Some(a) if a == "no" => AnswerClass::No,
        _ => AnswerClass::Span,
    };
    if gold_answers.is_empty() {
        gold_answers.push(String::new());
    }

    Ok(Instance {
        id: f.id.clone(),
        dataset: DatasetKind::CondQa,
        question,
        scenario,
        document,
        history: Vec::new(),
        gold_answers,
        gold_cot: evidences.join("\n"),
        answer_class,
        rationale_ids,
        source_text: String::new(),
        facts: Vec::new(),
    })
}

/// Splits a run of sentences on `. ` boundaries, keeping the periods.
fn sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for line in text.lines() {
        let mut rest = line.trim();
        while let Some(pos) = rest.find(". ") {
            out.push(rest[..=pos].trim().to_string());
            rest = rest[pos + 2..].trim_start();
        }
        if !rest.is_empty() {
            out.push(rest.to_string());
        }
    }
    out
}

fn text_or_list(f: &Fields<'_>, field: &str) -> Result<Vec<String>, CorpusError> {
    match f.record.get(field) {
        None | Some(Value::Null) => Err(f.missing(field)),
        Some(Value::String(s)) => Ok(sentences(s)),
        Some(Value::Array(_)) => f.strings(field),
        Some(_) => Err(f.invalid(field, "expected a string or a list of strings")),
    }
}

fn bgqa_question(example: &str) -> String {
    let last = example
        .lines()
        .rev()
        .find(|l| !l.trim().is_empty())
        .unwrap_or("")
        .trim();
    sentences(last).pop().unwrap_or_default()
}

fn bgqa(kind: DatasetKind, record: &Map<String, Value>, line: usize) -> Result<Instance, CorpusError> {
    let f = Fields {
        id: record_id(record, &["id"], kind, line),
        record,
    };
    let example = f.str("example")?;
    let proof = f.str("proof")?;
    let label = f.str("label")?;
    let facts = text_or_list(&f, "facts")?;
    let rules = text_or_list(&f, "rules")?;
    let (answer_class, gold) = match label.trim().to_ascii_lowercase().as_str() {
        "proved" | "yes" => (AnswerClass::Yes, "yes"),
        "disproved" | "no" => (AnswerClass::No, "no"),
        "unknown" => (AnswerClass::NotEnoughInfo, "unknown"),
        _ => {
            return Err(CorpusError::UnknownLabel {
                id: f.id.clone(),
                label,
            })
        }
    };
    let mut document = Vec::new();
    for (id, items) in [("facts", &facts), ("rules", &rules)] {
        if !items.is_empty() {
            document.push(DocumentSection {
                id: id.into(),
                text: items.join("\n"),
                is_rationale: false,
            });
        }
    }
    Ok(Instance {
        id: f.id.clone(),
        dataset: kind,
        question: bgqa_question(&example),
        scenario: String::new(),
        document,
        history: Vec::new(),
        gold_answers: vec![gold.into()],
        gold_cot: proof,
        answer_class,
        rationale_ids: Vec::new(),
        source_text: example,
        facts,
    })
}

fn sharc(record: &Map<String, Value>, line: usize) -> Result<Instance, CorpusError> {
    let f = Fields {
        id: record_id(record, &["utterance_id", "id"], DatasetKind::Sharc, line),
        record,
    };
    let snippet = f.str("snippet")?;
    let question = f.str("question")?;
    let scenario = f.opt_str("scenario")?.unwrap_or_default();
    let answer = f.str("answer")?;
    let mut history = Vec::new();
    if let Some(Value::Array(turns)) = record.get("history") {
        for t in turns {
            let q = t.get("follow_up_question").and_then(Value::as_str);
            let a = t.get("follow_up_answer").and_then(Value::as_str);
            match (q, a) {
                (Some(q), Some(a)) => history.push(HistoryTurn {
                    question: q.into(),
                    answer: a.into(),
                }),
                (None, _) => return Err(f.missing("history.follow_up_question")),
                (_, None) => return Err(f.missing("history.follow_up_answer")),
            }
        }
    }
    let norm = answer.trim().to_ascii_lowercase();
    let answer_class = match norm.as_str() {
        "yes" => AnswerClass::Yes,
        "no" => AnswerClass::No,
        "irrelevant" | "not enough information" => AnswerClass::NotEnoughInfo,
        // Any other answer is a follow-up question: the rule text cannot
        // decide yet.
        _ if norm.ends_with('?') => AnswerClass::NotEnoughInfo,
        _ => {
            return Err(CorpusError::UnknownLabel {
                id: f.id.clone(),
                label: answer,
            })
        }
    };
    Ok(Instance {
        id: f.id.clone(),
        dataset: DatasetKind::Sharc,
        question,
        scenario,
        document: vec![DocumentSection {
            id: "snippet".into(),
            text: snippet,
            is_rationale: false,
        }],
        history,
        gold_answers: vec![answer_class.label().into()],
        gold_cot: String::new(),
        answer_class,
        rationale_ids: Vec::new(),
        source_text: String::new(),
        facts: Vec::new(),
    })
}

#[cfg(test)]
mod unit {
    use super::*;

    #[test]
    fn sentence_split_keeps_periods() {
        assert_eq!(
            sentences("The cat is red. The dog is blue.\nDoes it?"),
            vec!["The cat is red.", "The dog is blue.", "Does it?"]
        );
    }

    #[test]
    fn heading_detection() {
        assert!(is_heading("<h1>After you apply</h1>"));
        assert!(is_heading("<H2>x</H2>"));
        assert!(!is_heading("<p>x</p>"));
        assert!(!is_heading("<hr>"));
    }
}
