//! Answer extraction, metrics, seed aggregation and memory-error rates.

mod report;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{split_reply, ProbeResult, Transcript};
use crate::corpus::{AnswerClass, DatasetKind, Instance};
use crate::prompts::PromptKind;

pub use report::*;

/// Version of the answer normalization used by [`token_f1`].
pub const NORMALIZATION_VERSION: &str = "squad-v1";

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("{predictions} predictions for {golds} gold labels")]
    LengthMismatch { predictions: usize, golds: usize },
    #[error("no predictions to score")]
    Empty,
    #[error("{0} is a span task and has no confusion matrix")]
    SpanTask(DatasetKind),
    #[error("model `{model}`: {kind} covers {found:?} but text covers {expected:?}")]
    DatasetMismatch {
        model: String,
        kind: PromptKind,
        found: Vec<DatasetKind>,
        expected: Vec<DatasetKind>,
    },
    #[error("duplicate report for {0}")]
    DuplicateReport(String),
    #[error("report schema {found} is not supported (expected {expected})")]
    Schema { found: u32, expected: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicted {
    Class(AnswerClass),
    Span(String),
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extraction {
    Marker,
    Fallback,
    WholeReply,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub instance_id: String,
    pub extracted: String,
    pub predicted: Predicted,
    pub method: Extraction,
}

fn tokens(s: &str) -> Vec<String> {
    s.to_lowercase()
        .chars()
        .map(|c| if c.is_ascii_punctuation() { ' ' } else { c })
        .collect::<String>()
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

/// Case-folds, strips punctuation, drops the articles a/an/the and collapses
/// whitespace.
pub fn normalize_answer(s: &str) -> String {
    tokens(s)
        .into_iter()
        .filter(|t| !matches!(t.as_str(), "a" | "an" | "the"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn f1_one(pred: &[&str], gold: &[&str]) -> f64 {
    if pred.is_empty() || gold.is_empty() {
        return if pred.is_empty() && gold.is_empty() { 1.0 } else { 0.0 };
    }
    let mut counts: BTreeMap<&str, i64> = BTreeMap::new();
    for t in gold {
        *counts.entry(t).or_default() += 1;
    }
    let mut common = 0usize;
    for t in pred {
        if let Some(c) = counts.get_mut(t) {
            if *c > 0 {
                *c -= 1;
                common += 1;
            }
        }
    }
    // 2PR/(P+R) reduced to one division.
    2.0 * common as f64 / (pred.len() + gold.len()) as f64
}

/// Bag-of-tokens F1 against the best-matching gold answer. No golds scores 0.
pub fn token_f1(prediction: &str, golds: &[String]) -> f64 {
    let p = normalize_answer(prediction);
    let pt: Vec<&str> = p.split_whitespace().collect();
    golds
        .iter()
        .map(|g| {
            let g = normalize_answer(g);
            let gt: Vec<&str> = g.split_whitespace().collect();
            f1_one(&pt, &gt)
        })
        .fold(0.0, f64::max)
}

/// Maps a label-like string to a class, if it is one.
pub fn class_of(text: &str) -> Option<AnswerClass> {
    match normalize_answer(text).as_str() {
        "yes" | "true" | "proved" => Some(AnswerClass::Yes),
        "no" | "false" | "disproved" => Some(AnswerClass::No),
        "unknown" | "none" | "not enough information" | "irrelevant" => Some(AnswerClass::NotEnoughInfo),
        _ => None,
    }
}

/// Last class keyword in `text`.
fn last_keyword(text: &str, code: bool) -> Option<AnswerClass> {
    let toks = tokens(text);
    let mut best: Option<(usize, AnswerClass)> = None;
    let mut note = |pos: usize, c: AnswerClass| {
        if best.is_none_or(|(p, _)| pos >= p) {
            best = Some((pos, c));
        }
    };
    for (i, t) in toks.iter().enumerate() {
        match t.as_str() {
            "yes" => note(i, AnswerClass::Yes),
            "no" => note(i, AnswerClass::No),
            "unknown" => note(i, AnswerClass::NotEnoughInfo),
            "true" if code => note(i, AnswerClass::Yes),
            "false" if code => note(i, AnswerClass::No),
            "none" if code => note(i, AnswerClass::NotEnoughInfo),
            "information" if i >= 2 && toks[i - 2] == "not" && toks[i - 1] == "enough" => {
                note(i, AnswerClass::NotEnoughInfo)
            }
            _ => {}
        }
    }
    best.map(|(_, c)| c)
}

/// Extracts the final answer from a reply.
///
/// Text after the last `Answer:` marker (`#Answer:` included) wins. ShARC
/// replies are the label itself; for code prompts the reply completes
/// `<question_var> = ` and reads as `True`, `False` or `None`. Without a usable
/// marker the last class keyword in the reply is taken, and for span tasks the
/// last line of the reply.
pub fn extract_from_reply(instance_id: &str, reply: &str, dataset: DatasetKind, kind: PromptKind) -> Prediction {
    let code = kind.answers_from_code();
    let make = |extracted: String, predicted: Predicted, method: Extraction| Prediction {
        instance_id: instance_id.to_string(),
        extracted,
        predicted,
        method,
    };
    let (_, after) = split_reply(reply, dataset);
    if dataset == DatasetKind::Sharc {
        let whole = after.unwrap_or_default();
        let value = whole.lines().next().unwrap_or("").trim();
        let value = value.rsplit(" = ").next().unwrap_or(value).trim();
        if let Some(c) = class_of(value) {
            return make(value.to_string(), Predicted::Class(c), Extraction::WholeReply);
        }
        return match last_keyword(&whole, code) {
            Some(c) => make(whole.clone(), Predicted::Class(c), Extraction::Fallback),
            None => make(whole, Predicted::Unknown, Extraction::None),
        };
    }
    if let Some(a) = after.filter(|a| !a.trim().is_empty()) {
        let a = a.lines().next().unwrap_or("").trim().to_string();
        let predicted = match class_of(&a) {
            Some(c) if c != AnswerClass::NotEnoughInfo || !dataset.is_span_task() => Predicted::Class(c),
            _ if dataset.is_span_task() => Predicted::Span(a.clone()),
            _ => match last_keyword(&a, code) {
                Some(c) => Predicted::Class(c),
                None => Predicted::Unknown,
            },
        };
        return make(a, predicted, Extraction::Marker);
    }
    if !dataset.is_span_task() {
        return match last_keyword(reply, code) {
            Some(c) => make(reply.trim().to_string(), Predicted::Class(c), Extraction::Fallback),
            None => make(reply.trim().to_string(), Predicted::Unknown, Extraction::None),
        };
    }
    match reply.lines().rev().map(str::trim).find(|l| !l.is_empty()) {
        Some(last) => {
            let predicted = match class_of(last) {
                Some(c @ (AnswerClass::Yes | AnswerClass::No)) => Predicted::Class(c),
                _ => Predicted::Span(last.to_string()),
            };
            make(last.to_string(), predicted, Extraction::WholeReply)
        }
        None => make(String::new(), Predicted::Unknown, Extraction::None),
    }
}

pub fn extract_answer(transcript: &Transcript) -> Prediction {
    extract_from_reply(
        &transcript.instance_id,
        &transcript.raw_answer_text,
        transcript.dataset,
        transcript.kind,
    )
}

/// Per-instance score in [0, 1]: token F1 for CondQA, exact class match
/// otherwise.
pub fn instance_score(prediction: &Prediction, gold: &Instance) -> f64 {
    if gold.dataset.is_span_task() {
        let text = match &prediction.predicted {
            Predicted::Class(c) => c.label().to_string(),
            Predicted::Span(s) => s.clone(),
            Predicted::Unknown => return 0.0,
        };
        token_f1(&text, &gold.gold_answers)
    } else if prediction.predicted == Predicted::Class(gold.answer_class) {
        1.0
    } else {
        0.0
    }
}

/// Whether an answer counts as correct when partitioning probes.
pub fn is_correct(prediction: &Prediction, gold: &Instance, span_threshold: f64) -> bool {
    match (&prediction.predicted, gold.answer_class) {
        (Predicted::Unknown, _) => false,
        (_, AnswerClass::Span) => instance_score(prediction, gold) >= span_threshold,
        (Predicted::Class(c), g) => *c == g,
        (Predicted::Span(_), _) => false,
    }
}

fn class_index(c: AnswerClass) -> usize {
    match c {
        AnswerClass::Yes => 0,
        AnswerClass::No => 1,
        AnswerClass::NotEnoughInfo => 2,
        AnswerClass::Span => 3,
    }
}

/// Unweighted mean of per-class F1 over the classes seen in either list.
/// A prediction without a class counts against its gold class only.
pub fn macro_f1(predictions: &[Option<AnswerClass>], golds: &[AnswerClass]) -> Result<f64, EvalError> {
    if predictions.len() != golds.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            golds: golds.len(),
        });
    }
    if golds.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut tp = [0u64; 4];
    let mut fp = [0u64; 4];
    let mut fn_ = [0u64; 4];
    let mut seen = [false; 4];
    for (p, g) in predictions.iter().zip(golds) {
        let gi = class_index(*g);
        seen[gi] = true;
        match p {
            Some(p) if p == g => tp[gi] += 1,
            Some(p) => {
                let pi = class_index(*p);
                seen[pi] = true;
                fp[pi] += 1;
                fn_[gi] += 1;
            }
            None => fn_[gi] += 1,
        }
    }
    let scores: Vec<f64> = (0..4)
        .filter(|&i| seen[i])
        .map(|i| {
            let denom = 2 * tp[i] + fp[i] + fn_[i];
            if denom == 0 {
                0.0
            } else {
                2.0 * tp[i] as f64 / denom as f64
            }
        })
        .collect();
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Rows are gold classes, columns predicted classes, both in the order
/// Yes, No, NotEnoughInfo; a fourth column counts replies with no class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 4]; 3],
}

impl ConfusionMatrix {
    pub const CLASSES: [AnswerClass; 3] = [AnswerClass::Yes, AnswerClass::No, AnswerClass::NotEnoughInfo];

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("gold\\predicted,yes,no,not enough information,unparsed\n");
        for (i, c) in Self::CLASSES.iter().enumerate() {
            let row: Vec<String> = self.counts[i].iter().map(u64::to_string).collect();
            s.push_str(&format!("{},{}\n", c.label(), row.join(",")));
        }
        s
    }
}

pub fn confusion_matrix(
    dataset: DatasetKind,
    predictions: &[Option<AnswerClass>],
    golds: &[AnswerClass],
) -> Result<ConfusionMatrix, EvalError> {
    if dataset.is_span_task() {
        return Err(EvalError::SpanTask(dataset));
    }
    if predictions.len() != golds.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            golds: golds.len(),
        });
    }
    let mut m = ConfusionMatrix { counts: [[0; 4]; 3] };
    for (p, g) in predictions.iter().zip(golds) {
        let row = class_index(*g).min(2);
        let col = match p {
            Some(AnswerClass::Span) | None => 3,
            Some(c) => class_index(*c),
        };
        m.counts[row][col] += 1;
    }
    Ok(m)
}

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceScore {
    pub instance_id: String,
    pub score: f64,
    pub correct: bool,
    pub prediction: Prediction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema: u32,
    pub model: String,
    pub dataset: DatasetKind,
    pub kind: PromptKind,
    pub seed: u64,
    pub scores: Vec<InstanceScore>,
    /// Mean token F1 (CondQA) or macro F1 (others), in points.
    pub headline: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confusion: Option<ConfusionMatrix>,
    pub cost: f64,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub model: String,
    pub dataset: DatasetKind,
    pub kind: PromptKind,
    pub seed: u64,
}

/// Scores every finished transcript of one (dataset, kind, seed) cell.
/// Failed instances score 0 and stay in the denominator; skipped ones leave it.
pub fn evaluate(
    cell: &CellKey,
    transcripts: &[Transcript],
    golds: &BTreeMap<String, Instance>,
    span_threshold: f64,
    cost: f64,
) -> Result<EvalReport, EvalError> {
    let mut scores = Vec::new();
    let mut classes: Vec<Option<AnswerClass>> = Vec::new();
    let mut gold_classes = Vec::new();
    let (mut failed, mut skipped) = (0, 0);
    for t in transcripts {
        let Some(gold) = golds.get(&t.instance_id) else { continue };
        let prediction = match &t.status {
            crate::chain::Status::Skipped { .. } => {
                skipped += 1;
                continue;
            }
            crate::chain::Status::Ok => extract_answer(t),
            _ => {
                failed += 1;
                Prediction {
                    instance_id: t.instance_id.clone(),
                    extracted: String::new(),
                    predicted: Predicted::Unknown,
                    method: Extraction::None,
                }
            }
        };
        classes.push(match &prediction.predicted {
            Predicted::Class(c) => Some(*c),
            _ => None,
        });
        gold_classes.push(gold.answer_class);
        scores.push(InstanceScore {
            instance_id: t.instance_id.clone(),
            score: instance_score(&prediction, gold),
            correct: is_correct(&prediction, gold, span_threshold),
            prediction,
        });
    }
    if scores.is_empty() {
        return Err(EvalError::Empty);
    }
    let dataset = cell.dataset;
    let (headline, confusion) = if dataset.is_span_task() {
        (100.0 * scores.iter().map(|s| s.score).sum::<f64>() / scores.len() as f64, None)
    } else {
        (
            100.0 * macro_f1(&classes, &gold_classes)?,
            Some(confusion_matrix(dataset, &classes, &gold_classes)?),
        )
    };
    Ok(EvalReport {
        schema: REPORT_SCHEMA,
        model: cell.model.clone(),
        dataset,
        kind: cell.kind,
        seed: cell.seed,
        scores,
        headline,
        confusion,
        cost,
        failed,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    pub model: String,
    pub dataset: DatasetKind,
    pub kind: PromptKind,
    pub mean: f64,
    pub std: f64,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub cells: Vec<SummaryCell>,
    /// Per model: mean over datasets of (code mean - text mean).
    pub delta_cp: BTreeMap<String, f64>,
}

impl Summary {
    pub fn cell(&self, model: &str, dataset: DatasetKind, kind: PromptKind) -> Option<&SummaryCell> {
        self.cells
            .iter()
            .find(|c| c.model == model && c.dataset == dataset && c.kind == kind)
    }

    /// Per (model, dataset, ablation kind): ablation mean minus code mean.
    pub fn ablation_deltas(&self) -> Vec<(String, DatasetKind, PromptKind, f64)> {
        self.cells
            .iter()
            .filter(|c| c.kind.is_ablation())
            .filter_map(|c| {
                let base = self.cell(&c.model, c.dataset, PromptKind::CodeAnswer)?;
                Some((c.model.clone(), c.dataset, c.kind, c.mean - base.mean))
            })
            .collect()
    }
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Merges per-seed reports into mean ± std per (model, dataset, kind) and the
/// code-minus-text gap per model.
pub fn aggregate_runs(reports: &[EvalReport]) -> Result<Summary, EvalError> {
    let mut groups: BTreeMap<(String, DatasetKind, PromptKind), Vec<(u64, f64)>> = BTreeMap::new();
    for r in reports {
        if r.schema != REPORT_SCHEMA {
            return Err(EvalError::Schema {
                found: r.schema,
                expected: REPORT_SCHEMA,
            });
        }
        let g = groups.entry((r.model.clone(), r.dataset, r.kind)).or_default();
        if g.iter().any(|(s, _)| *s == r.seed) {
            return Err(EvalError::DuplicateReport(format!(
                "{} {} {} seed {}",
                r.model, r.dataset, r.kind, r.seed
            )));
        }
        g.push((r.seed, r.headline));
    }
    let mut summary = Summary::default();
    for ((model, dataset, kind), mut runs) in groups {
        runs.sort_by_key(|r| r.0);
        let values: Vec<f64> = runs.iter().map(|r| r.1).collect();
        let (mean, std) = mean_std(&values);
        summary.cells.push(SummaryCell {
            model,
            dataset,
            kind,
            mean,
            std,
            seeds: runs.iter().map(|r| r.0).collect(),
        });
    }
    let models: BTreeSet<String> = summary.cells.iter().map(|c| c.model.clone()).collect();
    for model in models {
        let datasets = |kind: PromptKind| -> Vec<DatasetKind> {
            let mut d: Vec<DatasetKind> = summary
                .cells
                .iter()
                .filter(|c| c.model == model && c.kind == kind)
                .map(|c| c.dataset)
                .collect();
            d.sort_by_key(|d| d.id());
            d
        };
        let text = datasets(PromptKind::Text);
        let code = datasets(PromptKind::CodeAnswer);
        if text.is_empty() || code.is_empty() {
            continue;
        }
        if code != text {
            return Err(EvalError::DatasetMismatch {
                model: model.clone(),
                kind: PromptKind::CodeAnswer,
                found: code,
                expected: text,
            });
        }
        let gaps: Vec<f64> = text
            .iter()
            .map(|&d| {
                summary.cell(&model, d, PromptKind::CodeAnswer).unwrap().mean
                    - summary.cell(&model, d, PromptKind::Text).unwrap().mean
            })
            .collect();
        summary.delta_cp.insert(model, gaps.iter().sum::<f64>() / gaps.len() as f64);
    }
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    Correct,
    Incorrect,
}

/// Percentage of probes answered wrongly among instances in `partition`;
/// `None` when the partition has no probes.
pub fn memory_error_rate(results: &[ProbeResult], partition: Partition) -> Option<f64> {
    let want = partition == Partition::Correct;
    let (n, errors) = results
        .iter()
        .filter(|r| r.answer_correct == want)
        .fold((0usize, 0usize), |(n, e), r| (n + 1, e + r.is_error as usize));
    (n > 0).then(|| 100.0 * errors as f64 / n as f64)
}

#[cfg(test)]
mod tests;
