//! Plain-text and CSV renderings of summaries, ablation gaps, memory errors
//! and costs.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{memory_error_rate, Partition, Summary};
use crate::chain::ProbeResult;
use crate::corpus::DatasetKind;
use crate::prompts::{ProbeMode, PromptKind};

/// Left-aligned first column, right-aligned others, two spaces between.
pub fn aligned(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width = vec![0; cols];
    for r in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        for (i, c) in r.iter().enumerate().take(cols) {
            width[i] = width[i].max(c.chars().count());
        }
    }
    let line = |r: &[String]| -> String {
        let cells: Vec<String> = (0..cols)
            .map(|i| {
                let c = r.get(i).map(String::as_str).unwrap_or("");
                if i == 0 {
                    format!("{c:<w$}", w = width[i])
                } else {
                    format!("{c:>w$}", w = width[i])
                }
            })
            .collect();
        cells.join("  ").trim_end().to_string()
    };
    let mut out = line(header);
    out.push('\n');
    out.push_str(&"-".repeat(width.iter().sum::<usize>() + 2 * (cols - 1)));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn csv(header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    for r in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        out.push_str(&r.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

fn ordered_datasets(found: impl Iterator<Item = DatasetKind>) -> Vec<DatasetKind> {
    let set: BTreeSet<DatasetKind> = found.collect();
    DatasetKind::ALL.into_iter().filter(|d| set.contains(d)).collect()
}

fn ordered_kinds(found: impl Iterator<Item = PromptKind>) -> Vec<PromptKind> {
    let set: BTreeSet<PromptKind> = found.collect();
    PromptKind::RUNNABLE.into_iter().filter(|k| set.contains(k)).collect()
}

fn score_cell(mean: f64, std: f64, seeds: usize) -> String {
    if seeds > 1 {
        format!("{mean:.2} ± {std:.2}")
    } else {
        format!("{mean:.2}")
    }
}

/// Model × dataset × kind grid, one block per model, with ΔCP when both text
/// and code were run.
pub fn score_grid(summary: &Summary) -> (Vec<String>, Vec<Vec<String>>) {
    let kinds = ordered_kinds(summary.cells.iter().map(|c| c.kind));
    let datasets = ordered_datasets(summary.cells.iter().map(|c| c.dataset));
    let mut header = vec!["model".to_string(), "kind".to_string()];
    header.extend(datasets.iter().map(|d| d.id().to_string()));
    header.push("ΔCP".into());
    let models: BTreeSet<&str> = summary.cells.iter().map(|c| c.model.as_str()).collect();
    let mut rows = Vec::new();
    for model in models {
        for (i, &kind) in kinds.iter().enumerate() {
            let mut row = vec![model.to_string(), kind.id().to_string()];
            for &d in &datasets {
                row.push(
                    summary
                        .cell(model, d, kind)
                        .map(|c| score_cell(c.mean, c.std, c.seeds.len()))
                        .unwrap_or_else(|| "-".into()),
                );
            }
            let delta = summary.delta_cp.get(model).filter(|_| i == 0);
            row.push(delta.map(|d| format!("{d:+.2}")).unwrap_or_default());
            rows.push(row);
        }
    }
    (header, rows)
}

/// Ablation minus code score per model and dataset.
pub fn ablation_grid(summary: &Summary) -> (Vec<String>, Vec<Vec<String>>) {
    let deltas = summary.ablation_deltas();
    let datasets = ordered_datasets(deltas.iter().map(|d| d.1));
    let kinds = ordered_kinds(deltas.iter().map(|d| d.2));
    let mut header = vec!["model".to_string(), "ablation".to_string()];
    header.extend(datasets.iter().map(|d| d.id().to_string()));
    let models: BTreeSet<&str> = deltas.iter().map(|d| d.0.as_str()).collect();
    let mut rows = Vec::new();
    for model in models {
        for &kind in &kinds {
            let mut row = vec![model.to_string(), kind.id().to_string()];
            for &d in &datasets {
                row.push(
                    deltas
                        .iter()
                        .find(|x| x.0 == model && x.1 == d && x.2 == kind)
                        .map(|x| format!("{:+.2}", x.3))
                        .unwrap_or_else(|| "-".into()),
                );
            }
            rows.push(row);
        }
    }
    (header, rows)
}

/// Memory-error percentages for one dataset, split by prompt mode and by
/// whether the final answer was correct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryErrorRow {
    pub dataset: DatasetKind,
    pub text_correct: Option<f64>,
    pub code_correct: Option<f64>,
    pub text_incorrect: Option<f64>,
    pub code_incorrect: Option<f64>,
    pub probes: usize,
}

pub fn memory_error_rows(results: &[(DatasetKind, ProbeMode, Vec<ProbeResult>)]) -> Vec<MemoryErrorRow> {
    let datasets = ordered_datasets(results.iter().map(|r| r.0));
    datasets
        .into_iter()
        .map(|d| {
            let pool = |mode: ProbeMode| -> Vec<ProbeResult> {
                results
                    .iter()
                    .filter(|r| r.0 == d && r.1 == mode)
                    .flat_map(|r| r.2.iter().cloned())
                    .collect()
            };
            let text = pool(ProbeMode::Text);
            let code = pool(ProbeMode::Code);
            MemoryErrorRow {
                dataset: d,
                text_correct: memory_error_rate(&text, Partition::Correct),
                code_correct: memory_error_rate(&code, Partition::Correct),
                text_incorrect: memory_error_rate(&text, Partition::Incorrect),
                code_incorrect: memory_error_rate(&code, Partition::Incorrect),
                probes: text.len() + code.len(),
            }
        })
        .collect()
}

pub fn memory_error_grid(rows: &[MemoryErrorRow]) -> (Vec<String>, Vec<Vec<String>>) {
    let header: Vec<String> = [
        "dataset",
        "correct/text",
        "correct/code",
        "incorrect/text",
        "incorrect/code",
        "probes",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let pct = |v: Option<f64>| v.map(|x| format!("{x:.1}")).unwrap_or_else(|| "-".into());
    let body = rows
        .iter()
        .map(|r| {
            vec![
                r.dataset.id().to_string(),
                pct(r.text_correct),
                pct(r.code_correct),
                pct(r.text_incorrect),
                pct(r.code_incorrect),
                r.probes.to_string(),
            ]
        })
        .collect();
    (header, body)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub dataset: DatasetKind,
    pub kind: PromptKind,
    pub questions: usize,
    pub total: f64,
}

impl CostRow {
    pub fn per_question(&self) -> f64 {
        if self.questions == 0 {
            0.0
        } else {
            self.total / self.questions as f64
        }
    }
}

pub fn cost_grid(rows: &[CostRow]) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["dataset", "kind", "questions", "total", "per question"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let body = rows
        .iter()
        .map(|r| {
            vec![
                r.dataset.id().to_string(),
                r.kind.id().to_string(),
                r.questions.to_string(),
                format!("{:.4}", r.total),
                format!("{:.4}", r.per_question()),
            ]
        })
        .collect();
    (header, body)
}
