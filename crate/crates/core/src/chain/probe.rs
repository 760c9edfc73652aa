//! Probe sessions: ask the model about key entities of the input after each
//! prefix of its own chain of thought.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{split_cot, ChainEnv, ChainError, Transcript};
use crate::corpus::{DatasetKind, Instance};
use crate::llm::LlmExchange;
use crate::prompts::{self, ProbeMode};
use crate::pseudocode::{Expr, Literal, PseudoProgram, Statement};

/// Value a key entity holds in the input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeValue {
    True,
    False,
    Unknown,
    Text(String),
}

impl ProbeValue {
    /// Token compared against a normalized reply.
    pub fn canonical(&self) -> String {
        match self {
            ProbeValue::True => "true".into(),
            ProbeValue::False => "false".into(),
            ProbeValue::Unknown => "unknown".into(),
            ProbeValue::Text(s) => normalize_reply(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyEntity {
    /// Fact phrase (text probes) or variable name (code probes).
    pub target: String,
    pub expected: ProbeValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub instance_id: String,
    /// Index of the last chain-of-thought step shown to the model.
    pub step_index: usize,
    pub target: String,
    pub expected: ProbeValue,
    pub reply_raw: String,
    pub reply_norm: String,
    pub is_error: bool,
    pub mode: ProbeMode,
    /// Whether the instance's final answer was scored correct.
    pub answer_correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSession {
    pub instance_id: String,
    pub results: Vec<ProbeResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    pub exchanges: Vec<LlmExchange>,
}

/// Caps on probing: instances per correctness partition, and optionally key
/// entities and truncation points per instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeBudget {
    pub max_instances: usize,
    pub max_entities: Option<usize>,
    pub max_steps: Option<usize>,
}

impl ProbeBudget {
    /// BGQA-1/2: 50 instances, BGQA-3: 20, every fact at every step.
    /// CondQA and ShARC: 30 instances, 5 entities at 3 truncation points.
    pub fn for_dataset(dataset: DatasetKind) -> Self {
        match dataset {
            DatasetKind::Bgqa1 | DatasetKind::Bgqa2 => ProbeBudget {
                max_instances: 50,
                max_entities: None,
                max_steps: None,
            },
            DatasetKind::Bgqa3 => ProbeBudget {
                max_instances: 20,
                max_entities: None,
                max_steps: None,
            },
            DatasetKind::CondQa | DatasetKind::Sharc => ProbeBudget {
                max_instances: 30,
                max_entities: Some(5),
                max_steps: Some(3),
            },
        }
    }

    pub fn probe_count(&self, steps: usize, entities: usize) -> usize {
        let s = self.max_steps.map_or(steps, |m| steps.min(m));
        let e = self.max_entities.map_or(entities, |m| entities.min(m));
        s * e
    }
}

fn rng(tag: &str, seed: u64, id: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(tag.as_bytes());
    h.update([0]);
    h.update(seed.to_le_bytes());
    h.update(id.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// `k` distinct indices of `0..n`, ascending.
fn choose(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    let k = k.min(n);
    for i in 0..k {
        let j = i + (rng.next_u64() % (n - i) as u64) as usize;
        idx.swap(i, j);
    }
    let mut out = idx[..k].to_vec();
    out.sort_unstable();
    out
}

/// The (step index, entity index) pairs to probe, in step-major order.
pub fn plan_probes(
    steps: usize,
    entities: usize,
    budget: &ProbeBudget,
    seed: u64,
    instance_id: &str,
) -> Vec<(usize, usize)> {
    let mut r = rng("probe-plan", seed, instance_id);
    let step_idx = match budget.max_steps {
        Some(m) if m < steps => choose(&mut r, steps, m),
        _ => (0..steps).collect(),
    };
    let ent_idx = match budget.max_entities {
        Some(m) if m < entities => choose(&mut r, entities, m),
        _ => (0..entities).collect(),
    };
    step_idx
        .iter()
        .flat_map(|&s| ent_idx.iter().map(move |&e| (s, e)))
        .collect()
}

/// Picks up to `max_instances` ids from each correctness partition, keeping
/// input order.
pub fn select_probe_instances(candidates: &[(String, bool)], budget: &ProbeBudget, seed: u64) -> Vec<String> {
    let mut keep = vec![false; candidates.len()];
    for part in [true, false] {
        let members: Vec<usize> = (0..candidates.len()).filter(|&i| candidates[i].1 == part).collect();
        let mut r = rng(if part { "probe-correct" } else { "probe-incorrect" }, seed, "");
        for j in choose(&mut r, members.len(), budget.max_instances) {
            keep[members[j]] = true;
        }
    }
    candidates
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|((id, _), _)| id.clone())
        .collect()
}

/// Lower-cases, drops punctuation and backticks, collapses whitespace and maps
/// yes/no to true/false and none / not enough information to unknown.
pub fn normalize_reply(reply: &str) -> String {
    let cleaned: String = reply
        .to_lowercase()
        .chars()
        .map(|c| if c.is_ascii_punctuation() { ' ' } else { c })
        .collect();
    let joined = cleaned.split_whitespace().collect::<Vec<_>>().join(" ");
    match joined.as_str() {
        "yes" | "true" => "true".into(),
        "no" | "false" => "false".into(),
        "unknown" | "none" | "not enough information" => "unknown".into(),
        _ => joined,
    }
}

/// Sentence turned into the clause that follows "is it true that".
pub fn fact_phrase(sentence: &str) -> String {
    let s = sentence.trim().trim_end_matches(['.', '!']).trim();
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(first), Some(second)) if first.is_uppercase() && !second.is_uppercase() => {
            first.to_lowercase().chain(s.chars().skip(1)).collect()
        }
        _ => s.to_string(),
    }
}

/// BGQA key entities: the stated facts, true by construction.
pub fn key_entities_bgqa(instance: &Instance) -> Vec<KeyEntity> {
    instance
        .facts
        .iter()
        .map(|f| KeyEntity {
            target: fact_phrase(f),
            expected: ProbeValue::True,
        })
        .collect()
}

/// Code key entities: top-level variables assigned a literal in the generated
/// code, excluding the question variable.
pub fn key_entities_code(program: &PseudoProgram) -> Vec<KeyEntity> {
    let mut out: Vec<KeyEntity> = Vec::new();
    for st in &program.statements {
        let Statement::Assign {
            target,
            value: Expr::Literal(lit),
            ..
        } = st
        else {
            continue;
        };
        let name = target.name().to_string();
        if program.question_variable.as_deref() == Some(name.as_str()) || out.iter().any(|e| e.target == name) {
            continue;
        }
        let expected = match lit {
            Literal::True => ProbeValue::True,
            Literal::False => ProbeValue::False,
            Literal::None => ProbeValue::Unknown,
            Literal::Number(n) => ProbeValue::Text(n.clone()),
            Literal::Str(s) => ProbeValue::Text(s.trim_matches(['"', '\'']).to_string()),
        };
        out.push(KeyEntity { target: name, expected });
    }
    out
}

fn scenario_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        cur.push(c);
        if matches!(c, '.' | '!' | '?') {
            if !cur.trim().is_empty() {
                out.push(cur.trim().to_string());
            }
            cur.clear();
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

/// Text-mode key entities for CondQA and ShARC: atomic statements of the
/// scenario, all true as stated by the speaker.
pub fn key_entities_scenario(
    env: &ChainEnv<'_>,
    instance: &Instance,
    log: &mut Vec<LlmExchange>,
) -> Result<Vec<KeyEntity>, ChainError> {
    let mut out: Vec<KeyEntity> = Vec::new();
    for sentence in scenario_sentences(&instance.scenario) {
        if sentence.ends_with('?') {
            continue;
        }
        for st in super::decompose(env, instance.dataset, &sentence, log)? {
            let target = fact_phrase(&st);
            if !target.is_empty() && !out.iter().any(|e| e.target == target) {
                out.push(KeyEntity {
                    target,
                    expected: ProbeValue::True,
                });
            }
        }
    }
    Ok(out)
}

/// Prefix of the chain of thought through `step_index`, newline-terminated.
pub fn partial_cot(steps: &[String], step_index: usize) -> String {
    steps[..=step_index].iter().map(|s| format!("{s}\n")).collect()
}

/// Issues one stateless probe per planned (step, entity) pair.
pub fn run_probe_session(
    env: &ChainEnv<'_>,
    transcript: &Transcript,
    entities: &[KeyEntity],
    mode: ProbeMode,
    budget: &ProbeBudget,
    answer_correct: bool,
) -> Result<ProbeSession, ChainError> {
    let mut session = ProbeSession {
        instance_id: transcript.instance_id.clone(),
        results: Vec::new(),
        diagnostic: None,
        exchanges: Vec::new(),
    };
    let steps = split_cot(&transcript.cot_text);
    let context = match transcript.answer_bundle() {
        Some(b) if !steps.is_empty() => b.clone(),
        _ => {
            session.diagnostic = Some("transcript has no reasoning steps to truncate".into());
            return Ok(session);
        }
    };
    if entities.is_empty() {
        session.diagnostic = Some("no key entities".into());
        return Ok(session);
    }
    for (s, e) in plan_probes(steps.len(), entities.len(), budget, transcript.seed, &transcript.instance_id) {
        let entity = &entities[e];
        let bundle = prompts::build_probe(env.templates, &context, &partial_cot(&steps, s), &entity.target, mode)?;
        let reply = env.call(bundle, &mut session.exchanges)?;
        let reply_norm = normalize_reply(&reply);
        session.results.push(ProbeResult {
            instance_id: transcript.instance_id.clone(),
            step_index: s,
            target: entity.target.clone(),
            is_error: reply_norm != entity.expected.canonical(),
            expected: entity.expected.clone(),
            reply_raw: reply,
            reply_norm,
            mode,
            answer_correct,
        });
    }
    Ok(session)
}
