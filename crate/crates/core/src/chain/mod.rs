//! Prompt chains: the one-step text chain, the two-step code chain, the
//! ablation chains, and probe sessions over finished transcripts.

mod probe;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{DatasetKind, Instance};
use crate::llm::{LlmClient, LlmError, LlmExchange, LlmRequest};
use crate::prompts::{
    self, PromptBundle, PromptError, PromptKind, Templates, TranslationDemo,
};
use crate::pseudocode::{
    self, anonymize, back_translation_skeleton, splice_random, strip_comments, Diagnostic,
    PseudoProgram, PseudocodeError, SkeletonPart,
};

pub use probe::*;

pub const TRANSCRIPT_SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Transform(#[from] PseudocodeError),
    #[error("generated code for `{id}` has fatal diagnostics: {message}")]
    FailedTranslation { id: String, message: String },
    #[error("{0} is not a runnable prompt kind")]
    NotRunnable(PromptKind),
    #[error("no donor program available for random code")]
    NoDonor,
}

impl ChainError {
    pub fn category(&self) -> &'static str {
        match self {
            ChainError::Llm(e) => e.category(),
            ChainError::Prompt(_) => "prompt",
            ChainError::Transform(_) => "transform",
            ChainError::FailedTranslation { .. } => "failed_translation",
            ChainError::NotRunnable(_) => "config",
            ChainError::NoDonor => "transform",
        }
    }
}

/// Everything a chain needs besides the instance.
pub struct ChainEnv<'a> {
    pub client: &'a LlmClient,
    pub templates: &'a Templates,
    pub model_id: String,
    /// Fail an instance whose generated code has fatal diagnostics instead of
    /// passing the code on as is.
    pub strict: bool,
}

impl ChainEnv<'_> {
    fn call(&self, bundle: PromptBundle, log: &mut Vec<LlmExchange>) -> Result<String, ChainError> {
        let ex = self.client.complete(&LlmRequest::new(self.model_id.clone(), bundle))?;
        let text = ex.response_text.clone();
        log.push(ex);
        Ok(text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Ok,
    Skipped { reason: String },
    FailedTranslation { reason: String },
    Failed { category: String, message: String },
}

impl Status {
    pub fn is_ok(&self) -> bool {
        matches!(self, Status::Ok)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub instance_id: String,
    pub dataset: DatasetKind,
    pub kind: PromptKind,
    pub seed: u64,
    pub status: Status,
    pub exchanges: Vec<LlmExchange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_code: Option<PseudoProgram>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub code_diagnostics: Vec<Diagnostic>,
    pub cot_text: String,
    pub cot_steps: Vec<String>,
    pub raw_answer_text: String,
}

impl Transcript {
    fn empty(instance: &Instance, kind: PromptKind, seed: u64, status: Status) -> Self {
        Transcript {
            instance_id: instance.id.clone(),
            dataset: instance.dataset,
            kind,
            seed,
            status,
            exchanges: Vec::new(),
            generated_code: None,
            code_diagnostics: Vec::new(),
            cot_text: String::new(),
            cot_steps: Vec::new(),
            raw_answer_text: String::new(),
        }
    }

    /// The prompt of the final answer call.
    pub fn answer_bundle(&self) -> Option<&PromptBundle> {
        self.exchanges
            .iter()
            .rev()
            .map(|e| &e.request.bundle)
            .find(|b| b.step == prompts::Step::Answer)
    }
}

/// Reasoning steps of a chain of thought: lines, with blank ones dropped.
pub fn split_cot(text: &str) -> Vec<String> {
    text.split('\n')
        .map(|s| s.strip_suffix('\r').unwrap_or(s))
        .filter(|s| !s.trim().is_empty())
        .map(str::to_string)
        .collect()
}

/// Splits a final reply into the chain of thought and the text after the last
/// answer marker. ShARC replies are the label alone.
pub fn split_reply(reply: &str, dataset: DatasetKind) -> (String, Option<String>) {
    if dataset == DatasetKind::Sharc {
        return (String::new(), Some(reply.trim().to_string()));
    }
    match reply.rfind("Answer:") {
        Some(pos) => {
            let cot = reply[..pos].trim_end().trim_end_matches('#').trim_end();
            (cot.to_string(), Some(reply[pos + "Answer:".len()..].trim().to_string()))
        }
        None => (reply.trim_end().to_string(), None),
    }
}

fn finish(t: &mut Transcript, reply: String) {
    let (cot, _) = split_reply(&reply, t.dataset);
    t.cot_steps = split_cot(&cot);
    t.cot_text = t.cot_steps.join("\n");
    t.raw_answer_text = reply;
}

/// Whether `kind` applies to `instance`; CondQA runs the code-only ablations on
/// the yes/no partition alone.
pub fn applies(kind: PromptKind, instance: &Instance) -> Result<(), String> {
    let yes_no_only = matches!(
        kind,
        PromptKind::NoComments | PromptKind::AnonymizedCode | PromptKind::RandomCode
    );
    if yes_no_only && instance.dataset == DatasetKind::CondQa && !instance.is_yes_no() {
        Err(format!("{kind} runs on the CondQA yes/no partition only"))
    } else {
        Ok(())
    }
}

/// Demonstrations and other per-(dataset, kind, seed) material, prepared once.
#[derive(Debug, Clone)]
pub struct Cell {
    pub dataset: DatasetKind,
    pub kind: PromptKind,
    pub seed: u64,
    pub text_demos: Vec<Instance>,
    pub translation_demos: Vec<TranslationDemo>,
    /// Code-condition answer demonstrations, already transformed for `kind`.
    pub code_demos: Vec<(Instance, PseudoProgram)>,
    /// Rewritten-text demonstrations for the atomic and back-translated kinds.
    pub rewritten_demos: Vec<(Instance, String)>,
    /// Donor programs for random code.
    pub donors: Vec<PseudoProgram>,
    /// Calls made while preparing the demonstrations.
    pub exchanges: Vec<LlmExchange>,
}

/// Prepares a cell. `demos` are the sampled demonstrations; code kinds get
/// them translated by the model (with `translation_demo_count` hand-written
/// translation examples) and transformed like the live inputs will be.
pub fn prepare_cell(
    env: &ChainEnv<'_>,
    dataset: DatasetKind,
    kind: PromptKind,
    seed: u64,
    demos: Vec<Instance>,
    translation_demo_count: usize,
) -> Result<Cell, ChainError> {
    if !PromptKind::RUNNABLE.contains(&kind) {
        return Err(ChainError::NotRunnable(kind));
    }
    let all_translation = env.templates.translation_demos(dataset)?;
    let translation_demos: Vec<TranslationDemo> = all_translation
        .into_iter()
        .take(translation_demo_count.max(1))
        .collect();
    let donors: Vec<PseudoProgram> = translation_demos
        .iter()
        .map(|d| pseudocode::parse(&d.code).program)
        .collect();
    let mut cell = Cell {
        dataset,
        kind,
        seed,
        text_demos: Vec::new(),
        translation_demos,
        code_demos: Vec::new(),
        rewritten_demos: Vec::new(),
        donors,
        exchanges: Vec::new(),
    };
    let mut log = Vec::new();
    match kind {
        PromptKind::Text => cell.text_demos = demos,
        PromptKind::AtomicStatements => {
            for d in demos {
                let body = atomic_body(env, &d, &mut log)?;
                cell.rewritten_demos.push((d, body));
            }
        }
        PromptKind::BackTranslatedCode => {
            for d in demos {
                let (code, _) = translate(env, &cell, &d, &mut log)?;
                let body = back_translate(env, &code, d.dataset, &mut log)?;
                cell.rewritten_demos.push((d, body));
            }
        }
        _ => {
            for d in demos {
                let (code, _) = translate(env, &cell, &d, &mut log)?;
                let code = transform(&cell, &d.id, &code)?;
                cell.code_demos.push((d, code));
            }
        }
    }
    cell.exchanges = log;
    Ok(cell)
}

fn translate(
    env: &ChainEnv<'_>,
    cell: &Cell,
    instance: &Instance,
    log: &mut Vec<LlmExchange>,
) -> Result<(PseudoProgram, Vec<Diagnostic>), ChainError> {
    let bundle = prompts::build_code_translation(env.templates, instance, &cell.translation_demos)?;
    let text = env.call(bundle, log)?;
    let parsed = pseudocode::parse(&text);
    if env.strict && parsed.has_fatal() {
        let message = parsed
            .diagnostics
            .iter()
            .map(|d| format!("line {}: {}", d.line, d.message))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(ChainError::FailedTranslation {
            id: instance.id.clone(),
            message,
        });
    }
    Ok((parsed.program, parsed.diagnostics))
}

fn mix(seed: u64, id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(b"random-code\0");
    h.update(seed.to_le_bytes());
    h.update(id.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// Applies the code transform of the cell's kind.
pub fn transform(cell: &Cell, instance_id: &str, code: &PseudoProgram) -> Result<PseudoProgram, ChainError> {
    Ok(match cell.kind {
        PromptKind::AnonymizedCode => anonymize(code).program,
        PromptKind::NoComments => strip_comments(code),
        PromptKind::RandomCode => {
            let candidates: Vec<&PseudoProgram> = cell.donors.iter().filter(|d| *d != code).collect();
            if candidates.is_empty() {
                return Err(ChainError::NoDonor);
            }
            let h = mix(cell.seed, instance_id);
            let donor = candidates[(h % candidates.len() as u64) as usize];
            splice_random(code, donor, h)?
        }
        _ => code.clone(),
    })
}

/// Rewrites a program in natural language: comments stay, assignments become
/// key-entity lines and each `if` or rule is translated by the model.
pub fn back_translate(
    env: &ChainEnv<'_>,
    code: &PseudoProgram,
    dataset: DatasetKind,
    log: &mut Vec<LlmExchange>,
) -> Result<String, ChainError> {
    let demos = env.templates.back_translation_demos()?;
    let parts = back_translation_skeleton(code);
    let mut sentences = Vec::new();
    for p in &parts {
        if let SkeletonPart::Translate(unit) = p {
            let bundle = prompts::build_back_translation(env.templates, dataset, unit, &demos)?;
            sentences.push(env.call(bundle, log)?);
        }
    }
    Ok(prompts::assemble_back_translation(&parts, &sentences))
}

fn strip_tags(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_tag = false;
    for c in s.chars() {
        match c {
            '<' => in_tag = true,
            '>' if in_tag => in_tag = false,
            _ if !in_tag => out.push(c),
            _ => {}
        }
    }
    out.trim().to_string()
}

fn decompose(
    env: &ChainEnv<'_>,
    dataset: DatasetKind,
    sentence: &str,
    log: &mut Vec<LlmExchange>,
) -> Result<Vec<String>, ChainError> {
    let demos = env.templates.atomic_demos()?;
    let bundle = prompts::build_atomic(env.templates, dataset, sentence, &demos)?;
    Ok(split_cot(&env.call(bundle, log)?)
        .into_iter()
        .map(|s| s.trim().trim_start_matches("- ").to_string())
        .collect())
}

/// Body for the atomic-statements condition: every sentence followed by its
/// atomic statements. BGQA decomposes the stated facts only.
pub fn atomic_body(
    env: &ChainEnv<'_>,
    instance: &Instance,
    log: &mut Vec<LlmExchange>,
) -> Result<String, ChainError> {
    if instance.dataset.is_bgqa() {
        let mut body = instance.source_text.clone();
        for fact in &instance.facts {
            let core = fact.trim().trim_end_matches('.');
            let Some(pos) = body.find(core) else { continue };
            let mut end = pos + core.len();
            if body[end..].starts_with('.') {
                end += 1;
            }
            let statements = decompose(env, instance.dataset, fact.trim(), log)?;
            body.insert_str(end, &format!(" {}", statements.join(" ")));
        }
        return Ok(body);
    }
    let mut out = Vec::new();
    for line in prompts::text_body(instance).split('\n') {
        out.push(line.to_string());
        let plain = strip_tags(line);
        let heading = line.trim_start().starts_with("<h") || line.trim_start().starts_with('#');
        if heading || plain.split_whitespace().count() < 4 {
            continue;
        }
        out.extend(decompose(env, instance.dataset, &plain, log)?);
    }
    Ok(out.join("\n"))
}

/// One-step text chain, and the rewritten-text ablations.
pub fn run_text_chain(env: &ChainEnv<'_>, cell: &Cell, instance: &Instance) -> Result<Transcript, ChainError> {
    let mut t = Transcript::empty(instance, cell.kind, cell.seed, Status::Ok);
    let bundle = match cell.kind {
        PromptKind::Text => prompts::build_text(env.templates, instance, &cell.text_demos)?,
        PromptKind::AtomicStatements | PromptKind::BackTranslatedCode => {
            let body = if cell.kind == PromptKind::AtomicStatements {
                atomic_body(env, instance, &mut t.exchanges)?
            } else {
                let (code, diags) = translate(env, cell, instance, &mut t.exchanges)?;
                t.code_diagnostics = diags;
                let body = back_translate(env, &code, instance.dataset, &mut t.exchanges)?;
                t.generated_code = Some(code);
                body
            };
            let demos: Vec<(&Instance, String)> =
                cell.rewritten_demos.iter().map(|(i, b)| (i, b.clone())).collect();
            prompts::build_text_rewritten(env.templates, cell.kind, (instance, &body), &demos)?
        }
        other => return Err(ChainError::NotRunnable(other)),
    };
    let reply = env.call(bundle, &mut t.exchanges)?;
    finish(&mut t, reply);
    Ok(t)
}

/// Two-step code chain: translate, transform for the cell's kind, answer.
pub fn run_code_chain(env: &ChainEnv<'_>, cell: &Cell, instance: &Instance) -> Result<Transcript, ChainError> {
    if !cell.kind.answers_from_code() {
        return Err(ChainError::NotRunnable(cell.kind));
    }
    let mut t = Transcript::empty(instance, cell.kind, cell.seed, Status::Ok);
    let (code, diags) = translate(env, cell, instance, &mut t.exchanges)?;
    t.code_diagnostics = diags;
    let shown = transform(cell, &instance.id, &code)?;
    let bundle = prompts::build_code_answer_as(env.templates, cell.kind, &shown, instance, &cell.code_demos)?;
    let reply = env.call(bundle, &mut t.exchanges)?;
    t.generated_code = Some(code);
    finish(&mut t, reply);
    Ok(t)
}

/// Runs whichever chain the cell's kind needs and folds every failure into the
/// transcript status.
pub fn run_instance(env: &ChainEnv<'_>, cell: &Cell, instance: &Instance) -> Transcript {
    if let Err(reason) = applies(cell.kind, instance) {
        return Transcript::empty(instance, cell.kind, cell.seed, Status::Skipped { reason });
    }
    let result = if cell.kind.answers_from_code() {
        run_code_chain(env, cell, instance)
    } else {
        run_text_chain(env, cell, instance)
    };
    match result {
        Ok(t) => t,
        Err(ChainError::FailedTranslation { message, .. }) => Transcript::empty(
            instance,
            cell.kind,
            cell.seed,
            Status::FailedTranslation { reason: message },
        ),
        Err(e) => {
            tracing::warn!(instance = %instance.id, kind = %cell.kind, error = %e, "instance failed");
            Transcript::empty(
                instance,
                cell.kind,
                cell.seed,
                Status::Failed {
                    category: e.category().to_string(),
                    message: e.to_string(),
                },
            )
        }
    }
}

#[cfg(test)]
mod tests;
