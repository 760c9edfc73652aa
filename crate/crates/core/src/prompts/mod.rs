//! Prompt bundles for every prompting condition.
//!
//! All wording lives in the versioned template files (see [`Templates`]); this
//! module only decides which template applies and what goes into each slot.

mod templates;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AnswerClass, DatasetKind, Instance};
use crate::pseudocode::{self, PseudoProgram, SkeletonPart};

pub use templates::{
    family, fill, AtomicDemo, BackTranslationDemo, Templates, TranslationDemo, TEMPLATE_VERSION,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("template `{name}`: {message}")]
    Template { name: String, message: String },
    #[error("demonstration `{0}` has no gold chain of thought")]
    MissingCot(String),
    #[error("demonstration `{id}` is from {found}, expected {expected}")]
    WrongDataset {
        id: String,
        found: DatasetKind,
        expected: DatasetKind,
    },
    #[error("code translation needs at least one demonstration")]
    NoTranslationDemos,
    #[error("demonstration `{0}` has code with fatal dialect diagnostics")]
    InvalidDemoCode(String),
    #[error("back-translation needs exactly 4 demonstrations, got {0}")]
    BackTranslationDemoCount(usize),
    #[error("program is empty")]
    EmptyProgram,
    #[error("`{0}`: code declares no variable answering the question")]
    NoQuestionVariable(String),
    #[error("probe target is empty")]
    EmptyProbeTarget,
    #[error("probe context must end with the instance as a user message")]
    BadProbeContext,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        Message {
            role,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoding {
    pub temperature: f64,
    pub max_tokens: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<Vec<String>>,
}

impl Decoding {
    pub fn greedy(max_tokens: u32) -> Self {
        Decoding {
            temperature: 0.0,
            max_tokens,
            stop: None,
        }
    }
}

/// Prompting condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    Text,
    CodeTranslate,
    CodeAnswer,
    AtomicStatements,
    BackTranslatedCode,
    AnonymizedCode,
    RandomCode,
    NoComments,
    Probe,
}

impl PromptKind {
    /// Conditions that can be run as a chain.
    pub const RUNNABLE: [PromptKind; 7] = [
        PromptKind::Text,
        PromptKind::CodeAnswer,
        PromptKind::AtomicStatements,
        PromptKind::BackTranslatedCode,
        PromptKind::AnonymizedCode,
        PromptKind::RandomCode,
        PromptKind::NoComments,
    ];

    pub fn id(self) -> &'static str {
        match self {
            PromptKind::Text => "text",
            PromptKind::CodeTranslate => "code_translate",
            PromptKind::CodeAnswer => "code",
            PromptKind::AtomicStatements => "atomic_statements",
            PromptKind::BackTranslatedCode => "back_translated_code",
            PromptKind::AnonymizedCode => "anonymized_code",
            PromptKind::RandomCode => "random_code",
            PromptKind::NoComments => "no_comments",
            PromptKind::Probe => "probe",
        }
    }

    /// Conditions whose chain translates the instance into code first.
    pub fn uses_code(self) -> bool {
        matches!(
            self,
            PromptKind::CodeAnswer
                | PromptKind::BackTranslatedCode
                | PromptKind::AnonymizedCode
                | PromptKind::RandomCode
                | PromptKind::NoComments
        )
    }

    /// Ablations of the code prompt, reported as deltas against it.
    pub fn is_ablation(self) -> bool {
        matches!(
            self,
            PromptKind::AtomicStatements
                | PromptKind::BackTranslatedCode
                | PromptKind::AnonymizedCode
                | PromptKind::RandomCode
                | PromptKind::NoComments
        )
    }

    /// Conditions whose final prompt is code.
    pub fn answers_from_code(self) -> bool {
        matches!(
            self,
            PromptKind::CodeAnswer
                | PromptKind::AnonymizedCode
                | PromptKind::RandomCode
                | PromptKind::NoComments
        )
    }
}

impl std::fmt::Display for PromptKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for PromptKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        let all = [
            PromptKind::Text,
            PromptKind::CodeTranslate,
            PromptKind::CodeAnswer,
            PromptKind::AtomicStatements,
            PromptKind::BackTranslatedCode,
            PromptKind::AnonymizedCode,
            PromptKind::RandomCode,
            PromptKind::NoComments,
            PromptKind::Probe,
        ];
        if norm == "code_answer" {
            return Ok(PromptKind::CodeAnswer);
        }
        all.into_iter()
            .find(|k| k.id() == norm)
            .ok_or_else(|| format!("unknown prompt kind `{s}`"))
    }
}

/// Which call of a chain a bundle is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Answer,
    Translate,
    Decompose,
    BackTranslate,
    Probe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub messages: Vec<Message>,
    pub decoding: Decoding,
    pub purpose: PromptKind,
    pub step: Step,
    pub dataset: DatasetKind,
}

impl PromptBundle {
    /// Number of (user, assistant) demonstration pairs before the live input.
    pub fn demo_count(&self) -> usize {
        self.messages.len().saturating_sub(2) / 2
    }

    pub fn last_user(&self) -> Option<&str> {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
    }
}

/// CondQA closing instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnswerFormat {
    Span,
    YesNo,
}

const AUXILIARIES: &[&str] = &[
    "am", "are", "can", "could", "did", "do", "does", "had", "has", "have", "is", "may", "might",
    "must", "shall", "should", "was", "were", "will", "would",
];

/// Yes/no wording for questions that open with an auxiliary verb, span wording
/// otherwise. Decided from the question text alone, never from the gold label.
pub fn answer_format(instance: &Instance) -> AnswerFormat {
    let first = instance
        .question
        .split_whitespace()
        .next()
        .unwrap_or("")
        .to_ascii_lowercase();
    let first = first.trim_matches(|c: char| !c.is_ascii_alphabetic());
    if AUXILIARIES.contains(&first) {
        AnswerFormat::YesNo
    } else {
        AnswerFormat::Span
    }
}

pub const ANSWER_MAX_TOKENS: u32 = 1024;
pub const LABEL_MAX_TOKENS: u32 = 16;
pub const TRANSLATE_MAX_TOKENS: u32 = 4096;
pub const REWRITE_MAX_TOKENS: u32 = 256;
pub const PROBE_MAX_TOKENS: u32 = 16;

fn answer_decoding(dataset: DatasetKind) -> Decoding {
    if dataset == DatasetKind::Sharc {
        Decoding::greedy(LABEL_MAX_TOKENS)
    } else {
        Decoding::greedy(ANSWER_MAX_TOKENS)
    }
}

fn check_dataset(live: &Instance, demo: &Instance) -> Result<(), PromptError> {
    let same = demo.dataset == live.dataset || (demo.dataset.is_bgqa() && live.dataset.is_bgqa());
    if same {
        Ok(())
    } else {
        Err(PromptError::WrongDataset {
            id: demo.id.clone(),
            found: demo.dataset,
            expected: live.dataset,
        })
    }
}

fn history_text(t: &Templates, instance: &Instance) -> Result<String, PromptError> {
    let turns = instance
        .history
        .iter()
        .map(|h| {
            t.fill(
                "sharc.history_turn.txt",
                &[("question", &h.question), ("answer", &h.answer)],
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(turns.join("\n\n"))
}

/// The body a text prompt is built from: the document (CondQA, ShARC) or the
/// pre-rendered input (BGQA). Rewriting ablations swap it out.
pub fn text_body(instance: &Instance) -> String {
    if instance.dataset.is_bgqa() {
        instance.source_text.clone()
    } else {
        instance.document_text()
    }
}

fn text_user(
    t: &Templates,
    instance: &Instance,
    body: &str,
    format: Option<AnswerFormat>,
) -> Result<String, PromptError> {
    match instance.dataset {
        DatasetKind::CondQa => {
            let instruction = match format.unwrap_or_else(|| answer_format(instance)) {
                AnswerFormat::Span => t.get("condqa_text.span.txt")?,
                AnswerFormat::YesNo => t.get("condqa_text.yesno.txt")?,
            };
            t.fill(
                "condqa_text.user.txt",
                &[
                    ("query", &instance.query()),
                    ("document", body),
                    ("instruction", instruction),
                ],
            )
        }
        DatasetKind::Sharc => t.fill(
            "sharc_text.user.txt",
            &[
                ("query", &instance.query()),
                ("document", body),
                ("history", &history_text(t, instance)?),
                ("question", &instance.question),
            ],
        ),
        _ => t.fill("bgqa_text.user.txt", &[("example", body)]),
    }
}

fn text_target(t: &Templates, demo: &Instance) -> Result<String, PromptError> {
    if demo.dataset == DatasetKind::Sharc {
        return Ok(demo.answer_class.label().to_string());
    }
    if demo.gold_cot.trim().is_empty() {
        return Err(PromptError::MissingCot(demo.id.clone()));
    }
    t.fill(
        "target_text.txt",
        &[("cot", &demo.gold_cot), ("answer", &demo.gold_answers[0])],
    )
}

fn code_target(t: &Templates, demo: &Instance) -> Result<String, PromptError> {
    if demo.dataset == DatasetKind::Sharc {
        return Ok(match demo.answer_class {
            AnswerClass::Yes => "True",
            AnswerClass::No => "False",
            _ => "None",
        }
        .to_string());
    }
    if demo.gold_cot.trim().is_empty() {
        return Err(PromptError::MissingCot(demo.id.clone()));
    }
    t.fill(
        "target_code.txt",
        &[("cot", &demo.gold_cot), ("answer", &demo.gold_answers[0])],
    )
}

fn text_system(t: &Templates, dataset: DatasetKind) -> Result<&str, PromptError> {
    t.get(&format!("{}_text.system.txt", family(dataset)))
}

/// Text prompt: system message, one (input, CoT + answer) pair per
/// demonstration, then the live input.
pub fn build_text(
    t: &Templates,
    instance: &Instance,
    demos: &[Instance],
) -> Result<PromptBundle, PromptError> {
    let demos: Vec<(&Instance, String)> = demos.iter().map(|d| (d, text_body(d))).collect();
    text_bundle(t, PromptKind::Text, (instance, &text_body(instance)), &demos, None)
}

/// [`build_text`] with the CondQA closing instruction forced for the live input.
pub fn build_text_formatted(
    t: &Templates,
    instance: &Instance,
    demos: &[Instance],
    format: AnswerFormat,
) -> Result<PromptBundle, PromptError> {
    let demos: Vec<(&Instance, String)> = demos.iter().map(|d| (d, text_body(d))).collect();
    text_bundle(t, PromptKind::Text, (instance, &text_body(instance)), &demos, Some(format))
}

/// Text prompt whose bodies were rewritten by an ablation (atomic statements,
/// back-translated code). Each pair is the instance and its replacement body.
pub fn build_text_rewritten(
    t: &Templates,
    purpose: PromptKind,
    instance: (&Instance, &str),
    demos: &[(&Instance, String)],
) -> Result<PromptBundle, PromptError> {
    text_bundle(t, purpose, instance, demos, None)
}

fn text_bundle(
    t: &Templates,
    purpose: PromptKind,
    instance: (&Instance, &str),
    demos: &[(&Instance, String)],
    format: Option<AnswerFormat>,
) -> Result<PromptBundle, PromptError> {
    let (live, body) = instance;
    let mut messages = vec![Message::new(Role::System, text_system(t, live.dataset)?)];
    for (demo, demo_body) in demos {
        check_dataset(live, demo)?;
        messages.push(Message::new(Role::User, text_user(t, demo, demo_body, None)?));
        messages.push(Message::new(Role::Assistant, text_target(t, demo)?));
    }
    messages.push(Message::new(Role::User, text_user(t, live, body, format)?));
    Ok(PromptBundle {
        messages,
        decoding: answer_decoding(live.dataset),
        purpose,
        step: Step::Answer,
        dataset: live.dataset,
    })
}

/// Natural-language input shown to the translation step.
pub fn translation_input(t: &Templates, instance: &Instance) -> Result<String, PromptError> {
    match instance.dataset {
        DatasetKind::CondQa => t.fill(
            "translate_condqa.user.txt",
            &[
                ("query", &instance.query()),
                ("document", &instance.document_text()),
            ],
        ),
        DatasetKind::Sharc => t.fill(
            "translate_sharc.user.txt",
            &[
                ("query", &instance.query()),
                ("document", &instance.document_text()),
                ("history", &history_text(t, instance)?),
            ],
        ),
        _ => t.fill(
            "translate_bgqa.user.txt",
            &[("example", &instance.source_text)],
        ),
    }
}

/// First step of the code chain: natural language to dialect code.
pub fn build_code_translation(
    t: &Templates,
    instance: &Instance,
    demos: &[TranslationDemo],
) -> Result<PromptBundle, PromptError> {
    if demos.is_empty() {
        return Err(PromptError::NoTranslationDemos);
    }
    let system = t.get(&format!("translate_{}.system.txt", family(instance.dataset)))?;
    let mut messages = vec![Message::new(Role::System, system)];
    for demo in demos {
        check_dataset(instance, &demo.instance)?;
        if pseudocode::parse(&demo.code).has_fatal() {
            return Err(PromptError::InvalidDemoCode(demo.instance.id.clone()));
        }
        messages.push(Message::new(Role::User, translation_input(t, &demo.instance)?));
        messages.push(Message::new(Role::Assistant, demo.code.clone()));
    }
    messages.push(Message::new(Role::User, translation_input(t, instance)?));
    Ok(PromptBundle {
        messages,
        decoding: Decoding::greedy(TRANSLATE_MAX_TOKENS),
        purpose: PromptKind::CodeTranslate,
        step: Step::Translate,
        dataset: instance.dataset,
    })
}

fn code_user(t: &Templates, code: &PseudoProgram, instance: &Instance) -> Result<String, PromptError> {
    let rendered = pseudocode::render(code);
    if rendered.trim().is_empty() {
        return Err(PromptError::EmptyProgram);
    }
    match instance.dataset {
        DatasetKind::CondQa => {
            let instruction = match answer_format(instance) {
                AnswerFormat::Span => t.get("condqa_code.span.txt")?,
                AnswerFormat::YesNo => t.get("condqa_code.yesno.txt")?,
            };
            t.fill(
                "condqa_code.user.txt",
                &[
                    ("code", &rendered),
                    ("query", &instance.query()),
                    ("instruction", instruction),
                ],
            )
        }
        DatasetKind::Sharc => {
            let q = code
                .question_variable
                .as_deref()
                .ok_or_else(|| PromptError::NoQuestionVariable(instance.id.clone()))?;
            t.fill(
                "sharc_code.user.txt",
                &[("code", &rendered), ("question_variable", q)],
            )
        }
        _ => t.fill("bgqa_code.user.txt", &[("code", &rendered)]),
    }
}

/// Second step of the code chain: answer from the (possibly transformed) code.
pub fn build_code_answer(
    t: &Templates,
    code: &PseudoProgram,
    instance: &Instance,
    demos: &[(Instance, PseudoProgram)],
) -> Result<PromptBundle, PromptError> {
    build_code_answer_as(t, PromptKind::CodeAnswer, code, instance, demos)
}

/// [`build_code_answer`] tagged with the ablation it serves.
pub fn build_code_answer_as(
    t: &Templates,
    purpose: PromptKind,
    code: &PseudoProgram,
    instance: &Instance,
    demos: &[(Instance, PseudoProgram)],
) -> Result<PromptBundle, PromptError> {
    let system = t.get(&format!("{}_code.system.txt", family(instance.dataset)))?;
    let mut messages = vec![Message::new(Role::System, system)];
    for (demo, demo_code) in demos {
        check_dataset(instance, demo)?;
        messages.push(Message::new(Role::User, code_user(t, demo_code, demo)?));
        messages.push(Message::new(Role::Assistant, code_target(t, demo)?));
    }
    messages.push(Message::new(Role::User, code_user(t, code, instance)?));
    Ok(PromptBundle {
        messages,
        decoding: answer_decoding(instance.dataset),
        purpose,
        step: Step::Answer,
        dataset: instance.dataset,
    })
}

/// Asks for one code unit (an `if` block or a rule) restated as a sentence.
pub fn build_back_translation(
    t: &Templates,
    dataset: DatasetKind,
    unit: &str,
    demos: &[BackTranslationDemo],
) -> Result<PromptBundle, PromptError> {
    if demos.len() != 4 {
        return Err(PromptError::BackTranslationDemoCount(demos.len()));
    }
    let mut messages = vec![Message::new(Role::System, t.get("back_translate.system.txt")?)];
    for d in demos {
        messages.push(Message::new(Role::User, d.code.clone()));
        messages.push(Message::new(Role::Assistant, d.text.clone()));
    }
    messages.push(Message::new(Role::User, unit));
    Ok(PromptBundle {
        messages,
        decoding: Decoding::greedy(REWRITE_MAX_TOKENS),
        purpose: PromptKind::BackTranslatedCode,
        step: Step::BackTranslate,
        dataset,
    })
}

/// Joins a back-translation skeleton, consuming one sentence per code unit.
pub fn assemble_back_translation(parts: &[SkeletonPart], sentences: &[String]) -> String {
    let mut it = sentences.iter();
    parts
        .iter()
        .map(|p| match p {
            SkeletonPart::Text(t) => t.clone(),
            SkeletonPart::Translate(_) => it.next().map(|s| s.trim().to_string()).unwrap_or_default(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Asks for the atomic statements of one sentence.
pub fn build_atomic(
    t: &Templates,
    dataset: DatasetKind,
    sentence: &str,
    demos: &[AtomicDemo],
) -> Result<PromptBundle, PromptError> {
    let mut messages = vec![Message::new(Role::System, t.get("atomic.system.txt")?)];
    for d in demos {
        messages.push(Message::new(Role::User, d.sentence.clone()));
        messages.push(Message::new(Role::Assistant, d.statements.clone()));
    }
    messages.push(Message::new(Role::User, sentence));
    Ok(PromptBundle {
        messages,
        decoding: Decoding::greedy(REWRITE_MAX_TOKENS),
        purpose: PromptKind::AtomicStatements,
        step: Step::Decompose,
        dataset,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeMode {
    Text,
    Code,
}

/// The probe question for one key entity.
pub fn probe_line(
    t: &Templates,
    target: &str,
    mode: ProbeMode,
    dataset: DatasetKind,
) -> Result<String, PromptError> {
    if target.trim().is_empty() {
        return Err(PromptError::EmptyProbeTarget);
    }
    if dataset.is_bgqa() {
        return t.fill("probe_bgqa.txt", &[("fact", target)]);
    }
    match mode {
        ProbeMode::Text => t.fill("probe_condqa_text.txt", &[("fact", target)]),
        ProbeMode::Code => t.fill("probe_condqa_code.txt", &[("var", target)]),
    }
}

/// Replays `context` (the answer prompt), adds the partial chain of thought as
/// the model's own turn and asks about one key entity.
pub fn build_probe(
    t: &Templates,
    context: &PromptBundle,
    partial_cot: &str,
    target: &str,
    mode: ProbeMode,
) -> Result<PromptBundle, PromptError> {
    let line = probe_line(t, target, mode, context.dataset)?;
    if context.messages.last().map(|m| m.role) != Some(Role::User) {
        return Err(PromptError::BadProbeContext);
    }
    let mut messages = context.messages.clone();
    messages.push(Message::new(Role::Assistant, partial_cot));
    messages.push(Message::new(Role::User, line));
    Ok(PromptBundle {
        messages,
        decoding: Decoding::greedy(PROBE_MAX_TOKENS),
        purpose: PromptKind::Probe,
        step: Step::Probe,
        dataset: context.dataset,
    })
}
