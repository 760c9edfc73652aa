//! Offline backend.
//!
//! Scripted rules are tried first, in order. Requests no rule matches get a
//! heuristic reply shaped like a real one for the request's chain step, chosen
//! deterministically from the request key. The heuristic exists to exercise
//! the pipeline, not to answer well.

use serde::{Deserialize, Serialize};

use super::{Backend, Completion, LlmError, LlmRequest, Source};
use crate::corpus::DatasetKind;
use crate::prompts::{PromptKind, Role, Step};
use crate::pseudocode::{self, render_expr, Statement, QUESTION_MARKER};

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StubRule {
    #[serde(default)]
    pub step: Option<Step>,
    #[serde(default)]
    pub dataset: Option<DatasetKind>,
    #[serde(default)]
    pub purpose: Option<PromptKind>,
    /// Substring the last user message must contain.
    #[serde(default)]
    pub contains: Option<String>,
    pub reply: String,
}

impl StubRule {
    fn matches(&self, request: &LlmRequest) -> bool {
        let b = &request.bundle;
        self.step.is_none_or(|s| s == b.step)
            && self.dataset.is_none_or(|d| d == b.dataset)
            && self.purpose.is_none_or(|p| p == b.purpose)
            && self
                .contains
                .as_deref()
                .is_none_or(|c| b.last_user().is_some_and(|u| u.contains(c)))
    }
}

#[derive(Debug, Clone, Default)]
pub struct StubBackend {
    rules: Vec<StubRule>,
    context_limit: Option<u64>,
}

/// Rough token count: one token per four characters plus four per message.
pub fn approx_tokens(request: &LlmRequest) -> u64 {
    request
        .bundle
        .messages
        .iter()
        .map(|m| m.content.chars().count().div_ceil(4) as u64 + 4)
        .sum()
}

fn text_tokens(s: &str) -> u64 {
    s.chars().count().div_ceil(4) as u64
}

impl StubBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_rules(mut self, rules: Vec<StubRule>) -> Self {
        self.rules = rules;
        self
    }

    /// Parses a JSON list of rules.
    pub fn from_script(json: &str) -> Result<Self, LlmError> {
        let rules: Vec<StubRule> =
            serde_json::from_str(json).map_err(|e| LlmError::Malformed(format!("stub script: {e}")))?;
        Ok(Self::new().with_rules(rules))
    }

    /// Rejects prompts above `tokens` (by [`approx_tokens`]) as a context overflow.
    pub fn with_context_limit(mut self, tokens: u64) -> Self {
        self.context_limit = Some(tokens);
        self
    }
}

impl Backend for StubBackend {
    fn complete(&self, request: &LlmRequest) -> Result<Completion, LlmError> {
        let prompt_tokens = approx_tokens(request);
        if let Some(limit) = self.context_limit {
            if prompt_tokens > limit {
                return Err(LlmError::ContextOverflow(format!(
                    "{prompt_tokens} prompt tokens, limit {limit}"
                )));
            }
        }
        let text = match self.rules.iter().find(|r| r.matches(request)) {
            Some(rule) => rule.reply.clone(),
            None => heuristic(request),
        };
        Ok(Completion {
            completion_tokens: text_tokens(&text),
            text,
            prompt_tokens,
        })
    }

    fn source(&self) -> Source {
        Source::Stub
    }
}

fn seed_of(request: &LlmRequest) -> u64 {
    let key = request.key();
    u64::from_str_radix(&key[..16], 16).unwrap_or(0)
}

fn heuristic(request: &LlmRequest) -> String {
    let b = &request.bundle;
    let user = b.last_user().unwrap_or("");
    let seed = seed_of(request);
    match b.step {
        Step::Translate => translate(user, b.dataset),
        Step::Answer => answer(user, b.dataset, b.purpose, seed),
        Step::Probe => probe(b.dataset, b.messages.iter().any(|m| m.role == Role::User && m.content.contains("value of the variable")), seed),
        Step::Decompose => decompose(user),
        Step::BackTranslate => back_translate(user),
    }
}

fn slug(text: &str, max_words: usize) -> String {
    let words: Vec<String> = text
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .take(max_words)
        .map(str::to_ascii_lowercase)
        .collect();
    let s = words.join("_");
    match s.chars().next() {
        None => "unnamed".to_string(),
        Some(c) if c.is_ascii_digit() => format!("v_{s}"),
        Some(_) => s,
    }
}

fn sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        cur.push(c);
        if matches!(c, '.' | '?' | '!') {
            let s = cur.trim().to_string();
            if !s.is_empty() {
                out.push(s);
            }
            cur.clear();
        }
    }
    let s = cur.trim().to_string();
    if !s.is_empty() {
        out.push(s);
    }
    out
}

fn is_conditional(p: &str) -> bool {
    let l = p.to_ascii_lowercase();
    l.contains(" if ") || l.starts_with("if ") || l.contains("then") || l.contains("must") || l.contains("rule")
}

fn translate(user: &str, dataset: DatasetKind) -> String {
    let (question, body) = match user.strip_prefix("Question: ") {
        Some(rest) => match rest.split_once("\n\n") {
            Some((q, b)) => (q.to_string(), b.to_string()),
            None => (rest.to_string(), String::new()),
        },
        None => {
            let sents = sentences(user);
            let q = sents.last().cloned().unwrap_or_default();
            (q, user.to_string())
        }
    };
    let qvar = slug(
        sentences(&question).last().map(String::as_str).unwrap_or("answer"),
        6,
    );
    let mut lines = vec![format!("# Question: {}", question.replace('\n', " "))];
    if !dataset.is_bgqa() {
        for s in sentences(&question).iter().rev().skip(1).rev() {
            lines.push(format!("{} = True", slug(s, 6)));
        }
        lines.push(format!("{qvar} = None # {QUESTION_MARKER}"));
    }
    lines.push(String::new());
    for para in body.split("\n\n").map(str::trim).filter(|p| !p.is_empty()) {
        for l in para.lines() {
            lines.push(format!("# {}", l.trim()));
        }
        // BGQA bodies pack facts and rules into one paragraph.
        let units = if dataset.is_bgqa() { sentences(para) } else { vec![para.to_string()] };
        for unit in units.iter().filter(|u| !u.ends_with('?')) {
            let target = if dataset.is_bgqa() { slug(unit, 5) } else { qvar.clone() };
            if is_conditional(unit) {
                lines.push(format!("if {}:", slug(unit, 6)));
                lines.push(format!("    {target} = True"));
            } else if dataset.is_bgqa() {
                lines.push(format!("{target} = True"));
            }
        }
        lines.push(String::new());
    }
    if dataset.is_bgqa() {
        lines.push(format!("question = {qvar}"));
    }
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    lines.join("\n")
}

fn content_lines(user: &str) -> Vec<String> {
    user.lines()
        .map(|l| l.trim().trim_start_matches('#').trim())
        .filter(|l| {
            l.len() > 12
                && !l.starts_with("Question:")
                && !l.contains('=')
                && !l.starts_with("Answers")
                && !l.starts_with("Let's think")
        })
        .map(str::to_string)
        .collect()
}

fn strip_tags(s: &str) -> String {
    let mut out = String::new();
    let mut depth = 0;
    for c in s.chars() {
        match c {
            '<' => depth += 1,
            '>' if depth > 0 => depth -= 1,
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out.trim().to_string()
}

fn answer(user: &str, dataset: DatasetKind, purpose: PromptKind, seed: u64) -> String {
    let code = purpose.answers_from_code();
    if dataset == DatasetKind::Sharc {
        let i = (seed % 3) as usize;
        return if code {
            ["True", "False", "None"][i]
        } else {
            ["yes", "no", "not enough information"][i]
        }
        .to_string();
    }
    let lines = content_lines(user);
    let mut cot: Vec<String> = Vec::new();
    if !lines.is_empty() {
        let start = (seed as usize / 7) % lines.len();
        for k in 0..3.min(lines.len()) {
            cot.push(lines[(start + k) % lines.len()].clone());
        }
    }
    let yes_no = dataset.is_bgqa() || user.contains("Answers can be \"yes\" or \"no\"");
    let label = if yes_no {
        let opts: &[&str] = if dataset.is_bgqa() { &["yes", "no", "unknown"] } else { &["yes", "no"] };
        opts[(seed % opts.len() as u64) as usize].to_string()
    } else {
        lines
            .get((seed as usize / 3) % lines.len().max(1))
            .map(|l| strip_tags(l).split_whitespace().take(4).collect::<Vec<_>>().join(" "))
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| "not mentioned".to_string())
    };
    let marker = if code { "#Answer:" } else { "Answer:" };
    cot.push(format!("{marker} {label}"));
    cot.join("\n")
}

fn probe(dataset: DatasetKind, code: bool, seed: u64) -> String {
    let r = seed % 10;
    let pick = if r < 7 { 0 } else if r < 9 { 1 } else { 2 };
    if dataset.is_bgqa() {
        ["yes", "no", "unknown"][pick]
    } else if code {
        ["True", "False", "None"][pick]
    } else {
        ["True", "False", "unknown"][pick]
    }
    .to_string()
}

fn decompose(sentence: &str) -> String {
    let mut parts: Vec<String> = Vec::new();
    for chunk in sentence.split([',', ';']) {
        for piece in chunk.split(" and ") {
            let p = piece.trim().trim_end_matches('.').trim();
            if p.split_whitespace().count() >= 2 {
                let mut s = p.to_string();
                if let Some(f) = s.get(..1) {
                    s.replace_range(..1, &f.to_ascii_uppercase());
                }
                parts.push(format!("{s}."));
            }
        }
    }
    if parts.is_empty() {
        parts.push(sentence.trim().to_string());
    }
    parts.join("\n")
}

fn words_of(name: &str) -> String {
    name.replace('_', " ")
}

fn expr_words(e: &pseudocode::Expr) -> String {
    render_expr(e)
        .split(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .filter(|w| !w.is_empty())
        .map(|w| if w == "and" || w == "or" || w == "not" { w.to_string() } else { words_of(w) })
        .collect::<Vec<_>>()
        .join(" ")
}

fn back_translate(unit: &str) -> String {
    let parsed = pseudocode::parse(unit);
    for st in &parsed.program.statements {
        match st {
            Statement::If { condition, body, .. } => {
                let then = body
                    .iter()
                    .find_map(|s| match s {
                        Statement::Assign { target, value, .. } => {
                            Some(format!("{} is {}", words_of(target.name()), expr_words(value)))
                        }
                        _ => None,
                    })
                    .unwrap_or_else(|| "this applies".to_string());
                return format!("If {}, then {}.", expr_words(condition), then);
            }
            Statement::RuleDef { antecedent, consequent, .. } => {
                return format!("If {}, then {}.", expr_words(antecedent), expr_words(consequent));
            }
            Statement::Assign { target, value, .. } => {
                return format!("{} is {}.", words_of(target.name()), expr_words(value));
            }
            _ => {}
        }
    }
    unit.trim().to_string()
}
