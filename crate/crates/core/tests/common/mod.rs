//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use codeprompt::corpus::AnswerClass;
use proptest::prelude::*;

const NAMES: &[&str] = &[
    "applicant_age",
    "has_children",
    "lives_in_uk",
    "weekly_income",
    "eligible",
    "partner_died",
    "claim_benefit",
    "is_student",
    "owns_home",
    "can_apply",
    "can_apply_zero_VAT",
    "court_response_time",
];
const PREDICATES: &[&str] = &["respects", "attacks", "owns", "knows"];
const ATOMS: &[&str] = &["carp", "amberjack", "kiwi", "eel"];
const WORDS: &[&str] = &[
    "You", "can", "apply", "if", "you're", "over", "18.", "<p>", "</p>", "benefit", "(see", "below)", "£120", "-",
    "Rule1:", "the", "council", "must", "reply", "within", "10", "days", "=", "and", "or",
];

pub const QUESTION_MARK: &str = "This is the variable that answers the question";

fn name() -> impl Strategy<Value = String> {
    prop::sample::select(NAMES).prop_map(str::to_string)
}

fn comment_text() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 1..8).prop_map(|w| w.join(" "))
}

fn value() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("True".to_string()),
        Just("False".to_string()),
        Just("None".to_string()),
        (0u32..20000).prop_map(|n| n.to_string()),
        prop::sample::select(vec!["\"passport\"", "\"within 10 days\"", "\"\""]).prop_map(str::to_string),
        name(),
        (name(), name()).prop_map(|(a, b)| format!("{a} and not {b}")),
        (name(), name()).prop_map(|(a, b)| format!("[{a}, {b}]")),
    ]
}

fn condition() -> impl Strategy<Value = String> {
    prop_oneof![
        name(),
        (name(), name()).prop_map(|(a, b)| format!("{a} and {b}")),
        (name(), name(), name()).prop_map(|(a, b, c)| format!("{a} and ({b} or not {c})")),
        name().prop_map(|a| format!("not {a}")),
        (name(), 0u32..100).prop_map(|(a, n)| format!("{a} >= {n}")),
        name().prop_map(|a| format!("{a} == \"yes\"")),
    ]
}

fn fact() -> impl Strategy<Value = String> {
    (prop::sample::select(PREDICATES), prop::sample::select(ATOMS), prop::sample::select(ATOMS), any::<bool>())
        .prop_map(|(p, a, b, v)| format!("{p}({a}, {b}) = {}", if v { "True" } else { "False" }))
}

fn rule() -> impl Strategy<Value = String> {
    (
        1u32..9,
        prop::sample::select(PREDICATES),
        prop::sample::select(PREDICATES),
        prop::sample::select(ATOMS),
        prop::sample::select(ATOMS),
    )
        .prop_map(|(n, p, q, a, b)| format!("rule{n}() = {p}({a}, {b}) and not {q}({a}) => {q}({b}, {a})"))
}

#[derive(Debug, Clone)]
enum Line {
    Blank,
    Comment(String),
    Code(String),
    If(String, Vec<Line>),
}

fn line(depth: u32) -> BoxedStrategy<Line> {
    let leaf = prop_oneof![
        2 => comment_text().prop_map(Line::Comment),
        4 => (name(), value(), prop::option::weighted(0.15, comment_text()))
            .prop_map(|(n, v, c)| match c {
                Some(c) => Line::Code(format!("{n} = {v} # {c}")),
                None => Line::Code(format!("{n} = {v}")),
            }),
        1 => fact().prop_map(Line::Code),
        1 => rule().prop_map(Line::Code),
    ];
    if depth == 0 {
        return leaf.boxed();
    }
    let block = (
        condition(),
        leaf.clone(),
        prop::collection::vec(line(depth - 1), 0..3),
    )
        .prop_map(|(c, first, rest)| {
            let first = match first {
                Line::Comment(t) => Line::Code(format!("flag = True # {t}")),
                other => other,
            };
            let mut body = vec![first];
            body.extend(rest);
            Line::If(c, body)
        });
    prop_oneof![3 => leaf, 1 => block].boxed()
}

fn write(lines: &[Line], indent: usize, out: &mut Vec<String>) {
    let pad = " ".repeat(indent);
    for l in lines {
        match l {
            Line::Blank => out.push(String::new()),
            Line::Comment(t) => out.push(format!("{pad}# {t}")),
            Line::Code(c) => out.push(format!("{pad}{c}")),
            Line::If(c, body) => {
                out.push(format!("{pad}if {c}:"));
                write(body, indent + 4, out);
            }
        }
    }
}

/// Well-formed pseudo-code in the prompt dialect: comments, assignments,
/// nested `if` blocks, predicate facts and rules, and at most one
/// question-marked variable.
pub fn program_text() -> impl Strategy<Value = String> {
    let top = prop_oneof![
        8 => line(2),
        1 => Just(Line::Blank),
    ];
    (
        prop::collection::vec(top, 0..14),
        prop::option::weighted(0.3, (name(), any::<prop::sample::Index>())),
    )
        .prop_map(|(mut lines, marked)| {
            if let Some((n, at)) = marked {
                let i = if lines.is_empty() { 0 } else { at.index(lines.len() + 1) };
                lines.insert(i, Line::Code(format!("{n} = None # {QUESTION_MARK}")));
            }
            let mut out = Vec::new();
            write(&lines, 0, &mut out);
            out.join("\n")
        })
}

/// Replaces whole identifier tokens of `text` through `map`.
pub fn rename_tokens(text: &str, map: &dyn Fn(&str) -> Option<String>) -> String {
    let mut out = String::with_capacity(text.len());
    let mut token = String::new();
    let flush = |token: &mut String, out: &mut String| {
        if !token.is_empty() {
            out.push_str(&map(token).unwrap_or_else(|| token.clone()));
            token.clear();
        }
    };
    for ch in text.chars() {
        if ch.is_ascii_alphanumeric() || ch == '_' {
            token.push(ch);
        } else {
            flush(&mut token, &mut out);
            out.push(ch);
        }
    }
    flush(&mut token, &mut out);
    out
}

const PUNCT: &str = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

fn oracle_tokens(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in s.chars() {
        if ch.is_whitespace() || PUNCT.contains(ch) {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else {
            cur.extend(ch.to_lowercase());
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out.retain(|t| t != "a" && t != "an" && t != "the");
    out
}

/// Token F1 by explicit precision and recall, maximised over the golds.
pub fn oracle_f1(pred: &str, golds: &[String]) -> f64 {
    let p = oracle_tokens(pred);
    let mut best = 0.0f64;
    for g in golds {
        let mut pool = oracle_tokens(g);
        let glen = pool.len();
        let f = if p.is_empty() && glen == 0 {
            1.0
        } else if p.is_empty() || glen == 0 {
            0.0
        } else {
            let mut common = 0;
            for t in &p {
                if let Some(pos) = pool.iter().position(|x| x == t) {
                    pool.remove(pos);
                    common += 1;
                }
            }
            let (pr, rc) = (common as f64 / p.len() as f64, common as f64 / glen as f64);
            if common == 0 {
                0.0
            } else {
                2.0 * pr * rc / (pr + rc)
            }
        };
        best = best.max(f);
    }
    best
}

/// Unweighted mean of per-class F1 over the classes seen in gold or prediction.
pub fn oracle_macro(preds: &[Option<AnswerClass>], golds: &[AnswerClass]) -> f64 {
    let mut classes: Vec<AnswerClass> = golds.to_vec();
    classes.extend(preds.iter().flatten());
    classes.sort();
    classes.dedup();
    let mut total = 0.0;
    for c in &classes {
        let tp = preds.iter().zip(golds).filter(|(p, g)| **p == Some(*c) && *g == c).count() as f64;
        let predicted = preds.iter().filter(|p| **p == Some(*c)).count() as f64;
        let actual = golds.iter().filter(|g| *g == c).count() as f64;
        let prec = if predicted > 0.0 { tp / predicted } else { 0.0 };
        let rec = if actual > 0.0 { tp / actual } else { 0.0 };
        total += if prec + rec > 0.0 { 2.0 * prec * rec / (prec + rec) } else { 0.0 };
    }
    total / classes.len() as f64
}

pub fn phrase() -> impl Strategy<Value = String> {
    let word = prop::sample::select(vec![
        "the", "A", "an", "days", "Days", "10", "within", "tax", "credit.", "council's", "yes", "no", "£120", "x-y",
        "(if)", "",
    ]);
    prop::collection::vec(word, 0..9).prop_map(|w| w.join(" "))
}

pub fn class() -> impl Strategy<Value = AnswerClass> {
    prop::sample::select(vec![AnswerClass::Yes, AnswerClass::No, AnswerClass::NotEnoughInfo])
}

fn comment_lines(text: &str) -> Vec<&str> {
    text.lines().map(str::trim_start).filter(|l| l.starts_with('#')).collect()
}

/// Every transform property on one generated program and donor.
pub fn check_transforms(text: &str, donor_text: &str, seed: u64) -> Result<(), TestCaseError> {
    use codeprompt::pseudocode::{
        anonymize, parse, reasoning_op_ratio, render, splice_random, strip_comments, PseudocodeError, StatementKind,
    };

    let parsed = parse(text);
    prop_assert!(!parsed.has_fatal(), "{:?}\n{text}", parsed.diagnostics);
    let p = parsed.program;
    prop_assert_eq!(&parse(&render(&p)).program, &p, "round trip");

    // anonymize: a bijection onto var_1..var_k
    let a = anonymize(&p);
    let names = p.identifiers();
    let expected: Vec<String> = (1..=names.len()).map(|i| format!("var_{i}")).collect();
    let targets: Vec<String> = a.mapping.iter().map(|(_, to)| to.clone()).collect();
    let sources: Vec<String> = a.mapping.iter().map(|(from, _)| from.clone()).collect();
    prop_assert_eq!(&targets, &expected);
    prop_assert_eq!(&sources, &names);
    prop_assert_eq!(a.program.identifiers(), expected);
    prop_assert_eq!(a.program.kind_sequence(), p.kind_sequence());
    prop_assert_eq!(a.program.comment_texts(), p.comment_texts());
    let inverse = |t: &str| a.mapping.iter().find(|(_, to)| to == t).map(|(from, _)| from.clone());
    let restored = parse(&rename_tokens(&render(&a.program), &inverse)).program;
    prop_assert_eq!(&restored, &p, "inverse renaming");

    // strip_comments
    let s = strip_comments(&p);
    prop_assert!(s.comment_texts().is_empty());
    prop_assert_eq!(&strip_comments(&s), &s);
    let code_kinds: Vec<StatementKind> = p
        .kind_sequence()
        .into_iter()
        .filter(|k| *k != StatementKind::Comment)
        .collect();
    prop_assert_eq!(s.kind_sequence(), code_kinds);
    prop_assert_eq!(&s.question_variable, &p.question_variable);

    // splice_random keeps the comment lines byte for byte
    let donor = parse(donor_text).program;
    match splice_random(&p, &donor, seed) {
        Ok(spliced) => {
            prop_assert_eq!(spliced.comment_texts(), p.comment_texts());
            let (before, after) = (render(&p), render(&spliced));
            prop_assert_eq!(comment_lines(&after), comment_lines(&before));
            prop_assert_eq!(&splice_random(&p, &donor, seed).unwrap(), &spliced);
        }
        Err(e) => {
            prop_assert_eq!(e, PseudocodeError::EmptyDonor);
            prop_assert!(!donor.statements.iter().any(|s| s.is_code()));
        }
    }

    // reasoning-op ratio
    let r = reasoning_op_ratio(&p);
    prop_assert!((0.0..=1.0).contains(&r), "{r}");
    prop_assert_eq!(r == 0.0, p.if_count() == 0);
    Ok(())
}
