//! Program-to-program transforms used by the ablation conditions, plus the
//! statistics and helpers built on top of the statement tree.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use super::{
    render, walk, Application, Diagnostic, DiagnosticKind, Expr, PseudoProgram, PseudocodeError,
    Severity, Statement, StatementKind, Target,
};

/// Calls `f` for every identifier of one statement (not its nested body), in
/// source order.
pub(crate) fn visit_names(s: &Statement, f: &mut impl FnMut(&str)) {
    match s {
        Statement::Assign { target, value, .. } => {
            match target {
                Target::Name { name } => f(name),
                Target::Apply(app) => visit_app(app, f),
            }
            visit_expr(value, f);
        }
        Statement::If { condition, .. } => visit_expr(condition, f),
        Statement::RuleDef {
            head,
            antecedent,
            consequent,
            ..
        } => {
            visit_app(head, f);
            visit_expr(antecedent, f);
            visit_expr(consequent, f);
        }
        Statement::Blank | Statement::Comment { .. } | Statement::Opaque { .. } => {}
    }
}

fn visit_app(app: &Application, f: &mut impl FnMut(&str)) {
    f(&app.name);
    for a in &app.args {
        visit_expr(a, f);
    }
}

fn visit_expr(e: &Expr, f: &mut impl FnMut(&str)) {
    match e {
        Expr::Literal(_) => {}
        Expr::Name { name } => f(name),
        Expr::Apply(app) => visit_app(app, f),
        Expr::Compare { lhs, rhs, .. } | Expr::Logic { lhs, rhs, .. } => {
            visit_expr(lhs, f);
            visit_expr(rhs, f);
        }
        Expr::Not { operand } => visit_expr(operand, f),
        Expr::Implies {
            antecedent,
            consequent,
        } => {
            visit_expr(antecedent, f);
            visit_expr(consequent, f);
        }
        Expr::Paren { inner } => visit_expr(inner, f),
        Expr::List { items } => items.iter().for_each(|i| visit_expr(i, f)),
    }
}

fn rename_stmt(s: &mut Statement, map: &dyn Fn(&str) -> String) {
    match s {
        Statement::Assign { target, value, .. } => {
            match target {
                Target::Name { name } => *name = map(name),
                Target::Apply(app) => rename_app(app, map),
            }
            rename_expr(value, map);
        }
        Statement::If {
            condition, body, ..
        } => {
            rename_expr(condition, map);
            body.iter_mut().for_each(|b| rename_stmt(b, map));
        }
        Statement::RuleDef {
            head,
            antecedent,
            consequent,
            ..
        } => {
            rename_app(head, map);
            rename_expr(antecedent, map);
            rename_expr(consequent, map);
        }
        Statement::Blank | Statement::Comment { .. } | Statement::Opaque { .. } => {}
    }
}

fn rename_app(app: &mut Application, map: &dyn Fn(&str) -> String) {
    app.name = map(&app.name);
    app.args.iter_mut().for_each(|a| rename_expr(a, map));
}

fn rename_expr(e: &mut Expr, map: &dyn Fn(&str) -> String) {
    match e {
        Expr::Literal(_) => {}
        Expr::Name { name } => *name = map(name),
        Expr::Apply(app) => rename_app(app, map),
        Expr::Compare { lhs, rhs, .. } | Expr::Logic { lhs, rhs, .. } => {
            rename_expr(lhs, map);
            rename_expr(rhs, map);
        }
        Expr::Not { operand } => rename_expr(operand, map),
        Expr::Implies {
            antecedent,
            consequent,
        } => {
            rename_expr(antecedent, map);
            rename_expr(consequent, map);
        }
        Expr::Paren { inner } => rename_expr(inner, map),
        Expr::List { items } => items.iter_mut().for_each(|i| rename_expr(i, map)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anonymized {
    pub program: PseudoProgram,
    /// `(original, anonymous)` in first-occurrence order.
    pub mapping: Vec<(String, String)>,
}

/// Replaces every variable and predicate name with `var_1`, `var_2`, ... in
/// first-occurrence order. Comments and opaque lines are untouched.
pub fn anonymize(program: &PseudoProgram) -> Anonymized {
    let mapping: Vec<(String, String)> = program
        .identifiers()
        .into_iter()
        .enumerate()
        .map(|(i, name)| (name, format!("var_{}", i + 1)))
        .collect();
    let lookup = |n: &str| -> String {
        mapping
            .iter()
            .find(|(from, _)| from == n)
            .map(|(_, to)| to.clone())
            .unwrap_or_else(|| n.to_string())
    };
    let mut out = program.clone();
    out.statements.iter_mut().for_each(|s| rename_stmt(s, &lookup));
    out.question_variable = program.question_variable.as_deref().map(lookup);
    Anonymized {
        program: out,
        mapping,
    }
}

/// Removes every comment statement, keeping the question-variable designation.
pub fn strip_comments(program: &PseudoProgram) -> PseudoProgram {
    PseudoProgram {
        statements: strip_block(&program.statements),
        question_variable: program.question_variable.clone(),
    }
}

fn strip_block(statements: &[Statement]) -> Vec<Statement> {
    statements
        .iter()
        .filter(|s| !matches!(s, Statement::Comment { .. }))
        .map(|s| match s {
            Statement::If {
                condition,
                body,
                comment,
            } => Statement::If {
                condition: condition.clone(),
                body: strip_block(body),
                comment: comment.clone(),
            },
            other => other.clone(),
        })
        .collect()
}

/// Keeps the comments of `program` in place and swaps its code for code taken
/// from `donor`.
///
/// The i-th top-level code statement becomes donor segment `(offset + i) mod k`,
/// where `k` is the number of donor code statements and `offset` is drawn from
/// `seed` only when the donor is longer than the program. Comments nested in a
/// replaced `if` body are re-emitted right after its replacement; donor
/// comments are dropped.
pub fn splice_random(
    program: &PseudoProgram,
    donor: &PseudoProgram,
    seed: u64,
) -> Result<PseudoProgram, PseudocodeError> {
    let segments: Vec<Statement> = strip_block(&donor.statements)
        .into_iter()
        .filter(Statement::is_code)
        .collect();
    if segments.is_empty() {
        return Err(PseudocodeError::EmptyDonor);
    }
    let code_count = program.statements.iter().filter(|s| s.is_code()).count();
    let offset = if segments.len() > code_count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (rng.next_u64() % (segments.len() - code_count + 1) as u64) as usize
    } else {
        0
    };

    let mut out = Vec::with_capacity(program.statements.len());
    let mut i = 0;
    for s in &program.statements {
        if !s.is_code() {
            out.push(s.clone());
            continue;
        }
        out.push(segments[(offset + i) % segments.len()].clone());
        i += 1;
        if let Statement::If { body, .. } = s {
            walk(body, &mut |n| {
                if let Statement::Comment { .. } = n {
                    out.push(n.clone());
                }
            });
        }
    }
    Ok(PseudoProgram {
        statements: out,
        question_variable: program.question_variable.clone(),
    })
}

fn line_counts(program: &PseudoProgram) -> (usize, usize, usize) {
    let (mut if_lines, mut code_lines, mut non_blank) = (0, 0, 0);
    walk(&program.statements, &mut |s| {
        match s.kind() {
            StatementKind::Blank => return,
            StatementKind::Comment => {}
            StatementKind::If => {
                if_lines += 1;
                code_lines += 1;
            }
            _ => code_lines += 1,
        }
        non_blank += 1;
    });
    (if_lines, code_lines, non_blank)
}

/// `if` lines over non-blank code lines (comments count in neither); 0 when
/// the program has no code.
pub fn reasoning_op_ratio(program: &PseudoProgram) -> f64 {
    let (if_lines, code_lines, _) = line_counts(program);
    if code_lines == 0 {
        0.0
    } else {
        if_lines as f64 / code_lines as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityStats {
    pub programs: usize,
    pub mean_reasoning_op_ratio: f64,
    /// Mean count of non-blank lines (comments included).
    pub mean_line_count: f64,
}

pub fn complexity_stats(programs: &[PseudoProgram]) -> Result<ComplexityStats, PseudocodeError> {
    if programs.is_empty() {
        return Err(PseudocodeError::EmptyCorpus);
    }
    let n = programs.len() as f64;
    let ratio = programs.iter().map(reasoning_op_ratio).sum::<f64>() / n;
    let lines = programs
        .iter()
        .map(|p| line_counts(p).2 as f64)
        .sum::<f64>()
        / n;
    Ok(ComplexityStats {
        programs: programs.len(),
        mean_reasoning_op_ratio: ratio,
        mean_line_count: lines,
    })
}

/// `husband_pass_away` -> `Key entity: husband pass away`.
pub fn desnake(name: &str) -> Result<String, PseudocodeError> {
    if name.is_empty() {
        return Err(PseudocodeError::EmptyName);
    }
    Ok(format!("Key entity: {}", name.replace('_', " ")))
}

/// Program-level checks that depend on how the code will be used.
pub fn lint(program: &PseudoProgram, require_question_variable: bool) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if require_question_variable {
        let declared = program.variables();
        match &program.question_variable {
            None => out.push(Diagnostic {
                line: 0,
                severity: Severity::Warning,
                kind: DiagnosticKind::MissingQuestionVariable,
                message: "no variable is marked as answering the question".into(),
            }),
            Some(q) if !declared.iter().any(|(n, _)| n == q) => out.push(Diagnostic {
                line: 0,
                severity: Severity::Warning,
                kind: DiagnosticKind::MissingQuestionVariable,
                message: format!("question variable `{q}` is never declared"),
            }),
            Some(_) => {}
        }
    }
    out
}

/// One unit of a back-translation: text that is final as is, or a code unit
/// (an `if` block or a rule) that still needs translating into one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SkeletonPart {
    Text(String),
    Translate(String),
}

/// Splits a program for back-translation: comments keep their text, plain
/// assignments become `Key entity: ...` lines, and `if` blocks and rules are
/// left for the model.
pub fn back_translation_skeleton(program: &PseudoProgram) -> Vec<SkeletonPart> {
    program
        .statements
        .iter()
        .map(|s| match s {
            Statement::Blank => SkeletonPart::Text(String::new()),
            Statement::Comment { text } => SkeletonPart::Text(text.clone()),
            Statement::Opaque { raw } => SkeletonPart::Text(raw.trim().to_string()),
            Statement::Assign { target, .. } => {
                let name = match target {
                    Target::Name { name } => name.clone(),
                    Target::Apply(app) => render_unit(&Statement::Assign {
                        target: Target::Apply(app.clone()),
                        value: Expr::Literal(super::Literal::True),
                        comment: None,
                    })
                    .trim_end_matches(" = True")
                    .to_string(),
                };
                SkeletonPart::Text(desnake(&name).unwrap_or_default())
            }
            Statement::If { .. } | Statement::RuleDef { .. } => {
                SkeletonPart::Translate(render_unit(&strip_unit(s)))
            }
        })
        .collect()
}

fn strip_unit(s: &Statement) -> Statement {
    strip_block(std::slice::from_ref(s))
        .into_iter()
        .next()
        .expect("code statement survives stripping")
}

fn render_unit(s: &Statement) -> String {
    render(&PseudoProgram {
        statements: vec![s.clone()],
        question_variable: None,
    })
}
