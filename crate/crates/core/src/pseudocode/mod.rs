//! The restricted pseudo-code dialect produced by the translation step.
//!
//! Programs are line oriented: comments carry the original natural-language
//! sentences, assignments declare key entities, `if` blocks model conditions and
//! predicate rules (`rule1(x) = a(x) & b(x) => c(x)`) model the board-game flavor.
//! Loops, functions and classes are outside the dialect.
//!
//! Parsing never fails. Lines the grammar does not cover are kept verbatim as
//! [`Statement::Opaque`] and every dialect violation is reported as a
//! [`Diagnostic`] rather than an error.

mod lexer;
mod parser;
mod render;
mod transform;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parser::parse;
pub use render::{render, render_expr};
pub use transform::{
    anonymize, back_translation_skeleton, complexity_stats, desnake, lint, reasoning_op_ratio,
    splice_random, strip_comments, Anonymized, ComplexityStats, SkeletonPart,
};

/// Comment text that designates the variable answering the question.
pub const QUESTION_MARKER: &str = "This is the variable that answers the question";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PseudocodeError {
    #[error("donor program has no code statements")]
    EmptyDonor,
    #[error("cannot desnake an empty variable name")]
    EmptyName,
    #[error("complexity statistics need at least one program")]
    EmptyCorpus,
}

/// A parsed program.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PseudoProgram {
    pub statements: Vec<Statement>,
    /// Set from the question-marker comment; survives comment stripping.
    pub question_variable: Option<String>,
}

/// Output of [`parse`]: the program plus everything the parser noticed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parsed {
    pub program: PseudoProgram,
    pub diagnostics: Vec<Diagnostic>,
}

impl Parsed {
    pub fn has_fatal(&self) -> bool {
        self.diagnostics.iter().any(|d| d.severity == Severity::Fatal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Statement {
    Blank,
    Comment {
        text: String,
    },
    Assign {
        target: Target,
        value: Expr,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        comment: Option<String>,
    },
    If {
        condition: Expr,
        body: Vec<Statement>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        comment: Option<String>,
    },
    RuleDef {
        head: Application,
        antecedent: Expr,
        consequent: Expr,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        comment: Option<String>,
    },
    /// A line outside the grammar, reproduced byte for byte (indentation included).
    Opaque {
        raw: String,
    },
}

/// Coarse statement kind, used to compare program shapes across transforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StatementKind {
    Blank,
    Comment,
    Assign,
    If,
    RuleDef,
    Opaque,
}

impl Statement {
    pub fn comment(text: impl Into<String>) -> Self {
        Statement::Comment { text: text.into() }
    }

    pub fn kind(&self) -> StatementKind {
        match self {
            Statement::Blank => StatementKind::Blank,
            Statement::Comment { .. } => StatementKind::Comment,
            Statement::Assign { .. } => StatementKind::Assign,
            Statement::If { .. } => StatementKind::If,
            Statement::RuleDef { .. } => StatementKind::RuleDef,
            Statement::Opaque { .. } => StatementKind::Opaque,
        }
    }

    /// True for statements that are code (not comments or layout).
    pub fn is_code(&self) -> bool {
        !matches!(self, Statement::Blank | Statement::Comment { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    Name { name: String },
    Apply(Application),
}

impl Target {
    pub fn name(&self) -> &str {
        match self {
            Target::Name { name } => name,
            Target::Apply(app) => &app.name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Application {
    pub name: String,
    pub args: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expr {
    Literal(Literal),
    Name {
        name: String,
    },
    Apply(Application),
    Compare {
        op: CompareOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Not {
        operand: Box<Expr>,
    },
    Logic {
        op: LogicOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Implies {
        antecedent: Box<Expr>,
        consequent: Box<Expr>,
    },
    Paren {
        inner: Box<Expr>,
    },
    List {
        items: Vec<Expr>,
    },
}

impl Expr {
    pub fn name(name: impl Into<String>) -> Self {
        Expr::Name { name: name.into() }
    }

    /// Flattens a conjunction (either spelling) into its operands.
    pub fn conjuncts(&self) -> Vec<&Expr> {
        match self {
            Expr::Logic {
                op: LogicOp::And | LogicOp::AndSymbol,
                lhs,
                rhs,
            } => {
                let mut out = lhs.conjuncts();
                out.extend(rhs.conjuncts());
                out
            }
            other => vec![other],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "raw", rename_all = "snake_case")]
pub enum Literal {
    True,
    False,
    None,
    /// Source spelling, e.g. `16320` or `-0.5`.
    Number(String),
    /// Source spelling including quotes.
    Str(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompareOp {
    Eq,
    Ne,
    Ge,
    Le,
    Gt,
    Lt,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "==",
            CompareOp::Ne => "!=",
            CompareOp::Ge => ">=",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Lt => "<",
        }
    }
}

/// Boolean connective; the spelling is kept so rendering is faithful.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogicOp {
    And,
    Or,
    AndSymbol,
    OrSymbol,
}

impl LogicOp {
    pub fn symbol(self) -> &'static str {
        match self {
            LogicOp::And => "and",
            LogicOp::Or => "or",
            LogicOp::AndSymbol => "&",
            LogicOp::OrSymbol => "|",
        }
    }
}

/// Kind of a declared variable, inferred from its assigned value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Boolean,
    String,
    Number,
    StringList,
    None,
    /// Assigned something other than a literal.
    Derived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Fatal,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    ForbiddenConstruct,
    UnsupportedConstruct,
    Unrecognized,
    UnexpectedIndent,
    EmptyIfBody,
    MissingColon,
    NonSnakeCase,
    MissingQuestionVariable,
    DuplicateQuestionVariable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// 1-based source line; 0 for program-level findings.
    pub line: usize,
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl PseudoProgram {
    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    /// Kind sequence in pre-order (bodies follow their `if`).
    pub fn kind_sequence(&self) -> Vec<StatementKind> {
        let mut out = Vec::new();
        walk(&self.statements, &mut |s| out.push(s.kind()));
        out
    }

    /// Comment texts in pre-order.
    pub fn comment_texts(&self) -> Vec<&str> {
        let mut out = Vec::new();
        walk(&self.statements, &mut |s| {
            if let Statement::Comment { text } = s {
                out.push(text.as_str());
            }
        });
        out
    }

    /// Declared variables (plain-name assignment targets) in first-assignment
    /// order, with the kind of their first assigned value.
    pub fn variables(&self) -> Vec<(String, VarKind)> {
        let mut out: Vec<(String, VarKind)> = Vec::new();
        walk(&self.statements, &mut |s| {
            if let Statement::Assign {
                target: Target::Name { name },
                value,
                ..
            } = s
            {
                if !out.iter().any(|(n, _)| n == name) {
                    out.push((name.clone(), var_kind(value)));
                }
            }
        });
        out
    }

    /// Every identifier (variables, predicates, predicate arguments) in
    /// first-occurrence order.
    pub fn identifiers(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        walk(&self.statements, &mut |s| {
            transform::visit_names(s, &mut |n| {
                if !out.iter().any(|o| o == n) {
                    out.push(n.to_string());
                }
            })
        });
        out
    }

    pub fn if_count(&self) -> usize {
        self.kind_sequence()
            .iter()
            .filter(|k| **k == StatementKind::If)
            .count()
    }
}

fn var_kind(value: &Expr) -> VarKind {
    match value {
        Expr::Literal(Literal::True | Literal::False) => VarKind::Boolean,
        Expr::Literal(Literal::None) => VarKind::None,
        Expr::Literal(Literal::Number(_)) => VarKind::Number,
        Expr::Literal(Literal::Str(_)) => VarKind::String,
        Expr::List { items }
            if items
                .iter()
                .all(|i| matches!(i, Expr::Literal(Literal::Str(_)))) =>
        {
            VarKind::StringList
        }
        _ => VarKind::Derived,
    }
}

/// Pre-order traversal over statements and nested `if` bodies.
pub(crate) fn walk<'a>(statements: &'a [Statement], f: &mut impl FnMut(&'a Statement)) {
    for s in statements {
        f(s);
        if let Statement::If { body, .. } = s {
            walk(body, f);
        }
    }
}

#[cfg(test)]
mod tests;
