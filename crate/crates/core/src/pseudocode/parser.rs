use super::lexer::{lex, Token};
use super::{
    Application, CompareOp, Diagnostic, DiagnosticKind, Expr, Literal, LogicOp, Parsed,
    PseudoProgram, Severity, Statement, Target, QUESTION_MARKER,
};

/// Keywords whose presence puts a line outside the dialect and fails strict validation.
const FORBIDDEN: &[&str] = &["for", "while", "def", "class", "lambda"];
/// Python constructs the dialect does not model; kept as opaque lines with a warning.
const UNSUPPORTED: &[&str] = &[
    "elif", "else", "return", "import", "from", "try", "except", "finally", "with", "yield",
    "async", "await", "raise", "assert", "print", "del", "global", "pass",
];
const KEYWORDS: &[&str] = &["and", "or", "not", "if", "True", "False", "None"];

struct Line<'a> {
    raw: &'a str,
    indent: usize,
    blank: bool,
}

/// Parses dialect code. Never fails: unparseable lines become opaque statements.
pub fn parse(text: &str) -> Parsed {
    let lines: Vec<Line<'_>> = if text.is_empty() {
        Vec::new()
    } else {
        text.split('\n').map(line_info).collect()
    };
    let mut state = State {
        lines: &lines,
        diagnostics: Vec::new(),
        question_variable: None,
    };
    let statements = state.block(0, lines.len(), 0);
    let mut diagnostics = state.diagnostics;
    let program = PseudoProgram {
        statements,
        question_variable: state.question_variable,
    };
    check_naming(&program, &mut diagnostics);
    Parsed {
        program,
        diagnostics,
    }
}

fn line_info(raw: &str) -> Line<'_> {
    let mut indent = 0;
    for c in raw.chars() {
        match c {
            ' ' => indent += 1,
            '\t' => indent += 4,
            _ => break,
        }
    }
    Line {
        raw,
        indent,
        blank: raw.trim().is_empty(),
    }
}

struct State<'a, 'b> {
    lines: &'b [Line<'a>],
    diagnostics: Vec<Diagnostic>,
    question_variable: Option<String>,
}

impl State<'_, '_> {
    fn diag(&mut self, idx: usize, severity: Severity, kind: DiagnosticKind, message: String) {
        self.diagnostics.push(Diagnostic {
            line: idx + 1,
            severity,
            kind,
            message,
        });
    }

    fn block(&mut self, start: usize, end: usize, base: usize) -> Vec<Statement> {
        let mut out = Vec::new();
        let mut i = start;
        while i < end {
            let line = &self.lines[i];
            if line.blank {
                out.push(Statement::Blank);
                i += 1;
                continue;
            }
            if line.indent != base {
                self.diag(
                    i,
                    Severity::Warning,
                    DiagnosticKind::UnexpectedIndent,
                    format!("indentation {} where {} was expected", line.indent, base),
                );
                out.push(Statement::Opaque {
                    raw: line.raw.to_string(),
                });
                i += 1;
                continue;
            }
            match self.statement(i) {
                Parsedline::Stmt(s) => {
                    out.push(s);
                    i += 1;
                }
                Parsedline::IfHeader { condition, comment } => {
                    let mut last_body = None;
                    let mut j = i + 1;
                    while j < end {
                        if self.lines[j].blank {
                            j += 1;
                            continue;
                        }
                        if self.lines[j].indent > base {
                            last_body = Some(j);
                            j += 1;
                        } else {
                            break;
                        }
                    }
                    let body = match last_body {
                        Some(last) => {
                            let first = (i + 1..=last)
                                .find(|&k| !self.lines[k].blank)
                                .expect("body has a non-blank line");
                            let body_indent = self.lines[first].indent;
                            let body = self.block(i + 1, last + 1, body_indent);
                            i = last + 1;
                            body
                        }
                        None => {
                            self.diag(
                                i,
                                Severity::Warning,
                                DiagnosticKind::EmptyIfBody,
                                "if statement has no body".into(),
                            );
                            i += 1;
                            Vec::new()
                        }
                    };
                    out.push(Statement::If {
                        condition,
                        body,
                        comment,
                    });
                }
            }
        }
        out
    }

    fn statement(&mut self, idx: usize) -> Parsedline {
        let raw = self.lines[idx].raw;
        let content = raw.trim();
        let opaque = || {
            Parsedline::Stmt(Statement::Opaque {
                raw: raw.to_string(),
            })
        };

        if let Some(rest) = content.strip_prefix('#') {
            return Parsedline::Stmt(Statement::Comment {
                text: comment_text(rest),
            });
        }

        let lexed = match lex(content) {
            Ok(l) => l,
            Err(e) => {
                self.diag(
                    idx,
                    Severity::Warning,
                    DiagnosticKind::Unrecognized,
                    format!("unrecognized text at column {}", e.column + 1),
                );
                return opaque();
            }
        };
        let comment = lexed.comment.as_deref().map(comment_text);
        let tokens = lexed.tokens;

        if let Some(Token::Ident(first)) = tokens.first() {
            if FORBIDDEN.contains(&first.as_str()) {
                self.diag(
                    idx,
                    Severity::Fatal,
                    DiagnosticKind::ForbiddenConstruct,
                    format!("`{first}` is not allowed (no loops, functions or classes)"),
                );
                return opaque();
            }
            if UNSUPPORTED.contains(&first.as_str()) {
                self.diag(
                    idx,
                    Severity::Warning,
                    DiagnosticKind::UnsupportedConstruct,
                    format!("`{first}` is not part of the dialect"),
                );
                return opaque();
            }
            if first == "if" {
                let mut cond_tokens = &tokens[1..];
                match cond_tokens.last() {
                    Some(Token::Colon) => cond_tokens = &cond_tokens[..cond_tokens.len() - 1],
                    _ => self.diag(
                        idx,
                        Severity::Warning,
                        DiagnosticKind::MissingColon,
                        "if header without trailing colon".into(),
                    ),
                }
                return match parse_expr_complete(cond_tokens) {
                    Some(condition) => Parsedline::IfHeader { condition, comment },
                    None => {
                        self.diag(
                            idx,
                            Severity::Warning,
                            DiagnosticKind::Unrecognized,
                            "unparseable if condition".into(),
                        );
                        opaque()
                    }
                };
            }
        }

        let Some(eq) = tokens.iter().position(|t| *t == Token::Assign) else {
            self.diag(
                idx,
                Severity::Warning,
                DiagnosticKind::Unrecognized,
                "line is neither a comment, an assignment nor an if header".into(),
            );
            return opaque();
        };
        let target = parse_target(&tokens[..eq]);
        let value = parse_expr_complete(&tokens[eq + 1..]);
        let (Some(target), Some(value)) = (target, value) else {
            self.diag(
                idx,
                Severity::Warning,
                DiagnosticKind::Unrecognized,
                "unparseable assignment".into(),
            );
            return opaque();
        };

        if let (Target::Apply(head), Expr::Implies { .. }) = (&target, &value) {
            let Expr::Implies {
                antecedent,
                consequent,
            } = value
            else {
                unreachable!()
            };
            return Parsedline::Stmt(Statement::RuleDef {
                head: head.clone(),
                antecedent: *antecedent,
                consequent: *consequent,
                comment,
            });
        }

        if let (Target::Name { name }, Some(c)) = (&target, &comment) {
            if is_question_marker(c) {
                if self.question_variable.is_some() {
                    self.diag(
                        idx,
                        Severity::Warning,
                        DiagnosticKind::DuplicateQuestionVariable,
                        format!("`{name}` marked as question variable again; first kept"),
                    );
                } else {
                    self.question_variable = Some(name.clone());
                }
            }
        }
        Parsedline::Stmt(Statement::Assign {
            target,
            value,
            comment,
        })
    }
}

enum Parsedline {
    Stmt(Statement),
    IfHeader {
        condition: Expr,
        comment: Option<String>,
    },
}

/// Text after `#`, minus one separating space.
fn comment_text(after_hash: &str) -> String {
    after_hash
        .strip_prefix(' ')
        .unwrap_or(after_hash)
        .trim_end_matches('\r')
        .to_string()
}

pub(crate) fn is_question_marker(comment: &str) -> bool {
    comment
        .trim()
        .to_ascii_lowercase()
        .starts_with(&QUESTION_MARKER.to_ascii_lowercase())
}

fn is_name(s: &str) -> bool {
    !KEYWORDS.contains(&s)
        && !FORBIDDEN.contains(&s)
        && !UNSUPPORTED.contains(&s)
}

fn parse_target(tokens: &[Token]) -> Option<Target> {
    let mut p = ExprParser { tokens, pos: 0 };
    let target = match p.primary()? {
        Expr::Name { name } => Target::Name { name },
        Expr::Apply(app) => Target::Apply(app),
        _ => return None,
    };
    (p.pos == tokens.len()).then_some(target)
}

fn parse_expr_complete(tokens: &[Token]) -> Option<Expr> {
    if tokens.is_empty() {
        return None;
    }
    let mut p = ExprParser { tokens, pos: 0 };
    let e = p.implication()?;
    (p.pos == tokens.len()).then_some(e)
}

/// Precedence, loosest first: `=>`, `or`/`|`, `and`/`&`, `not`, comparison.
struct ExprParser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, t: &Token) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn peek_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Token::Ident(w)) if w == word)
    }

    fn implication(&mut self) -> Option<Expr> {
        let lhs = self.or()?;
        if self.eat(&Token::Arrow) {
            let rhs = self.implication()?;
            return Some(Expr::Implies {
                antecedent: Box::new(lhs),
                consequent: Box::new(rhs),
            });
        }
        Some(lhs)
    }

    fn or(&mut self) -> Option<Expr> {
        let mut lhs = self.and()?;
        loop {
            let op = if self.peek_ident("or") {
                LogicOp::Or
            } else if self.peek() == Some(&Token::Pipe) {
                LogicOp::OrSymbol
            } else {
                return Some(lhs);
            };
            self.pos += 1;
            let rhs = self.and()?;
            lhs = Expr::Logic {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn and(&mut self) -> Option<Expr> {
        let mut lhs = self.not()?;
        loop {
            let op = if self.peek_ident("and") {
                LogicOp::And
            } else if self.peek() == Some(&Token::Amp) {
                LogicOp::AndSymbol
            } else {
                return Some(lhs);
            };
            self.pos += 1;
            let rhs = self.not()?;
            lhs = Expr::Logic {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn not(&mut self) -> Option<Expr> {
        if self.peek_ident("not") {
            self.pos += 1;
            let operand = self.not()?;
            return Some(Expr::Not {
                operand: Box::new(operand),
            });
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Option<Expr> {
        let mut lhs = self.primary()?;
        loop {
            let op = match self.peek() {
                Some(Token::Eq) => CompareOp::Eq,
                Some(Token::Ne) => CompareOp::Ne,
                Some(Token::Ge) => CompareOp::Ge,
                Some(Token::Le) => CompareOp::Le,
                Some(Token::Gt) => CompareOp::Gt,
                Some(Token::Lt) => CompareOp::Lt,
                _ => return Some(lhs),
            };
            self.pos += 1;
            let rhs = self.primary()?;
            lhs = Expr::Compare {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn primary(&mut self) -> Option<Expr> {
        let tok = self.peek()?.clone();
        self.pos += 1;
        match tok {
            Token::Number(n) => Some(Expr::Literal(Literal::Number(n))),
            Token::Minus => match self.peek()?.clone() {
                Token::Number(n) => {
                    self.pos += 1;
                    Some(Expr::Literal(Literal::Number(format!("-{n}"))))
                }
                _ => None,
            },
            Token::Str(s) => Some(Expr::Literal(Literal::Str(s))),
            Token::LParen => {
                let inner = self.implication()?;
                self.eat(&Token::RParen).then(|| Expr::Paren {
                    inner: Box::new(inner),
                })
            }
            Token::LBracket => {
                let items = self.sequence(&Token::RBracket)?;
                Some(Expr::List { items })
            }
            Token::Ident(word) => match word.as_str() {
                "True" => Some(Expr::Literal(Literal::True)),
                "False" => Some(Expr::Literal(Literal::False)),
                "None" => Some(Expr::Literal(Literal::None)),
                w if !is_name(w) => None,
                _ => {
                    if self.eat(&Token::LParen) {
                        let args = self.sequence(&Token::RParen)?;
                        Some(Expr::Apply(Application { name: word, args }))
                    } else {
                        Some(Expr::Name { name: word })
                    }
                }
            },
            _ => None,
        }
    }

    /// Comma-separated expressions up to `close` (consumed).
    fn sequence(&mut self, close: &Token) -> Option<Vec<Expr>> {
        let mut items = Vec::new();
        if self.eat(close) {
            return Some(items);
        }
        loop {
            items.push(self.implication()?);
            if self.eat(close) {
                return Some(items);
            }
            if !self.eat(&Token::Comma) {
                return None;
            }
            // trailing comma
            if self.eat(close) {
                return Some(items);
            }
        }
    }
}

fn is_lower_snake(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        && !name.starts_with(|c: char| c.is_ascii_digit())
}

fn check_naming(program: &PseudoProgram, diagnostics: &mut Vec<Diagnostic>) {
    for name in program.identifiers() {
        if !is_lower_snake(&name) {
            diagnostics.push(Diagnostic {
                line: 0,
                severity: Severity::Warning,
                kind: DiagnosticKind::NonSnakeCase,
                message: format!("identifier `{name}` is not lower snake case"),
            });
        }
    }
}
