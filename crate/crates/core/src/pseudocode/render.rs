use super::{Application, Expr, Literal, PseudoProgram, Statement, Target};

const INDENT: &str = "    ";

/// Renders a program back to dialect text, one statement per line, nested
/// bodies indented by four spaces. Opaque lines are emitted verbatim.
pub fn render(program: &PseudoProgram) -> String {
    let mut lines = Vec::new();
    render_block(&program.statements, 0, &mut lines);
    lines.join("\n")
}

fn render_block(statements: &[Statement], depth: usize, out: &mut Vec<String>) {
    let pad = INDENT.repeat(depth);
    for s in statements {
        match s {
            Statement::Blank => out.push(String::new()),
            Statement::Opaque { raw } => out.push(raw.clone()),
            Statement::Comment { text } => out.push(format!("{pad}{}", comment(text))),
            Statement::Assign {
                target,
                value,
                comment: c,
            } => out.push(format!(
                "{pad}{} = {}{}",
                render_target(target),
                render_expr(value),
                trailing(c)
            )),
            Statement::RuleDef {
                head,
                antecedent,
                consequent,
                comment: c,
            } => out.push(format!(
                "{pad}{} = {} => {}{}",
                render_app(head),
                render_expr(antecedent),
                render_expr(consequent),
                trailing(c)
            )),
            Statement::If {
                condition,
                body,
                comment: c,
            } => {
                out.push(format!("{pad}if {}:{}", render_expr(condition), trailing(c)));
                render_block(body, depth + 1, out);
            }
        }
    }
}

fn comment(text: &str) -> String {
    if text.is_empty() || text.starts_with('#') {
        format!("#{text}")
    } else {
        format!("# {text}")
    }
}

fn trailing(c: &Option<String>) -> String {
    c.as_deref()
        .map(|t| format!(" {}", comment(t)))
        .unwrap_or_default()
}

fn render_target(t: &Target) -> String {
    match t {
        Target::Name { name } => name.clone(),
        Target::Apply(app) => render_app(app),
    }
}

fn render_app(app: &Application) -> String {
    let args: Vec<String> = app.args.iter().map(render_expr).collect();
    format!("{}({})", app.name, args.join(", "))
}

pub fn render_expr(e: &Expr) -> String {
    match e {
        Expr::Literal(l) => match l {
            Literal::True => "True".into(),
            Literal::False => "False".into(),
            Literal::None => "None".into(),
            Literal::Number(raw) | Literal::Str(raw) => raw.clone(),
        },
        Expr::Name { name } => name.clone(),
        Expr::Apply(app) => render_app(app),
        Expr::Compare { op, lhs, rhs } => {
            format!("{} {} {}", render_expr(lhs), op.symbol(), render_expr(rhs))
        }
        Expr::Not { operand } => format!("not {}", render_expr(operand)),
        Expr::Logic { op, lhs, rhs } => {
            format!("{} {} {}", render_expr(lhs), op.symbol(), render_expr(rhs))
        }
        Expr::Implies {
            antecedent,
            consequent,
        } => format!("{} => {}", render_expr(antecedent), render_expr(consequent)),
        Expr::Paren { inner } => format!("({})", render_expr(inner)),
        Expr::List { items } => {
            let items: Vec<String> = items.iter().map(render_expr).collect();
            format!("[{}]", items.join(", "))
        }
    }
}
