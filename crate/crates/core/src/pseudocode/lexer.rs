//! Single-line tokenizer. A `#` outside a string literal starts a trailing comment.

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Token {
    Ident(String),
    Number(String),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Assign,
    Eq,
    Ne,
    Ge,
    Le,
    Gt,
    Lt,
    Amp,
    Pipe,
    Arrow,
    Minus,
}

#[derive(Debug, PartialEq, Eq)]
pub(crate) struct LexedLine {
    pub tokens: Vec<Token>,
    /// Text after the `#` of a trailing comment, if any.
    pub comment: Option<String>,
}

#[derive(Debug, PartialEq, Eq)]
pub(crate) struct LexError {
    pub column: usize,
}

pub(crate) fn lex(line: &str) -> Result<LexedLine, LexError> {
    let chars: Vec<char> = line.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\r' => i += 1,
            '#' => {
                let rest: String = chars[i + 1..].iter().collect();
                return Ok(LexedLine {
                    tokens,
                    comment: Some(rest),
                });
            }
            '(' => push(&mut tokens, &mut i, Token::LParen, 1),
            ')' => push(&mut tokens, &mut i, Token::RParen, 1),
            '[' => push(&mut tokens, &mut i, Token::LBracket, 1),
            ']' => push(&mut tokens, &mut i, Token::RBracket, 1),
            ',' => push(&mut tokens, &mut i, Token::Comma, 1),
            ':' => push(&mut tokens, &mut i, Token::Colon, 1),
            '&' => push(&mut tokens, &mut i, Token::Amp, 1),
            '|' => push(&mut tokens, &mut i, Token::Pipe, 1),
            '-' => push(&mut tokens, &mut i, Token::Minus, 1),
            '=' => match chars.get(i + 1) {
                Some('=') => push(&mut tokens, &mut i, Token::Eq, 2),
                Some('>') => push(&mut tokens, &mut i, Token::Arrow, 2),
                _ => push(&mut tokens, &mut i, Token::Assign, 1),
            },
            '!' if chars.get(i + 1) == Some(&'=') => push(&mut tokens, &mut i, Token::Ne, 2),
            '>' if chars.get(i + 1) == Some(&'=') => push(&mut tokens, &mut i, Token::Ge, 2),
            '<' if chars.get(i + 1) == Some(&'=') => push(&mut tokens, &mut i, Token::Le, 2),
            '>' => push(&mut tokens, &mut i, Token::Gt, 1),
            '<' => push(&mut tokens, &mut i, Token::Lt, 1),
            '"' | '\'' => {
                let start = i;
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(LexError { column: start }),
                        Some('\\') => i += 2,
                        Some(&q) if q == c => {
                            i += 1;
                            break;
                        }
                        Some(_) => i += 1,
                    }
                }
                tokens.push(Token::Str(chars[start..i].iter().collect()));
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // `4_years` style names are identifiers, not numbers.
                if i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '_') {
                    return Err(LexError { column: start });
                }
                tokens.push(Token::Number(chars[start..i].iter().collect()));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                tokens.push(Token::Ident(chars[start..i].iter().collect()));
            }
            _ => return Err(LexError { column: i }),
        }
    }
    Ok(LexedLine {
        tokens,
        comment: None,
    })
}

fn push(tokens: &mut Vec<Token>, i: &mut usize, token: Token, width: usize) {
    tokens.push(token);
    *i += width;
}
