//! Tokenizer for the supported OpenQASM 3 subset.
//!
//! Comments are skipped, except that whole lines beginning with `//%` are
//! collected separately as pragma lines (the token stream never sees them).

use crate::diag::{Code, Diagnostic};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    Float(f64),
    Str(String),
    Semi,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Equals,
    Star,
    Slash,
    Minus,
    Arrow,
}

/// A token plus the 1-based line it starts on and its raw source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub text: String,
}

/// A whole-line `//%` comment, captured verbatim with its 1-based line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PragmaLine {
    pub line: usize,
    pub raw: String,
}

pub struct LexOutput {
    pub tokens: Vec<Token>,
    pub pragmas: Vec<PragmaLine>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Collect every line whose first non-whitespace characters are `//%`.
pub fn collect_pragma_lines(source: &str) -> Vec<PragmaLine> {
    source
        .lines()
        .enumerate()
        .filter(|(_, text)| text.trim_start().starts_with("//%"))
        .map(|(idx, text)| PragmaLine {
            line: idx + 1,
            raw: text.trim_end_matches('\r').to_string(),
        })
        .collect()
}

pub fn tokenize(source: &str) -> LexOutput {
    let mut tokens = Vec::new();
    let mut diagnostics = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let mut i = 0;
    let mut line = 1;

    while i < chars.len() {
        let c = chars[i];
        match c {
            '\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            '/' if chars.get(i + 1) == Some(&'/') => {
                // Line comment; pragma lines are collected by collect_pragma_lines.
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '/' if chars.get(i + 1) == Some(&'*') => {
                i += 2;
                let start_line = line;
                let mut closed = false;
                while i < chars.len() {
                    if chars[i] == '\n' {
                        line += 1;
                    }
                    if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                        i += 2;
                        closed = true;
                        break;
                    }
                    i += 1;
                }
                if !closed {
                    diagnostics.push(Diagnostic::new(
                        Code::SyntaxError,
                        start_line,
                        "unterminated block comment",
                    ));
                }
            }
            '"' => {
                let start_line = line;
                let mut s = String::new();
                i += 1;
                let mut closed = false;
                while i < chars.len() {
                    match chars[i] {
                        '"' => {
                            i += 1;
                            closed = true;
                            break;
                        }
                        '\n' => break,
                        c => {
                            s.push(c);
                            i += 1;
                        }
                    }
                }
                if closed {
                    tokens.push(Token {
                        tok: Tok::Str(s.clone()),
                        line: start_line,
                        text: format!("\"{s}\""),
                    });
                } else {
                    diagnostics.push(Diagnostic::new(
                        Code::SyntaxError,
                        start_line,
                        "unterminated string literal",
                    ));
                }
            }
            c if c.is_ascii_digit() => {
                let start = i;
                let start_line = line;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '_') {
                    i += 1;
                }
                let mut is_float = false;
                if i < chars.len() && chars[i] == '.' {
                    is_float = true;
                    i += 1;
                    while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '_') {
                        i += 1;
                    }
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        is_float = true;
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let digits: String = text.chars().filter(|&c| c != '_').collect();
                if is_float {
                    match digits.parse::<f64>() {
                        Ok(v) => tokens.push(Token {
                            tok: Tok::Float(v),
                            line: start_line,
                            text,
                        }),
                        Err(_) => diagnostics.push(Diagnostic::new(
                            Code::SyntaxError,
                            start_line,
                            format!("invalid number literal '{text}'"),
                        )),
                    }
                } else {
                    match digits.parse::<u64>() {
                        Ok(v) => tokens.push(Token {
                            tok: Tok::Int(v),
                            line: start_line,
                            text,
                        }),
                        Err(_) => diagnostics.push(Diagnostic::new(
                            Code::SyntaxError,
                            start_line,
                            format!("integer literal '{text}' out of range"),
                        )),
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                tokens.push(Token {
                    tok: Tok::Ident(text.clone()),
                    line,
                    text,
                });
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                tokens.push(Token {
                    tok: Tok::Arrow,
                    line,
                    text: "->".into(),
                });
                i += 2;
            }
            _ => {
                let tok = match c {
                    ';' => Some(Tok::Semi),
                    ',' => Some(Tok::Comma),
                    '(' => Some(Tok::LParen),
                    ')' => Some(Tok::RParen),
                    '[' => Some(Tok::LBracket),
                    ']' => Some(Tok::RBracket),
                    '{' => Some(Tok::LBrace),
                    '}' => Some(Tok::RBrace),
                    '=' => Some(Tok::Equals),
                    '*' => Some(Tok::Star),
                    '/' => Some(Tok::Slash),
                    '-' => Some(Tok::Minus),
                    _ => None,
                };
                match tok {
                    Some(t) => tokens.push(Token {
                        tok: t,
                        line,
                        text: c.to_string(),
                    }),
                    None => diagnostics.push(Diagnostic::new(
                        Code::SyntaxError,
                        line,
                        format!("unknown token '{c}'"),
                    )),
                }
                i += 1;
            }
        }
    }

    LexOutput {
        tokens,
        pragmas: collect_pragma_lines(source),
        diagnostics,
    }
}
