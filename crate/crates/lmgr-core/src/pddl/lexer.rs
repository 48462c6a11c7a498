//! S-expression reader shared by the domain and problem parsers.
//!
//! Produces a tree of symbols and lists with source positions. Symbols are
//! lower-cased here so the rest of the pipeline is case-insensitive.
//! Comments run from `;` to end of line.

use super::PddlError;

#[derive(Debug, Clone)]
pub(crate) enum SExp {
    Sym {
        text: String,
        line: usize,
        col: usize,
    },
    List {
        items: Vec<SExp>,
        line: usize,
        col: usize,
    },
}

impl SExp {
    pub(crate) fn pos(&self) -> (usize, usize) {
        match self {
            SExp::Sym { line, col, .. } | SExp::List { line, col, .. } => (*line, *col),
        }
    }

    pub(crate) fn as_sym(&self) -> Option<&str> {
        match self {
            SExp::Sym { text, .. } => Some(text),
            SExp::List { .. } => None,
        }
    }

    pub(crate) fn as_list(&self) -> Option<&[SExp]> {
        match self {
            SExp::List { items, .. } => Some(items),
            SExp::Sym { .. } => None,
        }
    }

    /// Short description for error messages: the symbol text or `(…)`.
    pub(crate) fn describe(&self) -> String {
        match self {
            SExp::Sym { text, .. } => format!("`{}`", text),
            SExp::List { .. } => "a list".to_string(),
        }
    }
}

#[derive(Debug)]
enum Token {
    LParen { line: usize, col: usize },
    RParen { line: usize, col: usize },
    Symbol { text: String, line: usize, col: usize },
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        let (tline, tcol) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            continue;
        }
        col += 1;
        match c {
            ';' => {
                for n in chars.by_ref() {
                    if n == '\n' {
                        line += 1;
                        col = 1;
                        break;
                    }
                }
            }
            '(' => tokens.push(Token::LParen {
                line: tline,
                col: tcol,
            }),
            ')' => tokens.push(Token::RParen {
                line: tline,
                col: tcol,
            }),
            c if c.is_whitespace() => {}
            c => {
                let mut text = String::new();
                text.push(c);
                while let Some(&n) = chars.peek() {
                    if n.is_whitespace() || n == '(' || n == ')' || n == ';' {
                        break;
                    }
                    text.push(n);
                    chars.next();
                    col += 1;
                }
                tokens.push(Token::Symbol {
                    text: text.to_lowercase(),
                    line: tline,
                    col: tcol,
                });
            }
        }
    }
    tokens
}

/// Read all top-level s-expressions in `text`.
pub(crate) fn read(text: &str) -> Result<Vec<SExp>, PddlError> {
    let tokens = tokenize(text);
    let mut top = Vec::new();
    // stack of open lists under construction
    let mut stack: Vec<(Vec<SExp>, usize, usize)> = Vec::new();
    for token in tokens {
        match token {
            Token::LParen { line, col } => stack.push((Vec::new(), line, col)),
            Token::RParen { line, col } => {
                let (items, lline, lcol) = stack.pop().ok_or(PddlError::Syntax {
                    line,
                    col,
                    message: "unmatched `)`".to_string(),
                })?;
                let list = SExp::List {
                    items,
                    line: lline,
                    col: lcol,
                };
                match stack.last_mut() {
                    Some((parent, _, _)) => parent.push(list),
                    None => top.push(list),
                }
            }
            Token::Symbol { text, line, col } => {
                let sym = SExp::Sym { text, line, col };
                match stack.last_mut() {
                    Some((parent, _, _)) => parent.push(sym),
                    None => top.push(sym),
                }
            }
        }
    }
    if let Some((_, line, col)) = stack.pop() {
        return Err(PddlError::Syntax {
            line,
            col,
            message: "unclosed `(`".to_string(),
        });
    }
    Ok(top)
}
