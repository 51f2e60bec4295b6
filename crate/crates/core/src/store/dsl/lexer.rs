use super::ast::CmpOp;
use super::{ParseError, ParseErrorKind};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    Num { value: f64, integer: Option<u64> },
    Op(CmpOp),
    LParen,
    RParen,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Num { value, .. } => format!("number {value}"),
            Tok::Op(op) => format!("`{}`", op.as_str()),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
        }
    }
}

/// A token and the character offset where it starts.
#[derive(Clone, Debug)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub pos: usize,
}

fn syntax(pos: usize, expected: &[&str], found: impl Into<String>) -> ParseError {
    ParseError {
        position: pos,
        kind: ParseErrorKind::Syntax {
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: found.into(),
        },
    }
}

pub(crate) fn tokenize(input: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            '=' => {
                i += 1;
                Tok::Op(CmpOp::Eq)
            }
            '≠' => {
                i += 1;
                Tok::Op(CmpOp::Ne)
            }
            '≤' => {
                i += 1;
                Tok::Op(CmpOp::Le)
            }
            '≥' => {
                i += 1;
                Tok::Op(CmpOp::Ge)
            }
            '!' => {
                if chars.get(i + 1) == Some(&'=') {
                    i += 2;
                    Tok::Op(CmpOp::Ne)
                } else {
                    return Err(syntax(i, &["`!=`"], "`!`"));
                }
            }
            '<' => match chars.get(i + 1) {
                Some('=') => {
                    i += 2;
                    Tok::Op(CmpOp::Le)
                }
                Some('>') => {
                    i += 2;
                    Tok::Op(CmpOp::Ne)
                }
                _ => {
                    i += 1;
                    Tok::Op(CmpOp::Lt)
                }
            },
            '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    i += 2;
                    Tok::Op(CmpOp::Ge)
                } else {
                    i += 1;
                    Tok::Op(CmpOp::Gt)
                }
            }
            '"' => {
                i += 1;
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        None => return Err(syntax(start, &["closing `\"`"], "end of input")),
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some('\\') => match chars.get(i + 1) {
                            Some(&e @ ('"' | '\\')) => {
                                s.push(e);
                                i += 2;
                            }
                            Some(other) => return Err(syntax(i, &["`\\\"`", "`\\\\`"], format!("`\\{other}`"))),
                            None => return Err(syntax(start, &["closing `\"`"], "end of input")),
                        },
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                Tok::Str(s)
            }
            c if c == '-' || c.is_ascii_digit() => {
                let mut j = i;
                if chars[j] == '-' {
                    j += 1;
                }
                let int_start = j;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j == int_start {
                    return Err(syntax(i, &["number"], "`-`"));
                }
                let mut is_int = chars[i] != '-';
                if j < chars.len() && chars[j] == '.' {
                    let frac = j + 1;
                    let mut k = frac;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    if k == frac {
                        return Err(syntax(j + 1, &["digit"], "end of number"));
                    }
                    j = k;
                    is_int = false;
                }
                let raw: String = chars[i..j].iter().collect();
                let value: f64 = raw.parse().map_err(|_| syntax(i, &["number"], raw.clone()))?;
                if !value.is_finite() {
                    return Err(syntax(i, &["number in range"], raw));
                }
                let integer = if is_int { raw.parse::<u64>().ok() } else { None };
                i = j;
                Tok::Num { value, integer }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                i = j;
                Tok::Ident(word)
            }
            other => {
                return Err(syntax(i, &["field", "operator", "string", "number", "`(`", "`)`"], format!("`{other}`")))
            }
        };
        out.push(Spanned { tok, pos: start });
    }
    Ok(out)
}
