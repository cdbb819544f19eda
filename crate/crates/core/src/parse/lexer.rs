use num_bigint::BigInt;

use super::ParseError;
use crate::expr::Q;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Num(Q),
    Sym(char),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Num(q) => format!("number `{q}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    /// Byte offsets, used to detect adjacency.
    pub start: usize,
    pub end: usize,
}

const SYMBOLS: &str = ";,(){}[]=+-*/^'>";

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    let byte_at = |i: usize| chars.get(i).map_or(src.len(), |c| c.0);
    while i < chars.len() {
        let c = chars[i].1;
        let (l0, c0, s0) = (line, col, i);
        let advance = |n: usize, line: &mut usize, col: &mut usize, i: &mut usize| {
            for _ in 0..n {
                if chars[*i].1 == '\n' {
                    *line += 1;
                    *col = 1;
                } else {
                    *col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(1, &mut line, &mut col, &mut i);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i].1 != '\n' {
                advance(1, &mut line, &mut col, &mut i);
            }
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            let mut s = String::new();
            while j < chars.len() {
                let d = chars[j].1;
                if d.is_ascii_alphanumeric() || d == '_' {
                    s.push(d);
                    j += 1;
                } else if d == '{' && s.ends_with('_') {
                    // u_{t,x}: braces belong to the identifier
                    let close = chars[j..].iter().position(|c| c.1 == '}').ok_or_else(|| {
                        ParseError::Syntax {
                            line: l0,
                            col: c0 + (j - i),
                            found: "`{`".into(),
                            expected: vec!["`}`".into()],
                        }
                    })?;
                    for k in j..j + close + 1 {
                        let ch = chars[k].1;
                        if !ch.is_whitespace() {
                            s.push(ch);
                        }
                    }
                    j += close + 1;
                } else {
                    break;
                }
            }
            advance(j - i, &mut line, &mut col, &mut i);
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            let mut j = i;
            let mut int = String::new();
            while j < chars.len() && chars[j].1.is_ascii_digit() {
                int.push(chars[j].1);
                j += 1;
            }
            let mut frac = String::new();
            if j + 1 < chars.len() && chars[j].1 == '.' && chars[j + 1].1.is_ascii_digit() {
                j += 1;
                while j < chars.len() && chars[j].1.is_ascii_digit() {
                    frac.push(chars[j].1);
                    j += 1;
                }
            }
            advance(j - i, &mut line, &mut col, &mut i);
            let n: BigInt = format!("{int}{frac}").parse().expect("digits");
            let d = num_traits::pow(BigInt::from(10), frac.len());
            Tok::Num(Q::new(n, d))
        } else if SYMBOLS.contains(c) {
            advance(1, &mut line, &mut col, &mut i);
            Tok::Sym(c)
        } else {
            return Err(ParseError::Syntax {
                line,
                col,
                found: format!("`{c}`"),
                expected: vec!["token".into()],
            });
        };
        out.push(Token {
            tok,
            line: l0,
            col: c0,
            start: byte_at(s0),
            end: byte_at(i),
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
        start: src.len(),
        end: src.len(),
    });
    Ok(out)
}
