//! Tokenizer for `.cov` sources. Comments `(* ... *)` nest.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::syntax::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Int(i64),
    Ident(String),
    Let,
    LetStar,
    In,
    If,
    Then,
    Else,
    Assume,
    Assert,
    Check,
    Fun,
    True,
    False,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Bar,
    Comma,
    Colon,
    Assign,
    Arrow,
    Star,
    Plus,
    Minus,
    Bang,
    AndAnd,
    OrOr,
    Implies,
    Iff,
    EqEq,
    Le,
    Lt,
    Gt,
    Ge,
    Nu,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Int(n) => return write!(f, "integer `{n}`"),
            Tok::Ident(x) => return write!(f, "identifier `{x}`"),
            Tok::Let => "`let`",
            Tok::LetStar => "`let*`",
            Tok::In => "`in`",
            Tok::If => "`if`",
            Tok::Then => "`then`",
            Tok::Else => "`else`",
            Tok::Assume => "`assume`",
            Tok::Assert => "`assert`",
            Tok::Check => "`check`",
            Tok::Fun => "`fun`",
            Tok::True => "`true`",
            Tok::False => "`false`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Bar => "`|`",
            Tok::Comma => "`,`",
            Tok::Colon => "`:`",
            Tok::Assign => "`=`",
            Tok::Arrow => "`->`",
            Tok::Star => "`*`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Bang => "`!`",
            Tok::AndAnd => "`&&`",
            Tok::OrOr => "`||`",
            Tok::Implies => "`==>`",
            Tok::Iff => "`<=>`",
            Tok::EqEq => "`==`",
            Tok::Le => "`<=`",
            Tok::Lt => "`<`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::Nu => "`v`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "let" => Tok::Let,
        "in" => Tok::In,
        "if" => Tok::If,
        "then" => Tok::Then,
        "else" => Tok::Else,
        "assume" => Tok::Assume,
        "assert" => Tok::Assert,
        "check" => Tok::Check,
        "fun" => Tok::Fun,
        "true" => Tok::True,
        "false" => Tok::False,
        _ => return None,
    })
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        let next = chars.get(i + 1).copied();
        if c == '(' && next == Some('*') {
            let mut depth = 0usize;
            loop {
                if i >= chars.len() {
                    return Err(LexError {
                        span,
                        message: "unterminated comment".into(),
                    });
                }
                if chars[i] == '(' && chars.get(i + 1) == Some(&'*') {
                    depth += 1;
                    bump!();
                    bump!();
                } else if chars[i] == '*' && chars.get(i + 1) == Some(&')') {
                    depth -= 1;
                    bump!();
                    bump!();
                    if depth == 0 {
                        break;
                    }
                } else {
                    bump!();
                }
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            let text: String = chars[start..i].iter().collect();
            let n = text.parse::<i64>().map_err(|_| LexError {
                span,
                message: format!("integer literal `{text}` out of range"),
            })?;
            out.push(Token {
                tok: Tok::Int(n),
                span,
            });
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_continue(chars[i]) {
                bump!();
            }
            let text: String = chars[start..i].iter().collect();
            let tok = if text == "let" && i < chars.len() && chars[i] == '*' {
                bump!();
                Tok::LetStar
            } else {
                keyword(&text).unwrap_or(Tok::Ident(text))
            };
            out.push(Token { tok, span });
            continue;
        }
        let rest: String = chars[i..(i + 3).min(chars.len())].iter().collect();
        let (tok, len) = if rest.starts_with("==>") {
            (Tok::Implies, 3)
        } else if rest.starts_with("<=>") {
            (Tok::Iff, 3)
        } else if rest.starts_with("==") {
            (Tok::EqEq, 2)
        } else if rest.starts_with("<=") {
            (Tok::Le, 2)
        } else if rest.starts_with(">=") {
            (Tok::Ge, 2)
        } else if rest.starts_with("->") {
            (Tok::Arrow, 2)
        } else if rest.starts_with("&&") {
            (Tok::AndAnd, 2)
        } else if rest.starts_with("||") {
            (Tok::OrOr, 2)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '|' => Tok::Bar,
                ',' => Tok::Comma,
                ':' => Tok::Colon,
                '=' => Tok::Assign,
                '*' => Tok::Star,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '!' => Tok::Bang,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                'ν' => Tok::Nu,
                '⊤' => Tok::True,
                '⊥' => Tok::False,
                '¬' => Tok::Bang,
                '∧' => Tok::AndAnd,
                '∨' => Tok::OrOr,
                '≤' => Tok::Le,
                _ => {
                    return Err(LexError {
                        span,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            };
            (t, 1)
        };
        for _ in 0..len {
            bump!();
        }
        out.push(Token { tok, span });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, col },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn let_star_and_operators() {
        assert_eq!(
            toks("let* u = x ==> y <=> z"),
            [
                Tok::LetStar,
                Tok::Ident("u".into()),
                Tok::Assign,
                Tok::Ident("x".into()),
                Tok::Implies,
                Tok::Ident("y".into()),
                Tok::Iff,
                Tok::Ident("z".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn nested_comments_and_positions() {
        let t = tokenize("(* a (* b *) c *)\n  z'").unwrap();
        assert_eq!(t[0].tok, Tok::Ident("z'".into()));
        assert_eq!(t[0].span, Span { line: 2, col: 3 });
        assert!(tokenize("(* open").is_err());
    }

    #[test]
    fn unicode_connectives() {
        assert_eq!(toks("ν ⊤ ¬"), [Tok::Nu, Tok::True, Tok::Bang, Tok::Eof]);
    }
}
