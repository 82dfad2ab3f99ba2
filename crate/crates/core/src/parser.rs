//! Recursive-descent parser for programs, expressions, refinement types and
//! qualifiers.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::lexer::{tokenize, Tok, Token};
use crate::qualifier::Qualifier;
use crate::rtype::RType;
use crate::syntax::{BaseType, Def, Expr, ExprKind, Pattern, Span, SurfaceProgram};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ParseError {
    pub span: Span,
    pub message: String,
    /// Tokens that would have been accepted at `span`.
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected one of: {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

type PResult<T> = Result<T, ParseError>;

/// Infix operators usable as sections, e.g. `(+)`.
pub const OPERATOR_NAMES: [&str; 9] = ["+", "-", "==", "<=", "<", ">", ">=", "&&", "||"];

pub fn parse_program(src: &str) -> PResult<SurfaceProgram> {
    let mut p = Parser::new(src)?;
    if p.peek() == &Tok::Eof {
        return Err(p.error_here("empty program", vec!["`let`".into(), "`check`".into()]));
    }
    let prog = p.program()?;
    p.expect(Tok::Eof)?;
    Ok(prog)
}

pub fn parse_expr(src: &str) -> PResult<Expr> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

pub fn parse_rtype(src: &str) -> PResult<RType> {
    let mut p = Parser::new(src)?;
    let t = p.rtype()?;
    p.expect(Tok::Eof)?;
    Ok(t)
}

pub fn parse_qualifier(src: &str) -> PResult<Qualifier> {
    let mut p = Parser::new(src)?;
    let q = p.qual()?;
    p.expect(Tok::Eof)?;
    Ok(q)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

fn describe(t: &Tok) -> String {
    t.to_string()
}

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        let toks = tokenize(src).map_err(|e| ParseError {
            span: e.span,
            message: e.message,
            expected: vec![],
        })?;
        Ok(Parser { toks, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error_here(&self, message: impl Into<String>, expected: Vec<String>) -> ParseError {
        ParseError {
            span: self.span(),
            message: message.into(),
            expected,
        }
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        self.error_here(
            format!("unexpected {}", describe(self.peek())),
            expected.iter().map(|s| s.to_string()).collect(),
        )
    }

    fn expect(&mut self, t: Tok) -> PResult<Token> {
        if self.peek() == &t {
            Ok(self.bump())
        } else {
            Err(self.error_here(
                format!("unexpected {}", describe(self.peek())),
                vec![describe(&t)],
            ))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                let sp = self.span();
                self.bump();
                Ok((x, sp))
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    // ----- programs -----

    fn program(&mut self) -> PResult<SurfaceProgram> {
        let mut defs: Vec<Def> = Vec::new();
        let mut names = BTreeSet::new();
        while self.peek() == &Tok::Let {
            let d = self.def()?;
            if !names.insert(d.name.clone()) {
                return Err(ParseError {
                    span: d.span,
                    message: format!("duplicate top-level name `{}`", d.name),
                    expected: vec![],
                });
            }
            defs.push(d);
        }
        let check_span = self.span();
        if self.peek() != &Tok::Check {
            return Err(self.unexpected(&["`let`", "`check`"]));
        }
        self.bump();
        let main = self.expr()?;
        self.expect(Tok::Colon)?;
        let goal = self.rtype()?;
        Ok(SurfaceProgram {
            defs,
            main,
            goal,
            check_span,
        })
    }

    fn def(&mut self) -> PResult<Def> {
        let span = self.span();
        self.expect(Tok::Let)?;
        let (name, _) = self.ident()?;
        let mut params = Vec::new();
        while self.peek() == &Tok::LParen {
            self.bump();
            let (p, _) = self.ident()?;
            self.expect(Tok::Colon)?;
            let ty = self.param_type()?;
            self.expect(Tok::RParen)?;
            params.push((p, ty));
        }
        let ret = if self.eat(&Tok::Colon) {
            Some(self.rtype()?)
        } else {
            None
        };
        self.expect(Tok::Assign)?;
        let body = self.expr()?;
        Ok(Def {
            name,
            params,
            ret,
            body,
            span,
        })
    }

    /// Parameter annotation: a refinement type, or a bare base type meaning
    /// `{b | true}`.
    fn param_type(&mut self) -> PResult<RType> {
        if let Tok::Ident(x) = self.peek() {
            if matches!(x.as_str(), "unit" | "bool" | "int") {
                let b = self.base()?;
                return Ok(RType::over(b, Qualifier::True));
            }
        }
        self.rtype()
    }

    // ----- expressions -----

    pub fn expr(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek() {
            Tok::Let => {
                self.bump();
                let (pat, mut ann) = self.pattern()?;
                if self.eat(&Tok::Colon) {
                    ann = Some(self.rtype()?);
                }
                self.expect(Tok::Assign)?;
                let bound = self.expr()?;
                self.expect(Tok::In)?;
                let body = self.expr()?;
                Ok(Expr::new(
                    ExprKind::Let {
                        pat,
                        ann,
                        bound: Box::new(bound),
                        body: Box::new(body),
                    },
                    span,
                ))
            }
            Tok::LetStar => {
                self.bump();
                let (pat, ann) = self.pattern()?;
                if ann.is_some() {
                    return Err(ParseError {
                        span,
                        message: "`let*` patterns take no type".into(),
                        expected: vec![],
                    });
                }
                self.expect(Tok::Assign)?;
                let bound = self.expr()?;
                self.expect(Tok::In)?;
                let body = self.expr()?;
                Ok(Expr::new(
                    ExprKind::Bind {
                        pat,
                        bound: Box::new(bound),
                        body: Box::new(body),
                    },
                    span,
                ))
            }
            Tok::If => {
                self.bump();
                let cond = self.expr()?;
                self.expect(Tok::Then)?;
                let then_branch = self.expr()?;
                self.expect(Tok::Else)?;
                let else_branch = self.expr()?;
                Ok(Expr::new(
                    ExprKind::If {
                        cond: Box::new(cond),
                        then_branch: Box::new(then_branch),
                        else_branch: Box::new(else_branch),
                    },
                    span,
                ))
            }
            Tok::Fun => {
                self.bump();
                self.expect(Tok::LParen)?;
                let (param, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let param_ty = self.param_type()?;
                self.expect(Tok::RParen)?;
                let ret = if self.eat(&Tok::Colon) {
                    Some(self.rtype_no_arrow_tail()?)
                } else {
                    None
                };
                self.expect(Tok::Arrow)?;
                let body = self.expr()?;
                Ok(Expr::new(
                    ExprKind::Fun {
                        param,
                        param_ty,
                        ret,
                        body: Box::new(body),
                    },
                    span,
                ))
            }
            _ => self.or_expr(),
        }
    }

    /// The result annotation of `fun` is followed by `->`, so an arrow type
    /// there must be parenthesized: `fun (x: τ) : (τ1 -> τ2) -> e`.
    fn rtype_no_arrow_tail(&mut self) -> PResult<RType> {
        if self.peek() == &Tok::LParen {
            self.bump();
            let t = self.rtype()?;
            self.expect(Tok::RParen)?;
            return Ok(t);
        }
        let span = self.span();
        match self.peek() {
            Tok::LBracket => {
                let (b, q) = self.bracketed(Tok::LBracket, Tok::RBracket)?;
                Ok(RType::cover(b, q))
            }
            Tok::LBrace => {
                let (b, q) = self.bracketed(Tok::LBrace, Tok::RBrace)?;
                Ok(RType::over(b, q))
            }
            _ => Err(ParseError {
                span,
                message: "expected a base refinement type".into(),
                expected: vec!["`[`".into(), "`{`".into(), "`(`".into()],
            }),
        }
    }

    fn pattern(&mut self) -> PResult<(Pattern, Option<RType>)> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.bump();
                Ok((Pattern::Var(x), None))
            }
            Tok::LParen => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    return Ok((Pattern::Unit, None));
                }
                let (a, _) = self.ident()?;
                if self.eat(&Tok::Comma) {
                    let (b, _) = self.ident()?;
                    self.expect(Tok::RParen)?;
                    return Ok((Pattern::Pair(a, b), None));
                }
                self.expect(Tok::Colon)?;
                // `(x: int)` only restates the base type; a refinement type
                // is an ascription.
                let ann = if let Tok::Ident(b) = self.peek() {
                    if matches!(b.as_str(), "unit" | "bool" | "int") {
                        self.base()?;
                        None
                    } else {
                        Some(self.rtype()?)
                    }
                } else {
                    Some(self.rtype()?)
                };
                self.expect(Tok::RParen)?;
                Ok((Pattern::Var(a), ann))
            }
            _ => Err(self.unexpected(&["identifier", "`(`"])),
        }
    }

    fn binop(name: &str, a: Expr, b: Expr, span: Span) -> Expr {
        let head = Expr::new(ExprKind::Var(name.into()), span);
        let partial = Expr::new(ExprKind::App(Box::new(head), Box::new(a)), span);
        Expr::new(ExprKind::App(Box::new(partial), Box::new(b)), span)
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.peek() == &Tok::OrOr {
            let sp = self.span();
            self.bump();
            let rhs = self.and_expr()?;
            lhs = Self::binop("||", lhs, rhs, sp);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.cmp_expr()?;
        while self.peek() == &Tok::AndAnd {
            let sp = self.span();
            self.bump();
            let rhs = self.cmp_expr()?;
            lhs = Self::binop("&&", lhs, rhs, sp);
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::EqEq => "==",
            Tok::Le => "<=",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            _ => return Ok(lhs),
        };
        let sp = self.span();
        self.bump();
        let rhs = self.add_expr()?;
        Ok(Self::binop(op, lhs, rhs, sp))
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.app_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => "+",
                Tok::Minus => "-",
                _ => return Ok(lhs),
            };
            let sp = self.span();
            self.bump();
            let rhs = self.app_expr()?;
            lhs = Self::binop(op, lhs, rhs, sp);
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Int(_) | Tok::Ident(_) | Tok::True | Tok::False | Tok::LParen
        )
    }

    fn app_expr(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek() {
            Tok::Assume => {
                self.bump();
                let (base, qual) = self.bracketed(Tok::LBracket, Tok::RBracket)?;
                return Ok(Expr::new(ExprKind::Assume { base, qual }, span));
            }
            Tok::Assert => {
                self.bump();
                let (base, qual) = self.bracketed(Tok::LBrace, Tok::RBrace)?;
                let value = self.atom()?;
                return Ok(Expr::new(
                    ExprKind::Assert {
                        base,
                        qual,
                        value: Box::new(value),
                    },
                    span,
                ));
            }
            _ => {}
        }
        let mut head = self.atom()?;
        while self.starts_atom() {
            let arg = self.atom()?;
            head = Expr::new(ExprKind::App(Box::new(head), Box::new(arg)), span);
        }
        Ok(head)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                ExprKind::Int(n)
            }
            Tok::Minus if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.bump();
                let Tok::Int(n) = self.bump().tok else {
                    unreachable!()
                };
                ExprKind::Int(-n)
            }
            Tok::True => {
                self.bump();
                ExprKind::Bool(true)
            }
            Tok::False => {
                self.bump();
                ExprKind::Bool(false)
            }
            Tok::Ident(x) => {
                self.bump();
                ExprKind::Var(x)
            }
            Tok::LParen => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    ExprKind::Unit
                } else if let Some(op) = self.section() {
                    op
                } else {
                    let a = self.expr()?;
                    if self.eat(&Tok::Comma) {
                        let b = self.expr()?;
                        self.expect(Tok::RParen)?;
                        ExprKind::Pair(Box::new(a), Box::new(b))
                    } else {
                        self.expect(Tok::RParen)?;
                        return Ok(a);
                    }
                }
            }
            _ => {
                return Err(self.unexpected(&["integer", "identifier", "`true`", "`false`", "`(`"]))
            }
        };
        Ok(Expr::new(kind, span))
    }

    /// `(op)` after the opening parenthesis has been consumed.
    fn section(&mut self) -> Option<ExprKind> {
        let name = match self.peek() {
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::EqEq => "==",
            Tok::Le => "<=",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            _ => return None,
        };
        if self.peek_at(1) != &Tok::RParen {
            return None;
        }
        self.bump();
        self.bump();
        Some(ExprKind::Var(name.into()))
    }

    // ----- types -----

    fn base(&mut self) -> PResult<BaseType> {
        let left = match self.peek().clone() {
            Tok::Ident(x) if x == "unit" => BaseType::Unit,
            Tok::Ident(x) if x == "bool" => BaseType::Bool,
            Tok::Ident(x) if x == "int" => BaseType::Int,
            Tok::LParen => {
                self.bump();
                let b = self.base()?;
                self.expect(Tok::RParen)?;
                if self.eat(&Tok::Star) {
                    return Ok(BaseType::prod(b, self.base()?));
                }
                return Ok(b);
            }
            _ => return Err(self.unexpected(&["`unit`", "`bool`", "`int`", "`(`"])),
        };
        self.bump();
        if self.eat(&Tok::Star) {
            Ok(BaseType::prod(left, self.base()?))
        } else {
            Ok(left)
        }
    }

    fn bracketed(&mut self, open: Tok, close: Tok) -> PResult<(BaseType, Qualifier)> {
        self.expect(open)?;
        let b = self.base()?;
        self.expect(Tok::Bar)?;
        let q = self.qual()?;
        self.expect(close)?;
        Ok((b, q))
    }

    pub fn rtype(&mut self) -> PResult<RType> {
        let span = self.span();
        match self.peek().clone() {
            Tok::LBracket => {
                let (b, q) = self.bracketed(Tok::LBracket, Tok::RBracket)?;
                if self.eat(&Tok::Arrow) {
                    let cod = self.rtype()?;
                    Ok(RType::under_arrow(b, q, cod))
                } else {
                    Ok(RType::cover(b, q))
                }
            }
            Tok::LBrace => {
                let (b, q) = self.bracketed(Tok::LBrace, Tok::RBrace)?;
                if self.eat(&Tok::Arrow) {
                    let cod = self.rtype()?;
                    Ok(RType::over_arrow("_", b, q, cod))
                } else {
                    Ok(RType::over(b, q))
                }
            }
            Tok::Ident(x) => {
                self.bump();
                self.expect(Tok::Colon)?;
                let (b, q) = self.bracketed(Tok::LBrace, Tok::RBrace)?;
                self.expect(Tok::Arrow)?;
                let cod = self.rtype()?;
                Ok(RType::over_arrow(x, b, q, cod))
            }
            Tok::LParen => {
                self.bump();
                let (f, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let dom = self.rtype()?;
                if !dom.is_arrow() {
                    return Err(ParseError {
                        span,
                        message: "a named parenthesized parameter must have an arrow type".into(),
                        expected: vec![],
                    });
                }
                self.expect(Tok::RParen)?;
                self.expect(Tok::Arrow)?;
                let cod = self.rtype()?;
                Ok(RType::ho_arrow(f, dom, cod))
            }
            _ => Err(self.unexpected(&["`[`", "`{`", "identifier", "`(`"])),
        }
    }

    // ----- qualifiers -----

    pub fn qual(&mut self) -> PResult<Qualifier> {
        let lhs = self.q_iff()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.qual()?;
            return Ok(Qualifier::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn q_iff(&mut self) -> PResult<Qualifier> {
        let mut lhs = self.q_or()?;
        while self.eat(&Tok::Iff) {
            let rhs = self.q_or()?;
            lhs = Qualifier::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn q_or(&mut self) -> PResult<Qualifier> {
        let mut lhs = self.q_and()?;
        while self.eat(&Tok::OrOr) {
            let rhs = self.q_and()?;
            lhs = Qualifier::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn q_and(&mut self) -> PResult<Qualifier> {
        let mut lhs = self.q_cmp()?;
        while self.eat(&Tok::AndAnd) {
            let rhs = self.q_cmp()?;
            lhs = Qualifier::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn cmp_op(&self) -> Option<Tok> {
        match self.peek() {
            t @ (Tok::EqEq | Tok::Assign | Tok::Le | Tok::Lt | Tok::Gt | Tok::Ge) => {
                Some(t.clone())
            }
            _ => None,
        }
    }

    fn make_cmp(op: &Tok, a: Qualifier, b: Qualifier) -> Qualifier {
        match op {
            Tok::EqEq | Tok::Assign => Qualifier::eq(a, b),
            Tok::Le => Qualifier::le(a, b),
            Tok::Lt => Qualifier::lt(a, b),
            Tok::Gt => Qualifier::lt(b, a),
            _ => Qualifier::le(b, a),
        }
    }

    /// Comparisons chain: `1 <= v <= 2` means `1 <= v && v <= 2`.
    fn q_cmp(&mut self) -> PResult<Qualifier> {
        let first = self.q_add()?;
        let Some(op) = self.cmp_op() else {
            return Ok(first);
        };
        self.bump();
        let mut prev = self.q_add()?;
        let mut acc = Self::make_cmp(&op, first, prev.clone());
        while let Some(op) = self.cmp_op() {
            self.bump();
            let next = self.q_add()?;
            acc = Qualifier::And(
                Box::new(acc),
                Box::new(Self::make_cmp(&op, prev, next.clone())),
            );
            prev = next;
        }
        Ok(acc)
    }

    fn q_add(&mut self) -> PResult<Qualifier> {
        let mut lhs = self.q_unary()?;
        loop {
            if self.eat(&Tok::Plus) {
                let rhs = self.q_unary()?;
                lhs = Qualifier::add(lhs, rhs);
            } else if self.peek() == &Tok::Minus {
                self.bump();
                let rhs = self.q_unary()?;
                lhs = Qualifier::sub(lhs, rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn q_unary(&mut self) -> PResult<Qualifier> {
        if self.eat(&Tok::Bang) {
            let inner = self.q_unary()?;
            return Ok(Qualifier::Not(Box::new(inner)));
        }
        if self.peek() == &Tok::Minus {
            if let Tok::Int(n) = self.peek_at(1).clone() {
                self.bump();
                self.bump();
                return Ok(Qualifier::Int(-n));
            }
        }
        self.q_atom()
    }

    fn q_atom(&mut self) -> PResult<Qualifier> {
        let span = self.span();
        match self.peek().clone() {
            Tok::True => {
                self.bump();
                Ok(Qualifier::True)
            }
            Tok::False => {
                self.bump();
                Ok(Qualifier::False)
            }
            Tok::Nu => {
                self.bump();
                Ok(Qualifier::Nu)
            }
            Tok::Int(n) => {
                self.bump();
                Ok(Qualifier::Int(n))
            }
            Tok::LParen => {
                self.bump();
                let q = self.qual()?;
                self.expect(Tok::RParen)?;
                Ok(q)
            }
            Tok::Ident(x) => {
                self.bump();
                if self.peek() == &Tok::LParen {
                    let wrap: fn(Qualifier) -> Qualifier = match x.as_str() {
                        "even" => Qualifier::even,
                        "odd" => Qualifier::odd,
                        "fst" => Qualifier::fst,
                        "snd" => Qualifier::snd,
                        _ => {
                            return Err(ParseError {
                                span,
                                message: format!("`{x}` is not a qualifier function"),
                                expected: vec![
                                    "`even`".into(),
                                    "`odd`".into(),
                                    "`fst`".into(),
                                    "`snd`".into(),
                                ],
                            })
                        }
                    };
                    self.bump();
                    let arg = self.qual()?;
                    self.expect(Tok::RParen)?;
                    return Ok(wrap(arg));
                }
                if x == "v" {
                    Ok(Qualifier::Nu)
                } else {
                    Ok(Qualifier::Var(x))
                }
            }
            _ => Err(self.unexpected(&["qualifier"])),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Qualifier as Q;

    #[test]
    fn let_gen_program() {
        let p = parse_program("check let x = int_gen () in x : [int | true]").unwrap();
        assert!(p.defs.is_empty());
        assert_eq!(p.goal, RType::cover(BaseType::Int, Q::True));
        match &p.main.kind {
            ExprKind::Let {
                pat: Pattern::Var(x),
                bound,
                ..
            } => {
                assert_eq!(x, "x");
                assert!(matches!(bound.kind, ExprKind::App(..)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_program_is_an_error() {
        let e = parse_program("  (* nothing *) ").unwrap_err();
        assert_eq!(e.message, "empty program");
    }

    #[test]
    fn bind_node_is_kept() {
        let e = parse_expr("let* u = foo 3 in (true, x)").unwrap();
        assert!(matches!(e.kind, ExprKind::Bind { .. }));
    }

    #[test]
    fn duplicate_definitions_rejected() {
        let e = parse_program("let f = 1 let f = 2 check f : [int | true]").unwrap_err();
        assert!(e.message.contains("duplicate"));
    }

    #[test]
    fn syntax_errors_carry_position_and_expected_set() {
        let e = parse_program("check let x = in x : [int | true]").unwrap_err();
        assert_eq!(e.span, Span { line: 1, col: 15 });
        assert!(!e.expected.is_empty());
    }

    #[test]
    fn qualifier_precedence() {
        let q = parse_qualifier("!fst(v) && odd(snd(v)) || fst(v) && odd(snd(v))").unwrap();
        let side = |neg: bool| {
            let f = Q::fst(Q::Nu);
            Q::And(
                Box::new(if neg { Q::Not(Box::new(f)) } else { f }),
                Box::new(Q::odd(Q::snd(Q::Nu))),
            )
        };
        assert_eq!(q, Q::Or(Box::new(side(true)), Box::new(side(false))));
    }

    #[test]
    fn chained_comparison_and_sugar() {
        let q = parse_qualifier("1 <= v <= 2").unwrap();
        assert_eq!(
            q,
            Q::And(
                Box::new(Q::le(Q::Int(1), Q::Nu)),
                Box::new(Q::le(Q::Nu, Q::Int(2)))
            )
        );
        assert_eq!(parse_qualifier("v > x").unwrap(), Q::lt(Q::var("x"), Q::Nu));
        assert_eq!(parse_qualifier("v = -3").unwrap(), Q::eq(Q::Nu, Q::Int(-3)));
    }

    #[test]
    fn arrow_types() {
        let t =
            parse_rtype("x:{int | true} -> [bool * int | fst(v) && odd(x) || !fst(v)]").unwrap();
        assert!(matches!(t, RType::OverArrow { .. }));
        let u = parse_rtype("[int | true] -> [int | true] -> [int | v == 11] -> [int | v == 42]")
            .unwrap();
        assert_eq!(u.arity(), 3);
        let h = parse_rtype("(f: [int | true] -> [int | true]) -> [int | true]").unwrap();
        assert!(matches!(h, RType::HoArrow { .. }));
        assert!(parse_rtype("(f: [int | true]) -> [int | true]").is_err());
    }

    #[test]
    fn display_reparses() {
        for src in [
            "x:{int | true} -> [bool * int | !fst(v) && snd(v) == x || fst(v) && odd(x) && snd(v) == x]",
            "(g: {int | v < 0} -> [int | true]) -> [int | 1 - (2 - v) <= 3]",
            "[(int * int) * bool | fst(fst(v)) == 1]",
        ] {
            let t = parse_rtype(src).unwrap();
            assert_eq!(parse_rtype(&t.to_string()).unwrap(), t);
        }
    }

    #[test]
    fn operators_and_sections() {
        let e = parse_expr("f (g y) + (+) 1 2 - (-3)").unwrap();
        let mut names = BTreeSet::new();
        e.collect_names(&mut names);
        assert!(names.contains("+") && names.contains("-") && names.contains("f"));
    }

    #[test]
    fn defs_with_params_and_result() {
        let p = parse_program(
            "let imp1 (x: [int | true]) : [int | 1 <= v && v <= 2] = if x > 0 then 1 else 2\n\
             check imp1 : [int | true] -> [int | 1 <= v && v <= 2]",
        )
        .unwrap();
        assert_eq!(p.defs[0].params.len(), 1);
        assert!(p.defs[0].ret.is_some());
    }
}
