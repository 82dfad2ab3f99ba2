//! Surface syntax: base types and the parsed (pre-ANF) program tree.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::rtype::RType;

/// Erased base types. Products may nest.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BaseType {
    Unit,
    Bool,
    Int,
    Prod(Box<BaseType>, Box<BaseType>),
}

impl BaseType {
    pub fn prod(a: BaseType, b: BaseType) -> Self {
        BaseType::Prod(Box::new(a), Box::new(b))
    }
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseType::Unit => f.write_str("unit"),
            BaseType::Bool => f.write_str("bool"),
            BaseType::Int => f.write_str("int"),
            BaseType::Prod(a, b) => {
                // `*` associates to the right, so only a product on the left
                // needs parentheses.
                if matches!(**a, BaseType::Prod(..)) {
                    write!(f, "({a}) * {b}")
                } else {
                    write!(f, "{a} * {b}")
                }
            }
        }
    }
}

/// 1-based source position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    Var(String),
    Pair(String, String),
    Unit,
}

/// A surface expression. Equality ignores spans.
#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Int(i64),
    Bool(bool),
    Unit,
    Var(String),
    Pair(Box<Expr>, Box<Expr>),
    App(Box<Expr>, Box<Expr>),
    /// `let pat [: τ] = bound in body`
    Let {
        pat: Pattern,
        ann: Option<RType>,
        bound: Box<Expr>,
        body: Box<Expr>,
    },
    /// `let* pat = bound in body` (monadic bind, removed by desugaring)
    Bind {
        pat: Pattern,
        bound: Box<Expr>,
        body: Box<Expr>,
    },
    If {
        cond: Box<Expr>,
        then_branch: Box<Expr>,
        else_branch: Box<Expr>,
    },
    /// `assume [b | φ]`
    Assume {
        base: BaseType,
        qual: crate::Qualifier,
    },
    /// `assert {b | φ} v`
    Assert {
        base: BaseType,
        qual: crate::Qualifier,
        value: Box<Expr>,
    },
    /// `fun (x : τ) [: τr] -> e`
    Fun {
        param: String,
        param_ty: RType,
        ret: Option<RType>,
        body: Box<Expr>,
    },
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    /// Expression with a default span, for programmatic construction.
    pub fn synth(kind: ExprKind) -> Self {
        Expr {
            kind,
            span: Span::default(),
        }
    }

    pub fn contains_bind(&self) -> bool {
        match &self.kind {
            ExprKind::Bind { .. } => true,
            ExprKind::Int(_)
            | ExprKind::Bool(_)
            | ExprKind::Unit
            | ExprKind::Var(_)
            | ExprKind::Assume { .. } => false,
            ExprKind::Pair(a, b) | ExprKind::App(a, b) => a.contains_bind() || b.contains_bind(),
            ExprKind::Let { bound, body, .. } => bound.contains_bind() || body.contains_bind(),
            ExprKind::If {
                cond,
                then_branch,
                else_branch,
            } => cond.contains_bind() || then_branch.contains_bind() || else_branch.contains_bind(),
            ExprKind::Assert { value, .. } => value.contains_bind(),
            ExprKind::Fun { body, .. } => body.contains_bind(),
        }
    }

    /// Every identifier spelled anywhere in the expression, binders included.
    pub fn collect_names(&self, out: &mut alloc::collections::BTreeSet<String>) {
        let pat_names = |p: &Pattern, out: &mut alloc::collections::BTreeSet<String>| match p {
            Pattern::Var(x) => {
                out.insert(x.clone());
            }
            Pattern::Pair(a, b) => {
                out.insert(a.clone());
                out.insert(b.clone());
            }
            Pattern::Unit => {}
        };
        match &self.kind {
            ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Unit => {}
            ExprKind::Var(x) => {
                out.insert(x.clone());
            }
            ExprKind::Pair(a, b) | ExprKind::App(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            ExprKind::Let {
                pat, bound, body, ..
            }
            | ExprKind::Bind { pat, bound, body } => {
                pat_names(pat, out);
                bound.collect_names(out);
                body.collect_names(out);
            }
            ExprKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                cond.collect_names(out);
                then_branch.collect_names(out);
                else_branch.collect_names(out);
            }
            ExprKind::Assume { qual, .. } => out.extend(qual.free_vars()),
            ExprKind::Assert { qual, value, .. } => {
                out.extend(qual.free_vars());
                value.collect_names(out);
            }
            ExprKind::Fun { param, body, .. } => {
                out.insert(param.clone());
                body.collect_names(out);
            }
        }
    }
}

/// A top-level definition `let name (p1 : τ1) ... [: τ] = body`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Def {
    pub name: String,
    pub params: Vec<(String, RType)>,
    /// Result type when `params` is non-empty, otherwise an ascription on
    /// the whole definition.
    pub ret: Option<RType>,
    pub body: Expr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceProgram {
    pub defs: Vec<Def>,
    pub main: Expr,
    pub goal: RType,
    pub check_span: Span,
}

impl SurfaceProgram {
    pub fn contains_bind(&self) -> bool {
        self.main.contains_bind() || self.defs.iter().any(|d| d.body.contains_bind())
    }
}
