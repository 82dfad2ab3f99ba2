//! Elaboration of desugared surface programs into A-normal form.
//!
//! Every binder gets a program-unique name: the surface name if it is still
//! free, otherwise `name_N`. Temporaries are `_tN`. Names of builtins are
//! reserved so user binders never shadow them in the core term. The output
//! is a deterministic function of the input.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::rc::Rc;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::builtins::Builtin;
use crate::core_term::{Const, CoreTerm, Lambda, Value};
use crate::desugar::{desugar, desugar_expr};
use crate::qualifier::Qualifier;
use crate::rtype::RType;
use crate::syntax::{BaseType, Def, Expr, ExprKind, Pattern, Span, SurfaceProgram};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ElabError {
    #[error("{span}: unbound identifier `{name}`")]
    Unbound { name: String, span: Span },
    #[error("{span}: unbound name `{name}` in a type annotation")]
    UnboundInType { name: String, span: Span },
    #[error("{span}: builtin `{name}` takes {arity} argument(s), given {given}")]
    Arity {
        name: String,
        arity: usize,
        given: usize,
        span: Span,
    },
    #[error("{span}: {what}")]
    Unsupported { what: String, span: Span },
}

/// An elaborated program: the closed core term and its goal type, plus the
/// source position of each user binder.
#[derive(Clone, Debug)]
pub struct Elaborated {
    pub term: CoreTerm,
    pub goal: RType,
    pub spans: BTreeMap<String, Span>,
}

/// Desugar and elaborate a whole program.
pub fn elaborate_program(p: &SurfaceProgram) -> Result<Elaborated, ElabError> {
    let p = desugar(p);
    let mut cx = Cx::new();
    let goal = cx.rename_type(&p.goal, p.check_span)?;
    let term = cx.defs(&p.defs, &p.main)?;
    Ok(Elaborated {
        term,
        goal,
        spans: cx.spans,
    })
}

/// `elaborate_program` without the goal.
pub fn anf_normalize(p: &SurfaceProgram) -> Result<CoreTerm, ElabError> {
    elaborate_program(p).map(|e| e.term)
}

/// Desugar and elaborate a closed expression.
pub fn elaborate_expr(e: &Expr) -> Result<CoreTerm, ElabError> {
    Cx::new().term(&desugar_expr(e))
}

enum Frame {
    App {
        bind: String,
        func: Value,
        arg: Value,
    },
    Term {
        bind: String,
        bound: CoreTerm,
    },
    Assume {
        bind: String,
        base: BaseType,
        qual: Qualifier,
    },
}

fn wrap(frames: Vec<Frame>, mut body: CoreTerm) -> CoreTerm {
    for f in frames.into_iter().rev() {
        let b = Box::new(body);
        body = match f {
            Frame::App { bind, func, arg } => CoreTerm::LetApp {
                bind,
                func,
                arg,
                body: b,
            },
            Frame::Term { bind, bound } => CoreTerm::LetTerm {
                bind,
                ascription: None,
                bound: Box::new(bound),
                body: b,
            },
            Frame::Assume { bind, base, qual } => CoreTerm::LetAssume {
                bind,
                base,
                qual,
                body: b,
            },
        };
    }
    body
}

struct Cx {
    used: BTreeSet<String>,
    tmp: usize,
    /// Surface name to core name, innermost last.
    scope: Vec<(String, String)>,
    spans: BTreeMap<String, Span>,
}

impl Cx {
    fn new() -> Self {
        Cx {
            used: Builtin::ALL.iter().map(|b| b.name().to_string()).collect(),
            tmp: 0,
            scope: Vec::new(),
            spans: BTreeMap::new(),
        }
    }

    fn fresh(&mut self, name: &str, span: Span) -> String {
        let mut cand = String::from(name);
        let mut n = 0;
        while self.used.contains(&cand) {
            n += 1;
            cand = format!("{name}_{n}");
        }
        self.used.insert(cand.clone());
        self.spans.insert(cand.clone(), span);
        cand
    }

    fn temp(&mut self) -> String {
        loop {
            self.tmp += 1;
            let cand = format!("_t{}", self.tmp);
            if self.used.insert(cand.clone()) {
                return cand;
            }
        }
    }

    fn lookup(&self, name: &str) -> Option<&String> {
        self.scope
            .iter()
            .rev()
            .find(|(s, _)| s == name)
            .map(|(_, c)| c)
    }

    fn resolve(&self, name: &str, span: Span) -> Result<Value, ElabError> {
        if let Some(c) = self.lookup(name) {
            return Ok(Value::Var(c.clone()));
        }
        if Builtin::from_name(name).is_some() {
            return Ok(Value::Var(name.into()));
        }
        Err(ElabError::Unbound {
            name: name.into(),
            span,
        })
    }

    fn with_scope<T>(&mut self, surface: &str, core: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        self.scope.push((surface.into(), core.into()));
        let r = f(self);
        self.scope.pop();
        r
    }

    fn rename_qual(
        &self,
        q: &Qualifier,
        bound: &BTreeMap<String, String>,
        span: Span,
    ) -> Result<Qualifier, ElabError> {
        let mut map = BTreeMap::new();
        for x in q.free_vars() {
            let core = bound.get(&x).or_else(|| self.lookup(&x)).ok_or_else(|| {
                ElabError::UnboundInType {
                    name: x.clone(),
                    span,
                }
            })?;
            map.insert(x, core.clone());
        }
        Ok(crate::core_term::rename_qual(q, &map))
    }

    /// Resolve qualifier names against the current scope and give every
    /// arrow parameter a fresh name.
    fn rename_type(&mut self, t: &RType, span: Span) -> Result<RType, ElabError> {
        let mut params = BTreeMap::new();
        self.rename_type_in(t, &mut params, span)
    }

    fn rename_type_in(
        &mut self,
        t: &RType,
        params: &mut BTreeMap<String, String>,
        span: Span,
    ) -> Result<RType, ElabError> {
        Ok(match t {
            RType::Over { base, qual } => {
                RType::over(base.clone(), self.rename_qual(qual, params, span)?)
            }
            RType::Cover { base, qual } => {
                RType::cover(base.clone(), self.rename_qual(qual, params, span)?)
            }
            RType::UnderArrow { base, qual, cod } => RType::under_arrow(
                base.clone(),
                self.rename_qual(qual, params, span)?,
                self.rename_type_in(cod, params, span)?,
            ),
            RType::OverArrow {
                param,
                base,
                qual,
                cod,
            } => {
                let q = self.rename_qual(qual, params, span)?;
                let p = if param == "_" {
                    self.temp()
                } else {
                    self.fresh(param, span)
                };
                let saved = params.insert(param.clone(), p.clone());
                let c = self.rename_type_in(cod, params, span);
                restore(params, param, saved);
                RType::over_arrow(p, base.clone(), q, c?)
            }
            RType::HoArrow { param, dom, cod } => {
                let d = self.rename_type_in(dom, params, span)?;
                let p = self.fresh(param, span);
                let saved = params.insert(param.clone(), p.clone());
                let c = self.rename_type_in(cod, params, span);
                restore(params, param, saved);
                RType::ho_arrow(p, d, c?)
            }
        })
    }

    fn defs(&mut self, defs: &[Def], main: &Expr) -> Result<CoreTerm, ElabError> {
        let Some((d, rest)) = defs.split_first() else {
            return self.term(main);
        };
        let (bound, ascription) = if d.params.is_empty() {
            let asc = d
                .ret
                .as_ref()
                .map(|r| self.rename_type(r, d.span))
                .transpose()?;
            (self.term(&d.body)?, asc)
        } else {
            (
                CoreTerm::Val(Value::Lambda(Rc::new(self.curried(d)?))),
                None,
            )
        };
        let name = self.fresh(&d.name, d.span);
        let body = self.with_scope(&d.name, &name, |cx| cx.defs(rest, main))?;
        Ok(CoreTerm::LetTerm {
            bind: name,
            ascription,
            bound: Box::new(bound),
            body: Box::new(body),
        })
    }

    /// `let f (x1: τ1) ... (xn: τn) : τ = e` as nested lambdas. When a result
    /// type is given, each inner lambda is annotated with the arrow built
    /// from the remaining parameters.
    fn curried(&mut self, d: &Def) -> Result<Lambda, ElabError> {
        let mut params = Vec::new();
        for (x, t) in &d.params {
            let ty = self.rename_type(t, d.span)?;
            let core = self.fresh(x, d.span);
            self.scope.push((x.clone(), core.clone()));
            params.push((core, ty));
        }
        let ret = d
            .ret
            .as_ref()
            .map(|r| self.rename_type(r, d.span))
            .transpose();
        let body = ret.and_then(|ret| Ok((ret, self.term(&d.body)?)));
        self.scope.truncate(self.scope.len() - params.len());
        let (ret, body) = body?;

        let mut rets = Vec::with_capacity(params.len());
        let mut acc = ret;
        for (p, ty) in params.iter().rev() {
            rets.push(acc.clone());
            acc = match acc {
                None => None,
                Some(cod) => Some(match ty {
                    RType::Over { base, qual } => {
                        RType::over_arrow(p.clone(), base.clone(), qual.clone(), cod)
                    }
                    RType::Cover { base, qual } => {
                        if cod.free_vars().contains(p) {
                            return Err(ElabError::Unsupported {
                                what: format!("result type mentions coverage parameter `{p}`"),
                                span: d.span,
                            });
                        }
                        RType::under_arrow(base.clone(), qual.clone(), cod)
                    }
                    arrow => RType::ho_arrow(p.clone(), arrow.clone(), cod),
                }),
            };
        }
        rets.reverse();

        let mut inner: Option<Lambda> = None;
        for ((p, ty), ret) in params.into_iter().zip(rets).rev() {
            let body = match inner.take() {
                None => body.clone(),
                Some(l) => CoreTerm::Val(Value::Lambda(Rc::new(l))),
            };
            inner = Some(Lambda {
                param: p,
                param_ty: ty,
                ret,
                body,
            });
        }
        Ok(inner.expect("at least one parameter"))
    }

    fn term(&mut self, e: &Expr) -> Result<CoreTerm, ElabError> {
        match &e.kind {
            ExprKind::Let {
                pat,
                ann,
                bound,
                body,
            } => self.let_(e.span, pat, ann.as_ref(), bound, body),
            ExprKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let mut frames = Vec::new();
                let c = self.value(cond, &mut frames)?;
                let c = self.atomize(c, &mut frames);
                let t = self.term(then_branch)?;
                let f = self.term(else_branch)?;
                Ok(wrap(
                    frames,
                    CoreTerm::If {
                        cond: c,
                        then_: Box::new(t),
                        else_: Box::new(f),
                    },
                ))
            }
            ExprKind::Assume { base, qual } => {
                let qual = self.rename_qual(qual, &BTreeMap::new(), e.span)?;
                let x = self.temp();
                Ok(CoreTerm::LetAssume {
                    bind: x.clone(),
                    base: base.clone(),
                    qual,
                    body: Box::new(CoreTerm::Val(Value::Var(x))),
                })
            }
            ExprKind::Assert { base, qual, value } => {
                let qual = self.rename_qual(qual, &BTreeMap::new(), e.span)?;
                let mut frames = Vec::new();
                let v = self.value(value, &mut frames)?;
                Ok(wrap(
                    frames,
                    CoreTerm::Assert {
                        base: base.clone(),
                        qual,
                        value: v,
                    },
                ))
            }
            ExprKind::Bind { .. } => Err(ElabError::Unsupported {
                what: "monadic bind must be desugared before elaboration".into(),
                span: e.span,
            }),
            _ => {
                let mut frames = Vec::new();
                let v = self.value(e, &mut frames)?;
                Ok(wrap(frames, CoreTerm::Val(v)))
            }
        }
    }

    fn let_(
        &mut self,
        span: Span,
        pat: &Pattern,
        ann: Option<&RType>,
        bound: &Expr,
        body: &Expr,
    ) -> Result<CoreTerm, ElabError> {
        match pat {
            Pattern::Pair(a, b) => {
                if ann.is_some() {
                    return Err(ElabError::Unsupported {
                        what: "type annotation on a pair pattern".into(),
                        span,
                    });
                }
                let mut frames = Vec::new();
                let v = self.value(bound, &mut frames)?;
                let a2 = self.fresh(a, span);
                let b2 = self.fresh(b, span);
                self.scope.push((a.clone(), a2.clone()));
                self.scope.push((b.clone(), b2.clone()));
                let k = self.term(body);
                self.scope.truncate(self.scope.len() - 2);
                Ok(wrap(
                    frames,
                    CoreTerm::LetPair {
                        fst: a2,
                        snd: b2,
                        scrutinee: v,
                        body: Box::new(k?),
                    },
                ))
            }
            Pattern::Var(_) | Pattern::Unit => {
                let surface = match pat {
                    Pattern::Var(x) => Some(x.as_str()),
                    _ => None,
                };
                let ann = ann.map(|t| self.rename_type(t, span)).transpose()?;
                let compound = matches!(
                    bound.kind,
                    ExprKind::Let { .. }
                        | ExprKind::If { .. }
                        | ExprKind::Assert { .. }
                        | ExprKind::Bind { .. }
                );
                let mut frames = Vec::new();
                // What to bind, decided before the binder enters scope.
                enum Rhs {
                    App(Value, Value),
                    Assume(BaseType, Qualifier),
                    Term(CoreTerm),
                }
                let rhs = if ann.is_some() || compound {
                    Rhs::Term(self.term(bound)?)
                } else {
                    match &bound.kind {
                        ExprKind::App(f, a) => {
                            self.check_arity(bound)?;
                            let fv = self.value(f, &mut frames)?;
                            let av = self.value(a, &mut frames)?;
                            Rhs::App(fv, av)
                        }
                        ExprKind::Assume { base, qual } => Rhs::Assume(
                            base.clone(),
                            self.rename_qual(qual, &BTreeMap::new(), bound.span)?,
                        ),
                        _ => Rhs::Term(CoreTerm::Val(self.value(bound, &mut frames)?)),
                    }
                };
                let x = match surface {
                    Some(s) => self.fresh(s, span),
                    None => self.temp(),
                };
                let k = match surface {
                    Some(s) => self.with_scope(s, &x, |cx| cx.term(body))?,
                    None => self.term(body)?,
                };
                let k = Box::new(k);
                let t = match rhs {
                    Rhs::App(func, arg) => CoreTerm::LetApp {
                        bind: x,
                        func,
                        arg,
                        body: k,
                    },
                    Rhs::Assume(base, qual) => CoreTerm::LetAssume {
                        bind: x,
                        base,
                        qual,
                        body: k,
                    },
                    Rhs::Term(bound) => CoreTerm::LetTerm {
                        bind: x,
                        ascription: ann,
                        bound: Box::new(bound),
                        body: k,
                    },
                };
                Ok(wrap(frames, t))
            }
        }
    }

    /// Reject a builtin applied to more arguments than it takes.
    fn check_arity(&self, e: &Expr) -> Result<(), ElabError> {
        let mut head = e;
        let mut given = 0;
        while let ExprKind::App(f, _) = &head.kind {
            given += 1;
            head = f;
        }
        if let ExprKind::Var(x) = &head.kind {
            if self.lookup(x).is_none() {
                if let Some(b) = Builtin::from_name(x) {
                    if given > b.arity() {
                        return Err(ElabError::Arity {
                            name: x.clone(),
                            arity: b.arity(),
                            given,
                            span: e.span,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Bind a non-atomic value to a temporary.
    fn atomize(&mut self, v: Value, frames: &mut Vec<Frame>) -> Value {
        if v.is_atom() {
            return v;
        }
        let t = self.temp();
        frames.push(Frame::Term {
            bind: t.clone(),
            bound: CoreTerm::Val(v),
        });
        Value::Var(t)
    }

    /// Elaborate `e` into a value, pushing the bindings it needs.
    fn value(&mut self, e: &Expr, frames: &mut Vec<Frame>) -> Result<Value, ElabError> {
        Ok(match &e.kind {
            ExprKind::Int(n) => Value::Const(Const::Int(*n)),
            ExprKind::Bool(b) => Value::Const(Const::Bool(*b)),
            ExprKind::Unit => Value::Const(Const::Unit),
            ExprKind::Var(x) => self.resolve(x, e.span)?,
            ExprKind::Pair(a, b) => {
                let va = self.value(a, frames)?;
                let va = self.atomize(va, frames);
                let vb = self.value(b, frames)?;
                let vb = self.atomize(vb, frames);
                Value::pair(va, vb)
            }
            ExprKind::App(f, a) => {
                self.check_arity(e)?;
                let fv = self.value(f, frames)?;
                let av = self.value(a, frames)?;
                let t = self.temp();
                frames.push(Frame::App {
                    bind: t.clone(),
                    func: fv,
                    arg: av,
                });
                Value::Var(t)
            }
            ExprKind::Assume { base, qual } => {
                let qual = self.rename_qual(qual, &BTreeMap::new(), e.span)?;
                let t = self.temp();
                frames.push(Frame::Assume {
                    bind: t.clone(),
                    base: base.clone(),
                    qual,
                });
                Value::Var(t)
            }
            ExprKind::Fun {
                param,
                param_ty,
                ret,
                body,
            } => {
                let ty = self.rename_type(param_ty, e.span)?;
                let p = self.fresh(param, e.span);
                let (ret, body) = self.with_scope(param, &p, |cx| {
                    let ret = ret
                        .as_ref()
                        .map(|r| cx.rename_type(r, e.span))
                        .transpose()?;
                    Ok::<_, ElabError>((ret, cx.term(body)?))
                })?;
                Value::Lambda(Rc::new(Lambda {
                    param: p,
                    param_ty: ty,
                    ret,
                    body,
                }))
            }
            ExprKind::Let { .. }
            | ExprKind::If { .. }
            | ExprKind::Assert { .. }
            | ExprKind::Bind { .. } => {
                let bound = self.term(e)?;
                let t = self.temp();
                frames.push(Frame::Term {
                    bind: t.clone(),
                    bound,
                });
                Value::Var(t)
            }
        })
    }
}

fn restore(params: &mut BTreeMap<String, String>, key: &str, saved: Option<String>) {
    match saved {
        Some(v) => {
            params.insert(key.into(), v);
        }
        None => {
            params.remove(key);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_term::alpha_eq;
    use crate::parser::{parse_expr, parse_program};

    fn elab(src: &str) -> CoreTerm {
        elaborate_expr(&parse_expr(src).unwrap()).unwrap()
    }

    #[test]
    fn condition_is_lifted() {
        let t = elaborate_expr(
            &parse_expr(
                "fun (x: {int | true}) -> fun (z: {int | true}) -> if is_even x then 42 else z",
            )
            .unwrap(),
        )
        .unwrap();
        let expected = elab("fun (x: {int | true}) -> fun (z: {int | true}) -> let c = is_even x in if c then 42 else z");
        assert!(alpha_eq(&t, &expected));
    }

    #[test]
    fn nested_application_is_sequenced() {
        let src = "fun (f: [int | true] -> [int | true]) -> fun (g: [int | true] -> [int | true]) -> fun (y: {int | true}) -> f (g y)";
        let expected = "fun (f: [int | true] -> [int | true]) -> fun (g: [int | true] -> [int | true]) -> fun (y: {int | true}) -> let t = g y in let r = f t in r";
        assert!(alpha_eq(&elab(src), &elab(expected)));
    }

    #[test]
    fn values_are_unchanged() {
        assert_eq!(elab("42"), CoreTerm::Val(Value::int(42)));
        assert_eq!(
            elab("(1, true)"),
            CoreTerm::Val(Value::pair(Value::int(1), Value::Const(Const::Bool(true))))
        );
    }

    #[test]
    fn binders_are_unique() {
        let t = elab("let x = 1 in let x = x + 1 in let (x, y) = (x, x) in x");
        let mut seen = BTreeSet::new();
        fn walk(t: &CoreTerm, seen: &mut BTreeSet<String>) {
            let mut add = |x: &String| assert!(seen.insert(x.clone()), "duplicate binder {x}");
            match t {
                CoreTerm::Val(_) | CoreTerm::Assert { .. } => {}
                CoreTerm::LetApp { bind, body, .. } | CoreTerm::LetAssume { bind, body, .. } => {
                    add(bind);
                    walk(body, seen);
                }
                CoreTerm::LetTerm {
                    bind, bound, body, ..
                } => {
                    add(bind);
                    walk(bound, seen);
                    walk(body, seen);
                }
                CoreTerm::LetPair { fst, snd, body, .. } => {
                    add(fst);
                    add(snd);
                    walk(body, seen);
                }
                CoreTerm::If { then_, else_, .. } => {
                    walk(then_, seen);
                    walk(else_, seen);
                }
            }
        }
        walk(&t, &mut seen);
        assert!(t.check_anf().is_ok());
    }

    #[test]
    fn errors() {
        assert!(matches!(
            elaborate_expr(&parse_expr("y + 1").unwrap()),
            Err(ElabError::Unbound { name, .. }) if name == "y"
        ));
        assert!(matches!(
            elaborate_expr(&parse_expr("is_even 1 2").unwrap()),
            Err(ElabError::Arity { given: 2, .. })
        ));
        assert!(matches!(
            elaborate_expr(&parse_expr("let x = assume [int | v = z] in x").unwrap()),
            Err(ElabError::UnboundInType { .. })
        ));
    }

    #[test]
    fn curried_definitions_get_arrow_annotations() {
        let p = parse_program(
            "let f (x: {int | true}) (y: [int | true]) : [int | v = x] = x\n\
             check f : x:{int | true} -> [int | true] -> [int | v = x]",
        )
        .unwrap();
        let e = elaborate_program(&p).unwrap();
        let CoreTerm::LetTerm { bound, .. } = &e.term else {
            panic!()
        };
        let CoreTerm::Val(Value::Lambda(l)) = &**bound else {
            panic!()
        };
        let ret = l.ret.as_ref().unwrap();
        assert!(matches!(ret, RType::UnderArrow { .. }));
        assert!(e.spans.contains_key("f"));
    }
}
