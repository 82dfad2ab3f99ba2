//! A-normal-form core terms, the input of the checker and the interpreter.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec::Vec;

use crate::qualifier::{Qualifier, SemanticValue};
use crate::rtype::RType;
use crate::syntax::BaseType;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Const {
    Unit,
    Bool(bool),
    Int(i64),
}

impl Const {
    pub fn base(&self) -> BaseType {
        match self {
            Const::Unit => BaseType::Unit,
            Const::Bool(_) => BaseType::Bool,
            Const::Int(_) => BaseType::Int,
        }
    }

    pub fn to_semantic(&self) -> SemanticValue {
        match self {
            Const::Unit => SemanticValue::Unit,
            Const::Bool(b) => SemanticValue::Bool(*b),
            Const::Int(n) => SemanticValue::Int(*n),
        }
    }

    /// The qualifier `ν = c`, or `true` at unit.
    pub fn exact_qual(&self) -> Qualifier {
        match self {
            Const::Unit => Qualifier::True,
            Const::Bool(b) => Qualifier::eq(
                Qualifier::Nu,
                if *b {
                    Qualifier::True
                } else {
                    Qualifier::False
                },
            ),
            Const::Int(n) => Qualifier::eq(Qualifier::Nu, Qualifier::Int(*n)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lambda {
    pub param: String,
    pub param_ty: RType,
    pub ret: Option<RType>,
    pub body: CoreTerm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Const(Const),
    Var(String),
    Lambda(Rc<Lambda>),
    /// Components are constants or variables.
    Pair(Box<Value>, Box<Value>),
}

impl Value {
    pub fn var(name: impl Into<String>) -> Self {
        Value::Var(name.into())
    }

    pub fn int(n: i64) -> Self {
        Value::Const(Const::Int(n))
    }

    pub fn pair(a: Value, b: Value) -> Self {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Value::Const(_) | Value::Var(_))
    }

    /// Qualifier term denoting a constant or variable, if one exists.
    pub fn as_term(&self) -> Option<Qualifier> {
        match self {
            Value::Var(x) => Some(Qualifier::var(x.clone())),
            Value::Const(c) => c.to_semantic().as_term(),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoreTerm {
    Val(Value),
    /// `let bind = func arg in body`
    LetApp {
        bind: String,
        func: Value,
        arg: Value,
        body: Box<CoreTerm>,
    },
    /// `let bind [: τ] = bound in body`
    LetTerm {
        bind: String,
        ascription: Option<RType>,
        bound: Box<CoreTerm>,
        body: Box<CoreTerm>,
    },
    /// `let (fst, snd) = scrutinee in body`
    LetPair {
        fst: String,
        snd: String,
        scrutinee: Value,
        body: Box<CoreTerm>,
    },
    If {
        cond: Value,
        then_: Box<CoreTerm>,
        else_: Box<CoreTerm>,
    },
    /// `let bind = assume [base | qual] in body`
    LetAssume {
        bind: String,
        base: BaseType,
        qual: Qualifier,
        body: Box<CoreTerm>,
    },
    /// `assert {base | qual} value`
    Assert {
        base: BaseType,
        qual: Qualifier,
        value: Value,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnfViolation(pub String);

impl CoreTerm {
    pub fn var(name: impl Into<String>) -> Self {
        CoreTerm::Val(Value::var(name))
    }

    /// Free term variables (qualifier references included).
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        free_term(self, &mut Vec::new(), &mut out);
        out
    }

    /// Largest absolute integer literal in terms, qualifiers and annotations.
    pub fn max_literal(&self) -> Option<i64> {
        fn val(v: &Value) -> Option<i64> {
            match v {
                Value::Const(Const::Int(n)) => Some(n.checked_abs().unwrap_or(i64::MAX)),
                Value::Const(_) | Value::Var(_) => None,
                Value::Pair(a, b) => val(a).max(val(b)),
                Value::Lambda(l) => l
                    .param_ty
                    .max_literal()
                    .max(l.ret.as_ref().and_then(|r| r.max_literal()))
                    .max(l.body.max_literal()),
            }
        }
        match self {
            CoreTerm::Val(v) => val(v),
            CoreTerm::LetApp {
                func, arg, body, ..
            } => val(func).max(val(arg)).max(body.max_literal()),
            CoreTerm::LetTerm {
                ascription,
                bound,
                body,
                ..
            } => ascription
                .as_ref()
                .and_then(|t| t.max_literal())
                .max(bound.max_literal())
                .max(body.max_literal()),
            CoreTerm::LetPair {
                scrutinee, body, ..
            } => val(scrutinee).max(body.max_literal()),
            CoreTerm::If { cond, then_, else_ } => {
                val(cond).max(then_.max_literal()).max(else_.max_literal())
            }
            CoreTerm::LetAssume { qual, body, .. } => qual.max_literal().max(body.max_literal()),
            CoreTerm::Assert { qual, value, .. } => qual.max_literal().max(val(value)),
        }
    }

    /// Structural ANF check: pair components are atoms and every bound
    /// name is distinct.
    pub fn check_anf(&self) -> Result<(), AnfViolation> {
        let mut seen = BTreeSet::new();
        anf_term(self, &mut seen)
    }

    /// Closed lambdas occurring anywhere in the term.
    pub fn lambdas(&self) -> Vec<Rc<Lambda>> {
        let mut out = Vec::new();
        collect_lambdas(self, &mut out);
        out
    }
}

fn free_value(v: &Value, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match v {
        Value::Const(_) => {}
        Value::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Value::Pair(a, b) => {
            free_value(a, bound, out);
            free_value(b, bound, out);
        }
        Value::Lambda(l) => {
            free_type(&l.param_ty, bound, out);
            bound.push(l.param.clone());
            if let Some(r) = &l.ret {
                free_type(r, bound, out);
            }
            free_term(&l.body, bound, out);
            bound.pop();
        }
    }
}

fn free_type(t: &RType, bound: &[String], out: &mut BTreeSet<String>) {
    for x in t.free_vars() {
        if !bound.contains(&x) {
            out.insert(x);
        }
    }
}

fn free_qual(q: &Qualifier, bound: &[String], out: &mut BTreeSet<String>) {
    for x in q.free_vars() {
        if !bound.contains(&x) {
            out.insert(x);
        }
    }
}

fn free_term(t: &CoreTerm, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match t {
        CoreTerm::Val(v) => free_value(v, bound, out),
        CoreTerm::LetApp {
            bind,
            func,
            arg,
            body,
        } => {
            free_value(func, bound, out);
            free_value(arg, bound, out);
            bound.push(bind.clone());
            free_term(body, bound, out);
            bound.pop();
        }
        CoreTerm::LetTerm {
            bind,
            ascription,
            bound: b,
            body,
        } => {
            if let Some(a) = ascription {
                free_type(a, bound, out);
            }
            free_term(b, bound, out);
            bound.push(bind.clone());
            free_term(body, bound, out);
            bound.pop();
        }
        CoreTerm::LetPair {
            fst,
            snd,
            scrutinee,
            body,
        } => {
            free_value(scrutinee, bound, out);
            bound.push(fst.clone());
            bound.push(snd.clone());
            free_term(body, bound, out);
            bound.pop();
            bound.pop();
        }
        CoreTerm::If { cond, then_, else_ } => {
            free_value(cond, bound, out);
            free_term(then_, bound, out);
            free_term(else_, bound, out);
        }
        CoreTerm::LetAssume {
            bind, qual, body, ..
        } => {
            free_qual(qual, bound, out);
            bound.push(bind.clone());
            free_term(body, bound, out);
            bound.pop();
        }
        CoreTerm::Assert { qual, value, .. } => {
            free_qual(qual, bound, out);
            free_value(value, bound, out);
        }
    }
}

fn bind_once(name: &str, seen: &mut BTreeSet<String>) -> Result<(), AnfViolation> {
    if seen.insert(name.into()) {
        Ok(())
    } else {
        Err(AnfViolation(format!("name `{name}` is bound twice")))
    }
}

fn anf_value(v: &Value, seen: &mut BTreeSet<String>) -> Result<(), AnfViolation> {
    match v {
        Value::Const(_) | Value::Var(_) => Ok(()),
        Value::Pair(a, b) => {
            if a.is_atom() && b.is_atom() {
                Ok(())
            } else {
                Err(AnfViolation(
                    "pair component is not a constant or variable".into(),
                ))
            }
        }
        Value::Lambda(l) => {
            bind_once(&l.param, seen)?;
            anf_term(&l.body, seen)
        }
    }
}

fn anf_term(t: &CoreTerm, seen: &mut BTreeSet<String>) -> Result<(), AnfViolation> {
    match t {
        CoreTerm::Val(v) => anf_value(v, seen),
        CoreTerm::LetApp {
            bind,
            func,
            arg,
            body,
        } => {
            anf_value(func, seen)?;
            anf_value(arg, seen)?;
            bind_once(bind, seen)?;
            anf_term(body, seen)
        }
        CoreTerm::LetTerm {
            bind, bound, body, ..
        } => {
            anf_term(bound, seen)?;
            bind_once(bind, seen)?;
            anf_term(body, seen)
        }
        CoreTerm::LetPair {
            fst,
            snd,
            scrutinee,
            body,
        } => {
            anf_value(scrutinee, seen)?;
            bind_once(fst, seen)?;
            bind_once(snd, seen)?;
            anf_term(body, seen)
        }
        CoreTerm::If { cond, then_, else_ } => {
            if !cond.is_atom() {
                return Err(AnfViolation(
                    "if condition is not a constant or variable".into(),
                ));
            }
            anf_term(then_, seen)?;
            anf_term(else_, seen)
        }
        CoreTerm::LetAssume { bind, body, .. } => {
            bind_once(bind, seen)?;
            anf_term(body, seen)
        }
        CoreTerm::Assert { value, .. } => anf_value(value, seen),
    }
}

fn collect_lambdas(t: &CoreTerm, out: &mut Vec<Rc<Lambda>>) {
    fn val(v: &Value, out: &mut Vec<Rc<Lambda>>) {
        match v {
            Value::Lambda(l) => {
                out.push(l.clone());
                collect_lambdas(&l.body, out);
            }
            Value::Pair(a, b) => {
                val(a, out);
                val(b, out);
            }
            _ => {}
        }
    }
    match t {
        CoreTerm::Val(v) => val(v, out),
        CoreTerm::LetApp {
            func, arg, body, ..
        } => {
            val(func, out);
            val(arg, out);
            collect_lambdas(body, out);
        }
        CoreTerm::LetTerm { bound, body, .. } => {
            collect_lambdas(bound, out);
            collect_lambdas(body, out);
        }
        CoreTerm::LetPair {
            scrutinee, body, ..
        } => {
            val(scrutinee, out);
            collect_lambdas(body, out);
        }
        CoreTerm::If { cond, then_, else_ } => {
            val(cond, out);
            collect_lambdas(then_, out);
            collect_lambdas(else_, out);
        }
        CoreTerm::LetAssume { body, .. } => collect_lambdas(body, out),
        CoreTerm::Assert { value, .. } => val(value, out),
    }
}

/// Rename every binder (term binders and arrow parameters) to a canonical
/// positional name. Two terms are alpha-equivalent iff their canonical forms
/// are equal.
pub fn canonicalize(t: &CoreTerm) -> CoreTerm {
    Canon::default().term(t)
}

pub fn alpha_eq(a: &CoreTerm, b: &CoreTerm) -> bool {
    canonicalize(a) == canonicalize(b)
}

/// Alpha-equivalence of refinement types.
pub fn alpha_eq_type(a: &RType, b: &RType) -> bool {
    let mut ca = Canon::default();
    let mut cb = Canon::default();
    ca.rtype(a) == cb.rtype(b)
}

#[derive(Default)]
struct Canon {
    counter: usize,
    scope: Vec<(String, String)>,
}

impl Canon {
    fn push(&mut self, name: &str) -> String {
        let fresh = format!("%{}", self.counter);
        self.counter += 1;
        self.scope.push((name.into(), fresh.clone()));
        fresh
    }

    fn lookup(&self, name: &str) -> String {
        self.scope
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(|| name.into())
    }

    fn qual(&self, q: &Qualifier) -> Qualifier {
        let mut map = BTreeMap::new();
        for x in q.free_vars() {
            let c = self.lookup(&x);
            if c != x {
                map.insert(x, c);
            }
        }
        rename_qual(q, &map)
    }

    fn rtype(&mut self, t: &RType) -> RType {
        match t {
            RType::Over { base, qual } => RType::over(base.clone(), self.qual(qual)),
            RType::Cover { base, qual } => RType::cover(base.clone(), self.qual(qual)),
            RType::UnderArrow { base, qual, cod } => {
                let q = self.qual(qual);
                RType::under_arrow(base.clone(), q, self.rtype(cod))
            }
            RType::OverArrow {
                param,
                base,
                qual,
                cod,
            } => {
                let q = self.qual(qual);
                let p = self.push(param);
                let c = self.rtype(cod);
                self.scope.pop();
                RType::over_arrow(p, base.clone(), q, c)
            }
            RType::HoArrow { param, dom, cod } => {
                let d = self.rtype(dom);
                let p = self.push(param);
                let c = self.rtype(cod);
                self.scope.pop();
                RType::ho_arrow(p, d, c)
            }
        }
    }

    fn value(&mut self, v: &Value) -> Value {
        match v {
            Value::Const(c) => Value::Const(c.clone()),
            Value::Var(x) => Value::Var(self.lookup(x)),
            Value::Pair(a, b) => Value::pair(self.value(a), self.value(b)),
            Value::Lambda(l) => {
                let param_ty = self.rtype(&l.param_ty);
                let p = self.push(&l.param);
                let ret = l.ret.as_ref().map(|r| self.rtype(r));
                let body = self.term(&l.body);
                self.scope.pop();
                Value::Lambda(Rc::new(Lambda {
                    param: p,
                    param_ty,
                    ret,
                    body,
                }))
            }
        }
    }

    fn term(&mut self, t: &CoreTerm) -> CoreTerm {
        match t {
            CoreTerm::Val(v) => CoreTerm::Val(self.value(v)),
            CoreTerm::LetApp {
                bind,
                func,
                arg,
                body,
            } => {
                let func = self.value(func);
                let arg = self.value(arg);
                let b = self.push(bind);
                let body = Box::new(self.term(body));
                self.scope.pop();
                CoreTerm::LetApp {
                    bind: b,
                    func,
                    arg,
                    body,
                }
            }
            CoreTerm::LetTerm {
                bind,
                ascription,
                bound,
                body,
            } => {
                let ascription = ascription.as_ref().map(|a| self.rtype(a));
                let bound = Box::new(self.term(bound));
                let b = self.push(bind);
                let body = Box::new(self.term(body));
                self.scope.pop();
                CoreTerm::LetTerm {
                    bind: b,
                    ascription,
                    bound,
                    body,
                }
            }
            CoreTerm::LetPair {
                fst,
                snd,
                scrutinee,
                body,
            } => {
                let scrutinee = self.value(scrutinee);
                let f = self.push(fst);
                let s = self.push(snd);
                let body = Box::new(self.term(body));
                self.scope.pop();
                self.scope.pop();
                CoreTerm::LetPair {
                    fst: f,
                    snd: s,
                    scrutinee,
                    body,
                }
            }
            CoreTerm::If { cond, then_, else_ } => CoreTerm::If {
                cond: self.value(cond),
                then_: Box::new(self.term(then_)),
                else_: Box::new(self.term(else_)),
            },
            CoreTerm::LetAssume {
                bind,
                base,
                qual,
                body,
            } => {
                let qual = self.qual(qual);
                let b = self.push(bind);
                let body = Box::new(self.term(body));
                self.scope.pop();
                CoreTerm::LetAssume {
                    bind: b,
                    base: base.clone(),
                    qual,
                    body,
                }
            }
            CoreTerm::Assert { base, qual, value } => CoreTerm::Assert {
                base: base.clone(),
                qual: self.qual(qual),
                value: self.value(value),
            },
        }
    }
}

/// Simultaneous renaming of qualifier variables.
pub fn rename_qual(q: &Qualifier, map: &BTreeMap<String, String>) -> Qualifier {
    match q {
        Qualifier::Var(x) => match map.get(x) {
            Some(y) => Qualifier::Var(y.clone()),
            None => q.clone(),
        },
        _ => q.map_children(|c| rename_qual(c, map)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Qualifier as Q;

    fn assume_then(x: &str, body: CoreTerm) -> CoreTerm {
        CoreTerm::LetAssume {
            bind: x.into(),
            base: BaseType::Int,
            qual: Q::eq(Q::Nu, Q::Int(11)),
            body: Box::new(body),
        }
    }

    #[test]
    fn alpha_equivalence_ignores_binder_names() {
        let a = assume_then("x", CoreTerm::var("x"));
        let b = assume_then("y", CoreTerm::var("y"));
        let c = assume_then("y", CoreTerm::var("z"));
        assert!(alpha_eq(&a, &b));
        assert!(!alpha_eq(&a, &c));
    }

    #[test]
    fn qualifier_references_are_renamed_with_binders() {
        let mk = |x: &str| {
            assume_then(
                x,
                CoreTerm::Assert {
                    base: BaseType::Int,
                    qual: Q::eq(Q::Nu, Q::var(x)),
                    value: Value::var(x),
                },
            )
        };
        assert!(alpha_eq(&mk("a"), &mk("b")));
    }

    #[test]
    fn anf_violations_are_detected() {
        let bad = CoreTerm::Val(Value::pair(
            Value::pair(Value::int(1), Value::int(2)),
            Value::int(3),
        ));
        assert!(bad.check_anf().is_err());
        let dup = assume_then("x", assume_then("x", CoreTerm::var("x")));
        assert!(dup.check_anf().is_err());
        assert!(assume_then("x", CoreTerm::var("x")).check_anf().is_ok());
    }

    #[test]
    fn free_vars_respect_binders() {
        let t = CoreTerm::LetApp {
            bind: "r".into(),
            func: Value::var("f"),
            arg: Value::var("a"),
            body: Box::new(CoreTerm::var("r")),
        };
        let fv = t.free_vars();
        assert_eq!(fv.into_iter().collect::<Vec<_>>(), ["a", "f"]);
    }
}
