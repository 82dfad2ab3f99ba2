//! Basic (unrefined) typing of core terms, run before the oracle so that the
//! `∅ ⊢ e : b` side conditions of the denotations hold.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::builtins::Builtin;
use crate::core_term::{CoreTerm, Value};
use crate::qualifier::SortEnv;
use crate::syntax::BaseType;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BasicType {
    Base(BaseType),
    Arrow(Box<BasicType>, Box<BasicType>),
}

impl BasicType {
    pub fn arrow(a: BasicType, b: BasicType) -> Self {
        BasicType::Arrow(Box::new(a), Box::new(b))
    }

    pub fn as_base(&self) -> Option<&BaseType> {
        match self {
            BasicType::Base(b) => Some(b),
            BasicType::Arrow(..) => None,
        }
    }
}

impl fmt::Display for BasicType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasicType::Base(b) => write!(f, "{b}"),
            BasicType::Arrow(a, b) if matches!(**a, BasicType::Arrow(..)) => {
                write!(f, "({a}) -> {b}")
            }
            BasicType::Arrow(a, b) => write!(f, "{a} -> {b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("basic typing: {0}")]
pub struct ErasureError(pub String);

/// Scope of basic types, innermost last.
#[derive(Clone, Debug, Default)]
pub struct BasicEnv {
    vars: Vec<(String, BasicType)>,
    /// `assert` yields `bool * unit` instead of echoing the value.
    unit_payload: bool,
}

impl BasicEnv {
    pub fn with_unit_payload(unit_payload: bool) -> Self {
        BasicEnv {
            vars: Vec::new(),
            unit_payload,
        }
    }

    pub fn push(&mut self, name: &str, t: BasicType) {
        self.vars.push((name.into(), t));
    }

    pub fn lookup(&self, name: &str) -> Option<&BasicType> {
        self.vars
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }

    fn sort_env(&self) -> SortEnv {
        let mut env = SortEnv::new();
        for (n, t) in &self.vars {
            match t {
                BasicType::Base(b) => {
                    env.insert(n.clone(), b.clone());
                }
                BasicType::Arrow(..) => {
                    env.remove(n);
                }
            }
        }
        env
    }
}

fn err<T>(msg: String) -> Result<T, ErasureError> {
    Err(ErasureError(msg))
}

pub fn basic_type_of(t: &CoreTerm) -> Result<BasicType, ErasureError> {
    term(&mut BasicEnv::default(), t)
}

/// As [`basic_type_of`], with `assert` carrying a unit payload when asked.
pub fn basic_type_with(t: &CoreTerm, unit_payload: bool) -> Result<BasicType, ErasureError> {
    term(&mut BasicEnv::with_unit_payload(unit_payload), t)
}

pub fn basic_type_in(env: &mut BasicEnv, t: &CoreTerm) -> Result<BasicType, ErasureError> {
    term(env, t)
}

fn value(env: &mut BasicEnv, v: &Value) -> Result<BasicType, ErasureError> {
    match v {
        Value::Const(c) => Ok(BasicType::Base(c.base())),
        Value::Var(x) => match env.lookup(x) {
            Some(t) => Ok(t.clone()),
            None => match Builtin::from_name(x) {
                Some(b) if b.is_generic() => err(format!("`{x}` must be applied to an argument")),
                Some(b) => Ok(b.rtype().expect("monomorphic").erase()),
                None => err(format!("unbound name `{x}`")),
            },
        },
        Value::Pair(a, b) => {
            let (ta, tb) = (value(env, a)?, value(env, b)?);
            match (ta, tb) {
                (BasicType::Base(x), BasicType::Base(y)) => {
                    Ok(BasicType::Base(BaseType::prod(x, y)))
                }
                _ => err("pairs may only hold base values".into()),
            }
        }
        Value::Lambda(l) => {
            let pt = l.param_ty.erase();
            env.push(&l.param, pt.clone());
            let body = term(env, &l.body);
            env.vars.pop();
            let body = body?;
            if let Some(r) = &l.ret {
                if r.erase() != body {
                    return err(format!(
                        "function body has type {body}, annotation says {}",
                        r.erase()
                    ));
                }
            }
            Ok(BasicType::arrow(pt, body))
        }
    }
}

fn check_qual(env: &BasicEnv, q: &crate::Qualifier, nu: &BaseType) -> Result<(), ErasureError> {
    q.check_formula(&env.sort_env(), Some(nu))
        .map_err(|e| ErasureError(format!("{e}")))
}

fn term(env: &mut BasicEnv, t: &CoreTerm) -> Result<BasicType, ErasureError> {
    match t {
        CoreTerm::Val(v) => value(env, v),
        CoreTerm::LetApp {
            bind,
            func,
            arg,
            body,
        } => {
            let ta = value(env, arg)?;
            let tf = match func {
                Value::Var(x) if env.lookup(x).is_none() && Builtin::from_name(x).is_some() => {
                    let b = Builtin::from_name(x).expect("checked");
                    let first = ta
                        .as_base()
                        .ok_or_else(|| ErasureError(format!("`{x}` applied to a function")))?;
                    b.basic_type(first).map_err(ErasureError)?
                }
                _ => value(env, func)?,
            };
            let res = match tf {
                BasicType::Arrow(dom, cod) if *dom == ta => *cod,
                BasicType::Arrow(dom, _) => {
                    return err(format!("argument has type {ta}, expected {dom}"))
                }
                BasicType::Base(b) => return err(format!("cannot apply a value of type {b}")),
            };
            env.push(bind, res);
            let r = term(env, body);
            env.vars.pop();
            r
        }
        CoreTerm::LetTerm {
            bind,
            ascription,
            bound,
            body,
        } => {
            let tb = term(env, bound)?;
            if let Some(a) = ascription {
                if a.erase() != tb {
                    return err(format!(
                        "`{bind}` has type {tb}, ascription says {}",
                        a.erase()
                    ));
                }
            }
            env.push(bind, tb);
            let r = term(env, body);
            env.vars.pop();
            r
        }
        CoreTerm::LetPair {
            fst,
            snd,
            scrutinee,
            body,
        } => match value(env, scrutinee)? {
            BasicType::Base(BaseType::Prod(a, b)) => {
                env.push(fst, BasicType::Base(*a));
                env.push(snd, BasicType::Base(*b));
                let r = term(env, body);
                env.vars.pop();
                env.vars.pop();
                r
            }
            other => err(format!("cannot destructure a value of type {other}")),
        },
        CoreTerm::If { cond, then_, else_ } => {
            if value(env, cond)? != BasicType::Base(BaseType::Bool) {
                return err("if condition must be bool".into());
            }
            let (a, b) = (term(env, then_)?, term(env, else_)?);
            if a != b {
                return err(format!("branches have types {a} and {b}"));
            }
            Ok(a)
        }
        CoreTerm::LetAssume {
            bind,
            base,
            qual,
            body,
        } => {
            check_qual(env, qual, base)?;
            env.push(bind, BasicType::Base(base.clone()));
            let r = term(env, body);
            env.vars.pop();
            r
        }
        CoreTerm::Assert {
            base,
            qual,
            value: v,
        } => {
            check_qual(env, qual, base)?;
            let tv = value(env, v)?;
            if tv != BasicType::Base(base.clone()) {
                return err(format!(
                    "asserted value has type {tv}, annotation says {base}"
                ));
            }
            let payload = if env.unit_payload {
                BaseType::Unit
            } else {
                base.clone()
            };
            Ok(BasicType::Base(BaseType::prod(BaseType::Bool, payload)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anf::elaborate_program;
    use crate::parser::parse_program;

    fn ty(src: &str) -> Result<BasicType, ErasureError> {
        let e = elaborate_program(&parse_program(src).unwrap()).unwrap();
        basic_type_of(&e.term)
    }

    #[test]
    fn generic_builtins_instantiate() {
        assert_eq!(
            ty("check fst (true, 1) == false : [bool | true]").unwrap(),
            BasicType::Base(BaseType::Bool)
        );
        assert!(ty("check (1 == true) : [bool | true]").is_err());
    }

    #[test]
    fn monad_program_types() {
        let t = ty("check let x = 3 in assert {int | v == 4} x : [bool * int | true]").unwrap();
        assert_eq!(
            t,
            BasicType::Base(BaseType::prod(BaseType::Bool, BaseType::Int))
        );
    }

    #[test]
    fn branch_mismatch() {
        assert!(ty("check if true then 1 else false : [int | true]").is_err());
    }
}
