//! Exhaustive nondeterministic evaluation.
//!
//! A CEK machine whose frontier holds every pending choice. Generators and
//! `assume` fork one successor per admissible value, so the set of final
//! values is exactly the set of reachable outcomes within the window. The
//! frontier can be drained as a stack or a queue; both give the same set.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::format;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::builtins::{Builtin, PrimError};
use crate::core_term::{CoreTerm, Lambda, Value};
use crate::qualifier::{Qualifier, SemanticValue, Valuation, NU};
use crate::syntax::BaseType;
use crate::vc;

/// Runtime values: base values, closures and partially applied builtins.
#[derive(Clone)]
pub enum RtValue {
    Base(SemanticValue),
    Closure(Rc<Lambda>, Env),
    Prim(Builtin, Vec<SemanticValue>),
}

impl RtValue {
    pub fn as_base(&self) -> Option<&SemanticValue> {
        match self {
            RtValue::Base(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Debug for RtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RtValue::Base(v) => write!(f, "{v}"),
            RtValue::Closure(l, _) => write!(f, "<fun {}>", l.param),
            RtValue::Prim(b, args) => write!(f, "<{} {:?}>", b.name(), args),
        }
    }
}

struct EnvNode {
    name: String,
    value: RtValue,
    next: Env,
}

/// Persistent environment; extension shares the tail.
#[derive(Clone, Default)]
pub struct Env(Option<Rc<EnvNode>>);

impl Env {
    pub fn new() -> Self {
        Env(None)
    }

    pub fn extend(&self, name: impl Into<String>, value: RtValue) -> Env {
        Env(Some(Rc::new(EnvNode {
            name: name.into(),
            value,
            next: self.clone(),
        })))
    }

    pub fn lookup(&self, name: &str) -> Option<&RtValue> {
        let mut cur = &self.0;
        while let Some(node) = cur {
            if node.name == name {
                return Some(&node.value);
            }
            cur = &node.next.0;
        }
        None
    }
}

impl Valuation for Env {
    fn value_of(&self, name: &str) -> Option<&SemanticValue> {
        self.lookup(name).and_then(RtValue::as_base)
    }
}

/// Every builtin bound to its own name.
pub fn builtin_env() -> Env {
    Builtin::ALL.iter().fold(Env::new(), |env, b| {
        env.extend(b.name(), RtValue::Prim(*b, Vec::new()))
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("unbound name `{0}` at run time")]
    Unbound(String),
    #[error("applied a non-function value {0}")]
    NotAFunction(String),
    #[error("expected a base value, found a function")]
    NotBase,
    #[error("builtin failure: {0}")]
    Prim(String),
    #[error("qualifier evaluation failed: {0}")]
    Qual(String),
    #[error("evaluation exceeded {0} steps")]
    OutOfFuel(u64),
}

impl From<PrimError> for InterpError {
    fn from(e: PrimError) -> Self {
        InterpError::Prim(match e {
            PrimError::Overflow => "integer overflow".into(),
            PrimError::Sort(s) => s,
            PrimError::RangeTooWide(lo, hi) => {
                format!("int_range {lo} {hi} is too wide to enumerate")
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    DepthFirst,
    BreadthFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InterpOptions {
    pub window: i64,
    /// `assert` returns `(flag, ())` instead of `(flag, v)`.
    pub assert_unit_payload: bool,
    pub strategy: Strategy,
    pub fuel: u64,
}

impl InterpOptions {
    pub fn new(window: i64) -> Self {
        InterpOptions {
            window,
            assert_unit_payload: false,
            strategy: Strategy::DepthFirst,
            fuel: 50_000_000,
        }
    }
}

/// Reachable values of a closed base-typed program.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OutcomeSet {
    pub values: BTreeSet<SemanticValue>,
    /// Some path got stuck (`int_range` with `lo > hi`).
    pub stuck: bool,
}

/// All results, including functions. Base values are deduplicated.
#[derive(Clone, Debug, Default)]
pub struct RtOutcomes {
    pub base: BTreeSet<SemanticValue>,
    pub funs: Vec<RtValue>,
    pub stuck: bool,
}

impl RtOutcomes {
    pub fn all(&self) -> Vec<RtValue> {
        let mut out: Vec<RtValue> = self.base.iter().cloned().map(RtValue::Base).collect();
        out.extend(self.funs.iter().cloned());
        out
    }

    fn merge(&mut self, other: RtOutcomes) {
        self.base.extend(other.base);
        self.funs.extend(other.funs);
        self.stuck |= other.stuck;
    }
}

#[derive(Clone)]
enum Kont {
    Done,
    Let {
        bind: String,
        body: Rc<CoreTerm>,
        env: Env,
        next: Rc<Kont>,
    },
}

enum State {
    Eval(Rc<CoreTerm>, Env, Rc<Kont>),
    Return(RtValue, Rc<Kont>),
}

fn value(v: &Value, env: &Env) -> Result<RtValue, InterpError> {
    Ok(match v {
        Value::Const(c) => RtValue::Base(c.to_semantic()),
        Value::Var(x) => match env.lookup(x) {
            Some(r) => r.clone(),
            None => match Builtin::from_name(x) {
                Some(b) => RtValue::Prim(b, Vec::new()),
                None => return Err(InterpError::Unbound(x.clone())),
            },
        },
        Value::Pair(a, b) => {
            let base = |r: RtValue| match r {
                RtValue::Base(v) => Ok(v),
                _ => Err(InterpError::NotBase),
            };
            RtValue::Base(SemanticValue::pair(
                base(value(a, env)?)?,
                base(value(b, env)?)?,
            ))
        }
        Value::Lambda(l) => RtValue::Closure(l.clone(), env.clone()),
    })
}

struct Machine {
    opts: InterpOptions,
    frontier: VecDeque<State>,
    out: RtOutcomes,
    steps: u64,
}

impl Machine {
    fn push(&mut self, s: State) {
        self.frontier.push_back(s);
    }

    fn pop(&mut self) -> Option<State> {
        match self.opts.strategy {
            Strategy::DepthFirst => self.frontier.pop_back(),
            Strategy::BreadthFirst => self.frontier.pop_front(),
        }
    }

    /// Push one successor per result of applying `f` to `a`.
    fn apply(&mut self, f: RtValue, a: RtValue, k: Rc<Kont>) -> Result<(), InterpError> {
        match f {
            RtValue::Closure(l, env) => {
                let env = env.extend(l.param.clone(), a);
                self.push(State::Eval(Rc::new(l.body.clone()), env, k));
            }
            RtValue::Prim(b, mut args) => {
                let RtValue::Base(a) = a else {
                    return Err(InterpError::NotBase);
                };
                args.push(a);
                if args.len() < b.arity() {
                    self.push(State::Return(RtValue::Prim(b, args), k));
                } else {
                    let results = b.apply(&args, self.opts.window)?;
                    if results.is_empty() {
                        self.out.stuck = true;
                    }
                    for r in results {
                        self.push(State::Return(RtValue::Base(r), k.clone()));
                    }
                }
            }
            RtValue::Base(v) => return Err(InterpError::NotAFunction(format!("{v}"))),
        }
        Ok(())
    }

    fn step(&mut self, s: State) -> Result<(), InterpError> {
        self.steps += 1;
        if self.steps > self.opts.fuel {
            return Err(InterpError::OutOfFuel(self.opts.fuel));
        }
        match s {
            State::Return(v, k) => match &*k {
                Kont::Done => match v {
                    RtValue::Base(b) => {
                        self.out.base.insert(b);
                    }
                    other => self.out.funs.push(other),
                },
                Kont::Let {
                    bind,
                    body,
                    env,
                    next,
                } => {
                    let env = env.extend(bind.clone(), v);
                    self.push(State::Eval(body.clone(), env, next.clone()));
                }
            },
            State::Eval(t, env, k) => match &*t {
                CoreTerm::Val(v) => {
                    let r = value(v, &env)?;
                    self.push(State::Return(r, k));
                }
                CoreTerm::LetApp {
                    bind,
                    func,
                    arg,
                    body,
                } => {
                    let f = value(func, &env)?;
                    let a = value(arg, &env)?;
                    let k = Rc::new(Kont::Let {
                        bind: bind.clone(),
                        body: Rc::new((**body).clone()),
                        env,
                        next: k,
                    });
                    self.apply(f, a, k)?;
                }
                CoreTerm::LetTerm {
                    bind, bound, body, ..
                } => {
                    let k2 = Rc::new(Kont::Let {
                        bind: bind.clone(),
                        body: Rc::new((**body).clone()),
                        env: env.clone(),
                        next: k,
                    });
                    self.push(State::Eval(Rc::new((**bound).clone()), env, k2));
                }
                CoreTerm::LetPair {
                    fst,
                    snd,
                    scrutinee,
                    body,
                } => match value(scrutinee, &env)? {
                    RtValue::Base(SemanticValue::Pair(a, b)) => {
                        let env = env
                            .extend(fst.clone(), RtValue::Base(*a))
                            .extend(snd.clone(), RtValue::Base(*b));
                        self.push(State::Eval(Rc::new((**body).clone()), env, k));
                    }
                    other => {
                        return Err(InterpError::NotAFunction(format!(
                            "cannot destructure {other:?}"
                        )))
                    }
                },
                CoreTerm::If { cond, then_, else_ } => match value(cond, &env)? {
                    RtValue::Base(SemanticValue::Bool(c)) => {
                        let branch = if c { then_ } else { else_ };
                        self.push(State::Eval(Rc::new((**branch).clone()), env, k));
                    }
                    other => {
                        return Err(InterpError::Prim(format!(
                            "if condition {other:?} is not a boolean"
                        )))
                    }
                },
                CoreTerm::LetAssume {
                    bind,
                    base,
                    qual,
                    body,
                } => {
                    let bound = qual.subst_nu(&Qualifier::var(NU));
                    let body = Rc::new((**body).clone());
                    for v in vc::domain(&bound, NU, base, &env, self.opts.window) {
                        let env = env.extend(bind.clone(), RtValue::Base(v));
                        self.push(State::Eval(body.clone(), env, k.clone()));
                    }
                }
                CoreTerm::Assert { qual, value: v, .. } => {
                    let RtValue::Base(sv) = value(v, &env)? else {
                        return Err(InterpError::NotBase);
                    };
                    let ok = qual
                        .holds(&env, Some(&sv))
                        .map_err(|e| InterpError::Qual(format!("{e}")))?;
                    let payload = if self.opts.assert_unit_payload {
                        SemanticValue::Unit
                    } else {
                        sv
                    };
                    self.push(State::Return(
                        RtValue::Base(SemanticValue::pair(SemanticValue::Bool(ok), payload)),
                        k,
                    ));
                }
            },
        }
        Ok(())
    }

    fn run(mut self) -> Result<RtOutcomes, InterpError> {
        while let Some(s) = self.pop() {
            self.step(s)?;
        }
        Ok(self.out)
    }
}

/// All results of `t` under `env`.
pub fn eval_all(t: &CoreTerm, env: &Env, opts: InterpOptions) -> Result<RtOutcomes, InterpError> {
    let mut m = Machine {
        opts,
        frontier: VecDeque::new(),
        out: RtOutcomes::default(),
        steps: 0,
    };
    m.push(State::Eval(
        Rc::new(t.clone()),
        env.clone(),
        Rc::new(Kont::Done),
    ));
    m.run()
}

/// All results of applying any of `fs` to any of `args`.
pub fn apply_all(
    fs: &[RtValue],
    args: &[RtValue],
    opts: InterpOptions,
) -> Result<RtOutcomes, InterpError> {
    let mut out = RtOutcomes::default();
    for f in fs {
        for a in args {
            let mut m = Machine {
                opts,
                frontier: VecDeque::new(),
                out: RtOutcomes::default(),
                steps: 0,
            };
            m.apply(f.clone(), a.clone(), Rc::new(Kont::Done))?;
            out.merge(m.run()?);
        }
    }
    Ok(out)
}

/// Reachable base values of a closed program.
pub fn outcomes_with(
    t: &CoreTerm,
    env: &Env,
    opts: InterpOptions,
) -> Result<OutcomeSet, InterpError> {
    let r = eval_all(t, env, opts)?;
    if !r.funs.is_empty() {
        return Err(InterpError::NotBase);
    }
    Ok(OutcomeSet {
        values: r.base,
        stuck: r.stuck,
    })
}

pub fn outcomes(t: &CoreTerm, window: i64) -> Result<OutcomeSet, InterpError> {
    outcomes_with(t, &Env::new(), InterpOptions::new(window))
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("qualifier `{0}` has no value in the window")]
pub struct EmptyGenerator(pub String);

/// `let x = assume [b | q] in x`: a closed term reaching exactly the
/// values of `q`.
pub fn canonical_generator(
    q: &Qualifier,
    b: &BaseType,
    window: i64,
) -> Result<CoreTerm, EmptyGenerator> {
    let bound = q.subst_nu(&Qualifier::var(NU));
    if vc::domain(&bound, NU, b, &Vec::new(), window).is_empty() {
        return Err(EmptyGenerator(format!("{q}")));
    }
    Ok(CoreTerm::LetAssume {
        bind: "g".into(),
        base: b.clone(),
        qual: q.clone(),
        body: alloc::boxed::Box::new(CoreTerm::Val(Value::var("g"))),
    })
}

/// Values of `q` at sort `b` that a generator for it reaches.
pub fn qualifier_values(q: &Qualifier, b: &BaseType, env: &Env, window: i64) -> Vec<SemanticValue> {
    vc::domain(&q.subst_nu(&Qualifier::var(NU)), NU, b, env, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anf::elaborate_expr;
    use crate::parser::parse_expr;
    use SemanticValue as V;

    fn run(src: &str, w: i64) -> BTreeSet<SemanticValue> {
        outcomes(&elaborate_expr(&parse_expr(src).unwrap()).unwrap(), w)
            .unwrap()
            .values
    }

    fn ints(xs: &[i64]) -> BTreeSet<SemanticValue> {
        xs.iter().map(|n| V::Int(*n)).collect()
    }

    #[test]
    fn generator_enumerates_window() {
        assert_eq!(run("let x = int_gen () in x", 2), ints(&[-2, -1, 0, 1, 2]));
    }

    #[test]
    fn incorrectness_example() {
        let src = "let x = int_gen () in let y = int_gen () in let z = int_range 11 11 in \
                   if is_even x then if is_odd y then 42 else z else z";
        assert_eq!(run(src, 64), ints(&[11, 42]));
    }

    #[test]
    fn assert_carries_payload() {
        let r = run("let x = 3 in assert {int | v = 4} x", 8);
        assert_eq!(
            r,
            [V::pair(V::Bool(false), V::Int(3))].into_iter().collect()
        );
        let t =
            elaborate_expr(&parse_expr("let x = 3 in assert {int | v = 4} x").unwrap()).unwrap();
        let mut opts = InterpOptions::new(8);
        opts.assert_unit_payload = true;
        let r = outcomes_with(&t, &Env::new(), opts).unwrap().values;
        assert_eq!(r, [V::pair(V::Bool(false), V::Unit)].into_iter().collect());
    }

    #[test]
    fn builtins_behave() {
        assert_eq!(run("int_range 11 11", 8), ints(&[11]));
        assert_eq!(run("is_even 4", 8), [V::Bool(true)].into_iter().collect());
        assert_eq!(run("3 + 2", 8), ints(&[5]));
        let t = elaborate_expr(&parse_expr("int_range 2 1").unwrap()).unwrap();
        let o = outcomes(&t, 8).unwrap();
        assert!(o.values.is_empty() && o.stuck);
    }

    #[test]
    fn strategies_agree() {
        let src = "let f = fun (x: {int | true}) -> if bool_gen () then (true, x) else (false, x + 1) in \
                   let a = int_gen () in if is_even a then f a else f 0";
        let t = elaborate_expr(&parse_expr(src).unwrap()).unwrap();
        let mut o = InterpOptions::new(3);
        let dfs = outcomes_with(&t, &Env::new(), o).unwrap();
        o.strategy = Strategy::BreadthFirst;
        assert_eq!(dfs, outcomes_with(&t, &Env::new(), o).unwrap());
    }

    #[test]
    fn canonical_generators() {
        use crate::qualifier::Qualifier as Q;
        let q = Q::or(Q::eq(Q::Nu, Q::Int(1)), Q::eq(Q::Nu, Q::Int(2)));
        let g = canonical_generator(&q, &BaseType::Int, 8).unwrap();
        assert_eq!(outcomes(&g, 8).unwrap().values, ints(&[1, 2]));
        let g = canonical_generator(&Q::True, &BaseType::Bool, 8).unwrap();
        assert_eq!(outcomes(&g, 8).unwrap().values.len(), 2);
        let g = canonical_generator(&Q::even(Q::Nu), &BaseType::Int, 2).unwrap();
        assert_eq!(outcomes(&g, 2).unwrap().values, ints(&[-2, 0, 2]));
        assert!(canonical_generator(&Q::False, &BaseType::Int, 2).is_err());
    }
}
