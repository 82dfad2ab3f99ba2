//! Property suites checked against independent reference computations.
//!
//! Shared between the `properties` test target and the acceptance gate,
//! so each suite is a plain function that panics on a counterexample.

use std::collections::BTreeSet;

use covcore::anf::elaborate_expr;
use covcore::interp::outcomes;
use covcore::parser::parse_expr;
use covcore::qualifier::{Qualifier as Q, SemanticValue as SV, NU};
use covcore::rtype::RType;
use covcore::syntax::BaseType;
use covcore::typing::{BoundedDecider, CheckOptions, Checker, Ctx};
use covcore::vc::{decide_bounded, Binder, Vc, Verdict};
use proptest::prelude::*;

pub const CASES: u32 = 1000;

/// Shrunk counterexamples are printed; nothing is persisted because the
/// module is compiled into more than one test target.
fn config() -> ProptestConfig {
    ProptestConfig {
        cases: CASES,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

// ----- qualifiers ------------------------------------------------------

fn int_term(depth: u32) -> BoxedStrategy<Q> {
    let leaf = prop_oneof![
        (-2i64..=2).prop_map(Q::Int),
        Just(Q::var("a")),
        Just(Q::var("b")),
        Just(Q::Nu)
    ];
    if depth == 0 {
        return leaf.boxed();
    }
    let sub = int_term(depth - 1);
    prop_oneof![
        2 => leaf,
        1 => (sub.clone(), sub.clone()).prop_map(|(x, y)| Q::Add(Box::new(x), Box::new(y))),
        1 => (sub.clone(), sub).prop_map(|(x, y)| Q::Sub(Box::new(x), Box::new(y))),
    ]
    .boxed()
}

fn formula(depth: u32) -> BoxedStrategy<Q> {
    let t = int_term(2);
    let atom = prop_oneof![
        Just(Q::True),
        Just(Q::False),
        (t.clone(), t.clone()).prop_map(|(x, y)| Q::Le(Box::new(x), Box::new(y))),
        (t.clone(), t.clone()).prop_map(|(x, y)| Q::Lt(Box::new(x), Box::new(y))),
        (t.clone(), t.clone()).prop_map(|(x, y)| Q::Eq(Box::new(x), Box::new(y))),
        t.clone().prop_map(|x| Q::Even(Box::new(x))),
        t.prop_map(|x| Q::Odd(Box::new(x))),
    ];
    if depth == 0 {
        return atom.boxed();
    }
    let sub = formula(depth - 1);
    prop_oneof![
        2 => atom,
        1 => (sub.clone(), sub.clone()).prop_map(|(x, y)| Q::And(Box::new(x), Box::new(y))),
        1 => (sub.clone(), sub.clone()).prop_map(|(x, y)| Q::Or(Box::new(x), Box::new(y))),
        1 => (sub.clone(), sub.clone()).prop_map(|(x, y)| Q::Implies(Box::new(x), Box::new(y))),
        1 => sub.prop_map(|x| Q::Not(Box::new(x))),
    ]
    .boxed()
}

/// Qualifiers over `ν` only.
fn nu_formula() -> BoxedStrategy<Q> {
    formula(2)
        .prop_map(|q| q.subst_var("a", &Q::Nu).subst_var("b", &Q::Int(1)))
        .boxed()
}

fn valuation(a: i64, b: i64) -> Vec<(String, SV)> {
    vec![("a".into(), SV::Int(a)), ("b".into(), SV::Int(b))]
}

proptest! {
    #![proptest_config(config())]

    /// Substituting a value for a name agrees with evaluating under an
    /// extended valuation.
    fn substitution_lemma(q in formula(3), a in -6i64..=6, b in -6i64..=6, nu in -6i64..=6) {
        let sigma = valuation(a, b);
        let direct = q.holds(&sigma, Some(&SV::Int(nu))).unwrap();
        let only_b = vec![("b".to_string(), SV::Int(b))];
        let substituted = q.subst_var("a", &Q::Int(a)).holds(&only_b, Some(&SV::Int(nu))).unwrap();
        prop_assert_eq!(direct, substituted);
        let closed = q.subst_var("a", &Q::Int(a)).subst_var("b", &Q::Int(b)).subst_nu(&Q::Int(nu));
        prop_assert_eq!(direct, closed.holds(&Vec::new(), None).unwrap());
    }

    /// A universally quantified name pinned to a value decides like the
    /// substituted formula.
    fn pinned_binder_matches_substitution(q in formula(2), a in -4i64..=4) {
        let q = q.subst_var("b", &Q::Int(0)).subst_nu(&Q::Int(1));
        let vc = Vc::new(vec![Binder::forall("a", BaseType::Int, Q::eq(Q::var("a"), Q::Int(a)))], q.clone());
        let expected = q.subst_var("a", &Q::Int(a)).holds(&Vec::new(), None).unwrap();
        prop_assert_eq!(decide_bounded(&vc, 8).is_valid(), expected);
    }

    /// Cover subsumption is decided exactly, and it is preserved by
    /// weakening the left qualifier and strengthening the right one.
    fn sub_base_cover(phi1 in nu_formula(), phi2 in nu_formula(), psi in nu_formula()) {
        let w = 8;
        let window: Vec<SV> = (-w..=w).map(SV::Int).collect();
        let holds = |q: &Q, v: &SV| q.holds(&Vec::new(), Some(v)).unwrap();
        let reference = window.iter().all(|v| !holds(&phi2, v) || holds(&phi1, v));
        let mut d = BoundedDecider { window: w };
        let mut ck = Checker::new(CheckOptions::new(w), &mut d);
        let ctx = Ctx::new();
        let cover = |q: &Q| RType::cover(BaseType::Int, q.clone());
        let ok = ck.sub_base(&ctx, &cover(&phi1), &cover(&phi2)).is_ok();
        prop_assert_eq!(ok, reference);
        if ok {
            prop_assert!(ck.sub_base(&ctx, &cover(&Q::or(phi1.clone(), psi.clone())), &cover(&phi2)).is_ok());
            prop_assert!(ck.sub_base(&ctx, &cover(&phi1), &cover(&Q::and(phi2.clone(), psi.clone()))).is_ok());
        }
    }

    /// Over subsumption, dually.
    fn sub_base_over(phi1 in nu_formula(), phi2 in nu_formula(), psi in nu_formula()) {
        let w = 8;
        let holds = |q: &Q, v: &SV| q.holds(&Vec::new(), Some(v)).unwrap();
        let reference = (-w..=w).map(SV::Int).all(|v| !holds(&phi1, &v) || holds(&phi2, &v));
        let mut d = BoundedDecider { window: w };
        let mut ck = Checker::new(CheckOptions::new(w), &mut d);
        let ctx = Ctx::new();
        let over = |q: &Q| RType::over(BaseType::Int, q.clone());
        let ok = ck.sub_base(&ctx, &over(&phi1), &over(&phi2)).is_ok();
        prop_assert_eq!(ok, reference);
        if ok {
            prop_assert!(ck.sub_base(&ctx, &over(&Q::and(phi1.clone(), psi.clone())), &over(&phi2)).is_ok());
            prop_assert!(ck.sub_base(&ctx, &over(&phi1), &over(&Q::or(phi2.clone(), psi.clone()))).is_ok());
        }
    }

    /// Existential VCs agree with direct search.
    fn existential_vc_matches_search(q in formula(2)) {
        let q = q.subst_var("b", &Q::var("a"));
        let vc = Vc::new(
            vec![Binder::exists("a", BaseType::Int, Q::True), Binder::exists(NU, BaseType::Int, Q::True)],
            q.subst_nu(&Q::var(NU)),
        );
        let found = (-8..=8).any(|a| (-8..=8).any(|n| {
            q.holds(&vec![("a".to_string(), SV::Int(a))], Some(&SV::Int(n))).unwrap()
        }));
        let v = decide_bounded(&vc, 8);
        prop_assert!(matches!(v, Verdict::Valid | Verdict::Invalid(_)));
        prop_assert_eq!(v.is_valid(), found);
    }
}

// ----- programs --------------------------------------------------------

/// A small surface language with its own evaluator.
#[derive(Clone, Debug)]
enum E {
    Int(i64),
    Var(String),
    Gen,
    Range(i64, i64),
    Add(Box<E>, Box<E>),
    Sub(Box<E>, Box<E>),
    If(Box<B>, Box<E>, Box<E>),
    Let(String, Box<E>, Box<E>),
}

#[derive(Clone, Debug)]
enum B {
    Lit(bool),
    Gen,
    Le(E, E),
    Eq(E, E),
    Even(E),
}

/// `(flag, int)` computations.
#[derive(Clone, Debug)]
enum M {
    Ret(bool, E),
    Bind(String, Box<M>, Box<M>),
    Assert(i64, E),
}

fn gen_e(depth: u32, scope: Vec<String>) -> BoxedStrategy<E> {
    let mut leaves: Vec<BoxedStrategy<E>> = vec![
        (-3i64..=3).prop_map(E::Int).boxed(),
        Just(E::Gen).boxed(),
        (-2i64..=2, 0i64..=2)
            .prop_map(|(lo, d)| E::Range(lo, lo + d))
            .boxed(),
    ];
    if !scope.is_empty() {
        leaves.push(
            proptest::sample::select(scope.clone())
                .prop_map(E::Var)
                .boxed(),
        );
    }
    let leaf = proptest::strategy::Union::new(leaves).boxed();
    if depth == 0 {
        return leaf;
    }
    let sub = gen_e(depth - 1, scope.clone());
    let name = format!("x{}", scope.len());
    let mut inner = scope.clone();
    inner.push(name.clone());
    let body = gen_e(depth - 1, inner);
    prop_oneof![
        3 => leaf,
        1 => (sub.clone(), sub.clone()).prop_map(|(a, b)| E::Add(Box::new(a), Box::new(b))),
        1 => (sub.clone(), sub.clone()).prop_map(|(a, b)| E::Sub(Box::new(a), Box::new(b))),
        1 => (gen_b(depth - 1, scope.clone()), sub.clone(), sub.clone())
            .prop_map(|(c, a, b)| E::If(Box::new(c), Box::new(a), Box::new(b))),
        1 => (sub, body).prop_map(move |(a, b)| E::Let(name.clone(), Box::new(a), Box::new(b))),
    ]
    .boxed()
}

fn gen_b(depth: u32, scope: Vec<String>) -> BoxedStrategy<B> {
    let e = gen_e(depth, scope);
    prop_oneof![
        any::<bool>().prop_map(B::Lit),
        Just(B::Gen),
        (e.clone(), e.clone()).prop_map(|(a, b)| B::Le(a, b)),
        (e.clone(), e.clone()).prop_map(|(a, b)| B::Eq(a, b)),
        e.prop_map(B::Even),
    ]
    .boxed()
}

fn gen_m(depth: u32, scope: Vec<String>) -> BoxedStrategy<M> {
    let leaf = prop_oneof![
        (any::<bool>(), gen_e(1, scope.clone())).prop_map(|(f, e)| M::Ret(f, e)),
        (-2i64..=2, gen_e(1, scope.clone())).prop_map(|(k, e)| M::Assert(k, e)),
    ]
    .boxed();
    if depth == 0 {
        return leaf;
    }
    let name = format!("m{}", scope.len());
    let mut inner = scope.clone();
    inner.push(name.clone());
    prop_oneof![
        1 => leaf,
        2 => (gen_m(depth - 1, scope), gen_m(depth - 1, inner))
            .prop_map(move |(a, b)| M::Bind(name.clone(), Box::new(a), Box::new(b))),
    ]
    .boxed()
}

fn show_e(e: &E) -> String {
    match e {
        E::Int(n) if *n < 0 => format!("({n})"),
        E::Int(n) => n.to_string(),
        E::Var(x) => x.clone(),
        E::Gen => "(int_gen ())".into(),
        E::Range(lo, hi) => format!("(int_range ({lo}) ({hi}))"),
        E::Add(a, b) => format!("({} + {})", show_e(a), show_e(b)),
        E::Sub(a, b) => format!("({} - {})", show_e(a), show_e(b)),
        E::If(c, a, b) => format!("(if {} then {} else {})", show_b(c), show_e(a), show_e(b)),
        E::Let(x, a, b) => format!("(let {x} = {} in {})", show_e(a), show_e(b)),
    }
}

fn show_b(b: &B) -> String {
    match b {
        B::Lit(v) => v.to_string(),
        B::Gen => "(bool_gen ())".into(),
        B::Le(x, y) => format!("({} <= {})", show_e(x), show_e(y)),
        B::Eq(x, y) => format!("({} == {})", show_e(x), show_e(y)),
        B::Even(x) => format!("(is_even {})", show_e(x)),
    }
}

fn show_m(m: &M) -> String {
    match m {
        M::Ret(f, e) => format!("({f}, {})", show_e(e)),
        M::Bind(x, a, b) => format!("(let* {x} = {} in {})", show_m(a), show_m(b)),
        M::Assert(k, e) => format!("(assert {{int | v <= {k}}} {})", show_e(e)),
    }
}

type Env = Vec<(String, i64)>;

fn lookup(env: &Env, x: &str) -> i64 {
    env.iter()
        .rev()
        .find(|(n, _)| n == x)
        .map(|(_, v)| *v)
        .expect("generated names are bound")
}

fn eval_e(e: &E, env: &Env, w: i64) -> BTreeSet<i64> {
    let lift2 = |a: &E, b: &E, f: fn(i64, i64) -> i64| {
        let (xs, ys) = (eval_e(a, env, w), eval_e(b, env, w));
        xs.iter()
            .flat_map(|x| ys.iter().map(move |y| f(*x, *y)))
            .collect()
    };
    match e {
        E::Int(n) => [*n].into(),
        E::Var(x) => [lookup(env, x)].into(),
        E::Gen => (-w..=w).collect(),
        E::Range(lo, hi) => (*lo..=*hi).collect(),
        E::Add(a, b) => lift2(a, b, |x, y| x + y),
        E::Sub(a, b) => lift2(a, b, |x, y| x - y),
        E::If(c, a, b) => {
            let cs = eval_b(c, env, w);
            let mut out = BTreeSet::new();
            if cs.contains(&true) {
                out.extend(eval_e(a, env, w));
            }
            if cs.contains(&false) {
                out.extend(eval_e(b, env, w));
            }
            out
        }
        E::Let(x, a, b) => {
            let mut out = BTreeSet::new();
            for v in eval_e(a, env, w) {
                let mut inner = env.clone();
                inner.push((x.clone(), v));
                out.extend(eval_e(b, &inner, w));
            }
            out
        }
    }
}

fn eval_b(b: &B, env: &Env, w: i64) -> BTreeSet<bool> {
    let rel = |x: &E, y: &E, f: fn(i64, i64) -> bool| {
        let (xs, ys) = (eval_e(x, env, w), eval_e(y, env, w));
        xs.iter()
            .flat_map(|a| ys.iter().map(move |b| f(*a, *b)))
            .collect()
    };
    match b {
        B::Lit(v) => [*v].into(),
        B::Gen => [false, true].into(),
        B::Le(x, y) => rel(x, y, |a, b| a <= b),
        B::Eq(x, y) => rel(x, y, |a, b| a == b),
        B::Even(x) => eval_e(x, env, w)
            .into_iter()
            .map(|n| n.rem_euclid(2) == 0)
            .collect(),
    }
}

fn eval_m(m: &M, env: &Env, w: i64) -> BTreeSet<(bool, i64)> {
    match m {
        M::Ret(f, e) => eval_e(e, env, w).into_iter().map(|n| (*f, n)).collect(),
        M::Assert(k, e) => eval_e(e, env, w)
            .into_iter()
            .map(|n| (n <= *k, n))
            .collect(),
        M::Bind(x, a, b) => {
            let mut out = BTreeSet::new();
            for (ok, v) in eval_m(a, env, w) {
                if ok {
                    let mut inner = env.clone();
                    inner.push((x.clone(), v));
                    out.extend(eval_m(b, &inner, w));
                } else {
                    out.insert((false, v));
                }
            }
            out
        }
    }
}

/// Upper bound on the execution paths of `e` at window `w`. The
/// interpreter explores paths while the reference works on value sets, so
/// programs with many generators are skipped to keep each case cheap.
fn paths_e(e: &E, w: i64) -> u64 {
    match e {
        E::Int(_) | E::Var(_) => 1,
        E::Gen => (2 * w + 1) as u64,
        E::Range(lo, hi) => (hi - lo + 1) as u64,
        E::Add(a, b) | E::Sub(a, b) | E::Let(_, a, b) => {
            paths_e(a, w).saturating_mul(paths_e(b, w))
        }
        E::If(c, a, b) => paths_b(c, w).saturating_mul(paths_e(a, w).max(paths_e(b, w))),
    }
}

fn paths_b(b: &B, w: i64) -> u64 {
    match b {
        B::Lit(_) => 1,
        B::Gen => 2,
        B::Le(x, y) | B::Eq(x, y) => paths_e(x, w).saturating_mul(paths_e(y, w)),
        B::Even(x) => paths_e(x, w),
    }
}

fn paths_m(m: &M, w: i64) -> u64 {
    match m {
        M::Ret(_, e) | M::Assert(_, e) => paths_e(e, w),
        M::Bind(_, a, b) => paths_m(a, w).saturating_mul(paths_m(b, w)),
    }
}

const MAX_PATHS: u64 = 4096;

fn run(src: &str, w: i64) -> BTreeSet<SV> {
    let t = elaborate_expr(&parse_expr(src).unwrap_or_else(|e| panic!("{src}: {e}"))).unwrap();
    let r = outcomes(&t, w).unwrap();
    assert!(!r.stuck, "{src} got stuck");
    r.values
}

proptest! {
    #![proptest_config(config())]

    /// Elaboration to A-normal form preserves the outcome set.
    fn anf_preserves_outcomes(e in gen_e(3, vec![]), w in 1i64..=3) {
        prop_assume!(paths_e(&e, w) <= MAX_PATHS);
        let src = show_e(&e);
        let expected: BTreeSet<SV> = eval_e(&e, &Vec::new(), w).into_iter().map(SV::Int).collect();
        prop_assert_eq!(run(&src, w), expected, "{}", src);
    }

    /// Desugaring of monadic bind preserves the outcome set.
    fn desugar_preserves_outcomes(m in gen_m(3, vec![]), w in 1i64..=2) {
        prop_assume!(paths_m(&m, w) <= MAX_PATHS);
        let src = show_m(&m);
        let expected: BTreeSet<SV> = eval_m(&m, &Vec::new(), w)
            .into_iter()
            .map(|(f, n)| SV::pair(SV::Bool(f), SV::Int(n)))
            .collect();
        prop_assert_eq!(run(&src, w), expected, "{}", src);
    }

    /// Enlarging the window never loses outcomes.
    fn window_monotonicity(e in gen_e(3, vec![]), w in 0i64..=2, dw in 1i64..=2) {
        prop_assume!(paths_e(&e, w + dw) <= MAX_PATHS);
        let src = show_e(&e);
        let small = run(&src, w);
        let large = run(&src, w + dw);
        prop_assert!(small.is_subset(&large), "{}", src);
    }
}

/// Every suite by name.
pub const SUITES: [(&str, fn()); 8] = [
    ("substitution_lemma", substitution_lemma),
    (
        "pinned_binder_matches_substitution",
        pinned_binder_matches_substitution,
    ),
    ("sub_base_cover", sub_base_cover),
    ("sub_base_over", sub_base_over),
    (
        "existential_vc_matches_search",
        existential_vc_matches_search,
    ),
    ("anf_preserves_outcomes", anf_preserves_outcomes),
    ("desugar_preserves_outcomes", desugar_preserves_outcomes),
    ("window_monotonicity", window_monotonicity),
];
