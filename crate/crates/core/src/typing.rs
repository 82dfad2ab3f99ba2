//! Algorithmic coverage type checking.
//!
//! Terms are checked against a goal by synthesizing a coverage type for
//! them, binding every intermediate result in the context, and comparing
//! the synthesized type with the goal once at the end. Subtyping becomes a
//! quantified verification condition over the context; see [`vc`].
//!
//! Each binding carries two facts used to keep VCs small and sound:
//! `exact` says the binding's qualifier describes its outcomes precisely
//! (not just a lower bound), and `total` says the qualifier is non-empty
//! under every valuation of the bindings before it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::builtins::Builtin;
use crate::core_term::{Const, CoreTerm, Lambda, Value};
use crate::erasure::basic_type_with;
use crate::qualifier::{Qualifier as Q, SemanticValue, SortEnv, NU};
use crate::rtype::RType;
use crate::syntax::{BaseType, Span};
use crate::vc::{self, Binder, Matrix, Quant, Vc, Verdict, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BindKind {
    Over,
    Cover,
    Fun,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Linearity {
    Many,
    /// May be consumed by an under-parameter application.
    AtMostOnce,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub name: String,
    pub kind: BindKind,
    pub rtype: RType,
    pub linearity: Linearity,
    pub exact: bool,
    pub total: bool,
}

impl Binding {
    pub fn new(name: impl Into<String>, rtype: RType, exact: bool, total: bool) -> Self {
        let kind = match &rtype {
            RType::Over { .. } => BindKind::Over,
            RType::Cover { .. } => BindKind::Cover,
            _ => BindKind::Fun,
        };
        let linearity = if kind == BindKind::Cover {
            Linearity::AtMostOnce
        } else {
            Linearity::Many
        };
        Binding {
            name: name.into(),
            kind,
            rtype,
            linearity,
            exact,
            total,
        }
    }

    fn base(&self) -> Option<(&BaseType, &Q)> {
        self.rtype.as_base()
    }

    /// The qualifier with `ν` replaced by the binding's own name.
    fn bound(&self) -> Option<Q> {
        self.base()
            .map(|(_, q)| q.subst_nu(&Q::var(self.name.clone())))
    }

    fn mentions(&self) -> BTreeSet<String> {
        self.rtype.free_vars()
    }

    /// Values of an over binding always satisfy its qualifier; a coverage
    /// binding only does when it is exact.
    fn precise(&self) -> bool {
        self.kind != BindKind::Cover || self.exact
    }
}

/// Ordered typing context plus the names consumed by under-parameter
/// applications.
#[derive(Clone, Debug, Default)]
pub struct Ctx {
    pub bindings: Vec<Binding>,
    pub consumed: BTreeSet<String>,
}

impl Ctx {
    pub fn new() -> Self {
        Ctx::default()
    }

    pub fn lookup(&self, name: &str) -> Option<&Binding> {
        self.bindings.iter().rev().find(|b| b.name == name)
    }

    pub fn sort_env(&self) -> SortEnv {
        let mut env = SortEnv::new();
        for b in &self.bindings {
            if let Some((s, _)) = b.base() {
                env.insert(b.name.clone(), s.clone());
            }
        }
        env
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("{rule}: verification condition #{id} is invalid{}", witness_text(.witness))]
    VcInvalid {
        rule: &'static str,
        id: usize,
        witness: Option<Witness>,
        span: Option<Span>,
    },
    #[error("{rule}: verification condition #{id} is inconclusive ({reason})")]
    Inconclusive {
        rule: &'static str,
        id: usize,
        reason: String,
        span: Option<Span>,
    },
    #[error("argument to under-parameter reused: `{name}`")]
    Linearity { name: String, span: Option<Span> },
    #[error("empty coverage for `{name}`: its qualifier has no value")]
    EmptyCoverage { name: String, span: Option<Span> },
    #[error("expected {expected}, found {found}")]
    KindMismatch {
        expected: String,
        found: String,
        span: Option<Span>,
    },
    #[error("unbound name `{0}`")]
    Unbound(String),
    #[error("ill-formed type: {0}")]
    IllFormed(String),
    #[error("basic typing: {0}")]
    Basic(String),
    #[error("cannot establish an over-approximate type: {0}")]
    NotExact(String),
    #[error("lambda `{0}` needs a result annotation")]
    NeedsAnnotation(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

fn witness_text(w: &Option<Witness>) -> String {
    match w {
        None => String::new(),
        Some(w) if w.is_empty() => String::new(),
        Some(w) => {
            let parts: Vec<String> = w
                .iter()
                .map(|(x, v)| format!("{} = {v}", if x == NU { "v" } else { x.as_str() }))
                .collect();
            format!(" (counterexample: {})", parts.join(", "))
        }
    }
}

impl TypeError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            TypeError::VcInvalid { .. } => "vc-invalid",
            TypeError::Inconclusive { .. } => "inconclusive",
            TypeError::Linearity { .. } => "linearity",
            TypeError::EmptyCoverage { .. } => "empty-coverage",
            TypeError::KindMismatch { .. } => "kind-mismatch",
            TypeError::Unbound(_) => "unbound",
            TypeError::IllFormed(_) => "ill-formed",
            TypeError::Basic(_) => "basic-typing",
            TypeError::NotExact(_) => "not-exact",
            TypeError::NeedsAnnotation(_) => "needs-annotation",
            TypeError::Unsupported(_) => "unsupported",
        }
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, TypeError::Inconclusive { .. })
    }

    pub fn span(&self) -> Option<Span> {
        match self {
            TypeError::VcInvalid { span, .. }
            | TypeError::Inconclusive { span, .. }
            | TypeError::Linearity { span, .. }
            | TypeError::EmptyCoverage { span, .. }
            | TypeError::KindMismatch { span, .. } => *span,
            _ => None,
        }
    }
}

/// A VC decision procedure.
pub trait Decider {
    fn decide(&mut self, vc: &Vc) -> Verdict;
    fn method(&self) -> String;
}

/// Enumeration over the integer window.
#[derive(Clone, Copy, Debug)]
pub struct BoundedDecider {
    pub window: i64,
}

impl Decider for BoundedDecider {
    fn decide(&mut self, vc: &Vc) -> Verdict {
        vc::decide_bounded(vc, self.window)
    }

    fn method(&self) -> String {
        format!("bounded(w={})", self.window)
    }
}

#[derive(Clone, Debug)]
pub struct VcRecord {
    pub id: usize,
    pub rule: &'static str,
    pub vc: Vc,
    pub verdict: Verdict,
    pub method: String,
    pub span: Option<Span>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckOptions {
    pub window: i64,
    /// Over-parameter arguments must cover the whole declared domain.
    pub strict_overapp: bool,
    /// `assert` yields `(flag, ())`.
    pub assert_unit_payload: bool,
}

impl CheckOptions {
    pub fn new(window: i64) -> Self {
        CheckOptions {
            window,
            strict_overapp: false,
            assert_unit_payload: false,
        }
    }
}

/// Synthesized type of a term.
#[derive(Clone, Debug)]
struct Syn {
    ty: RType,
    exact: bool,
    total: bool,
}

fn base_mismatch(expected: &BaseType, found: &BaseType, span: Option<Span>) -> TypeError {
    TypeError::KindMismatch {
        expected: expected.to_string(),
        found: found.to_string(),
        span,
    }
}

/// `path` equals the value `v`.
fn pin(path: Q, v: &SemanticValue) -> Q {
    match v {
        SemanticValue::Unit => Q::True,
        SemanticValue::Pair(a, b) => Q::and(pin(Q::fst(path.clone()), a), pin(Q::snd(path), b)),
        other => Q::eq(path, other.as_term().expect("bool or int")),
    }
}

/// `ν = t` or `ν ⇔ t` with `t` not mentioning `ν`.
fn pinned_term(q: &Q) -> Option<Q> {
    match q {
        Q::Eq(a, b) | Q::Iff(a, b) if **a == Q::Nu && !b.mentions_nu() => Some((**b).clone()),
        Q::Eq(a, b) | Q::Iff(a, b) if **b == Q::Nu && !a.mentions_nu() => Some((**a).clone()),
        _ => None,
    }
}

pub struct Checker<'a> {
    pub opts: CheckOptions,
    decider: &'a mut dyn Decider,
    pub log: Vec<VcRecord>,
    spans: BTreeMap<String, Span>,
    span: Option<Span>,
    fresh: usize,
}

impl<'a> Checker<'a> {
    pub fn new(opts: CheckOptions, decider: &'a mut dyn Decider) -> Self {
        Checker {
            opts,
            decider,
            log: Vec::new(),
            spans: BTreeMap::new(),
            span: None,
            fresh: 0,
        }
    }

    pub fn with_spans(mut self, spans: BTreeMap<String, Span>) -> Self {
        self.spans = spans;
        self
    }

    fn fresh(&mut self, base: &str) -> String {
        self.fresh += 1;
        format!("%{base}{}", self.fresh)
    }

    fn at(&mut self, name: &str) {
        if let Some(s) = self.spans.get(name) {
            self.span = Some(*s);
        }
    }

    // ----- VC plumbing -------------------------------------------------

    fn decide(&mut self, rule: &'static str, vc: Vc) -> (usize, Verdict) {
        let verdict = self.decider.decide(&vc);
        let id = self.log.len() + 1;
        self.log.push(VcRecord {
            id,
            rule,
            vc,
            verdict: verdict.clone(),
            method: self.decider.method(),
            span: self.span,
        });
        (id, verdict)
    }

    /// Decide and require validity.
    fn require(&mut self, rule: &'static str, vc: Vc) -> Result<(), TypeError> {
        let (id, verdict) = self.decide(rule, vc);
        match verdict {
            Verdict::Valid => Ok(()),
            Verdict::Invalid(witness) => Err(TypeError::VcInvalid {
                rule,
                id,
                witness,
                span: self.span,
            }),
            Verdict::WindowInsufficient { literal } => Err(TypeError::Inconclusive {
                rule,
                id,
                reason: format!("literal {literal} lies outside the window"),
                span: self.span,
            }),
            Verdict::Unknown(reason) => Err(TypeError::Inconclusive {
                rule,
                id,
                reason,
                span: self.span,
            }),
        }
    }

    /// Bindings whose qualifiers can affect formulas over `seeds`.
    fn slice<'c>(&self, ctx: &'c Ctx, seeds: BTreeSet<String>) -> Vec<&'c Binding> {
        let mut extra: BTreeSet<String> = BTreeSet::new();
        loop {
            let mut relevant: BTreeSet<String> =
                seeds.iter().chain(extra.iter()).cloned().collect();
            for b in ctx.bindings.iter().rev() {
                if b.kind != BindKind::Fun && relevant.contains(&b.name) {
                    relevant.extend(b.mentions());
                }
            }
            let mut grew = false;
            for b in &ctx.bindings {
                if b.kind == BindKind::Cover
                    && !b.total
                    && !relevant.contains(&b.name)
                    && b.mentions().iter().any(|x| relevant.contains(x))
                {
                    extra.insert(b.name.clone());
                    grew = true;
                }
            }
            if !grew {
                return ctx
                    .bindings
                    .iter()
                    .filter(|b| b.kind != BindKind::Fun && relevant.contains(&b.name))
                    .collect();
            }
        }
    }

    fn binder(b: &Binding, quant: Quant) -> Binder {
        let (sort, _) = b.base().expect("base binding");
        Binder {
            quant,
            name: b.name.clone(),
            sort: sort.clone(),
            bound: b.bound().expect("base binding"),
        }
    }

    /// Over bindings that do not depend on coverage bindings go first.
    fn split_hoisted<'c>(kept: &[&'c Binding]) -> (Vec<&'c Binding>, Vec<&'c Binding>) {
        let mut hoisted = Vec::new();
        let mut rest = Vec::new();
        let mut blocked: BTreeSet<String> = BTreeSet::new();
        for b in kept {
            let deps_blocked = b.mentions().iter().any(|x| blocked.contains(x));
            if b.kind == BindKind::Over && !deps_blocked {
                hoisted.push(*b);
            } else {
                blocked.insert(b.name.clone());
                rest.push(*b);
            }
        }
        (hoisted, rest)
    }

    fn quant_of(b: &Binding) -> Quant {
        if b.kind == BindKind::Cover {
            Quant::Exists
        } else {
            Quant::Forall
        }
    }

    /// `Γ ⊢ [b | φ1] <: [b | φ2]`: every value of φ2 is covered by φ1.
    pub fn cover_vc(&self, ctx: &Ctx, base: &BaseType, phi1: &Q, phi2: &Q) -> Vc {
        let nu = Q::var(NU);
        let (p1, p2) = (phi1.subst_nu(&nu), phi2.subst_nu(&nu));
        let mut seeds = p1.free_vars();
        seeds.extend(p2.free_vars());
        seeds.remove(NU);
        let kept = self.slice(ctx, seeds);
        let (hoisted, rest) = Self::split_hoisted(&kept);
        let mut prefix: Vec<Binder> = hoisted
            .iter()
            .map(|b| Self::binder(b, Quant::Forall))
            .collect();
        let rest_names: BTreeSet<&str> = rest.iter().map(|b| b.name.as_str()).collect();
        let framed = p2
            .free_vars()
            .iter()
            .any(|x| rest_names.contains(x.as_str()));
        let block: Vec<Binder> = rest
            .iter()
            .map(|b| Self::binder(b, Self::quant_of(b)))
            .collect();
        if framed {
            prefix.push(Binder::forall(NU, base.clone(), Q::True));
            Vc {
                prefix,
                matrix: Matrix::SelfFramed {
                    block,
                    premise: p2.clone(),
                    conclusion: Q::and(p2, p1),
                },
            }
        } else {
            prefix.push(Binder::forall(NU, base.clone(), p2));
            prefix.extend(block);
            Vc::new(prefix, p1)
        }
    }

    /// `Γ ⊢ {b | φ1} <: {b | φ2}`: every value of φ1 satisfies φ2.
    pub fn over_vc(&self, ctx: &Ctx, base: &BaseType, phi1: &Q, phi2: &Q) -> Result<Vc, TypeError> {
        let nu = Q::var(NU);
        let (p1, p2) = (phi1.subst_nu(&nu), phi2.subst_nu(&nu));
        let mut seeds = p1.free_vars();
        seeds.extend(p2.free_vars());
        seeds.remove(NU);
        let kept = self.slice(ctx, seeds);
        if let Some(b) = kept.iter().find(|b| !b.precise()) {
            return Err(TypeError::NotExact(format!(
                "`{}` is only known to cover `{}`, not to be bounded by it",
                b.name, b.rtype
            )));
        }
        let mut prefix: Vec<Binder> = kept
            .iter()
            .map(|b| Self::binder(b, Quant::Forall))
            .collect();
        prefix.push(Binder::forall(NU, base.clone(), p1));
        Ok(Vc::new(prefix, p2))
    }

    /// `∃ν. φ` under the context: overs universal, coverage existential.
    fn nonempty_vc(&self, ctx: &Ctx, base: &BaseType, phi: &Q) -> Vc {
        let p = phi.subst_nu(&Q::var(NU));
        let mut seeds = p.free_vars();
        seeds.remove(NU);
        let kept = self.slice(ctx, seeds);
        let (hoisted, rest) = Self::split_hoisted(&kept);
        let mut prefix: Vec<Binder> = hoisted
            .iter()
            .map(|b| Self::binder(b, Quant::Forall))
            .collect();
        prefix.extend(rest.iter().map(|b| Self::binder(b, Self::quant_of(b))));
        prefix.push(Binder::exists(NU, base.clone(), p));
        Vc::new(prefix, Q::True)
    }

    pub fn sub_base(&mut self, ctx: &Ctx, t1: &RType, t2: &RType) -> Result<(), TypeError> {
        match (t1, t2) {
            (RType::Cover { base: b1, qual: q1 }, RType::Cover { base: b2, qual: q2 }) => {
                if b1 != b2 {
                    return Err(base_mismatch(b2, b1, self.span));
                }
                let vc = self.cover_vc(ctx, b1, q1, q2);
                self.require("SubBase", vc)
            }
            (RType::Over { base: b1, qual: q1 }, RType::Over { base: b2, qual: q2 }) => {
                if b1 != b2 {
                    return Err(base_mismatch(b2, b1, self.span));
                }
                let vc = self.over_vc(ctx, b1, q1, q2)?;
                self.require("SubBase", vc)
            }
            _ => Err(TypeError::KindMismatch {
                expected: t2.describe(),
                found: t1.describe(),
                span: self.span,
            }),
        }
    }

    pub fn sub_type(&mut self, ctx: &Ctx, t1: &RType, t2: &RType) -> Result<(), TypeError> {
        match (t1, t2) {
            (RType::Over { .. }, RType::Over { .. })
            | (RType::Cover { .. }, RType::Cover { .. }) => self.sub_base(ctx, t1, t2),
            (
                RType::OverArrow {
                    param: p1,
                    base: b1,
                    qual: q1,
                    cod: c1,
                },
                RType::OverArrow {
                    param: p2,
                    base: b2,
                    qual: q2,
                    cod: c2,
                },
            ) => {
                if b1 != b2 {
                    return Err(base_mismatch(b2, b1, self.span));
                }
                self.sub_base(
                    ctx,
                    &RType::over(b2.clone(), q2.clone()),
                    &RType::over(b1.clone(), q1.clone()),
                )?;
                let p = self.fresh("p");
                let mut inner = ctx.clone();
                inner.bindings.push(Binding::new(
                    p.clone(),
                    RType::over(b2.clone(), q2.clone()),
                    true,
                    false,
                ));
                let c1 = c1.subst_var(p1, &Q::var(p.clone()));
                let c2 = c2.subst_var(p2, &Q::var(p));
                self.sub_type(&inner, &c1, &c2)
            }
            (
                RType::UnderArrow {
                    base: b1,
                    qual: q1,
                    cod: c1,
                },
                RType::UnderArrow {
                    base: b2,
                    qual: q2,
                    cod: c2,
                },
            ) => {
                if b1 != b2 {
                    return Err(base_mismatch(b2, b1, self.span));
                }
                self.sub_base(
                    ctx,
                    &RType::cover(b2.clone(), q2.clone()),
                    &RType::cover(b1.clone(), q1.clone()),
                )?;
                self.sub_type(ctx, c1, c2)
            }
            (
                RType::HoArrow {
                    dom: d1, cod: c1, ..
                },
                RType::HoArrow {
                    dom: d2, cod: c2, ..
                },
            ) => {
                self.sub_type(ctx, d2, d1)?;
                self.sub_type(ctx, c1, c2)
            }
            _ => Err(TypeError::KindMismatch {
                expected: t2.describe(),
                found: t1.describe(),
                span: self.span,
            }),
        }
    }

    // ----- context maintenance -----------------------------------------

    fn check_not_consumed(
        &self,
        ctx: &Ctx,
        names: impl IntoIterator<Item = String>,
    ) -> Result<(), TypeError> {
        for x in names {
            if ctx.consumed.contains(&x) {
                return Err(TypeError::Linearity {
                    name: x,
                    span: self.span,
                });
            }
        }
        Ok(())
    }

    /// Add a binding, checking linearity and (unless known total) that
    /// its coverage is non-empty.
    fn push(&mut self, ctx: &mut Ctx, b: Binding) -> Result<(), TypeError> {
        self.check_not_consumed(ctx, b.mentions())?;
        let needs_check = b.kind == BindKind::Cover && !b.total;
        if let (true, Some((base, q))) = (needs_check, b.base()) {
            let (base, q) = (base.clone(), q.clone());
            let vc = self.nonempty_vc(ctx, &base, &q);
            let (id, verdict) = self.decide("WfUBaseCtx", vc);
            match verdict {
                Verdict::Valid => {}
                Verdict::Invalid(_) => {
                    return Err(TypeError::EmptyCoverage {
                        name: b.name,
                        span: self.span,
                    })
                }
                Verdict::WindowInsufficient { literal } => {
                    return Err(TypeError::Inconclusive {
                        rule: "WfUBaseCtx",
                        id,
                        reason: format!("literal {literal} lies outside the window"),
                        span: self.span,
                    })
                }
                Verdict::Unknown(reason) => {
                    return Err(TypeError::Inconclusive {
                        rule: "WfUBaseCtx",
                        id,
                        reason,
                        span: self.span,
                    })
                }
            }
        }
        ctx.bindings.push(b);
        Ok(())
    }

    /// Mark `x` and every coverage binding connected to it as consumed.
    fn consume(&self, ctx: &mut Ctx, x: &str) {
        let covers: Vec<&Binding> = ctx
            .bindings
            .iter()
            .filter(|b| b.kind == BindKind::Cover)
            .collect();
        let mut comp: BTreeSet<String> = BTreeSet::new();
        comp.insert(x.into());
        loop {
            let mut grew = false;
            for b in &covers {
                let m = b.mentions();
                let linked = comp.contains(&b.name) || m.iter().any(|y| comp.contains(y));
                if linked {
                    for y in core::iter::once(b.name.clone()).chain(m) {
                        if covers.iter().any(|c| c.name == y) && comp.insert(y) {
                            grew = true;
                        }
                    }
                }
            }
            if !grew {
                break;
            }
        }
        ctx.consumed.extend(comp);
    }

    // ----- well-formedness ---------------------------------------------

    pub fn wf_type(&self, ctx: &Ctx, t: &RType) -> Result<(), TypeError> {
        fn go(env: &mut SortEnv, t: &RType) -> Result<(), TypeError> {
            let check = |env: &SortEnv, b: &BaseType, q: &Q| {
                q.check_formula(env, Some(b))
                    .map_err(|e| TypeError::IllFormed(format!("`{q}`: {e}")))
            };
            match t {
                RType::Over { base, qual } | RType::Cover { base, qual } => check(env, base, qual),
                RType::OverArrow {
                    param,
                    base,
                    qual,
                    cod,
                } => {
                    check(env, base, qual)?;
                    let saved = env.insert(param.clone(), base.clone());
                    let r = go(env, cod);
                    match saved {
                        Some(s) => {
                            env.insert(param.clone(), s);
                        }
                        None => {
                            env.remove(param);
                        }
                    }
                    r
                }
                RType::UnderArrow { base, qual, cod } => {
                    check(env, base, qual)?;
                    go(env, cod)
                }
                RType::HoArrow { dom, cod, .. } => {
                    if !dom.is_arrow() {
                        return Err(TypeError::IllFormed(format!(
                            "higher-order parameter of base type `{dom}`"
                        )));
                    }
                    go(env, dom)?;
                    go(env, cod)
                }
            }
        }
        go(&mut ctx.sort_env(), t)
    }

    /// Every coverage binding must be satisfiable under the bindings
    /// before it.
    pub fn wf_ctx(&mut self, ctx: &Ctx) -> Result<(), TypeError> {
        let mut prefix = Ctx::new();
        for b in &ctx.bindings {
            self.wf_type(&prefix, &b.rtype)?;
            let mut b = b.clone();
            b.total = false;
            self.push(&mut prefix, b)?;
        }
        Ok(())
    }

    // ----- synthesis ---------------------------------------------------

    fn value_term(&mut self, ctx: &mut Ctx, v: &Value) -> Result<(Q, BaseType), TypeError> {
        let syn = self.synth_value_inner(ctx, v)?;
        let Some((base, q)) = syn.ty.as_base() else {
            return Err(TypeError::KindMismatch {
                expected: "a base value".into(),
                found: syn.ty.describe(),
                span: self.span,
            });
        };
        let base = base.clone();
        if let Some(t) = v.as_term() {
            return Ok((t, base));
        }
        // Pairs and unit have no term syntax; name them.
        let tmp = self.fresh("a");
        let q = q.clone();
        self.push(
            ctx,
            Binding::new(tmp.clone(), RType::cover(base.clone(), q), syn.exact, true),
        )?;
        Ok((Q::var(tmp), base))
    }

    pub fn synth_value(&mut self, ctx: &mut Ctx, v: &Value) -> Result<RType, TypeError> {
        self.synth_value_inner(ctx, v).map(|s| s.ty)
    }

    fn synth_value_inner(&mut self, ctx: &mut Ctx, v: &Value) -> Result<Syn, TypeError> {
        match v {
            Value::Const(c) => Ok(Syn {
                ty: RType::cover(c.base(), c.exact_qual()),
                exact: true,
                total: true,
            }),
            Value::Var(x) => {
                self.check_not_consumed(ctx, [x.clone()])?;
                match ctx.lookup(x) {
                    Some(b) => match b.base() {
                        Some((base, _)) => Ok(Syn {
                            ty: RType::cover(base.clone(), Q::eq(Q::Nu, Q::var(x.clone()))),
                            exact: b.precise(),
                            total: true,
                        }),
                        None => Ok(Syn {
                            ty: b.rtype.clone(),
                            exact: b.exact,
                            total: true,
                        }),
                    },
                    None => match Builtin::from_name(x).and_then(|b| b.rtype()) {
                        Some(t) => Ok(Syn {
                            ty: t,
                            exact: true,
                            total: true,
                        }),
                        None if Builtin::from_name(x).is_some() => Err(TypeError::Unsupported(
                            format!("`{x}` must be applied to an argument"),
                        )),
                        None => Err(TypeError::Unbound(x.clone())),
                    },
                }
            }
            Value::Pair(a, b) => {
                let sa = self.synth_value_inner(ctx, a)?;
                let sb = self.synth_value_inner(ctx, b)?;
                match (sa.ty.as_base(), sb.ty.as_base()) {
                    (Some((ba, qa)), Some((bb, qb))) => Ok(Syn {
                        ty: RType::cover(
                            BaseType::prod(ba.clone(), bb.clone()),
                            Q::and(qa.subst_nu(&Q::fst(Q::Nu)), qb.subst_nu(&Q::snd(Q::Nu))),
                        ),
                        exact: sa.exact && sb.exact,
                        total: true,
                    }),
                    _ => Err(TypeError::Unsupported("pairs of functions".into())),
                }
            }
            Value::Lambda(l) => {
                let ty = self.lambda_type(ctx, l)?;
                Ok(Syn {
                    ty,
                    exact: false,
                    total: true,
                })
            }
        }
    }

    /// The arrow type of a lambda: from its annotations when it has a
    /// result type, otherwise synthesized from the body.
    fn lambda_type(&mut self, ctx: &mut Ctx, l: &Lambda) -> Result<RType, TypeError> {
        self.wf_type(ctx, &l.param_ty)?;
        match &l.ret {
            Some(ret) => {
                let ty = arrow_of(&l.param, &l.param_ty, ret.clone()).ok_or_else(|| {
                    TypeError::IllFormed(format!(
                        "result type of `{}` mentions its coverage parameter",
                        l.param
                    ))
                })?;
                self.check_lambda(ctx, l, &ty)?;
                Ok(ty)
            }
            None => {
                let mut inner = ctx.clone();
                self.bind_param(&mut inner, &l.param, &l.param_ty)?;
                let mark = inner.bindings.len();
                let syn = self.synth(&mut inner, &l.body)?;
                absorb_consumed(ctx, &inner);
                let locals = &inner.bindings[mark..];
                let cod = eliminate_locals(syn.ty, locals)
                    .ok_or_else(|| TypeError::NeedsAnnotation(l.param.clone()))?;
                arrow_of(&l.param, &l.param_ty, cod)
                    .ok_or_else(|| TypeError::NeedsAnnotation(l.param.clone()))
            }
        }
    }

    fn bind_param(&mut self, ctx: &mut Ctx, name: &str, ty: &RType) -> Result<(), TypeError> {
        match ty {
            RType::Over { .. } => self.push(ctx, Binding::new(name, ty.clone(), true, false)),
            RType::Cover { .. } => self.push(ctx, Binding::new(name, ty.clone(), false, false)),
            _ => self.push(ctx, Binding::new(name, ty.clone(), false, true)),
        }
    }

    /// TFun: check a lambda against an arrow goal.
    fn check_lambda(&mut self, ctx: &mut Ctx, l: &Lambda, goal: &RType) -> Result<(), TypeError> {
        self.at(&l.param);
        let mut inner = ctx.clone();
        let cod = match (goal, &l.param_ty) {
            (
                RType::OverArrow {
                    param,
                    base,
                    qual,
                    cod,
                },
                RType::Over { base: lb, qual: lq },
            ) => {
                if base != lb {
                    return Err(base_mismatch(base, lb, self.span));
                }
                self.sub_base(
                    ctx,
                    &RType::over(base.clone(), qual.clone()),
                    &RType::over(lb.clone(), lq.clone()),
                )?;
                self.bind_param(
                    &mut inner,
                    &l.param,
                    &RType::over(base.clone(), qual.clone()),
                )?;
                cod.subst_var(param, &Q::var(l.param.clone()))
            }
            (RType::UnderArrow { base, qual, cod }, RType::Cover { base: lb, qual: lq }) => {
                if base != lb {
                    return Err(base_mismatch(base, lb, self.span));
                }
                self.sub_base(
                    ctx,
                    &RType::cover(base.clone(), qual.clone()),
                    &RType::cover(lb.clone(), lq.clone()),
                )?;
                self.bind_param(
                    &mut inner,
                    &l.param,
                    &RType::cover(base.clone(), qual.clone()),
                )?;
                (**cod).clone()
            }
            (RType::HoArrow { dom, cod, .. }, pt) if pt.is_arrow() => {
                self.sub_type(ctx, dom, pt)?;
                self.bind_param(&mut inner, &l.param, dom)?;
                (**cod).clone()
            }
            (g, pt) => {
                return Err(TypeError::KindMismatch {
                    expected: g.describe(),
                    found: format!("function with parameter type `{pt}`"),
                    span: self.span,
                })
            }
        };
        match &l.ret {
            Some(ret) => {
                self.wf_type(&inner, ret)?;
                self.check_in(&mut inner, &l.body, ret)?;
                self.sub_type(&inner, ret, &cod)?;
            }
            None => self.check_in(&mut inner, &l.body, &cod)?,
        }
        absorb_consumed(ctx, &inner);
        Ok(())
    }

    /// The type of the function position of an application, and whether
    /// it is an exact (builtin-derived) function.
    fn func_type(
        &mut self,
        ctx: &mut Ctx,
        f: &Value,
        arg: &Value,
    ) -> Result<(RType, bool), TypeError> {
        match f {
            Value::Var(x) => {
                self.check_not_consumed(ctx, [x.clone()])?;
                if let Some(b) = ctx.lookup(x) {
                    return match b.kind {
                        BindKind::Fun => Ok((b.rtype.clone(), b.exact)),
                        _ => Err(TypeError::KindMismatch {
                            expected: "a function".into(),
                            found: b.rtype.describe(),
                            span: self.span,
                        }),
                    };
                }
                let Some(bi) = Builtin::from_name(x) else {
                    return Err(TypeError::Unbound(x.clone()));
                };
                if let Some(t) = bi.rtype() {
                    return Ok((t, true));
                }
                let mut probe = ctx.clone();
                let syn = self.synth_value_inner(&mut probe, arg)?;
                let Some((sort, _)) = syn.ty.as_base() else {
                    return Err(TypeError::Basic(format!("`{x}` applied to a function")));
                };
                bi.instantiate(sort)
                    .map(|t| (t, true))
                    .map_err(TypeError::Basic)
            }
            Value::Lambda(l) => Ok((self.lambda_type(ctx, l)?, false)),
            other => Err(TypeError::KindMismatch {
                expected: "a function".into(),
                found: format!("`{}`", crate::pretty::pretty_value(other)),
                span: self.span,
            }),
        }
    }

    /// Bind the result of an application.
    fn bind_result(
        &mut self,
        ctx: &mut Ctx,
        bind: &str,
        cod: RType,
        exact_fn: bool,
    ) -> Result<(), TypeError> {
        match &cod {
            RType::Cover { .. } => self.push(ctx, Binding::new(bind, cod, exact_fn, exact_fn)),
            RType::Over { .. } => Err(TypeError::Unsupported(format!(
                "application result `{bind}` has over-approximate type `{cod}`"
            ))),
            _ => self.push(ctx, Binding::new(bind, cod, exact_fn, true)),
        }
    }

    fn synth(&mut self, ctx: &mut Ctx, t: &CoreTerm) -> Result<Syn, TypeError> {
        match t {
            CoreTerm::Val(v) => self.synth_value_inner(ctx, v),
            CoreTerm::LetApp {
                bind,
                func,
                arg,
                body,
            } => {
                self.at(bind);
                let (fty, exact_fn) = self.func_type(ctx, func, arg)?;
                match fty {
                    RType::OverArrow {
                        param,
                        base,
                        qual,
                        cod,
                    } => {
                        let (term, abase) = self.value_term(ctx, arg)?;
                        if abase != base {
                            return Err(base_mismatch(&base, &abase, self.span));
                        }
                        let exact_arg = Q::eq(Q::Nu, term.clone());
                        if self.opts.strict_overapp {
                            let vc = self.cover_vc(ctx, &base, &exact_arg, &qual);
                            self.require("TOverApp", vc)?;
                        } else if qual != Q::True {
                            let vc = self.over_vc(ctx, &base, &exact_arg, &qual)?;
                            self.require("TOverApp", vc)?;
                        }
                        self.bind_result(ctx, bind, cod.subst_var(&param, &term), exact_fn)?;
                    }
                    RType::UnderArrow { base, qual, cod } => {
                        let (term, abase) = self.value_term(ctx, arg)?;
                        if abase != base {
                            return Err(base_mismatch(&base, &abase, self.span));
                        }
                        let vc = self.cover_vc(ctx, &base, &Q::eq(Q::Nu, term), &qual);
                        self.require("TUnderApp", vc)?;
                        if let Value::Var(x) = arg {
                            if ctx.lookup(x).is_some() {
                                self.consume(ctx, x);
                            }
                        }
                        self.bind_result(ctx, bind, *cod, exact_fn)?;
                    }
                    RType::HoArrow { dom, cod, .. } => {
                        let aty = self.synth_value_inner(ctx, arg)?.ty;
                        self.sub_type(ctx, &aty, &dom)?;
                        self.bind_result(ctx, bind, *cod, exact_fn)?;
                    }
                    other => {
                        return Err(TypeError::KindMismatch {
                            expected: "a function".into(),
                            found: other.describe(),
                            span: self.span,
                        })
                    }
                }
                self.synth(ctx, body)
            }
            CoreTerm::LetTerm {
                bind,
                ascription,
                bound,
                body,
            } => {
                self.at(bind);
                match ascription {
                    Some(asc) => {
                        self.wf_type(ctx, asc)?;
                        self.check_in(ctx, bound, asc)?;
                        let b = match asc {
                            RType::Over { .. } => {
                                Binding::new(bind.clone(), asc.clone(), true, false)
                            }
                            RType::Cover { .. } => {
                                Binding::new(bind.clone(), asc.clone(), false, false)
                            }
                            _ => Binding::new(bind.clone(), asc.clone(), false, true),
                        };
                        self.push(ctx, b)?;
                    }
                    None => {
                        let syn = self.synth(ctx, bound)?;
                        self.at(bind);
                        let b = Binding::new(bind.clone(), syn.ty, syn.exact, syn.total);
                        self.push(ctx, b)?;
                    }
                }
                self.synth(ctx, body)
            }
            CoreTerm::LetPair {
                fst,
                snd,
                scrutinee,
                body,
            } => {
                self.at(fst);
                let syn = self.synth_value_inner(ctx, scrutinee)?;
                let Some((BaseType::Prod(a, b), _)) = syn.ty.as_base() else {
                    return Err(TypeError::KindMismatch {
                        expected: "a pair".into(),
                        found: syn.ty.describe(),
                        span: self.span,
                    });
                };
                let (a, b) = ((**a).clone(), (**b).clone());
                let (qa, qb) = match scrutinee {
                    Value::Pair(x, y) => {
                        let qa = self
                            .synth_value_inner(ctx, x)?
                            .ty
                            .as_base()
                            .map(|(_, q)| q.clone());
                        let qb = self
                            .synth_value_inner(ctx, y)?
                            .ty
                            .as_base()
                            .map(|(_, q)| q.clone());
                        (qa.unwrap_or(Q::True), qb.unwrap_or(Q::True))
                    }
                    _ => {
                        let (term, _) = self.value_term(ctx, scrutinee)?;
                        (
                            Q::eq(Q::Nu, Q::fst(term.clone())),
                            Q::eq(Q::Nu, Q::snd(term)),
                        )
                    }
                };
                self.push(
                    ctx,
                    Binding::new(fst.clone(), RType::cover(a, qa), syn.exact, true),
                )?;
                self.push(
                    ctx,
                    Binding::new(snd.clone(), RType::cover(b, qb), syn.exact, true),
                )?;
                self.synth(ctx, body)
            }
            CoreTerm::If { cond, then_, else_ } => self.synth_if(ctx, cond, then_, else_),
            CoreTerm::LetAssume {
                bind,
                base,
                qual,
                body,
            } => {
                self.at(bind);
                let ty = RType::cover(base.clone(), qual.clone());
                self.wf_type(ctx, &ty)?;
                self.push(ctx, Binding::new(bind.clone(), ty, true, false))?;
                self.synth(ctx, body)
            }
            CoreTerm::Assert { base, qual, value } => {
                let syn = self.synth_value_inner(ctx, value)?;
                let Some((vb, phi_v)) = syn.ty.as_base() else {
                    return Err(TypeError::KindMismatch {
                        expected: "a base value".into(),
                        found: syn.ty.describe(),
                        span: self.span,
                    });
                };
                if vb != base {
                    return Err(base_mismatch(base, vb, self.span));
                }
                self.wf_type(ctx, &RType::over(base.clone(), qual.clone()))?;
                let phi_v = phi_v.clone();
                let flag = Q::fst(Q::Nu);
                let q = if self.opts.assert_unit_payload {
                    let (term, _) = self.value_term(ctx, value)?;
                    let holds = qual.subst_nu(&term);
                    let ty = RType::cover(
                        BaseType::prod(BaseType::Bool, BaseType::Unit),
                        Q::or(
                            Q::and(flag.clone(), holds.clone()),
                            Q::and(Q::not(flag), Q::not(holds)),
                        ),
                    );
                    return Ok(Syn {
                        ty,
                        exact: syn.exact,
                        total: false,
                    });
                } else {
                    let snd = Q::snd(Q::Nu);
                    let ok = Q::and(phi_v.clone(), qual.clone()).subst_nu(&snd);
                    let err = Q::and(phi_v, Q::not(qual.clone())).subst_nu(&snd);
                    Q::or(Q::and(flag.clone(), ok), Q::and(Q::not(flag), err))
                };
                Ok(Syn {
                    ty: RType::cover(BaseType::prod(BaseType::Bool, base.clone()), q),
                    exact: syn.exact,
                    total: false,
                })
            }
        }
    }

    fn synth_if(
        &mut self,
        ctx: &mut Ctx,
        cond: &Value,
        then_: &CoreTerm,
        else_: &CoreTerm,
    ) -> Result<Syn, TypeError> {
        let c = match cond {
            Value::Var(x) => {
                self.check_not_consumed(ctx, [x.clone()])?;
                match ctx.lookup(x).map(|b| b.base().map(|(s, _)| s.clone())) {
                    Some(Some(BaseType::Bool)) => x.clone(),
                    Some(_) => {
                        return Err(TypeError::KindMismatch {
                            expected: "a bool condition".into(),
                            found: format!("`{x}`"),
                            span: self.span,
                        })
                    }
                    None => return Err(TypeError::Unbound(x.clone())),
                }
            }
            Value::Const(Const::Bool(b)) => {
                let tmp = self.fresh("c");
                let q = Const::Bool(*b).exact_qual();
                self.push(
                    ctx,
                    Binding::new(tmp.clone(), RType::cover(BaseType::Bool, q), true, true),
                )?;
                tmp
            }
            other => {
                return Err(TypeError::KindMismatch {
                    expected: "a bool condition".into(),
                    found: format!("`{}`", crate::pretty::pretty_value(other)),
                    span: self.span,
                })
            }
        };
        let cv = Q::var(c.clone());

        struct Branch {
            syn: Option<Syn>,
            locals: Vec<Binding>,
            consumed: BTreeSet<String>,
            definitive: bool,
        }

        let run = |this: &mut Self,
                   ctx: &Ctx,
                   polarity: bool,
                   t: &CoreTerm|
         -> Result<Branch, TypeError> {
            let mut inner = ctx.clone();
            let idx = inner
                .bindings
                .iter()
                .rposition(|b| b.name == c)
                .expect("condition is bound");
            let refined = {
                let b = &inner.bindings[idx];
                let (base, q) = b.base().expect("bool binding");
                let q = Q::and(
                    q.clone(),
                    Q::eq(Q::Nu, if polarity { Q::True } else { Q::False }),
                );
                match b.kind {
                    BindKind::Over => RType::over(base.clone(), q),
                    _ => RType::cover(base.clone(), q),
                }
            };
            inner.bindings[idx].rtype = refined;
            // Is the branch reachable at all?
            let seeds: BTreeSet<String> = core::iter::once(c.clone()).collect();
            let kept = this.slice(&inner, seeds);
            let definitive = kept.iter().all(|b| b.precise());
            let prefix: Vec<Binder> = kept
                .iter()
                .map(|b| Self::binder(b, Quant::Exists))
                .collect();
            let (_, verdict) = this.decide("TIf", Vc::new(prefix, Q::True));
            if verdict.is_invalid() {
                return Ok(Branch {
                    syn: None,
                    locals: Vec::new(),
                    consumed: BTreeSet::new(),
                    definitive,
                });
            }
            let mark = inner.bindings.len();
            let syn = this.synth(&mut inner, t)?;
            Ok(Branch {
                syn: Some(syn),
                locals: inner.bindings[mark..].to_vec(),
                consumed: inner.consumed,
                definitive: true,
            })
        };
        let snapshot = ctx.clone();
        let tb = run(self, &snapshot, true, then_)?;
        let eb = run(self, &snapshot, false, else_)?;

        let base = match (&tb.syn, &eb.syn) {
            (Some(a), Some(b)) => {
                let (ba, bb) = (a.ty.as_base(), b.ty.as_base());
                match (ba, bb) {
                    (Some((x, _)), Some((y, _))) if x == y => x.clone(),
                    (Some((x, _)), Some((y, _))) => return Err(base_mismatch(x, y, self.span)),
                    _ if a.ty == b.ty => {
                        // Both branches return the same function type.
                        ctx.consumed.extend(tb.consumed);
                        ctx.consumed.extend(eb.consumed);
                        return Ok(Syn {
                            ty: a.ty.clone(),
                            exact: false,
                            total: true,
                        });
                    }
                    _ => {
                        return Err(TypeError::Unsupported(
                            "branches returning different function types".into(),
                        ))
                    }
                }
            }
            (Some(s), None) | (None, Some(s)) => match s.ty.as_base() {
                Some((x, _)) => x.clone(),
                None => {
                    return Err(TypeError::Unsupported(
                        "a function-valued branch next to a dead one".into(),
                    ))
                }
            },
            (None, None) => {
                // Both branches dead: the context itself is empty here.
                return Ok(Syn {
                    ty: RType::cover(BaseType::Unit, Q::False),
                    exact: false,
                    total: false,
                });
            }
        };

        let qual_of = |b: &Branch| {
            b.syn
                .as_ref()
                .and_then(|s| s.ty.as_base().map(|(_, q)| q.clone()))
                .unwrap_or(Q::False)
        };
        let phi = Q::or(
            Q::and(cv.clone(), qual_of(&tb)),
            Q::and(Q::not(cv.clone()), qual_of(&eb)),
        );
        let exact = [&tb, &eb]
            .iter()
            .all(|b| b.definitive && b.syn.as_ref().is_none_or(|s| s.exact));

        for (branch, guard) in [(&tb, cv.clone()), (&eb, Q::not(cv.clone()))] {
            for l in &branch.locals {
                let mut l = l.clone();
                if let Some((sort, q)) = l.base() {
                    let default = pin(Q::Nu, &SemanticValue::default_of(sort));
                    let guarded = Q::or(
                        Q::and(guard.clone(), q.clone()),
                        Q::and(Q::not(guard.clone()), default),
                    );
                    l.rtype = match l.kind {
                        BindKind::Over => RType::over(sort.clone(), guarded),
                        _ => RType::cover(sort.clone(), guarded),
                    };
                }
                ctx.bindings.push(l);
            }
            ctx.consumed.extend(branch.consumed.iter().cloned());
        }
        Ok(Syn {
            ty: RType::cover(base, phi),
            exact,
            total: false,
        })
    }

    /// Check `t` against `goal` in `ctx`, leaving `ctx` unchanged apart
    /// from consumed names.
    fn check_in(&mut self, ctx: &mut Ctx, t: &CoreTerm, goal: &RType) -> Result<(), TypeError> {
        if let (CoreTerm::Val(Value::Lambda(l)), true) = (t, goal.is_arrow()) {
            return self.check_lambda(ctx, l, goal);
        }
        let mut inner = ctx.clone();
        let syn = self.synth(&mut inner, t)?;
        self.check_not_consumed(&inner, goal.free_vars())?;
        match (&syn.ty, goal) {
            (RType::Cover { base, qual }, RType::Over { .. }) => {
                if !syn.exact {
                    return Err(TypeError::NotExact(format!(
                        "the term is only known to cover `{qual}`, not to be bounded by it"
                    )));
                }
                self.sub_base(&inner, &RType::over(base.clone(), qual.clone()), goal)?;
            }
            _ => self.sub_type(&inner, &syn.ty, goal)?,
        }
        absorb_consumed(ctx, &inner);
        Ok(())
    }

    /// `Γ ⊢ t : goal`.
    pub fn check_term(&mut self, ctx: &Ctx, t: &CoreTerm, goal: &RType) -> Result<(), TypeError> {
        self.wf_type(ctx, goal)?;
        let mut ctx = ctx.clone();
        self.check_in(&mut ctx, t, goal)
    }
}

/// Carry consumption of outer names back from a nested scope.
fn absorb_consumed(ctx: &mut Ctx, inner: &Ctx) {
    let outer: Vec<String> = inner
        .consumed
        .iter()
        .filter(|x| ctx.lookup(x).is_some())
        .cloned()
        .collect();
    ctx.consumed.extend(outer);
}

/// Arrow with the given parameter; `None` when a coverage parameter would
/// escape into the codomain.
fn arrow_of(param: &str, param_ty: &RType, cod: RType) -> Option<RType> {
    Some(match param_ty {
        RType::Over { base, qual } => RType::over_arrow(param, base.clone(), qual.clone(), cod),
        RType::Cover { base, qual } => {
            if cod.free_vars().contains(param) {
                return None;
            }
            RType::under_arrow(base.clone(), qual.clone(), cod)
        }
        other => RType::ho_arrow(param, other.clone(), cod),
    })
}

/// Remove references to body-local bindings by substituting exact, total
/// `ν = t` bindings; `None` if some reference remains.
fn eliminate_locals(mut ty: RType, locals: &[Binding]) -> Option<RType> {
    for l in locals.iter().rev() {
        if !ty.free_vars().contains(&l.name) {
            continue;
        }
        let t = match l.base() {
            Some((_, q)) if l.exact && l.total => pinned_term(q)?,
            _ => return None,
        };
        ty = ty.subst_var(&l.name, &t);
    }
    let names: BTreeSet<&str> = locals.iter().map(|l| l.name.as_str()).collect();
    if ty.free_vars().iter().any(|x| names.contains(x.as_str())) {
        return None;
    }
    Some(ty)
}

/// Outcome of checking a whole program.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub result: Result<(), TypeError>,
    pub vcs: Vec<VcRecord>,
}

impl CheckReport {
    pub fn accepted(&self) -> bool {
        self.result.is_ok()
    }
}

/// Basic-type, then coverage-type check a closed term against `goal`.
pub fn check_program(
    term: &CoreTerm,
    goal: &RType,
    spans: &BTreeMap<String, Span>,
    opts: CheckOptions,
    decider: &mut dyn Decider,
) -> CheckReport {
    let mut checker = Checker::new(opts, decider).with_spans(spans.clone());
    let result = (|| {
        let basic =
            basic_type_with(term, opts.assert_unit_payload).map_err(|e| TypeError::Basic(e.0))?;
        let want = goal.erase();
        if basic != want {
            return Err(TypeError::Basic(format!(
                "program has type {basic}, goal has type {want}"
            )));
        }
        checker.check_term(&Ctx::new(), term, goal)
    })();
    CheckReport {
        result,
        vcs: checker.log,
    }
}

/// Convenience wrapper using the bounded decider.
pub fn check_bounded(term: &CoreTerm, goal: &RType, opts: CheckOptions) -> CheckReport {
    let mut d = BoundedDecider {
        window: opts.window,
    };
    check_program(term, goal, &BTreeMap::new(), opts, &mut d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anf::elaborate_program;
    use crate::parser::parse_program;

    fn check_src(src: &str, w: i64) -> CheckReport {
        let e = elaborate_program(&parse_program(src).unwrap()).unwrap();
        let mut d = BoundedDecider { window: w };
        check_program(&e.term, &e.goal, &e.spans, CheckOptions::new(w), &mut d)
    }

    fn accepts(src: &str, w: i64) -> bool {
        let r = check_src(src, w);
        if let Err(e) = &r.result {
            std::eprintln!("{src}\n  => {e}");
        }
        r.accepted()
    }

    #[test]
    fn generator_and_constant_judgments() {
        let goals = ["[int | true]", "[int | v == 1 || v == 2]", "[int | v == 1]"];
        let overs = ["{int | true}", "{int | v == 1 || v == 2}", "{int | v == 1}"];
        let gen = [true, true, true, true, false, false];
        let one = [false, false, true, true, true, true];
        for (i, g) in goals.iter().chain(overs.iter()).enumerate() {
            assert_eq!(
                accepts(&format!("check int_gen () : {g}"), 8),
                gen[i],
                "int_gen () : {g}"
            );
            assert_eq!(accepts(&format!("check 1 : {g}"), 8), one[i], "1 : {g}");
        }
    }

    fn subtype(t1: &str, t2: &str) -> bool {
        let (a, b) = (
            crate::parser::parse_rtype(t1).unwrap(),
            crate::parser::parse_rtype(t2).unwrap(),
        );
        let mut d = BoundedDecider { window: 8 };
        let mut c = Checker::new(CheckOptions::new(8), &mut d);
        c.sub_type(&Ctx::new(), &a, &b).is_ok()
    }

    #[test]
    fn arrow_subtyping() {
        // Over domains may strengthen.
        assert!(subtype(
            "x:{int | true} -> [bool | v <=> even(x)]",
            "x:{int | v == 3} -> [bool | v <=> even(x)]"
        ));
        assert!(!subtype(
            "x:{int | v == 3} -> [bool | v <=> even(x)]",
            "x:{int | true} -> [bool | v <=> even(x)]"
        ));
        // Any coverage codomain covers the empty one.
        assert!(subtype(
            "[int | true] -> [int | v == 1]",
            "[int | true] -> [int | false]"
        ));
        assert!(!subtype(
            "[int | true] -> [int | false]",
            "[int | true] -> [int | v == 1]"
        ));
        // Cover domains are contravariant: the supertype may demand less coverage.
        assert!(subtype(
            "[int | v == 1] -> [int | true]",
            "[int | true] -> [int | true]"
        ));
        assert!(!subtype(
            "[int | true] -> [int | true]",
            "[int | v == 1] -> [int | true]"
        ));
        assert!(subtype(
            "[int | v == 1] -> [int | v == 1]",
            "[int | v == 1] -> [int | v == 1]"
        ));
    }

    #[test]
    fn incorrectness_example() {
        let src = |n: i64| {
            format!(
                "check let x = int_gen () in let y = int_gen () in let z = int_range 11 11 in \
                 if is_even x then if is_odd y then 42 else z else z : [int | v == {n}]"
            )
        };
        assert!(accepts(&src(42), 64));
        assert!(!accepts(&src(43), 64));
    }

    #[test]
    fn branch_order_is_irrelevant() {
        for (a, b) in [(1, 2), (2, 1)] {
            let src = format!(
                "let imp (x: [int | true]) : [int | 1 <= v && v <= 2] = if x > 0 then {a} else {b} \
                 check imp : [int | true] -> [int | 1 <= v && v <= 2]"
            );
            assert!(accepts(&src, 8), "{src}");
        }
        let narrow = "let imp (x: [int | true]) : [int | true] = if x > 0 then 1 else 2 \
                      check imp : [int | true] -> [int | 1 <= v && v <= 3]";
        assert!(!accepts(narrow, 8));
    }

    #[test]
    fn over_parameter_definition() {
        let src = "let foo (x: {int | true}) : [bool * int | (!fst(v) && snd(v) == x) || (fst(v) && odd(x) && snd(v) == x)] = \
                   if is_even x then (false, x) else if bool_gen () then (true, x) else (false, x) \
                   check let x = int_gen () in foo x : [bool * int | (!fst(v) && odd(snd(v))) || (fst(v) && odd(snd(v)))]";
        assert!(accepts(src, 8));
    }

    #[test]
    fn repaired_flaky_client() {
        let foo = "let foo (x: {int | true}) : [bool * int | (!fst(v) && snd(v) == x) || (fst(v) && odd(x) && snd(v) == x)] = \
                   if is_even x then (false, x) else if bool_gen () then (true, x) else (false, x) ";
        let body = "let x = 3 in let* u = foo 3 in let y = x + 2 in \
                    let* w = assert {int | v == 4} x in (true, x)";
        let at = |g: &str| format!("{foo} check {body} : {g}");
        assert!(accepts(&at("[bool * int | !fst(v) && snd(v) == 3]"), 8));
        assert!(!accepts(
            &at("[bool * int | !fst(v) && (snd(v) == 3 || snd(v) == 5)]"),
            8
        ));
    }

    #[test]
    fn reusing_a_consumed_argument_is_rejected() {
        let src = "let f (a: [int | true]) (b: [int | true]) : [int | v == 11] = int_range 11 11 \
                   check let x = int_gen () in let y = int_gen () in let z = f x y in \
                   if z == 11 && is_even y then false else true : [bool | v == false]";
        let r = check_src(src, 8);
        let err = r.result.unwrap_err();
        assert_eq!(err.code(), "linearity", "{err}");
        assert!(err
            .to_string()
            .contains("argument to under-parameter reused"));
    }

    #[test]
    fn empty_assume_is_rejected() {
        let r = check_src(
            "check let x = assume [int | false] in 1 : [int | v == 1]",
            8,
        );
        assert_eq!(r.result.unwrap_err().code(), "empty-coverage");
    }
}
