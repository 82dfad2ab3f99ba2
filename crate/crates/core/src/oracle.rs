//! Type membership by execution.
//!
//! The denotation of a coverage type is a set of terms; membership of a
//! closed term is decided here by enumerating its outcomes inside the
//! integer window. Quantification over all argument terms is replaced by
//! a fixed probe family: the canonical generator of a qualifier and a few
//! deterministic strict supersets of it. The probes only ever make the
//! oracle more permissive, so "checker accepts but oracle rejects" still
//! exposes a soundness bug.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::rc::Rc;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::builtins::Builtin;
use crate::core_term::{CoreTerm, Lambda};
use crate::erasure::BasicType;
use crate::interp::{apply_all, eval_all, Env, InterpError, InterpOptions, RtOutcomes, RtValue};
use crate::qualifier::{Qualifier, SemanticValue, NU};
use crate::rtype::RType;
use crate::syntax::BaseType;
use crate::typing::{BindKind, Binding, TypeError};
use crate::vc;

/// Strict supersets added to each canonical probe.
pub const PROBE_SUPERSETS: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    Member,
    NonMember(String),
    /// The window may be too small to reach a value the type demands.
    Inconclusive(String),
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Membership::Member => "member",
            Membership::NonMember(_) => "nonmember",
            Membership::Inconclusive(_) => "inconclusive",
        }
    }

    /// Conjunction, keeping the first failure.
    fn and_then(
        self,
        f: impl FnOnce() -> Result<Membership, OracleError>,
    ) -> Result<Membership, OracleError> {
        match self {
            Membership::Member => f(),
            other => Ok(other),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error("unsupported by the oracle: {0}")]
    Unsupported(String),
}

type Sigma = Vec<(String, SemanticValue)>;

fn rtype_max_literal(t: &RType) -> Option<i64> {
    match t {
        RType::Over { qual, .. } | RType::Cover { qual, .. } => qual.max_literal(),
        RType::OverArrow { qual, cod, .. } | RType::UnderArrow { qual, cod, .. } => {
            qual.max_literal().max(rtype_max_literal(cod))
        }
        RType::HoArrow { dom, cod, .. } => rtype_max_literal(dom).max(rtype_max_literal(cod)),
    }
}

/// Membership decision procedure for one program.
pub struct Oracle {
    opts: InterpOptions,
    /// Some literal lies outside the window, so a value missing from the
    /// outcomes may only be missing because of the window.
    literal_beyond_window: Option<i64>,
    /// Closed lambdas of the program, used as higher-order probes.
    lambdas: Vec<Rc<Lambda>>,
}

impl Oracle {
    pub fn new(window: i64) -> Self {
        Oracle {
            opts: InterpOptions::new(window),
            literal_beyond_window: None,
            lambdas: Vec::new(),
        }
    }

    pub fn with_options(opts: InterpOptions) -> Self {
        Oracle {
            opts,
            literal_beyond_window: None,
            lambdas: Vec::new(),
        }
    }

    /// Record the literals and lambdas of the term and types under test.
    pub fn observe(&mut self, term: &CoreTerm, types: &[&RType]) {
        let w = self.opts.window;
        let lits = types
            .iter()
            .map(|t| rtype_max_literal(t))
            .chain([term.max_literal()]);
        if let Some(n) = lits.flatten().filter(|n| *n > w).max() {
            self.literal_beyond_window = Some(n.max(self.literal_beyond_window.unwrap_or(0)));
        }
        for l in term.lambdas() {
            let closed = CoreTerm::Val(crate::core_term::Value::Lambda(l.clone()))
                .free_vars()
                .iter()
                .all(|x| Builtin::from_name(x).is_some());
            if closed && !self.lambdas.iter().any(|m| Rc::ptr_eq(m, &l)) {
                self.lambdas.push(l);
            }
        }
    }

    fn window(&self) -> i64 {
        self.opts.window
    }

    fn values_of(&self, q: &Qualifier, b: &BaseType, sigma: &Sigma) -> Vec<SemanticValue> {
        vc::domain(
            &q.subst_nu(&Qualifier::var(NU)),
            NU,
            b,
            sigma,
            self.window(),
        )
    }

    /// Canonical generator outcomes plus strict supersets of growing size.
    pub fn probes(&self, q: &Qualifier, b: &BaseType, sigma: &Sigma) -> Vec<Vec<SemanticValue>> {
        let base = self.values_of(q, b, sigma);
        let mut extra: Vec<SemanticValue> = vc::window_values(b, self.window())
            .into_iter()
            .filter(|v| !base.contains(v))
            .collect();
        extra.sort_by_key(magnitude);
        let mut out = alloc::vec![base.clone()];
        for k in 1..=PROBE_SUPERSETS.min(extra.len()) {
            let mut p = base.clone();
            p.extend(extra[..k].iter().cloned());
            out.push(p);
        }
        out
    }

    fn missing(&self, what: String) -> Membership {
        match self.literal_beyond_window {
            Some(n) => {
                Membership::Inconclusive(format!("{what}; literal {n} lies outside the window"))
            }
            None => Membership::NonMember(what),
        }
    }

    /// Is the set of outcomes `r` (of some term) in `⟦ty⟧`, with free
    /// qualifier names valued by `sigma`?
    pub fn member_outcomes(
        &self,
        r: &RtOutcomes,
        ty: &RType,
        sigma: &Sigma,
    ) -> Result<Membership, OracleError> {
        match ty {
            RType::Cover { base, qual } | RType::Over { base, qual } => {
                if !r.funs.is_empty() || r.base.iter().any(|v| !v.has_sort(base)) {
                    return Ok(Membership::NonMember(format!(
                        "an outcome is not of sort {base}"
                    )));
                }
                if let RType::Cover { .. } = ty {
                    for v in self.values_of(qual, base, sigma) {
                        if !r.base.contains(&v) {
                            return Ok(self.missing(format!("{v} is not reached")));
                        }
                    }
                } else {
                    for v in &r.base {
                        if !qual
                            .holds(sigma, Some(v))
                            .map_err(|e| InterpError::Qual(e.to_string()))?
                        {
                            return Ok(Membership::NonMember(format!(
                                "{v} is reached but violates `{qual}`"
                            )));
                        }
                    }
                }
                Ok(Membership::Member)
            }
            _ => {
                if !r.base.is_empty() {
                    return Ok(Membership::NonMember(
                        "a base value where a function was expected".into(),
                    ));
                }
                self.member_funs(&r.funs, ty, sigma)
            }
        }
    }

    fn member_funs(
        &self,
        fs: &[RtValue],
        ty: &RType,
        sigma: &Sigma,
    ) -> Result<Membership, OracleError> {
        match ty {
            RType::OverArrow {
                param,
                base,
                qual,
                cod,
            } => {
                let mut verdict = Membership::Member;
                for v in self.values_of(qual, base, sigma) {
                    verdict = verdict.and_then(|| {
                        let r = apply_all(fs, &[RtValue::Base(v.clone())], self.opts)?;
                        let mut inner = sigma.clone();
                        inner.push((param.clone(), v.clone()));
                        self.member_outcomes(&r, cod, &inner)
                    })?;
                }
                Ok(verdict)
            }
            RType::UnderArrow { base, qual, cod } => {
                let mut verdict = Membership::Member;
                for probe in self.probes(qual, base, sigma) {
                    verdict = verdict.and_then(|| {
                        let args: Vec<RtValue> = probe.into_iter().map(RtValue::Base).collect();
                        let r = apply_all(fs, &args, self.opts)?;
                        self.member_outcomes(&r, cod, sigma)
                    })?;
                }
                Ok(verdict)
            }
            RType::HoArrow { dom, cod, .. } => {
                let mut verdict = Membership::Member;
                for g in self.function_probes(dom, sigma)? {
                    verdict = verdict.and_then(|| {
                        let r = apply_all(fs, &[g], self.opts)?;
                        self.member_outcomes(&r, cod, sigma)
                    })?;
                }
                Ok(verdict)
            }
            _ => Ok(Membership::NonMember(
                "a function where a base value was expected".into(),
            )),
        }
    }

    /// Builtins and closed program lambdas that belong to `ty`.
    fn function_probes(&self, ty: &RType, sigma: &Sigma) -> Result<Vec<RtValue>, OracleError> {
        let want = ty.erase();
        let mut cands: Vec<RtValue> = Builtin::ALL
            .iter()
            .filter(|b| match &want {
                BasicType::Arrow(a, _) => match &**a {
                    BasicType::Base(s) => b.basic_type(s).as_ref() == Ok(&want),
                    _ => false,
                },
                _ => false,
            })
            .map(|b| RtValue::Prim(*b, Vec::new()))
            .collect();
        for l in &self.lambdas {
            let annotated = l.ret.as_ref().map(|r| match &l.param_ty {
                RType::Over { base, .. } | RType::Cover { base, .. } => {
                    BasicType::arrow(BasicType::Base(base.clone()), r.erase())
                }
                p => BasicType::arrow(p.erase(), r.erase()),
            });
            if annotated.as_ref() == Some(&want) {
                cands.push(RtValue::Closure(l.clone(), Env::new()));
            }
        }
        let mut out = Vec::new();
        for c in cands {
            let r = RtOutcomes {
                base: BTreeSet::new(),
                funs: alloc::vec![c.clone()],
                stuck: false,
            };
            if self.member_outcomes(&r, ty, sigma)?.is_member() {
                out.push(c);
            }
        }
        Ok(out)
    }

    /// `e ∈ ⟦ty⟧` for a closed term.
    pub fn member_type(&self, e: &CoreTerm, ty: &RType) -> Result<Membership, OracleError> {
        let r = eval_all(e, &Env::new(), self.opts)?;
        self.member_outcomes(&r, ty, &Vec::new())
    }

    /// `e ∈ ⟦ty⟧_Γ`. Coverage bindings take every value of the canonical
    /// generator for the type and every probe for the term; other base
    /// bindings take every value of their qualifier.
    pub fn member_ctx(
        &self,
        e: &CoreTerm,
        ty: &RType,
        ctx: &[Binding],
    ) -> Result<Membership, OracleError> {
        self.ctx_rec(e, ty, ctx, &mut Vec::new(), &mut Vec::new())
    }

    fn ctx_rec(
        &self,
        e: &CoreTerm,
        ty: &RType,
        ctx: &[Binding],
        sigma: &mut Sigma,
        choices: &mut Vec<(String, Vec<SemanticValue>)>,
    ) -> Result<Membership, OracleError> {
        let Some((b, rest)) = ctx.split_first() else {
            let r = self.eval_under(e, choices)?;
            return self.member_outcomes(&r, ty, sigma);
        };
        let Some((base, qual)) = b.rtype.as_base() else {
            return Err(OracleError::Unsupported(format!(
                "function-typed context binding `{}`",
                b.name
            )));
        };
        let mut verdict = Membership::Member;
        if b.kind == BindKind::Cover {
            let probes = self.probes(qual, base, sigma);
            for v in self.values_of(qual, base, sigma) {
                for p in &probes {
                    verdict = verdict.and_then(|| {
                        sigma.push((b.name.clone(), v.clone()));
                        choices.push((b.name.clone(), p.clone()));
                        let r = self.ctx_rec(e, ty, rest, sigma, choices);
                        sigma.pop();
                        choices.pop();
                        r
                    })?;
                }
            }
        } else {
            for v in self.values_of(qual, base, sigma) {
                verdict = verdict.and_then(|| {
                    sigma.push((b.name.clone(), v.clone()));
                    choices.push((b.name.clone(), alloc::vec![v.clone()]));
                    let r = self.ctx_rec(e, ty, rest, sigma, choices);
                    sigma.pop();
                    choices.pop();
                    r
                })?;
            }
        }
        Ok(verdict)
    }

    /// Outcomes of `let x1 = g1 in ... in e` where each `gi` reaches
    /// exactly the chosen values.
    fn eval_under(
        &self,
        e: &CoreTerm,
        choices: &[(String, Vec<SemanticValue>)],
    ) -> Result<RtOutcomes, OracleError> {
        fn go(
            o: &Oracle,
            e: &CoreTerm,
            choices: &[(String, Vec<SemanticValue>)],
            env: Env,
            acc: &mut RtOutcomes,
        ) -> Result<(), OracleError> {
            match choices.split_first() {
                None => {
                    let r = eval_all(e, &env, o.opts)?;
                    acc.base.extend(r.base);
                    acc.funs.extend(r.funs);
                    acc.stuck |= r.stuck;
                }
                Some(((x, vs), rest)) => {
                    for v in vs {
                        go(
                            o,
                            e,
                            rest,
                            env.extend(x.clone(), RtValue::Base(v.clone())),
                            acc,
                        )?;
                    }
                }
            }
            Ok(())
        }
        let mut acc = RtOutcomes::default();
        go(self, e, choices, Env::new(), &mut acc)?;
        Ok(acc)
    }

    /// For a goal `[b1|φ1] → ... → [b|φ]`: is every value of `φ` reached
    /// by applying `e` to some tuple of argument values satisfying the
    /// `φi`? `None` for goals of any other shape.
    pub fn corollary(&self, e: &CoreTerm, goal: &RType) -> Result<Option<Membership>, OracleError> {
        let mut doms = Vec::new();
        let mut t = goal;
        while let RType::UnderArrow { base, qual, cod } = t {
            doms.push((base, qual));
            t = cod;
        }
        let (RType::Cover { base, qual }, false) = (t, doms.is_empty()) else {
            return Ok(None);
        };
        let sigma = Vec::new();
        let mut fs = eval_all(e, &Env::new(), self.opts)?.funs;
        let mut reached: BTreeSet<SemanticValue> = BTreeSet::new();
        // Apply argument by argument; each function value keeps its own
        // argument history implicitly since any tuple suffices.
        for (i, (b, q)) in doms.iter().enumerate() {
            let last = i + 1 == doms.len();
            let mut next = Vec::new();
            for v in self.values_of(q, b, &sigma) {
                let r = apply_all(&fs, &[RtValue::Base(v)], self.opts)?;
                if last {
                    reached.extend(r.base);
                } else {
                    next.extend(r.funs);
                }
            }
            fs = next;
        }
        for v in self.values_of(qual, base, &sigma) {
            if !reached.contains(&v) {
                return Ok(Some(self.missing(format!("no argument tuple reaches {v}"))));
            }
        }
        Ok(Some(Membership::Member))
    }
}

fn magnitude(v: &SemanticValue) -> (u64, SemanticValue) {
    fn m(v: &SemanticValue) -> u64 {
        match v {
            SemanticValue::Int(n) => n.unsigned_abs(),
            SemanticValue::Pair(a, b) => m(a) + m(b),
            _ => 0,
        }
    }
    (m(v), v.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffVerdict {
    Consistent,
    SoundnessBug,
    /// The checker rejects a term the oracle places in the type.
    Incomplete,
    Inconclusive,
}

impl DiffVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            DiffVerdict::Consistent => "consistent",
            DiffVerdict::SoundnessBug => "SOUNDNESS-BUG",
            DiffVerdict::Incomplete => "incomplete",
            DiffVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FundamentalReport {
    pub checker: Result<(), TypeError>,
    pub oracle: Membership,
    pub corollary: Option<Membership>,
    pub verdict: DiffVerdict,
}

/// Compare a checker verdict with the oracle.
pub fn fundamental_check(
    term: &CoreTerm,
    goal: &RType,
    ctx: &[Binding],
    checker: Result<(), TypeError>,
    opts: InterpOptions,
) -> Result<FundamentalReport, OracleError> {
    let mut oracle = Oracle::with_options(opts);
    let mut types: Vec<&RType> = alloc::vec![goal];
    types.extend(ctx.iter().map(|b| &b.rtype));
    oracle.observe(term, &types);
    let member = oracle.member_ctx(term, goal, ctx)?;
    let corollary = if ctx.is_empty() {
        oracle.corollary(term, goal)?
    } else {
        None
    };
    let corollary_fails = matches!(corollary, Some(Membership::NonMember(_)));
    let verdict = match (&checker, &member) {
        (Ok(()), Membership::NonMember(_)) => DiffVerdict::SoundnessBug,
        (Ok(()), _) if corollary_fails => DiffVerdict::SoundnessBug,
        (Ok(()), Membership::Member) => DiffVerdict::Consistent,
        (Err(e), _) if e.is_inconclusive() => DiffVerdict::Inconclusive,
        (_, Membership::Inconclusive(_)) => DiffVerdict::Inconclusive,
        (Err(_), Membership::NonMember(_)) => DiffVerdict::Consistent,
        (Err(_), Membership::Member) => DiffVerdict::Incomplete,
    };
    Ok(FundamentalReport {
        checker,
        oracle: member,
        corollary,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anf::{elaborate_expr, elaborate_program};
    use crate::parser::{parse_expr, parse_program, parse_rtype};
    use crate::typing::{check_program, BoundedDecider, CheckOptions};
    use alloc::collections::BTreeMap;

    fn member(src: &str, ty: &str, w: i64) -> Membership {
        let e = elaborate_expr(&parse_expr(src).unwrap()).unwrap();
        let t = parse_rtype(ty).unwrap();
        let mut o = Oracle::new(w);
        o.observe(&e, &[&t]);
        o.member_type(&e, &t).unwrap()
    }

    #[test]
    fn generator_and_constant_rows() {
        assert!(member("int_gen ()", "[int | true]", 8).is_member());
        assert!(!member("int_gen ()", "{int | v == 1}", 8).is_member());
        assert!(member("1", "[int | v == 1]", 8).is_member());
        assert!(!member("1", "[int | true]", 8).is_member());
        assert!(member("1", "{int | v == 1 || v == 2}", 8).is_member());
    }

    #[test]
    fn context_generators() {
        let x12 = Binding::new(
            "x",
            parse_rtype("[int | v == 1 || v == 2]").unwrap(),
            true,
            true,
        );
        let x1 = Binding::new("x", parse_rtype("[int | v == 1]").unwrap(), true, true);
        let o = Oracle::new(8);
        let e = CoreTerm::var("x");
        let t = parse_rtype("[int | v == 1 || v == 2]").unwrap();
        assert!(o.member_ctx(&e, &t, &[x12]).unwrap().is_member());
        assert!(!o.member_ctx(&e, &t, &[x1]).unwrap().is_member());
    }

    #[test]
    fn arrow_membership() {
        let e =
            elaborate_expr(&parse_expr("fun (x: [int | true]) -> if x > 0 then 1 else 2").unwrap())
                .unwrap();
        let o = Oracle::new(8);
        let t = parse_rtype("[int | true] -> [int | 1 <= v && v <= 2]").unwrap();
        assert!(o.member_type(&e, &t).unwrap().is_member());
        let bad = parse_rtype("[int | true] -> [int | 1 <= v && v <= 3]").unwrap();
        assert!(!o.member_type(&e, &bad).unwrap().is_member());
        assert_eq!(o.corollary(&e, &t).unwrap(), Some(Membership::Member));
    }

    #[test]
    fn probes_are_strict_supersets() {
        let o = Oracle::new(2);
        let q = Qualifier::eq(Qualifier::Nu, Qualifier::Int(0));
        let ps = o.probes(&q, &BaseType::Int, &Vec::new());
        assert_eq!(ps.len(), 4);
        for w in ps.windows(2) {
            assert!(w[1].len() == w[0].len() + 1 && w[0].iter().all(|v| w[1].contains(v)));
        }
    }

    fn diff(src: &str, w: i64) -> FundamentalReport {
        let e = elaborate_program(&parse_program(src).unwrap()).unwrap();
        let mut d = BoundedDecider { window: w };
        let r = check_program(
            &e.term,
            &e.goal,
            &BTreeMap::new(),
            CheckOptions::new(w),
            &mut d,
        );
        fundamental_check(&e.term, &e.goal, &[], r.result, InterpOptions::new(w)).unwrap()
    }

    #[test]
    fn fundamental_examples() {
        let incor = |n| {
            format!(
                "check let x = int_gen () in let y = int_gen () in let z = int_range 11 11 in \
                 if is_even x then if is_odd y then 42 else z else z : [int | v == {n}]"
            )
        };
        let r = diff(&incor(42), 64);
        assert_eq!(
            (r.checker.is_ok(), r.oracle.label(), r.verdict),
            (true, "member", DiffVerdict::Consistent)
        );
        let r = diff(&incor(43), 64);
        assert_eq!(
            (r.checker.is_ok(), r.oracle.label(), r.verdict),
            (false, "nonmember", DiffVerdict::Consistent)
        );
        let r = diff("check 1 : [int | true]", 8);
        assert_eq!(
            (r.checker.is_ok(), r.verdict),
            (false, DiffVerdict::Consistent)
        );
    }
}
