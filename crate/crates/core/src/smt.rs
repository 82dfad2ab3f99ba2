//! SMT-LIB2 rendering of verification conditions.
//!
//! The script asserts the negation of the VC, so `unsat` means valid.
//! Pairs become one datatype per product sort; parity uses `mod 2`, which
//! SMT-LIB defines with a non-negative remainder, matching the evaluator.
//! Output is a deterministic function of the VC.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::qualifier::{Qualifier, SortEnv, NU};
use crate::syntax::BaseType;
use crate::vc::{Binder, Matrix, Quant, Vc};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SmtOptions {
    /// Confine integers of unpinned binders to `[-w, w]`, reproducing the
    /// bounded decider's semantics instead of unbounded arithmetic.
    pub window: Option<i64>,
}

/// Injective encoding of a sort as an identifier fragment.
fn sort_code(s: &BaseType) -> String {
    match s {
        BaseType::Unit => "U".into(),
        BaseType::Bool => "B".into(),
        BaseType::Int => "I".into(),
        BaseType::Prod(a, b) => format!("P{}{}", sort_code(a), sort_code(b)),
    }
}

fn sort_name(s: &BaseType) -> String {
    match s {
        BaseType::Unit => "Unit".into(),
        BaseType::Bool => "Bool".into(),
        BaseType::Int => "Int".into(),
        BaseType::Prod(..) => format!("Pair_{}", sort_code(s)),
    }
}

/// Injective mangling of program names into simple SMT symbols.
pub fn mangle(name: &str) -> String {
    if name == NU {
        return "nu".into();
    }
    let mut out = String::from("v_");
    for c in name.chars() {
        match c {
            'a'..='z' | 'A'..='Z' | '0'..='9' => out.push(c),
            '_' => out.push_str("__"),
            '\'' => out.push_str("_q"),
            other => {
                let _ = write!(out, "_u{:x}_", other as u32);
            }
        }
    }
    out
}

fn collect_sorts(s: &BaseType, out: &mut Vec<BaseType>) {
    if let BaseType::Prod(a, b) = s {
        collect_sorts(a, out);
        collect_sorts(b, out);
    }
    if !out.contains(s) {
        out.push(s.clone());
    }
}

struct Emitter {
    env: SortEnv,
    opts: SmtOptions,
}

impl Emitter {
    fn term(&self, q: &Qualifier) -> String {
        use Qualifier as Q;
        let bin = |op: &str, a: &Q, b: &Q| format!("({op} {} {})", self.term(a), self.term(b));
        match q {
            Q::True => "true".into(),
            Q::False => "false".into(),
            Q::Nu => "nu".into(),
            Q::Var(x) => mangle(x),
            Q::Int(n) if *n < 0 => format!("(- {})", n.unsigned_abs()),
            Q::Int(n) => format!("{n}"),
            Q::Eq(a, b) => bin("=", a, b),
            Q::Iff(a, b) => bin("=", a, b),
            Q::Le(a, b) => bin("<=", a, b),
            Q::Lt(a, b) => bin("<", a, b),
            Q::Add(a, b) => bin("+", a, b),
            Q::Sub(a, b) => bin("-", a, b),
            Q::And(a, b) => bin("and", a, b),
            Q::Or(a, b) => bin("or", a, b),
            Q::Implies(a, b) => bin("=>", a, b),
            Q::Not(a) => format!("(not {})", self.term(a)),
            Q::Even(a) => format!("(= (mod {} 2) 0)", self.term(a)),
            Q::Odd(a) => format!("(= (mod {} 2) 1)", self.term(a)),
            Q::Fst(a) | Q::Snd(a) => {
                let sel = if matches!(q, Q::Fst(_)) { "fst" } else { "snd" };
                let code = match a.sort_of(&self.env, None) {
                    Ok(s) => sort_code(&s),
                    Err(_) => "?".into(),
                };
                format!("({sel}_{code} {})", self.term(a))
            }
        }
    }

    /// Window constraints on the integer components of `path`.
    fn window_guard(&self, path: &str, sort: &BaseType, w: i64, out: &mut Vec<String>) {
        match sort {
            BaseType::Int => out.push(format!("(<= (- {w}) {path} {w})")),
            BaseType::Prod(a, b) => {
                let code = sort_code(sort);
                self.window_guard(&format!("(fst_{code} {path})"), a, w, out);
                self.window_guard(&format!("(snd_{code} {path})"), b, w, out);
            }
            _ => {}
        }
    }

    fn bound(&self, b: &Binder) -> String {
        let mut parts = Vec::new();
        if let Some(w) = self.opts.window {
            if !statically_pinned(&b.bound, &Qualifier::var(b.name.clone()), &b.name, &b.sort) {
                self.window_guard(&mangle(&b.name), &b.sort, w, &mut parts);
            }
        }
        if b.bound != Qualifier::True || parts.is_empty() {
            parts.push(self.term(&b.bound));
        }
        if parts.len() == 1 {
            parts.pop().unwrap_or_default()
        } else {
            format!("(and {})", parts.join(" "))
        }
    }

    fn prefix(&mut self, bs: &[Binder], matrix: &dyn Fn(&Self) -> String) -> String {
        let Some((b, rest)) = bs.split_first() else {
            return matrix(self);
        };
        let shadowed = self.env.insert(b.name.clone(), b.sort.clone());
        let guard = self.bound(b);
        let inner = self.prefix(rest, matrix);
        match shadowed {
            Some(s) => {
                self.env.insert(b.name.clone(), s);
            }
            None => {
                self.env.remove(&b.name);
            }
        }
        let (q, conn) = match b.quant {
            Quant::Forall => ("forall", "=>"),
            Quant::Exists => ("exists", "and"),
        };
        format!(
            "({q} (({} {})) ({conn} {guard} {inner}))",
            mangle(&b.name),
            sort_name(&b.sort)
        )
    }
}

/// Shape-level counterpart of the bounded decider's pinning: does `q`
/// confine `path` to finitely many values regardless of the valuation?
fn statically_pinned(q: &Qualifier, path: &Qualifier, name: &str, sort: &BaseType) -> bool {
    use Qualifier as Q;
    let closed = |t: &Q| !t.mentions(name) && !t.mentions_nu();
    let pins_directly = match q {
        Q::Eq(a, b) | Q::Iff(a, b) => (**a == *path && closed(b)) || (**b == *path && closed(a)),
        Q::Not(a) => **a == *path && *sort == BaseType::Bool,
        Q::Or(a, b) => {
            statically_pinned(a, path, name, sort) && statically_pinned(b, path, name, sort)
        }
        Q::False => true,
        _ => q == path && *sort == BaseType::Bool,
    };
    if pins_directly {
        return true;
    }
    if let Q::And(..) = q {
        let mut cs = Vec::new();
        flatten_and(q, &mut cs);
        if cs.iter().any(|c| statically_pinned(c, path, name, sort)) {
            return true;
        }
        if *sort == BaseType::Int {
            let lo = cs
                .iter()
                .any(|c| matches!(c, Q::Le(a, b) | Q::Lt(a, b) if **b == *path && closed(a)));
            let hi = cs
                .iter()
                .any(|c| matches!(c, Q::Le(a, b) | Q::Lt(a, b) if **a == *path && closed(b)));
            if lo && hi {
                return true;
            }
        }
    }
    if let BaseType::Prod(sa, sb) = sort {
        let pa = statically_pinned(q, &Q::fst(path.clone()), name, sa);
        let pb = statically_pinned(q, &Q::snd(path.clone()), name, sb);
        let fin = |s: &BaseType| !contains_int(s);
        return (pa || pb) && (pa || fin(sa)) && (pb || fin(sb));
    }
    false
}

fn contains_int(s: &BaseType) -> bool {
    match s {
        BaseType::Int => true,
        BaseType::Prod(a, b) => contains_int(a) || contains_int(b),
        _ => false,
    }
}

fn flatten_and<'a>(q: &'a Qualifier, out: &mut Vec<&'a Qualifier>) {
    match q {
        Qualifier::And(a, b) => {
            flatten_and(a, out);
            flatten_and(b, out);
        }
        _ => out.push(q),
    }
}

/// Render `vc` with unbounded integer semantics.
pub fn emit_smt2(vc: &Vc) -> String {
    emit_smt2_with(vc, SmtOptions::default())
}

pub fn emit_smt2_with(vc: &Vc, opts: SmtOptions) -> String {
    let mut sorts = Vec::new();
    let block: &[Binder] = match &vc.matrix {
        Matrix::Plain(_) => &[],
        Matrix::SelfFramed { block, .. } => block,
    };
    for b in vc.prefix.iter().chain(block) {
        collect_sorts(&b.sort, &mut sorts);
    }
    let mut out = String::new();
    out.push_str("; covcheck verification condition\n");
    let _ = writeln!(out, "; {vc}");
    out.push_str("(set-logic ALL)\n");
    if sorts.contains(&BaseType::Unit) {
        out.push_str("(declare-datatypes ((Unit 0)) (((unit))))\n");
    }
    let mut declared = BTreeSet::new();
    for s in &sorts {
        if let BaseType::Prod(a, b) = s {
            let code = sort_code(s);
            if declared.insert(code.clone()) {
                let _ = writeln!(
                    out,
                    "(declare-datatypes (({name} 0)) (((mk_{code} (fst_{code} {a}) (snd_{code} {b})))))",
                    name = sort_name(s),
                    a = sort_name(a),
                    b = sort_name(b),
                );
            }
        }
    }
    let mut em = Emitter {
        env: SortEnv::new(),
        opts,
    };
    let body = match &vc.matrix {
        Matrix::Plain(q) => em.prefix(&vc.prefix, &|e: &Emitter| e.term(q)),
        Matrix::SelfFramed {
            block,
            premise,
            conclusion,
        } => em.prefix(&vc.prefix, &|e: &Emitter| {
            let mut e2 = Emitter {
                env: e.env.clone(),
                opts: e.opts,
            };
            let p = e2.prefix(block, &|e: &Emitter| e.term(premise));
            let c = e2.prefix(block, &|e: &Emitter| e.term(conclusion));
            format!("(=> {p} {c})")
        }),
    };
    let _ = writeln!(out, "(assert (not {body}))");
    out.push_str("(check-sat)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vc::Binder;
    use alloc::vec;
    use Qualifier as Q;

    #[test]
    fn simple_script() {
        let nu = Q::var(NU);
        let vc = Vc::new(
            vec![Binder::forall(NU, BaseType::Int, Q::True)],
            Q::eq(nu.clone(), nu),
        );
        let s = emit_smt2(&vc);
        assert!(
            s.contains("(assert (not (forall ((nu Int)) (=> true (= nu nu)))))"),
            "{s}"
        );
        assert!(s.ends_with("(check-sat)\n"));
    }

    #[test]
    fn pairs_and_parity() {
        let p = BaseType::prod(BaseType::Bool, BaseType::Int);
        let x = Q::var("x'");
        let vc = Vc::new(
            vec![Binder::exists("x'", p, Q::odd(Q::snd(x.clone())))],
            Q::fst(x),
        );
        let s = emit_smt2(&vc);
        assert!(s.contains(
            "(declare-datatypes ((Pair_PBI 0)) (((mk_PBI (fst_PBI Bool) (snd_PBI Int)))))"
        ));
        assert!(s.contains("(= (mod (snd_PBI v_x_q) 2) 1)"), "{s}");
        assert_eq!(s, emit_smt2(&vc));
    }

    #[test]
    fn window_guards_skip_pinned_binders() {
        let nu = Q::var(NU);
        let vc = Vc::new(
            vec![
                Binder::forall("a", BaseType::Int, Q::True),
                Binder::forall(NU, BaseType::Int, Q::eq(nu.clone(), Q::Int(42))),
            ],
            Q::True,
        );
        let s = emit_smt2_with(&vc, SmtOptions { window: Some(8) });
        assert!(s.contains("(<= (- 8) v_a 8)"));
        assert!(!s.contains("(<= (- 8) nu 8)"));
    }

    #[test]
    fn mangling_is_injective_on_tricky_names() {
        assert_ne!(mangle("a_q"), mangle("a'"));
        assert_ne!(mangle("x__"), mangle("x_"));
    }
}
