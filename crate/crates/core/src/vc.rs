//! Verification conditions and their bounded decision procedure.
//!
//! A VC is a quantifier prefix of bounded binders followed by a matrix.
//! `∀x:b | φ. M` means `∀x. φ ⟹ M`, and `∃x:b | φ. M` means `∃x. φ ∧ M`.
//! Bounds mention their own variable by name, never as `ν`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::qualifier::{QualError, Qualifier, SemanticValue, Valuation};
use crate::syntax::BaseType;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quant {
    Forall,
    Exists,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binder {
    pub quant: Quant,
    pub name: String,
    pub sort: BaseType,
    pub bound: Qualifier,
}

impl Binder {
    pub fn forall(name: impl Into<String>, sort: BaseType, bound: Qualifier) -> Self {
        Binder {
            quant: Quant::Forall,
            name: name.into(),
            sort,
            bound,
        }
    }

    pub fn exists(name: impl Into<String>, sort: BaseType, bound: Qualifier) -> Self {
        Binder {
            quant: Quant::Exists,
            name: name.into(),
            sort,
            bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Matrix {
    Plain(Qualifier),
    /// `(Q.premise) ⟹ (Q.conclusion)` where `Q` is `block`. Used when the
    /// goal of a coverage check mentions coverage-bound names.
    SelfFramed {
        block: Vec<Binder>,
        premise: Qualifier,
        conclusion: Qualifier,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vc {
    pub prefix: Vec<Binder>,
    pub matrix: Matrix,
}

/// Assignment to the universally quantified variables that falsifies a VC.
pub type Witness = Vec<(String, SemanticValue)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid(Option<Witness>),
    /// The VC mentions a literal the window cannot reach, and enumeration
    /// inside the window was not conclusive.
    WindowInsufficient {
        literal: i64,
    },
    Unknown(String),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    pub fn is_invalid(&self) -> bool {
        matches!(self, Verdict::Invalid(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Valid => "valid",
            Verdict::Invalid(_) => "invalid",
            Verdict::WindowInsufficient { .. } => "window-insufficient",
            Verdict::Unknown(_) => "unknown",
        }
    }
}

impl Vc {
    pub fn new(prefix: Vec<Binder>, matrix: Qualifier) -> Self {
        Vc {
            prefix,
            matrix: Matrix::Plain(matrix),
        }
    }

    fn binders(&self) -> impl Iterator<Item = &Binder> {
        let block: &[Binder] = match &self.matrix {
            Matrix::Plain(_) => &[],
            Matrix::SelfFramed { block, .. } => block,
        };
        self.prefix.iter().chain(block.iter())
    }

    fn formulas(&self) -> Vec<&Qualifier> {
        let mut out: Vec<&Qualifier> = self.binders().map(|b| &b.bound).collect();
        match &self.matrix {
            Matrix::Plain(q) => out.push(q),
            Matrix::SelfFramed {
                premise,
                conclusion,
                ..
            } => {
                out.push(premise);
                out.push(conclusion);
            }
        }
        out
    }

    pub fn max_literal(&self) -> Option<i64> {
        self.formulas()
            .into_iter()
            .filter_map(|q| q.max_literal())
            .max()
    }

    /// Names used but not bound by the VC.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let bound: BTreeSet<String> = self.binders().map(|b| b.name.clone()).collect();
        let mut out = BTreeSet::new();
        for q in self.formulas() {
            out.extend(q.free_vars().into_iter().filter(|x| !bound.contains(x)));
        }
        out
    }

    pub fn all(&self, quant: Quant) -> bool {
        self.binders().all(|b| b.quant == quant) && matches!(self.matrix, Matrix::Plain(_))
    }
}

fn fmt_prefix(f: &mut fmt::Formatter<'_>, bs: &[Binder]) -> fmt::Result {
    for b in bs {
        let q = match b.quant {
            Quant::Forall => "forall",
            Quant::Exists => "exists",
        };
        write!(f, "{q} {}:{} | {}. ", b.name, b.sort, b.bound)?;
    }
    Ok(())
}

impl fmt::Display for Vc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prefix(f, &self.prefix)?;
        match &self.matrix {
            Matrix::Plain(q) => write!(f, "{q}"),
            Matrix::SelfFramed {
                block,
                premise,
                conclusion,
            } => {
                f.write_str("(")?;
                fmt_prefix(f, block)?;
                write!(f, "{premise}) ==> (")?;
                fmt_prefix(f, block)?;
                write!(f, "{conclusion})")
            }
        }
    }
}

/// Every value of `sort` in the window `[-w, w]`.
pub fn window_values(sort: &BaseType, w: i64) -> Vec<SemanticValue> {
    match sort {
        BaseType::Unit => vec![SemanticValue::Unit],
        BaseType::Bool => vec![SemanticValue::Bool(false), SemanticValue::Bool(true)],
        BaseType::Int => (-w..=w).map(SemanticValue::Int).collect(),
        BaseType::Prod(a, b) => {
            let (xs, ys) = (window_values(a, w), window_values(b, w));
            let mut out = Vec::with_capacity(xs.len() * ys.len());
            for x in &xs {
                for y in &ys {
                    out.push(SemanticValue::pair(x.clone(), y.clone()));
                }
            }
            out
        }
    }
}

/// Intervals wider than this are enumerated from the window instead.
const MAX_INTERVAL: i64 = 4096;

/// Candidate values for the variable `name` of `sort` under `bound`, in
/// ascending order. When the bound pins the variable (an equation, a
/// bounded interval, or a finite disjunction of those) the candidates come
/// from the bound and may lie outside the window; otherwise the window is
/// enumerated. Either way only values satisfying `bound` are returned.
pub fn domain<V: Valuation + ?Sized>(
    bound: &Qualifier,
    name: &str,
    sort: &BaseType,
    env: &V,
    w: i64,
) -> Vec<SemanticValue> {
    domain_with_exactness(bound, name, sort, env, w).0
}

/// [`domain`], also reporting whether the result is the complete set of
/// values satisfying `bound` rather than its restriction to the window.
pub fn domain_with_exactness<V: Valuation + ?Sized>(
    bound: &Qualifier,
    name: &str,
    sort: &BaseType,
    env: &V,
    w: i64,
) -> (Vec<SemanticValue>, bool) {
    let path = Qualifier::var(name);
    let (cands, exact) = match pinned(bound, &path, name, sort, env) {
        Some(vs) => (vs, true),
        None => (window_values(sort, w), finite_sort_values(sort).is_some()),
    };
    let mut scope = Extend {
        inner: env,
        name,
        value: SemanticValue::Unit,
    };
    let mut out = Vec::new();
    for v in cands {
        scope.value = v;
        if bound.holds(&scope, None).unwrap_or(false) {
            out.push(scope.value.clone());
        }
    }
    out.sort();
    out.dedup();
    (out, exact)
}

/// A valuation with one extra binding on top.
struct Extend<'a, V: ?Sized> {
    inner: &'a V,
    name: &'a str,
    value: SemanticValue,
}

impl<V: Valuation + ?Sized> Valuation for Extend<'_, V> {
    fn value_of(&self, name: &str) -> Option<&SemanticValue> {
        if name == self.name {
            Some(&self.value)
        } else {
            self.inner.value_of(name)
        }
    }
}

fn conjuncts<'a>(q: &'a Qualifier, out: &mut Vec<&'a Qualifier>) {
    match q {
        Qualifier::And(a, b) => {
            conjuncts(a, out);
            conjuncts(b, out);
        }
        _ => out.push(q),
    }
}

/// Evaluate a term that does not mention the variable being pinned.
fn closed_value<V: Valuation + ?Sized>(
    t: &Qualifier,
    name: &str,
    env: &V,
) -> Option<SemanticValue> {
    if t.mentions(name) || t.mentions_nu() {
        return None;
    }
    t.eval(env, None).ok()
}

fn closed_int<V: Valuation + ?Sized>(t: &Qualifier, name: &str, env: &V) -> Option<i64> {
    match closed_value(t, name, env)? {
        SemanticValue::Int(n) => Some(n),
        _ => None,
    }
}

/// Finite candidate set for `path` (the variable or a projection of it)
/// read off `q`, if `q` confines it.
fn pinned<V: Valuation + ?Sized>(
    q: &Qualifier,
    path: &Qualifier,
    name: &str,
    sort: &BaseType,
    env: &V,
) -> Option<Vec<SemanticValue>> {
    use Qualifier as Q;
    match q {
        Q::Eq(a, b) | Q::Iff(a, b) => {
            if **a == *path {
                return closed_value(b, name, env)
                    .filter(|v| v.has_sort(sort))
                    .map(|v| vec![v]);
            }
            if **b == *path {
                return closed_value(a, name, env)
                    .filter(|v| v.has_sort(sort))
                    .map(|v| vec![v]);
            }
        }
        _ if q == path && *sort == BaseType::Bool => return Some(vec![SemanticValue::Bool(true)]),
        Q::Not(a) if **a == *path && *sort == BaseType::Bool => {
            return Some(vec![SemanticValue::Bool(false)])
        }
        Q::Or(a, b) => {
            let mut xs = pinned(a, path, name, sort, env)?;
            xs.extend(pinned(b, path, name, sort, env)?);
            return Some(xs);
        }
        Q::False => return Some(Vec::new()),
        _ => {}
    }
    if let Q::And(..) = q {
        let mut cs = Vec::new();
        conjuncts(q, &mut cs);
        let mut best: Option<Vec<SemanticValue>> = None;
        for c in &cs {
            if let Some(xs) = pinned(c, path, name, sort, env) {
                if best.as_ref().is_none_or(|b| xs.len() < b.len()) {
                    best = Some(xs);
                }
            }
        }
        if best.is_some() {
            return best;
        }
        if *sort == BaseType::Int {
            let (mut lo, mut hi) = (None::<i64>, None::<i64>);
            for c in &cs {
                match c {
                    Q::Le(a, b) if **b == *path => lo = max_opt(lo, closed_int(a, name, env)),
                    Q::Lt(a, b) if **b == *path => {
                        lo = max_opt(lo, closed_int(a, name, env).and_then(|n| n.checked_add(1)))
                    }
                    Q::Le(a, b) if **a == *path => hi = min_opt(hi, closed_int(b, name, env)),
                    Q::Lt(a, b) if **a == *path => {
                        hi = min_opt(hi, closed_int(b, name, env).and_then(|n| n.checked_sub(1)))
                    }
                    _ => {}
                }
            }
            if let (Some(l), Some(h)) = (lo, hi) {
                if h < l {
                    return Some(Vec::new());
                }
                if h.checked_sub(l).is_some_and(|d| d <= MAX_INTERVAL) {
                    return Some((l..=h).map(SemanticValue::Int).collect());
                }
            }
        }
    }
    if let BaseType::Prod(sa, sb) = sort {
        let pa = pinned(q, &Q::fst(path.clone()), name, sa, env);
        let pb = pinned(q, &Q::snd(path.clone()), name, sb, env);
        if pa.is_none() && pb.is_none() {
            return None;
        }
        // An unpinned component still needs a finite range; the caller's
        // window is not available here, so fall back to the full window
        // via `None` when the other side is unconstrained and unbounded.
        let xa = pa.or_else(|| finite_sort_values(sa))?;
        let xb = pb.or_else(|| finite_sort_values(sb))?;
        let mut out = Vec::new();
        for a in &xa {
            for b in &xb {
                out.push(SemanticValue::pair(a.clone(), b.clone()));
            }
        }
        return Some(out);
    }
    None
}

/// Values of sorts that contain no integers.
fn finite_sort_values(sort: &BaseType) -> Option<Vec<SemanticValue>> {
    match sort {
        BaseType::Unit | BaseType::Bool => Some(window_values(sort, 0)),
        BaseType::Int => None,
        BaseType::Prod(a, b) => {
            finite_sort_values(a)?;
            finite_sort_values(b)?;
            Some(window_values(sort, 0))
        }
    }
}

fn max_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

struct Search<'a> {
    w: i64,
    env: Vec<(String, SemanticValue)>,
    universal: Vec<bool>,
    witness: Option<Witness>,
    matrix: &'a Matrix,
    /// A binder of universal force was enumerated from the window only.
    cut_forall: bool,
    /// Likewise for a binder of existential force.
    cut_exists: bool,
    /// Existentials here act universally (they sit in an implication premise).
    flipped: bool,
}

impl Search<'_> {
    fn run(&mut self, prefix: &[Binder]) -> Result<bool, QualError> {
        let Some((b, rest)) = prefix.split_first() else {
            return self.matrix_holds();
        };
        let (dom, exact) = domain_with_exactness(&b.bound, &b.name, &b.sort, &self.env, self.w);
        if !exact {
            if (b.quant == Quant::Forall) != self.flipped {
                self.cut_forall = true;
            } else {
                self.cut_exists = true;
            }
        }
        match b.quant {
            Quant::Forall => {
                for v in dom {
                    self.env.push((b.name.clone(), v));
                    self.universal.push(true);
                    let ok = self.run(rest);
                    if !matches!(ok, Ok(true)) && self.witness.is_none() {
                        self.witness = Some(
                            self.env
                                .iter()
                                .zip(&self.universal)
                                .filter(|(_, u)| **u)
                                .map(|(e, _)| e.clone())
                                .collect(),
                        );
                    }
                    self.env.pop();
                    self.universal.pop();
                    if !ok? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Quant::Exists => {
                for v in dom {
                    self.env.push((b.name.clone(), v));
                    self.universal.push(false);
                    let ok = self.run(rest);
                    self.env.pop();
                    self.universal.pop();
                    if ok? {
                        self.witness = None;
                        return Ok(true);
                    }
                }
                // Let the enclosing ∀ report its own assignment.
                self.witness = None;
                Ok(false)
            }
        }
    }

    fn matrix_holds(&mut self) -> Result<bool, QualError> {
        match self.matrix {
            Matrix::Plain(q) => q.holds(&self.env, None),
            Matrix::SelfFramed {
                block,
                premise,
                conclusion,
            } => {
                if !self.block_holds(block, premise, true)? {
                    return Ok(true);
                }
                self.block_holds(block, conclusion, false)
            }
        }
    }

    fn block_holds(
        &mut self,
        block: &[Binder],
        q: &Qualifier,
        premise: bool,
    ) -> Result<bool, QualError> {
        let matrix = Matrix::Plain(q.clone());
        let mut s = Search {
            w: self.w,
            env: self.env.clone(),
            universal: vec![false; self.env.len()],
            witness: None,
            matrix: &matrix,
            cut_forall: false,
            cut_exists: false,
            flipped: self.flipped != premise,
        };
        let r = s.run(block);
        self.cut_forall |= s.cut_forall;
        self.cut_exists |= s.cut_exists;
        r
    }
}

/// Decide a closed VC by enumeration over the window.
///
/// Integer literals beyond the window make enumeration untrustworthy, so
/// such VCs yield `WindowInsufficient` unless the answer survives widening:
/// `Valid` when no universally acting binder was cut short by the window,
/// `Invalid` when no existentially acting one was.
pub fn decide_bounded(vc: &Vc, w: i64) -> Verdict {
    let fv = vc.free_vars();
    if let Some(x) = fv.iter().next() {
        return Verdict::Unknown(format!("unbound name `{x}` in verification condition"));
    }
    let mut s = Search {
        w,
        env: Vec::new(),
        universal: Vec::new(),
        witness: None,
        matrix: &vc.matrix,
        cut_forall: false,
        cut_exists: false,
        flipped: false,
    };
    let result = match s.run(&vc.prefix) {
        Ok(true) => Verdict::Valid,
        Ok(false) => Verdict::Invalid(s.witness.take()),
        Err(e) => return Verdict::Unknown(format!("{e}")),
    };
    let definitive = match &result {
        Verdict::Valid => !s.cut_forall,
        Verdict::Invalid(_) => !s.cut_exists,
        _ => true,
    };
    match vc.max_literal() {
        Some(n) if n > w && !definitive => Verdict::WindowInsufficient { literal: n },
        _ => result,
    }
}

/// Is there a windowed valuation of `free` (name and sort) and `ν` making
/// `q` true?
pub fn satisfiable(
    q: &Qualifier,
    free: &[(String, BaseType)],
    nu: Option<&BaseType>,
    w: i64,
) -> bool {
    let mut prefix: Vec<Binder> = free
        .iter()
        .map(|(x, s)| Binder::exists(x.clone(), s.clone(), Qualifier::True))
        .collect();
    let mut matrix = q.clone();
    if let Some(s) = nu {
        let nu_name = fresh_nu(free);
        matrix = q.subst_nu(&Qualifier::var(nu_name.clone()));
        prefix.push(Binder::exists(nu_name, s.clone(), matrix.clone()));
    }
    matches!(decide_bounded(&Vc::new(prefix, matrix), w), Verdict::Valid)
}

fn fresh_nu(free: &[(String, BaseType)]) -> String {
    crate::rtype::fresh_avoiding(crate::qualifier::NU, |c| free.iter().any(|(x, _)| x == c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qualifier::NU;
    use Qualifier as Q;

    fn nu() -> Q {
        Q::var(NU)
    }

    fn int_eq(n: i64) -> Q {
        Q::eq(nu(), Q::Int(n))
    }

    #[test]
    fn tautology_instance() {
        let vc = Vc::new(
            vec![Binder::forall(NU, BaseType::Int, int_eq(1))],
            Q::or(int_eq(1), int_eq(2)),
        );
        assert_eq!(decide_bounded(&vc, 4), Verdict::Valid);
    }

    #[test]
    fn counterexample_is_reported() {
        let vc = Vc::new(
            vec![Binder::forall(
                NU,
                BaseType::Int,
                Q::or(int_eq(1), int_eq(2)),
            )],
            int_eq(1),
        );
        assert_eq!(
            decide_bounded(&vc, 4),
            Verdict::Invalid(Some(vec![(NU.into(), SemanticValue::Int(2))]))
        );
    }

    #[test]
    fn exists_under_forall() {
        let x = Q::var("x");
        let vc = Vc::new(
            vec![
                Binder::forall(NU, BaseType::Int, Q::or(int_eq(1), int_eq(2))),
                Binder::exists(
                    "x",
                    BaseType::Int,
                    Q::or(Q::eq(x.clone(), Q::Int(1)), Q::eq(x.clone(), Q::Int(2))),
                ),
            ],
            Q::eq(nu(), x),
        );
        assert_eq!(decide_bounded(&vc, 4), Verdict::Valid);
    }

    #[test]
    fn window_insufficient_unless_definitive() {
        let big = Vc::new(
            vec![Binder::forall(NU, BaseType::Int, Q::True)],
            Q::le(nu(), Q::Int(100)),
        );
        assert_eq!(
            decide_bounded(&big, 8),
            Verdict::WindowInsufficient { literal: 100 }
        );
        let refuted = Vc::new(
            vec![Binder::forall(NU, BaseType::Int, Q::True)],
            Q::le(nu(), Q::Int(-100)),
        );
        assert!(decide_bounded(&refuted, 8).is_invalid());
    }

    #[test]
    fn pinned_values_may_leave_the_window() {
        let d = domain(&int_eq(42), NU, &BaseType::Int, &Vec::new(), 8);
        assert_eq!(d, vec![SemanticValue::Int(42)]);
        let iv = Q::and(Q::le(Q::Int(11), nu()), Q::le(nu(), Q::Int(13)));
        assert_eq!(domain(&iv, NU, &BaseType::Int, &Vec::new(), 2).len(), 3);
        let pair = BaseType::prod(BaseType::Bool, BaseType::Int);
        let q = Q::and(Q::not(Q::fst(nu())), Q::eq(Q::snd(nu()), Q::Int(30)));
        assert_eq!(
            domain(&q, NU, &pair, &Vec::new(), 2),
            vec![SemanticValue::pair(
                SemanticValue::Bool(false),
                SemanticValue::Int(30)
            )]
        );
    }

    #[test]
    fn satisfiability() {
        assert!(satisfiable(
            &Q::eq(Q::Nu, Q::Int(11)),
            &[],
            Some(&BaseType::Int),
            16
        ));
        assert!(!satisfiable(&Q::False, &[], Some(&BaseType::Int), 16));
        assert!(!satisfiable(
            &Q::and(Q::eq(Q::Nu, Q::Int(1)), Q::eq(Q::Nu, Q::Int(2))),
            &[],
            Some(&BaseType::Int),
            16
        ));
    }

    #[test]
    fn self_framed_matrix() {
        // ∀ν. (∃x∈{1,2}. ν = x) ⟹ (∃x∈{1,2}. ν = x ∧ ν = 1) fails at ν = 2.
        let x = Q::var("x");
        let bx = Q::or(Q::eq(x.clone(), Q::Int(1)), Q::eq(x.clone(), Q::Int(2)));
        let vc = Vc {
            prefix: vec![Binder::forall(NU, BaseType::Int, Q::True)],
            matrix: Matrix::SelfFramed {
                block: vec![Binder::exists("x", BaseType::Int, bx)],
                premise: Q::eq(nu(), x.clone()),
                conclusion: Q::and(Q::eq(nu(), x), int_eq(1)),
            },
        };
        assert_eq!(
            decide_bounded(&vc, 3),
            Verdict::Invalid(Some(vec![(NU.into(), SemanticValue::Int(2))]))
        );
    }
}
