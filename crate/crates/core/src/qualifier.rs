//! Qualifiers: quantifier-free formulas over `ν` and program variables.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::syntax::BaseType;

/// Name under which `ν` appears in verification-condition prefixes and
/// witnesses. It is not a valid program identifier.
pub const NU: &str = "ν";

type B = Box<Qualifier>;

/// Terms and formulas share one tree; sorting separates them.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Qualifier {
    True,
    False,
    Nu,
    Var(String),
    Int(i64),
    Eq(B, B),
    Le(B, B),
    Lt(B, B),
    Add(B, B),
    Sub(B, B),
    Not(B),
    And(B, B),
    Or(B, B),
    Implies(B, B),
    Iff(B, B),
    Even(B),
    Odd(B),
    Fst(B),
    Snd(B),
}

/// Closed values of base types.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SemanticValue {
    Unit,
    Bool(bool),
    Int(i64),
    Pair(Box<SemanticValue>, Box<SemanticValue>),
}

impl SemanticValue {
    pub fn pair(a: SemanticValue, b: SemanticValue) -> Self {
        SemanticValue::Pair(Box::new(a), Box::new(b))
    }

    pub fn sort(&self) -> BaseType {
        match self {
            SemanticValue::Unit => BaseType::Unit,
            SemanticValue::Bool(_) => BaseType::Bool,
            SemanticValue::Int(_) => BaseType::Int,
            SemanticValue::Pair(a, b) => BaseType::prod(a.sort(), b.sort()),
        }
    }

    pub fn has_sort(&self, sort: &BaseType) -> bool {
        match (self, sort) {
            (SemanticValue::Unit, BaseType::Unit)
            | (SemanticValue::Bool(_), BaseType::Bool)
            | (SemanticValue::Int(_), BaseType::Int) => true,
            (SemanticValue::Pair(a, b), BaseType::Prod(sa, sb)) => a.has_sort(sa) && b.has_sort(sb),
            _ => false,
        }
    }

    /// The qualifier term denoting this value, if the logic has one.
    /// Unit and pairs have no literal syntax.
    pub fn as_term(&self) -> Option<Qualifier> {
        match self {
            SemanticValue::Bool(true) => Some(Qualifier::True),
            SemanticValue::Bool(false) => Some(Qualifier::False),
            SemanticValue::Int(n) => Some(Qualifier::Int(*n)),
            _ => None,
        }
    }

    /// A fixed inhabitant of `sort`.
    pub fn default_of(sort: &BaseType) -> SemanticValue {
        match sort {
            BaseType::Unit => SemanticValue::Unit,
            BaseType::Bool => SemanticValue::Bool(false),
            BaseType::Int => SemanticValue::Int(0),
            BaseType::Prod(a, b) => SemanticValue::pair(Self::default_of(a), Self::default_of(b)),
        }
    }
}

impl fmt::Display for SemanticValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemanticValue::Unit => f.write_str("()"),
            SemanticValue::Bool(b) => write!(f, "{b}"),
            SemanticValue::Int(n) => write!(f, "{n}"),
            SemanticValue::Pair(a, b) => write!(f, "({a}, {b})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum QualError {
    #[error("unbound name `{0}` in qualifier")]
    Unbound(String),
    #[error("`v` is not in scope here")]
    NuOutOfScope,
    #[error("sort mismatch: {0}")]
    Sort(String),
    #[error("integer overflow while evaluating a qualifier")]
    Overflow,
    #[error("replacement for `{0}` must be a term, not a connective")]
    NotATerm(String),
}

/// Lookup of program variables during evaluation.
pub trait Valuation {
    fn value_of(&self, name: &str) -> Option<&SemanticValue>;
}

impl Valuation for BTreeMap<String, SemanticValue> {
    fn value_of(&self, name: &str) -> Option<&SemanticValue> {
        self.get(name)
    }
}

/// Assignment stacks resolve to the innermost binding.
impl Valuation for [(String, SemanticValue)] {
    fn value_of(&self, name: &str) -> Option<&SemanticValue> {
        self.iter().rev().find(|(n, _)| n == name).map(|(_, v)| v)
    }
}

impl Valuation for Vec<(String, SemanticValue)> {
    fn value_of(&self, name: &str) -> Option<&SemanticValue> {
        self.as_slice().value_of(name)
    }
}

pub type SortEnv = BTreeMap<String, BaseType>;

impl Qualifier {
    pub fn var(name: impl Into<String>) -> Self {
        Qualifier::Var(name.into())
    }

    pub fn eq(a: Qualifier, b: Qualifier) -> Self {
        Qualifier::Eq(Box::new(a), Box::new(b))
    }

    pub fn le(a: Qualifier, b: Qualifier) -> Self {
        Qualifier::Le(Box::new(a), Box::new(b))
    }

    pub fn lt(a: Qualifier, b: Qualifier) -> Self {
        Qualifier::Lt(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Qualifier, b: Qualifier) -> Self {
        Qualifier::Add(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Qualifier, b: Qualifier) -> Self {
        Qualifier::Sub(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Qualifier, b: Qualifier) -> Self {
        Qualifier::Iff(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Qualifier, b: Qualifier) -> Self {
        Qualifier::Implies(Box::new(a), Box::new(b))
    }

    pub fn fst(a: Qualifier) -> Self {
        Qualifier::Fst(Box::new(a))
    }

    pub fn snd(a: Qualifier) -> Self {
        Qualifier::Snd(Box::new(a))
    }

    pub fn even(a: Qualifier) -> Self {
        Qualifier::Even(Box::new(a))
    }

    pub fn odd(a: Qualifier) -> Self {
        Qualifier::Odd(Box::new(a))
    }

    /// Conjunction with unit/zero simplification.
    pub fn and(a: Qualifier, b: Qualifier) -> Self {
        match (a, b) {
            (Qualifier::True, q) | (q, Qualifier::True) => q,
            (Qualifier::False, _) | (_, Qualifier::False) => Qualifier::False,
            (a, b) => Qualifier::And(Box::new(a), Box::new(b)),
        }
    }

    /// Disjunction with unit/zero simplification.
    pub fn or(a: Qualifier, b: Qualifier) -> Self {
        match (a, b) {
            (Qualifier::False, q) | (q, Qualifier::False) => q,
            (Qualifier::True, _) | (_, Qualifier::True) => Qualifier::True,
            (a, b) => Qualifier::Or(Box::new(a), Box::new(b)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Qualifier) -> Self {
        match a {
            Qualifier::True => Qualifier::False,
            Qualifier::False => Qualifier::True,
            Qualifier::Not(inner) => *inner,
            a => Qualifier::Not(Box::new(a)),
        }
    }

    pub fn conj(qs: impl IntoIterator<Item = Qualifier>) -> Self {
        qs.into_iter().fold(Qualifier::True, Qualifier::and)
    }

    pub fn disj(qs: impl IntoIterator<Item = Qualifier>) -> Self {
        qs.into_iter().fold(Qualifier::False, Qualifier::or)
    }

    fn children(&self) -> [Option<&Qualifier>; 2] {
        use Qualifier::*;
        match self {
            True | False | Nu | Var(_) | Int(_) => [None, None],
            Not(a) | Even(a) | Odd(a) | Fst(a) | Snd(a) => [Some(a), None],
            Eq(a, b)
            | Le(a, b)
            | Lt(a, b)
            | Add(a, b)
            | Sub(a, b)
            | And(a, b)
            | Or(a, b)
            | Implies(a, b)
            | Iff(a, b) => [Some(a), Some(b)],
        }
    }

    /// Rebuild with `f` applied to each immediate child.
    pub fn map_children(&self, mut f: impl FnMut(&Qualifier) -> Qualifier) -> Qualifier {
        use Qualifier::*;
        let mut g = |q: &Qualifier| Box::new(f(q));
        match self {
            True | False | Nu | Var(_) | Int(_) => self.clone(),
            Not(a) => Not(g(a)),
            Even(a) => Even(g(a)),
            Odd(a) => Odd(g(a)),
            Fst(a) => Fst(g(a)),
            Snd(a) => Snd(g(a)),
            Eq(a, b) => Eq(g(a), g(b)),
            Le(a, b) => Le(g(a), g(b)),
            Lt(a, b) => Lt(g(a), g(b)),
            Add(a, b) => Add(g(a), g(b)),
            Sub(a, b) => Sub(g(a), g(b)),
            And(a, b) => And(g(a), g(b)),
            Or(a, b) => Or(g(a), g(b)),
            Implies(a, b) => Implies(g(a), g(b)),
            Iff(a, b) => Iff(g(a), g(b)),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        if let Qualifier::Var(x) = self {
            out.insert(x.clone());
        }
        for c in self.children().into_iter().flatten() {
            c.collect_vars(out);
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        match self {
            Qualifier::Var(x) => x == name,
            _ => self
                .children()
                .into_iter()
                .flatten()
                .any(|c| c.mentions(name)),
        }
    }

    pub fn mentions_nu(&self) -> bool {
        match self {
            Qualifier::Nu => true,
            _ => self
                .children()
                .into_iter()
                .flatten()
                .any(|c| c.mentions_nu()),
        }
    }

    /// Largest absolute integer literal, if any.
    pub fn max_literal(&self) -> Option<i64> {
        let here = match self {
            Qualifier::Int(n) => Some(n.checked_abs().unwrap_or(i64::MAX)),
            _ => None,
        };
        self.children()
            .into_iter()
            .flatten()
            .filter_map(|c| c.max_literal())
            .chain(here)
            .max()
    }

    /// True for the term-forming constructors (variables, literals,
    /// arithmetic, projections) as opposed to connectives.
    pub fn is_term(&self) -> bool {
        use Qualifier::*;
        match self {
            True | False | Nu | Var(_) | Int(_) => true,
            Add(a, b) | Sub(a, b) => a.is_term() && b.is_term(),
            Fst(a) | Snd(a) => a.is_term(),
            _ => false,
        }
    }

    /// Replace every `ν` with `t`.
    pub fn subst_nu(&self, t: &Qualifier) -> Qualifier {
        match self {
            Qualifier::Nu => t.clone(),
            _ => self.map_children(|c| c.subst_nu(t)),
        }
    }

    /// Replace every occurrence of the variable `name` with `t`. Qualifiers
    /// have no binders, so this never captures.
    pub fn subst_var(&self, name: &str, t: &Qualifier) -> Qualifier {
        match self {
            Qualifier::Var(x) if x == name => t.clone(),
            _ => self.map_children(|c| c.subst_var(name, t)),
        }
    }

    /// Checked substitution: `name` is a variable, or `None` for `ν`.
    /// The replacement must be a term of the same sort as what it replaces.
    pub fn subst_checked(
        &self,
        name: Option<&str>,
        t: &Qualifier,
        env: &SortEnv,
        nu: Option<&BaseType>,
    ) -> Result<Qualifier, QualError> {
        let label = name.unwrap_or("v");
        if !t.is_term() {
            return Err(QualError::NotATerm(label.into()));
        }
        let expected = match name {
            None => nu.cloned().ok_or(QualError::NuOutOfScope)?,
            Some(x) => env
                .get(x)
                .cloned()
                .ok_or_else(|| QualError::Unbound(x.into()))?,
        };
        let actual = t.sort_of(env, nu)?;
        if actual != expected {
            return Err(QualError::Sort(alloc::format!(
                "cannot substitute a {actual} term for `{label}` of sort {expected}"
            )));
        }
        Ok(match name {
            None => self.subst_nu(t),
            Some(x) => self.subst_var(x, t),
        })
    }

    /// Infer the sort of a term or formula (formulas are `bool`).
    pub fn sort_of(&self, env: &SortEnv, nu: Option<&BaseType>) -> Result<BaseType, QualError> {
        use Qualifier::*;
        let expect = |q: &Qualifier, want: &BaseType| -> Result<(), QualError> {
            let got = q.sort_of(env, nu)?;
            if &got == want {
                Ok(())
            } else {
                Err(QualError::Sort(alloc::format!(
                    "expected {want}, found {got} in `{q}`"
                )))
            }
        };
        match self {
            True | False => Ok(BaseType::Bool),
            Nu => nu.cloned().ok_or(QualError::NuOutOfScope),
            Var(x) => env
                .get(x)
                .cloned()
                .ok_or_else(|| QualError::Unbound(x.clone())),
            Int(_) => Ok(BaseType::Int),
            Eq(a, b) => {
                let sa = a.sort_of(env, nu)?;
                expect(b, &sa)?;
                Ok(BaseType::Bool)
            }
            Le(a, b) | Lt(a, b) => {
                expect(a, &BaseType::Int)?;
                expect(b, &BaseType::Int)?;
                Ok(BaseType::Bool)
            }
            Add(a, b) | Sub(a, b) => {
                expect(a, &BaseType::Int)?;
                expect(b, &BaseType::Int)?;
                Ok(BaseType::Int)
            }
            Not(a) => {
                expect(a, &BaseType::Bool)?;
                Ok(BaseType::Bool)
            }
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
                expect(a, &BaseType::Bool)?;
                expect(b, &BaseType::Bool)?;
                Ok(BaseType::Bool)
            }
            Even(a) | Odd(a) => {
                expect(a, &BaseType::Int)?;
                Ok(BaseType::Bool)
            }
            Fst(a) | Snd(a) => match a.sort_of(env, nu)? {
                BaseType::Prod(l, r) => Ok(if matches!(self, Fst(_)) { *l } else { *r }),
                other => Err(QualError::Sort(alloc::format!(
                    "projection from non-pair sort {other}"
                ))),
            },
        }
    }

    pub fn check_formula(&self, env: &SortEnv, nu: Option<&BaseType>) -> Result<(), QualError> {
        match self.sort_of(env, nu)? {
            BaseType::Bool => Ok(()),
            other => Err(QualError::Sort(alloc::format!(
                "qualifier `{self}` has sort {other}, expected bool"
            ))),
        }
    }

    /// Evaluate under a valuation, with `nu` bound to the given value.
    pub fn eval<V: Valuation + ?Sized>(
        &self,
        val: &V,
        nu: Option<&SemanticValue>,
    ) -> Result<SemanticValue, QualError> {
        use Qualifier::*;
        use SemanticValue as S;
        let int = |q: &Qualifier| -> Result<i64, QualError> {
            match q.eval(val, nu)? {
                S::Int(n) => Ok(n),
                other => Err(QualError::Sort(alloc::format!(
                    "expected int, found {other}"
                ))),
            }
        };
        let boolean = |q: &Qualifier| -> Result<bool, QualError> {
            match q.eval(val, nu)? {
                S::Bool(b) => Ok(b),
                other => Err(QualError::Sort(alloc::format!(
                    "expected bool, found {other}"
                ))),
            }
        };
        Ok(match self {
            True => S::Bool(true),
            False => S::Bool(false),
            Nu => nu.cloned().ok_or(QualError::NuOutOfScope)?,
            Var(x) => val
                .value_of(x)
                .cloned()
                .ok_or_else(|| QualError::Unbound(x.clone()))?,
            Int(n) => S::Int(*n),
            Eq(a, b) => {
                let (va, vb) = (a.eval(val, nu)?, b.eval(val, nu)?);
                if va.sort() != vb.sort() {
                    return Err(QualError::Sort(alloc::format!("comparing {va} with {vb}")));
                }
                S::Bool(va == vb)
            }
            Le(a, b) => S::Bool(int(a)? <= int(b)?),
            Lt(a, b) => S::Bool(int(a)? < int(b)?),
            Add(a, b) => S::Int(int(a)?.checked_add(int(b)?).ok_or(QualError::Overflow)?),
            Sub(a, b) => S::Int(int(a)?.checked_sub(int(b)?).ok_or(QualError::Overflow)?),
            Not(a) => S::Bool(!boolean(a)?),
            And(a, b) => S::Bool(boolean(a)? && boolean(b)?),
            Or(a, b) => S::Bool(boolean(a)? || boolean(b)?),
            Implies(a, b) => S::Bool(!boolean(a)? || boolean(b)?),
            Iff(a, b) => S::Bool(boolean(a)? == boolean(b)?),
            // Mathematical parity: -3 is odd.
            Even(a) => S::Bool(int(a)?.rem_euclid(2) == 0),
            Odd(a) => S::Bool(int(a)?.rem_euclid(2) == 1),
            Fst(a) | Snd(a) => match a.eval(val, nu)? {
                S::Pair(l, r) => {
                    if matches!(self, Fst(_)) {
                        *l
                    } else {
                        *r
                    }
                }
                other => return Err(QualError::Sort(alloc::format!("projection from {other}"))),
            },
        })
    }

    /// Satisfaction of a formula.
    pub fn holds<V: Valuation + ?Sized>(
        &self,
        val: &V,
        nu: Option<&SemanticValue>,
    ) -> Result<bool, QualError> {
        match self.eval(val, nu)? {
            SemanticValue::Bool(b) => Ok(b),
            other => Err(QualError::Sort(alloc::format!(
                "formula evaluated to {other}"
            ))),
        }
    }

    fn precedence(&self) -> u8 {
        use Qualifier::*;
        match self {
            Implies(..) => 1,
            Iff(..) => 2,
            Or(..) => 3,
            And(..) => 4,
            Eq(..) | Le(..) | Lt(..) => 5,
            Add(..) | Sub(..) => 6,
            Not(..) => 7,
            _ => 8,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        use Qualifier::*;
        let p = self.precedence();
        let paren = p < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            True => f.write_str("true")?,
            False => f.write_str("false")?,
            Nu => f.write_str("v")?,
            Var(x) => f.write_str(x)?,
            Int(n) if *n < 0 => write!(f, "({n})")?,
            Int(n) => write!(f, "{n}")?,
            Not(a) => {
                f.write_str("!")?;
                a.fmt_prec(f, 7)?;
            }
            Even(a) => write!(f, "even({a})")?,
            Odd(a) => write!(f, "odd({a})")?,
            Fst(a) => write!(f, "fst({a})")?,
            Snd(a) => write!(f, "snd({a})")?,
            Implies(a, b) => {
                a.fmt_prec(f, 2)?;
                f.write_str(" ==> ")?;
                b.fmt_prec(f, 1)?;
            }
            Iff(a, b) | Eq(a, b) | Le(a, b) | Lt(a, b) => {
                let op = match self {
                    Iff(..) => "<=>",
                    Eq(..) => "=",
                    Le(..) => "<=",
                    _ => "<",
                };
                a.fmt_prec(f, p + 1)?;
                write!(f, " {op} ")?;
                b.fmt_prec(f, p + 1)?;
            }
            Or(a, b) | And(a, b) | Add(a, b) | Sub(a, b) => {
                let op = match self {
                    Or(..) => "||",
                    And(..) => "&&",
                    Add(..) => "+",
                    _ => "-",
                };
                a.fmt_prec(f, p)?;
                write!(f, " {op} ")?;
                b.fmt_prec(f, p + 1)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Prints in the concrete qualifier syntax accepted by the parser.
impl fmt::Display for Qualifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}
