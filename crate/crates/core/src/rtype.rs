//! Refinement types: over-base `{b | φ}`, coverage-base `[b | φ]`, and the
//! three arrow forms.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use core::fmt;

use crate::erasure::BasicType;
use crate::qualifier::Qualifier;
use crate::syntax::BaseType;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RType {
    /// `{b | φ}`: every outcome satisfies φ.
    Over { base: BaseType, qual: Qualifier },
    /// `[b | φ]`: every value satisfying φ is an outcome.
    Cover { base: BaseType, qual: Qualifier },
    /// `x:{b | φ} -> τ`; the codomain may mention `x`.
    OverArrow {
        param: String,
        base: BaseType,
        qual: Qualifier,
        cod: Box<RType>,
    },
    /// `[b | φ] -> τ`; nameless, so the codomain cannot mention the argument.
    UnderArrow {
        base: BaseType,
        qual: Qualifier,
        cod: Box<RType>,
    },
    /// `(f: τa) -> τ` with `τa` an arrow.
    HoArrow {
        param: String,
        dom: Box<RType>,
        cod: Box<RType>,
    },
}

impl RType {
    pub fn cover(base: BaseType, qual: Qualifier) -> Self {
        RType::Cover { base, qual }
    }

    pub fn over(base: BaseType, qual: Qualifier) -> Self {
        RType::Over { base, qual }
    }

    pub fn over_arrow(
        param: impl Into<String>,
        base: BaseType,
        qual: Qualifier,
        cod: RType,
    ) -> Self {
        RType::OverArrow {
            param: param.into(),
            base,
            qual,
            cod: Box::new(cod),
        }
    }

    pub fn under_arrow(base: BaseType, qual: Qualifier, cod: RType) -> Self {
        RType::UnderArrow {
            base,
            qual,
            cod: Box::new(cod),
        }
    }

    pub fn ho_arrow(param: impl Into<String>, dom: RType, cod: RType) -> Self {
        RType::HoArrow {
            param: param.into(),
            dom: Box::new(dom),
            cod: Box::new(cod),
        }
    }

    pub fn is_arrow(&self) -> bool {
        !matches!(self, RType::Over { .. } | RType::Cover { .. })
    }

    pub fn is_base(&self) -> bool {
        !self.is_arrow()
    }

    /// Base type and qualifier of a base type.
    pub fn as_base(&self) -> Option<(&BaseType, &Qualifier)> {
        match self {
            RType::Over { base, qual } | RType::Cover { base, qual } => Some((base, qual)),
            _ => None,
        }
    }

    pub fn erase(&self) -> BasicType {
        match self {
            RType::Over { base, .. } | RType::Cover { base, .. } => BasicType::Base(base.clone()),
            RType::OverArrow { base, cod, .. } | RType::UnderArrow { base, cod, .. } => {
                BasicType::arrow(BasicType::Base(base.clone()), cod.erase())
            }
            RType::HoArrow { dom, cod, .. } => BasicType::arrow(dom.erase(), cod.erase()),
        }
    }

    /// Free program variables of all qualifiers, minus arrow parameters.
    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            RType::Over { qual, .. } | RType::Cover { qual, .. } => qual.free_vars(),
            RType::OverArrow {
                param, qual, cod, ..
            } => {
                let mut out = qual.free_vars();
                let mut inner = cod.free_vars();
                inner.remove(param);
                out.extend(inner);
                out
            }
            RType::UnderArrow { qual, cod, .. } => {
                let mut out = qual.free_vars();
                out.extend(cod.free_vars());
                out
            }
            RType::HoArrow { param, dom, cod } => {
                let mut out = dom.free_vars();
                let mut inner = cod.free_vars();
                inner.remove(param);
                out.extend(inner);
                out
            }
        }
    }

    pub fn max_literal(&self) -> Option<i64> {
        match self {
            RType::Over { qual, .. } | RType::Cover { qual, .. } => qual.max_literal(),
            RType::OverArrow { qual, cod, .. } | RType::UnderArrow { qual, cod, .. } => {
                qual.max_literal().max(cod.max_literal())
            }
            RType::HoArrow { dom, cod, .. } => dom.max_literal().max(cod.max_literal()),
        }
    }

    /// Rename the bound parameter of an arrow (and its uses in the codomain).
    pub fn rename_param(&self, to: &str) -> RType {
        match self {
            RType::OverArrow {
                param,
                base,
                qual,
                cod,
            } => RType::OverArrow {
                param: to.into(),
                base: base.clone(),
                qual: qual.clone(),
                cod: Box::new(cod.subst_var(param, &Qualifier::var(to))),
            },
            RType::HoArrow { dom, cod, .. } => RType::HoArrow {
                param: to.into(),
                dom: dom.clone(),
                cod: cod.clone(),
            },
            other => other.clone(),
        }
    }

    /// Capture-avoiding substitution of a qualifier term for a variable.
    pub fn subst_var(&self, name: &str, t: &Qualifier) -> RType {
        match self {
            RType::Over { base, qual } => RType::over(base.clone(), qual.subst_var(name, t)),
            RType::Cover { base, qual } => RType::cover(base.clone(), qual.subst_var(name, t)),
            RType::UnderArrow { base, qual, cod } => RType::under_arrow(
                base.clone(),
                qual.subst_var(name, t),
                cod.subst_var(name, t),
            ),
            RType::OverArrow {
                param,
                base,
                qual,
                cod,
            } => {
                let qual = qual.subst_var(name, t);
                if param == name {
                    return RType::OverArrow {
                        param: param.clone(),
                        base: base.clone(),
                        qual,
                        cod: cod.clone(),
                    };
                }
                let tv = t.free_vars();
                if tv.contains(param) {
                    let fresh = fresh_avoiding(param, |c| {
                        tv.contains(c) || cod.free_vars().contains(c) || c == name
                    });
                    let renamed = self.rename_param(&fresh);
                    return renamed.subst_var(name, t);
                }
                RType::over_arrow(param.clone(), base.clone(), qual, cod.subst_var(name, t))
            }
            RType::HoArrow { param, dom, cod } => {
                // Function parameters never occur in qualifiers.
                RType::ho_arrow(
                    param.clone(),
                    dom.subst_var(name, t),
                    cod.subst_var(name, t),
                )
            }
        }
    }

    /// Apply `f` to every qualifier, passing the set of arrow parameters in
    /// scope at that point.
    pub fn map_quals(
        &self,
        f: &mut impl FnMut(&Qualifier, &BTreeSet<String>) -> Qualifier,
    ) -> RType {
        fn go(
            t: &RType,
            scope: &mut BTreeSet<String>,
            f: &mut impl FnMut(&Qualifier, &BTreeSet<String>) -> Qualifier,
        ) -> RType {
            match t {
                RType::Over { base, qual } => RType::over(base.clone(), f(qual, scope)),
                RType::Cover { base, qual } => RType::cover(base.clone(), f(qual, scope)),
                RType::UnderArrow { base, qual, cod } => {
                    let q = f(qual, scope);
                    RType::under_arrow(base.clone(), q, go(cod, scope, f))
                }
                RType::OverArrow {
                    param,
                    base,
                    qual,
                    cod,
                } => {
                    let q = f(qual, scope);
                    let fresh = scope.insert(param.clone());
                    let c = go(cod, scope, f);
                    if fresh {
                        scope.remove(param);
                    }
                    RType::over_arrow(param.clone(), base.clone(), q, c)
                }
                RType::HoArrow { param, dom, cod } => {
                    let d = go(dom, scope, f);
                    RType::ho_arrow(param.clone(), d, go(cod, scope, f))
                }
            }
        }
        go(self, &mut BTreeSet::new(), f)
    }

    /// Number of arrows before the final result type.
    pub fn arity(&self) -> usize {
        match self {
            RType::OverArrow { cod, .. }
            | RType::UnderArrow { cod, .. }
            | RType::HoArrow { cod, .. } => 1 + cod.arity(),
            _ => 0,
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            RType::Over { .. } => "over-base",
            RType::Cover { .. } => "coverage-base",
            RType::OverArrow { .. } => "dependent arrow",
            RType::UnderArrow { .. } => "under-parameter arrow",
            RType::HoArrow { .. } => "higher-order arrow",
        }
    }

    pub fn describe(&self) -> String {
        format!("{} `{}`", self.kind_name(), self)
    }
}

/// `base` with primes appended until `taken` rejects it.
pub fn fresh_avoiding(base: &str, taken: impl Fn(&str) -> bool) -> String {
    let mut s = String::from(base);
    while taken(&s) {
        s.push('\'');
    }
    s
}

impl fmt::Display for RType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RType::Over { base, qual } => write!(f, "{{{base} | {qual}}}"),
            RType::Cover { base, qual } => write!(f, "[{base} | {qual}]"),
            RType::OverArrow {
                param,
                base,
                qual,
                cod,
            } => {
                if param == "_" {
                    write!(f, "{{{base} | {qual}}} -> {cod}")
                } else {
                    write!(f, "{param}:{{{base} | {qual}}} -> {cod}")
                }
            }
            RType::UnderArrow { base, qual, cod } => write!(f, "[{base} | {qual}] -> {cod}"),
            RType::HoArrow { param, dom, cod } => write!(f, "({param}: {dom}) -> {cod}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use Qualifier as Q;

    #[test]
    fn display_forms() {
        let t = RType::over_arrow(
            "x",
            BaseType::Int,
            Q::True,
            RType::cover(BaseType::Bool, Q::iff(Q::Nu, Q::even(Q::var("x")))),
        );
        assert_eq!(t.to_string(), "x:{int | true} -> [bool | v <=> even(x)]");
        let u = RType::under_arrow(
            BaseType::Int,
            Q::True,
            RType::cover(BaseType::Int, Q::eq(Q::Nu, Q::Int(1))),
        );
        assert_eq!(u.to_string(), "[int | true] -> [int | v = 1]");
    }

    #[test]
    fn subst_stops_at_binder_and_avoids_capture() {
        let t = RType::over_arrow(
            "x",
            BaseType::Int,
            Q::True,
            RType::cover(BaseType::Int, Q::eq(Q::Nu, Q::var("x"))),
        );
        assert_eq!(t.subst_var("x", &Q::Int(3)), t);
        let t2 = RType::over_arrow(
            "x",
            BaseType::Int,
            Q::True,
            RType::cover(
                BaseType::Int,
                Q::eq(Q::Nu, Q::add(Q::var("x"), Q::var("y"))),
            ),
        );
        let s = t2.subst_var("y", &Q::var("x"));
        match s {
            RType::OverArrow { param, cod, .. } => {
                assert_eq!(param, "x'");
                assert_eq!(
                    *cod,
                    RType::cover(
                        BaseType::Int,
                        Q::eq(Q::Nu, Q::add(Q::var("x'"), Q::var("x")))
                    )
                );
            }
            _ => panic!("shape changed"),
        }
    }

    #[test]
    fn free_vars_exclude_params() {
        let t = RType::over_arrow(
            "x",
            BaseType::Int,
            Q::le(Q::var("a"), Q::Nu),
            RType::cover(BaseType::Int, Q::eq(Q::Nu, Q::var("x"))),
        );
        let fv = t.free_vars();
        assert!(fv.contains("a") && !fv.contains("x"));
    }
}
