//! Primitive operations: names, arities, refinement types and behavior.
//!
//! Parameter names in builtin types start with `#`, which no program
//! identifier can, so substitution into them never captures.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::erasure::BasicType;
use crate::qualifier::{Qualifier as Q, SemanticValue};
use crate::rtype::RType;
use crate::syntax::BaseType;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Builtin {
    IntGen,
    BoolGen,
    IntRange,
    IsEven,
    IsOdd,
    Add,
    Sub,
    Eq,
    Le,
    Lt,
    Gt,
    Ge,
    And,
    Or,
    Not,
    Fst,
    Snd,
}

/// Cap on the width of an `int_range` enumeration.
pub const MAX_RANGE: i64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrimError {
    Overflow,
    Sort(String),
    RangeTooWide(i64, i64),
}

impl Builtin {
    pub const ALL: [Builtin; 17] = [
        Builtin::IntGen,
        Builtin::BoolGen,
        Builtin::IntRange,
        Builtin::IsEven,
        Builtin::IsOdd,
        Builtin::Add,
        Builtin::Sub,
        Builtin::Eq,
        Builtin::Le,
        Builtin::Lt,
        Builtin::Gt,
        Builtin::Ge,
        Builtin::And,
        Builtin::Or,
        Builtin::Not,
        Builtin::Fst,
        Builtin::Snd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::IntGen => "int_gen",
            Builtin::BoolGen => "bool_gen",
            Builtin::IntRange => "int_range",
            Builtin::IsEven => "is_even",
            Builtin::IsOdd => "is_odd",
            Builtin::Add => "+",
            Builtin::Sub => "-",
            Builtin::Eq => "==",
            Builtin::Le => "<=",
            Builtin::Lt => "<",
            Builtin::Gt => ">",
            Builtin::Ge => ">=",
            Builtin::And => "&&",
            Builtin::Or => "||",
            Builtin::Not => "not",
            Builtin::Fst => "fst",
            Builtin::Snd => "snd",
        }
    }

    pub fn from_name(s: &str) -> Option<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.name() == s)
    }

    pub fn arity(self) -> usize {
        match self {
            Builtin::IntGen
            | Builtin::BoolGen
            | Builtin::IsEven
            | Builtin::IsOdd
            | Builtin::Not => 1,
            Builtin::Fst | Builtin::Snd => 1,
            _ => 2,
        }
    }

    /// Sort-polymorphic builtins; their types are instantiated at the
    /// first argument.
    pub fn is_generic(self) -> bool {
        matches!(self, Builtin::Eq | Builtin::Fst | Builtin::Snd)
    }

    /// Generators are the only nondeterministic builtins.
    pub fn is_generator(self) -> bool {
        matches!(self, Builtin::IntGen | Builtin::BoolGen)
    }

    /// Refinement type of a monomorphic builtin.
    pub fn rtype(self) -> Option<RType> {
        use BaseType::{Bool, Int, Unit};
        let a = || Q::var("#a");
        let b = || Q::var("#b");
        let bin = |arg: BaseType, res: BaseType, q: Q| {
            RType::over_arrow(
                "#a",
                arg.clone(),
                Q::True,
                RType::over_arrow("#b", arg, Q::True, RType::cover(res, q)),
            )
        };
        let rel = |q: Q| bin(Int, Bool, Q::iff(Q::Nu, q));
        Some(match self {
            Builtin::IntGen => RType::over_arrow("#u", Unit, Q::True, RType::cover(Int, Q::True)),
            Builtin::BoolGen => RType::over_arrow("#u", Unit, Q::True, RType::cover(Bool, Q::True)),
            Builtin::IntRange => RType::over_arrow(
                "#lo",
                Int,
                Q::True,
                RType::over_arrow(
                    "#hi",
                    Int,
                    Q::le(Q::var("#lo"), Q::Nu),
                    RType::cover(
                        Int,
                        Q::and(Q::le(Q::var("#lo"), Q::Nu), Q::le(Q::Nu, Q::var("#hi"))),
                    ),
                ),
            ),
            Builtin::IsEven => RType::over_arrow(
                "#n",
                Int,
                Q::True,
                RType::cover(Bool, Q::iff(Q::Nu, Q::even(Q::var("#n")))),
            ),
            Builtin::IsOdd => RType::over_arrow(
                "#n",
                Int,
                Q::True,
                RType::cover(Bool, Q::iff(Q::Nu, Q::odd(Q::var("#n")))),
            ),
            Builtin::Add => bin(Int, Int, Q::eq(Q::Nu, Q::add(a(), b()))),
            Builtin::Sub => bin(Int, Int, Q::eq(Q::Nu, Q::sub(a(), b()))),
            Builtin::Le => rel(Q::le(a(), b())),
            Builtin::Lt => rel(Q::lt(a(), b())),
            Builtin::Gt => rel(Q::lt(b(), a())),
            Builtin::Ge => rel(Q::le(b(), a())),
            Builtin::And => bin(Bool, Bool, Q::iff(Q::Nu, Q::And(a().into(), b().into()))),
            Builtin::Or => bin(Bool, Bool, Q::iff(Q::Nu, Q::Or(a().into(), b().into()))),
            Builtin::Not => RType::over_arrow(
                "#a",
                Bool,
                Q::True,
                RType::cover(Bool, Q::iff(Q::Nu, Q::Not(a().into()))),
            ),
            Builtin::Eq | Builtin::Fst | Builtin::Snd => return None,
        })
    }

    /// Type of a builtin given the sort of its first argument.
    pub fn instantiate(self, first: &BaseType) -> Result<RType, String> {
        match self {
            Builtin::Eq => Ok(RType::over_arrow(
                "#a",
                first.clone(),
                Q::True,
                RType::over_arrow(
                    "#b",
                    first.clone(),
                    Q::True,
                    RType::cover(
                        BaseType::Bool,
                        Q::iff(Q::Nu, Q::eq(Q::var("#a"), Q::var("#b"))),
                    ),
                ),
            )),
            Builtin::Fst | Builtin::Snd => match first {
                BaseType::Prod(l, r) => {
                    let (res, proj) = if self == Builtin::Fst {
                        ((**l).clone(), Q::fst(Q::var("#p")))
                    } else {
                        ((**r).clone(), Q::snd(Q::var("#p")))
                    };
                    Ok(RType::over_arrow(
                        "#p",
                        first.clone(),
                        Q::True,
                        RType::cover(res, Q::eq(Q::Nu, proj)),
                    ))
                }
                other => Err(format!("`{}` expects a pair, found {other}", self.name())),
            },
            _ => {
                let t = self.rtype().expect("monomorphic builtin");
                match &t {
                    RType::OverArrow { base, .. } if base == first => Ok(t),
                    RType::OverArrow { base, .. } => {
                        Err(format!("`{}` expects {base}, found {first}", self.name()))
                    }
                    _ => unreachable!("builtins are arrows"),
                }
            }
        }
    }

    /// Erased type, instantiated at `first` for generic builtins.
    pub fn basic_type(self, first: &BaseType) -> Result<BasicType, String> {
        Ok(self.instantiate(first)?.erase())
    }

    /// All results of a saturated application. An empty vector is a stuck
    /// path (`int_range` with `lo > hi`).
    pub fn apply(
        self,
        args: &[SemanticValue],
        window: i64,
    ) -> Result<Vec<SemanticValue>, PrimError> {
        use SemanticValue as V;
        let sort_err = || PrimError::Sort(format!("bad arguments to `{}`", self.name()));
        let int = |v: &V| match v {
            V::Int(n) => Ok(*n),
            _ => Err(sort_err()),
        };
        let boolean = |v: &V| match v {
            V::Bool(b) => Ok(*b),
            _ => Err(sort_err()),
        };
        debug_assert_eq!(args.len(), self.arity());
        Ok(match self {
            Builtin::IntGen => match &args[0] {
                V::Unit => (-window..=window).map(V::Int).collect(),
                _ => return Err(sort_err()),
            },
            Builtin::BoolGen => match &args[0] {
                V::Unit => vec![V::Bool(false), V::Bool(true)],
                _ => return Err(sort_err()),
            },
            Builtin::IntRange => {
                let (lo, hi) = (int(&args[0])?, int(&args[1])?);
                if lo > hi {
                    Vec::new()
                } else if hi.checked_sub(lo).is_none_or(|w| w > MAX_RANGE) {
                    return Err(PrimError::RangeTooWide(lo, hi));
                } else {
                    (lo..=hi).map(V::Int).collect()
                }
            }
            Builtin::IsEven => vec![V::Bool(int(&args[0])?.rem_euclid(2) == 0)],
            Builtin::IsOdd => vec![V::Bool(int(&args[0])?.rem_euclid(2) == 1)],
            Builtin::Add => vec![V::Int(
                int(&args[0])?
                    .checked_add(int(&args[1])?)
                    .ok_or(PrimError::Overflow)?,
            )],
            Builtin::Sub => vec![V::Int(
                int(&args[0])?
                    .checked_sub(int(&args[1])?)
                    .ok_or(PrimError::Overflow)?,
            )],
            Builtin::Eq => {
                if args[0].sort() != args[1].sort() {
                    return Err(sort_err());
                }
                vec![V::Bool(args[0] == args[1])]
            }
            Builtin::Le => vec![V::Bool(int(&args[0])? <= int(&args[1])?)],
            Builtin::Lt => vec![V::Bool(int(&args[0])? < int(&args[1])?)],
            Builtin::Gt => vec![V::Bool(int(&args[0])? > int(&args[1])?)],
            Builtin::Ge => vec![V::Bool(int(&args[0])? >= int(&args[1])?)],
            Builtin::And => vec![V::Bool(boolean(&args[0])? && boolean(&args[1])?)],
            Builtin::Or => vec![V::Bool(boolean(&args[0])? || boolean(&args[1])?)],
            Builtin::Not => vec![V::Bool(!boolean(&args[0])?)],
            Builtin::Fst | Builtin::Snd => match &args[0] {
                V::Pair(a, b) => vec![if self == Builtin::Fst {
                    (**a).clone()
                } else {
                    (**b).clone()
                }],
                _ => return Err(sort_err()),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use SemanticValue as V;

    #[test]
    fn names_round_trip() {
        for b in Builtin::ALL {
            assert_eq!(Builtin::from_name(b.name()), Some(b));
        }
        assert_eq!(Builtin::from_name("foo"), None);
    }

    #[test]
    fn operational_examples() {
        assert_eq!(
            Builtin::IntRange
                .apply(&[V::Int(11), V::Int(11)], 8)
                .unwrap(),
            [V::Int(11)]
        );
        assert_eq!(
            Builtin::IsEven.apply(&[V::Int(4)], 8).unwrap(),
            [V::Bool(true)]
        );
        assert_eq!(
            Builtin::Add.apply(&[V::Int(3), V::Int(2)], 8).unwrap(),
            [V::Int(5)]
        );
        assert!(Builtin::IntRange
            .apply(&[V::Int(3), V::Int(1)], 8)
            .unwrap()
            .is_empty());
        assert_eq!(Builtin::IntGen.apply(&[V::Unit], 2).unwrap().len(), 5);
        assert_eq!(
            Builtin::Add.apply(&[V::Int(i64::MAX), V::Int(1)], 8),
            Err(PrimError::Overflow)
        );
    }

    /// Each builtin's refinement type describes exactly what it computes:
    /// for every in-window argument tuple, the outcome set equals the set of
    /// values satisfying the instantiated result qualifier.
    #[test]
    fn types_agree_with_behavior() {
        use alloc::collections::BTreeSet;
        use alloc::string::String;
        let w = 3;
        let ints: Vec<V> = (-w..=w).map(V::Int).collect();
        let bools = [V::Bool(false), V::Bool(true)];
        for b in Builtin::ALL {
            let first_sort = match b {
                Builtin::IntGen | Builtin::BoolGen => BaseType::Unit,
                Builtin::And | Builtin::Or | Builtin::Not => BaseType::Bool,
                Builtin::Fst | Builtin::Snd => BaseType::prod(BaseType::Bool, BaseType::Int),
                _ => BaseType::Int,
            };
            let ty = b.instantiate(&first_sort).unwrap();
            let domain = |s: &BaseType| -> Vec<V> {
                match s {
                    BaseType::Unit => vec![V::Unit],
                    BaseType::Bool => bools.to_vec(),
                    BaseType::Int => ints.clone(),
                    BaseType::Prod(..) => bools
                        .iter()
                        .flat_map(|x| ints.iter().map(move |y| V::pair(x.clone(), y.clone())))
                        .collect(),
                }
            };
            let mut tuples: Vec<(Vec<V>, RType)> = vec![(vec![], ty)];
            for _ in 0..b.arity() {
                let mut next = Vec::new();
                for (args, t) in tuples {
                    let RType::OverArrow {
                        param,
                        base,
                        qual,
                        cod,
                    } = t
                    else {
                        panic!()
                    };
                    for v in domain(&base) {
                        // Earlier parameters were substituted away below.
                        let env: Vec<(String, V)> = Vec::new();
                        if !qual.holds(&env, Some(&v)).unwrap() {
                            continue;
                        }
                        let cod =
                            cod.subst_var(&param, &v.as_term().unwrap_or(Q::var(param.clone())));
                        let mut a2 = args.clone();
                        a2.push(v.clone());
                        next.push((a2, cod));
                    }
                }
                tuples = next;
            }
            for (args, res) in tuples {
                let (sort, q) = res.as_base().unwrap();
                let in_window = domain(sort);
                let outs: BTreeSet<V> = b
                    .apply(&args, w)
                    .unwrap()
                    .into_iter()
                    .filter(|v| in_window.contains(v))
                    .collect();
                let env: Vec<(String, V)> = args
                    .iter()
                    .map(|a| (String::from("#p"), a.clone()))
                    .collect();
                let expected: BTreeSet<V> = domain(sort)
                    .into_iter()
                    .filter(|v| q.holds(&env, Some(v)).unwrap())
                    .collect();
                assert_eq!(outs, expected, "{} {:?}", b.name(), args);
            }
        }
    }
}
