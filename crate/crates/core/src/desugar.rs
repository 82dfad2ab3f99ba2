//! Removal of monadic bind.
//!
//! `let* pat = e1 in e2` becomes
//! `let p = e1 in let (ok, r) = p in if ok then (let pat = r in e2) else (false, r)`
//! with `p`, `ok` and `r` fresh for the whole program.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;

use crate::syntax::{Expr, ExprKind, Pattern, SurfaceProgram};

struct Fresh {
    taken: BTreeSet<String>,
}

impl Fresh {
    fn name(&mut self, base: &str) -> String {
        let mut n = 0usize;
        loop {
            let cand = if n == 0 {
                String::from(base)
            } else {
                format!("{base}{n}")
            };
            if self.taken.insert(cand.clone()) {
                return cand;
            }
            n += 1;
        }
    }
}

pub fn desugar(p: &SurfaceProgram) -> SurfaceProgram {
    let mut taken = BTreeSet::new();
    p.main.collect_names(&mut taken);
    for d in &p.defs {
        taken.insert(d.name.clone());
        for (x, _) in &d.params {
            taken.insert(x.clone());
        }
        d.body.collect_names(&mut taken);
    }
    let mut fresh = Fresh { taken };
    let mut out = p.clone();
    for d in &mut out.defs {
        d.body = expand(&d.body, &mut fresh);
    }
    out.main = expand(&p.main, &mut fresh);
    out
}

/// Desugar a standalone expression, avoiding its own identifiers.
pub fn desugar_expr(e: &Expr) -> Expr {
    let mut taken = BTreeSet::new();
    e.collect_names(&mut taken);
    expand(e, &mut Fresh { taken })
}

fn expand(e: &Expr, fresh: &mut Fresh) -> Expr {
    let span = e.span;
    let mk = |k: ExprKind| Expr::new(k, span);
    let b = |x: Expr| Box::new(x);
    let kind = match &e.kind {
        ExprKind::Int(_)
        | ExprKind::Bool(_)
        | ExprKind::Unit
        | ExprKind::Var(_)
        | ExprKind::Assume { .. } => return e.clone(),
        ExprKind::Pair(x, y) => ExprKind::Pair(b(expand(x, fresh)), b(expand(y, fresh))),
        ExprKind::App(x, y) => ExprKind::App(b(expand(x, fresh)), b(expand(y, fresh))),
        ExprKind::Let {
            pat,
            ann,
            bound,
            body,
        } => ExprKind::Let {
            pat: pat.clone(),
            ann: ann.clone(),
            bound: b(expand(bound, fresh)),
            body: b(expand(body, fresh)),
        },
        ExprKind::If {
            cond,
            then_branch,
            else_branch,
        } => ExprKind::If {
            cond: b(expand(cond, fresh)),
            then_branch: b(expand(then_branch, fresh)),
            else_branch: b(expand(else_branch, fresh)),
        },
        ExprKind::Assert { base, qual, value } => ExprKind::Assert {
            base: base.clone(),
            qual: qual.clone(),
            value: b(expand(value, fresh)),
        },
        ExprKind::Fun {
            param,
            param_ty,
            ret,
            body,
        } => ExprKind::Fun {
            param: param.clone(),
            param_ty: param_ty.clone(),
            ret: ret.clone(),
            body: b(expand(body, fresh)),
        },
        ExprKind::Bind { pat, bound, body } => {
            // Inner binds first, so nested `let*` expand innermost-first.
            let bound = expand(bound, fresh);
            let body = expand(body, fresh);
            let p = fresh.name("m");
            let ok = fresh.name("ok");
            let r = fresh.name("r");
            let var = |x: &str| mk(ExprKind::Var(x.into()));
            let ok_branch = mk(ExprKind::Let {
                pat: pat.clone(),
                ann: None,
                bound: b(var(&r)),
                body: b(body),
            });
            let err_branch = mk(ExprKind::Pair(b(mk(ExprKind::Bool(false))), b(var(&r))));
            let branch = mk(ExprKind::If {
                cond: b(var(&ok)),
                then_branch: b(ok_branch),
                else_branch: b(err_branch),
            });
            let split = mk(ExprKind::Let {
                pat: Pattern::Pair(ok, r),
                ann: None,
                bound: b(var(&p)),
                body: b(branch),
            });
            ExprKind::Let {
                pat: Pattern::Var(p),
                ann: None,
                bound: b(bound),
                body: b(split),
            }
        }
    };
    mk(kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expr;

    #[test]
    fn bind_expands_to_split_and_branch() {
        let e = parse_expr("let* u = foo 3 in k").unwrap();
        let expected = parse_expr(
            "let m = foo 3 in let (ok, r) = m in if ok then (let u = r in k) else (false, r)",
        )
        .unwrap();
        assert_eq!(desugar_expr(&e), expected);
    }

    #[test]
    fn bind_free_is_identity() {
        let e = parse_expr("let x = int_gen () in if is_even x then 1 else x").unwrap();
        assert_eq!(desugar_expr(&e), e);
    }

    #[test]
    fn fresh_names_avoid_program_identifiers() {
        let e = parse_expr("let* m = ok in r").unwrap();
        let d = desugar_expr(&e);
        let expected = parse_expr(
            "let m1 = ok in let (ok1, r1) = m1 in if ok1 then (let m = r1 in r) else (false, r1)",
        )
        .unwrap();
        assert_eq!(d, expected);
        assert!(!d.contains_bind());
    }
}
