//! Single-line printing of core terms in surface syntax. The output parses
//! back and elaborates to an alpha-equivalent term.

use alloc::format;
use alloc::string::String;

use crate::core_term::{Const, CoreTerm, Value};
use crate::rtype::RType;

pub fn pretty_print(t: &CoreTerm) -> String {
    let mut s = String::new();
    term(t, &mut s);
    s
}

pub fn pretty_value(v: &Value) -> String {
    let mut s = String::new();
    value(v, &mut s);
    s
}

fn konst(c: &Const, out: &mut String) {
    match c {
        Const::Unit => out.push_str("()"),
        Const::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Const::Int(n) if *n < 0 => out.push_str(&format!("({n})")),
        Const::Int(n) => out.push_str(&format!("{n}")),
    }
}

fn is_operator(x: &str) -> bool {
    !x.starts_with(|c: char| c.is_alphabetic() || c == '_')
}

fn value(v: &Value, out: &mut String) {
    match v {
        Value::Const(c) => konst(c, out),
        Value::Var(x) if is_operator(x) => out.push_str(&format!("({x})")),
        Value::Var(x) => out.push_str(x),
        Value::Pair(a, b) => {
            out.push('(');
            value(a, out);
            out.push_str(", ");
            value(b, out);
            out.push(')');
        }
        Value::Lambda(l) => {
            out.push_str(&format!("(fun ({}: {})", l.param, l.param_ty));
            if let Some(r) = &l.ret {
                match r {
                    RType::Over { .. } | RType::Cover { .. } => out.push_str(&format!(" : {r}")),
                    _ => out.push_str(&format!(" : ({r})")),
                }
            }
            out.push_str(" -> ");
            term(&l.body, out);
            out.push(')');
        }
    }
}

/// Bound terms that are not values are parenthesized so the following `in`
/// cannot be captured.
fn nested(t: &CoreTerm, out: &mut String) {
    if matches!(t, CoreTerm::Val(_)) {
        term(t, out);
    } else {
        out.push('(');
        term(t, out);
        out.push(')');
    }
}

fn term(t: &CoreTerm, out: &mut String) {
    match t {
        CoreTerm::Val(v) => value(v, out),
        CoreTerm::LetApp {
            bind,
            func,
            arg,
            body,
        } => {
            out.push_str(&format!("let {bind} = "));
            value(func, out);
            out.push(' ');
            value(arg, out);
            out.push_str(" in ");
            term(body, out);
        }
        CoreTerm::LetTerm {
            bind,
            ascription,
            bound,
            body,
        } => {
            match ascription {
                Some(a) => out.push_str(&format!("let {bind} : {a} = ")),
                None => out.push_str(&format!("let {bind} = ")),
            }
            nested(bound, out);
            out.push_str(" in ");
            term(body, out);
        }
        CoreTerm::LetPair {
            fst,
            snd,
            scrutinee,
            body,
        } => {
            out.push_str(&format!("let ({fst}, {snd}) = "));
            value(scrutinee, out);
            out.push_str(" in ");
            term(body, out);
        }
        CoreTerm::If { cond, then_, else_ } => {
            out.push_str("if ");
            value(cond, out);
            out.push_str(" then ");
            nested(then_, out);
            out.push_str(" else ");
            term(else_, out);
        }
        CoreTerm::LetAssume {
            bind,
            base,
            qual,
            body,
        } => {
            out.push_str(&format!("let {bind} = assume [{base} | {qual}] in "));
            term(body, out);
        }
        CoreTerm::Assert {
            base,
            qual,
            value: v,
        } => {
            out.push_str(&format!("assert {{{base} | {qual}}} "));
            value(v, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anf::elaborate_expr;
    use crate::core_term::alpha_eq;
    use crate::parser::parse_expr;
    use crate::qualifier::Qualifier;
    use crate::syntax::BaseType;
    use alloc::boxed::Box;

    fn round_trip(src: &str) {
        let t = elaborate_expr(&parse_expr(src).unwrap()).unwrap();
        let printed = pretty_print(&t);
        let back = elaborate_expr(&parse_expr(&printed).unwrap())
            .unwrap_or_else(|e| panic!("{printed}: {e}"));
        assert!(alpha_eq(&t, &back), "{printed}");
    }

    #[test]
    fn examples() {
        assert_eq!(pretty_print(&CoreTerm::Val(Value::int(42))), "42");
        let t = CoreTerm::LetAssume {
            bind: "x".into(),
            base: BaseType::Int,
            qual: Qualifier::eq(Qualifier::Nu, Qualifier::Int(11)),
            body: Box::new(CoreTerm::var("x")),
        };
        assert_eq!(pretty_print(&t), "let x = assume [int | v = 11] in x");
        let a = CoreTerm::Assert {
            base: BaseType::Int,
            qual: Qualifier::eq(Qualifier::Nu, Qualifier::Int(4)),
            value: Value::var("x"),
        };
        assert_eq!(pretty_print(&a), "assert {int | v = 4} x");
    }

    #[test]
    fn round_trips() {
        round_trip("let x = int_gen () in let y = int_gen () in let z = int_range 11 11 in if is_even x then if is_odd y then 42 else z else z");
        round_trip("let* u = (fun (n: {int | true}) -> (true, n)) 3 in (true, u + (-2))");
        round_trip("let f = fun (x: {int | true}) : (y:{int | true} -> [int | v = x + y]) -> fun (y: {int | true}) -> x + y in f 1 2");
        round_trip("let p : [int * bool | true] = (int_gen (), bool_gen ()) in let (a, b) = p in if b then a else 0");
        round_trip("let x = if bool_gen () then 1 else 2 in assert {int | v <= 2} x");
    }
}
