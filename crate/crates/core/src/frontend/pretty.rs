//! Canonical text for formulas. The output re-parses to an equal AST.

use crate::formula::{Formula, Term};
use crate::names::NameId;
use crate::proplogic::PropFormula;

// Binding strength, loosest first.
const IFF: u8 = 0;
const IMP: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const NOT: u8 = 4;

/// Prints `f`, rendering name constants with `name`.
pub fn print_formula(f: &Formula, name: &dyn Fn(NameId) -> String) -> String {
    let mut out = String::new();
    write_formula(f, IFF, true, name, &mut out);
    out
}

fn term(t: &Term, name: &dyn Fn(NameId) -> String) -> String {
    match t {
        Term::Var(v) => v.clone(),
        Term::Const(id) => name(*id),
    }
}

fn paren(open: bool, out: &mut String, body: impl FnOnce(&mut String)) {
    if open {
        out.push('(');
    }
    body(out);
    if open {
        out.push(')');
    }
}

// `bare_quant`: a quantifier may appear without parentheses here because
// nothing follows it in the enclosing text.
fn write_formula(f: &Formula, min: u8, bare_quant: bool, name: &dyn Fn(NameId) -> String, out: &mut String) {
    if let Some((a, b)) = f.as_iff() {
        paren(min > IFF, out, |out| {
            write_formula(a, IMP, false, name, out);
            out.push_str(" <-> ");
            write_formula(b, IMP, min <= IFF && bare_quant, name, out);
        });
        return;
    }
    match f {
        Formula::Member(a, b) => {
            out.push_str(&format!("{} in {}", term(a, name), term(b, name)));
        }
        Formula::Equal(a, b) => {
            out.push_str(&format!("{} eq {}", term(a, name), term(b, name)));
        }
        Formula::Implies(a, b) => paren(min > IMP, out, |out| {
            let tail = min <= IMP && bare_quant;
            write_formula(a, OR, false, name, out);
            out.push_str(" -> ");
            write_formula(b, IMP, tail, name, out);
        }),
        Formula::Or(a, b) => paren(min > OR, out, |out| {
            write_formula(a, OR, false, name, out);
            out.push_str(" | ");
            write_formula(b, AND, false, name, out);
        }),
        Formula::And(a, b) => paren(min > AND, out, |out| {
            write_formula(a, AND, false, name, out);
            out.push_str(" & ");
            write_formula(b, NOT, false, name, out);
        }),
        Formula::Not(a) => {
            out.push('~');
            match a.as_ref() {
                Formula::Not(_) => write_formula(a, NOT, false, name, out),
                _ => paren(true, out, |out| write_formula(a, IFF, true, name, out)),
            }
        }
        Formula::Forall(..) | Formula::Exists(..) | Formula::BForall(..) | Formula::BExists(..) => {
            paren(!bare_quant, out, |out| {
                let (kw, x, bound, body) = match f {
                    Formula::Forall(x, b) => ("forall", x, None, b),
                    Formula::Exists(x, b) => ("exists", x, None, b),
                    Formula::BForall(x, t, b) => ("forall", x, Some(t), b),
                    Formula::BExists(x, t, b) => ("exists", x, Some(t), b),
                    _ => unreachable!(),
                };
                out.push_str(kw);
                out.push(' ');
                out.push_str(x);
                if let Some(t) = bound {
                    out.push_str(" in ");
                    out.push_str(&term(t, name));
                }
                out.push_str(". ");
                write_formula(body, IFF, true, name, out);
            });
        }
    }
}

/// Prints a propositional formula with the same operator table.
pub fn print_prop(f: &PropFormula) -> String {
    f.to_string()
}
