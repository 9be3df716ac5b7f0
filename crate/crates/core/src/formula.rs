//! Formulas of the set-theoretic language with name constants.

use crate::names::NameId;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(NameId),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.to_string())
    }
}

impl From<NameId> for Term {
    fn from(id: NameId) -> Self {
        Term::Const(id)
    }
}

/// `Iff` is not a node: [`Formula::iff`] expands it to two implications.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Member(Term, Term),
    Equal(Term, Term),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
    BForall(String, Term, Box<Formula>),
    BExists(String, Term, Box<Formula>),
}

impl Formula {
    pub fn member(a: impl Into<Term>, b: impl Into<Term>) -> Self {
        Formula::Member(a.into(), b.into())
    }

    pub fn equal(a: impl Into<Term>, b: impl Into<Term>) -> Self {
        Formula::Equal(a.into(), b.into())
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Self {
        Formula::Not(Box::new(a))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::and(Formula::implies(a.clone(), b.clone()), Formula::implies(b, a))
    }

    pub fn forall(x: &str, body: Formula) -> Self {
        Formula::Forall(x.to_string(), Box::new(body))
    }

    pub fn exists(x: &str, body: Formula) -> Self {
        Formula::Exists(x.to_string(), Box::new(body))
    }

    pub fn bforall(x: &str, bound: impl Into<Term>, body: Formula) -> Self {
        Formula::BForall(x.to_string(), bound.into(), Box::new(body))
    }

    pub fn bexists(x: &str, bound: impl Into<Term>, body: Formula) -> Self {
        Formula::BExists(x.to_string(), bound.into(), Box::new(body))
    }

    /// Matches the expansion produced by [`Formula::iff`].
    pub fn as_iff(&self) -> Option<(&Formula, &Formula)> {
        if let Formula::And(l, r) = self {
            if let (Formula::Implies(a, b), Formula::Implies(b2, a2)) = (l.as_ref(), r.as_ref()) {
                if a == a2 && b == b2 {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// Free variables in first-occurrence order.
    pub fn free_vars(&self) -> Vec<String> {
        fn term(t: &Term, bound: &[String], out: &mut Vec<String>) {
            if let Term::Var(v) = t {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
        fn go(f: &Formula, bound: &mut Vec<String>, out: &mut Vec<String>) {
            match f {
                Formula::Member(a, b) | Formula::Equal(a, b) => {
                    term(a, bound, out);
                    term(b, bound, out);
                }
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::Not(a) => go(a, bound, out),
                Formula::Forall(x, a) | Formula::Exists(x, a) => {
                    bound.push(x.clone());
                    go(a, bound, out);
                    bound.pop();
                }
                Formula::BForall(x, t, a) | Formula::BExists(x, t, a) => {
                    term(t, bound, out);
                    bound.push(x.clone());
                    go(a, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Replaces free occurrences of `var` by `term`. The replacement must not
    /// contain variables that could be captured; constants and fresh names are fine.
    pub fn substitute(&self, var: &str, term: &Term) -> Formula {
        let t = |x: &Term| {
            if matches!(x, Term::Var(v) if v == var) {
                term.clone()
            } else {
                x.clone()
            }
        };
        match self {
            Formula::Member(a, b) => Formula::Member(t(a), t(b)),
            Formula::Equal(a, b) => Formula::Equal(t(a), t(b)),
            Formula::And(a, b) => Formula::and(a.substitute(var, term), b.substitute(var, term)),
            Formula::Or(a, b) => Formula::or(a.substitute(var, term), b.substitute(var, term)),
            Formula::Implies(a, b) => Formula::implies(a.substitute(var, term), b.substitute(var, term)),
            Formula::Not(a) => Formula::not(a.substitute(var, term)),
            Formula::Forall(x, _) | Formula::Exists(x, _) if x == var => self.clone(),
            Formula::Forall(x, a) => Formula::Forall(x.clone(), Box::new(a.substitute(var, term))),
            Formula::Exists(x, a) => Formula::Exists(x.clone(), Box::new(a.substitute(var, term))),
            Formula::BForall(x, b, a) if x == var => Formula::BForall(x.clone(), t(b), a.clone()),
            Formula::BExists(x, b, a) if x == var => Formula::BExists(x.clone(), t(b), a.clone()),
            Formula::BForall(x, b, a) => Formula::BForall(x.clone(), t(b), Box::new(a.substitute(var, term))),
            Formula::BExists(x, b, a) => Formula::BExists(x.clone(), t(b), Box::new(a.substitute(var, term))),
        }
    }

    pub fn is_negation_free(&self) -> bool {
        match self {
            Formula::Member(..) | Formula::Equal(..) => true,
            Formula::Not(_) => false,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.is_negation_free() && b.is_negation_free()
            }
            Formula::Forall(_, a) | Formula::Exists(_, a) | Formula::BForall(_, _, a) | Formula::BExists(_, _, a) => {
                a.is_negation_free()
            }
        }
    }

    /// All quantifiers are bounded.
    pub fn is_restricted(&self) -> bool {
        match self {
            Formula::Member(..) | Formula::Equal(..) => true,
            Formula::Forall(..) | Formula::Exists(..) => false,
            Formula::Not(a) | Formula::BForall(_, _, a) | Formula::BExists(_, _, a) => a.is_restricted(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => a.is_restricted() && b.is_restricted(),
        }
    }

    /// Number of leading negations and the formula beneath them.
    pub fn strip_negations(&self) -> (usize, &Formula) {
        let mut count = 0;
        let mut f = self;
        while let Formula::Not(inner) = f {
            count += 1;
            f = inner;
        }
        (count, f)
    }

    /// Deepest nesting of bounded quantifiers.
    pub fn bounded_depth(&self) -> usize {
        match self {
            Formula::Member(..) | Formula::Equal(..) => 0,
            Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => a.bounded_depth(),
            Formula::BForall(_, _, a) | Formula::BExists(_, _, a) => 1 + a.bounded_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => a.bounded_depth().max(b.bounded_depth()),
        }
    }

    /// Name constants in first-occurrence order.
    pub fn constants(&self) -> Vec<NameId> {
        fn term(t: &Term, out: &mut Vec<NameId>) {
            if let Term::Const(id) = t {
                if !out.contains(id) {
                    out.push(*id);
                }
            }
        }
        fn go(f: &Formula, out: &mut Vec<NameId>) {
            match f {
                Formula::Member(a, b) | Formula::Equal(a, b) => {
                    term(a, out);
                    term(b, out);
                }
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => go(a, out),
                Formula::BForall(_, t, a) | Formula::BExists(_, t, a) => {
                    term(t, out);
                    go(a, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iff_expands_and_is_recognised() {
        let a = Formula::member(Term::var("z"), Term::var("x"));
        let b = Formula::member(Term::var("z"), Term::var("y"));
        let f = Formula::iff(a.clone(), b.clone());
        assert_eq!(f.as_iff(), Some((&a, &b)));
        assert!(Formula::and(a.clone(), b.clone()).as_iff().is_none());
    }

    #[test]
    fn free_variables_respect_binders() {
        let f = Formula::exists(
            "x",
            Formula::bforall("y", Term::var("x"), Formula::member(Term::var("y"), Term::var("z"))),
        );
        assert_eq!(f.free_vars(), vec!["z".to_string()]);
        let g = Formula::forall("z", f.clone());
        assert!(g.is_closed());
        assert!(!g.is_restricted());
        assert!(f.is_negation_free());
    }

    #[test]
    fn substitution_stops_at_shadowing_binder() {
        let c = Term::Const(NameId::from_raw(0));
        let f = Formula::and(
            Formula::member(Term::var("x"), Term::var("x")),
            Formula::forall("x", Formula::member(Term::var("x"), Term::var("x"))),
        );
        let g = f.substitute("x", &c);
        assert_eq!(
            g,
            Formula::and(
                Formula::member(c.clone(), c.clone()),
                Formula::forall("x", Formula::member(Term::var("x"), Term::var("x")))
            )
        );
        let h = Formula::bexists("x", Term::var("x"), Formula::member(Term::var("x"), Term::var("x")));
        assert_eq!(
            h.substitute("x", &c),
            Formula::bexists("x", c, Formula::member(Term::var("x"), Term::var("x")))
        );
    }

    #[test]
    fn negation_prefix() {
        let atom = Formula::member(Term::var("a"), Term::var("b"));
        let f = Formula::not(Formula::not(Formula::not(atom.clone())));
        assert_eq!(f.strip_negations(), (3, &atom));
        assert_eq!(atom.strip_negations(), (0, &atom));
    }
}
