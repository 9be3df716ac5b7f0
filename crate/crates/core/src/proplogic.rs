//! Propositional C_ω semantics over Fidel structures.
//!
//! Connectives `∧ ∨ →` are read off the algebra; a negation is not a function
//! of its argument but a *choice* from `N_{v(α)}`, constrained by
//! `v(¬¬α) ≤ v(α)`. Choices are attached to negation occurrences, numbered in
//! post-order (a negation's body is numbered before the negation itself).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::fidel::FidelStructure;
use crate::lattice::Element;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PropFormula {
    Var(String),
    Not(Box<PropFormula>),
    And(Box<PropFormula>, Box<PropFormula>),
    Or(Box<PropFormula>, Box<PropFormula>),
    Implies(Box<PropFormula>, Box<PropFormula>),
}

impl PropFormula {
    pub fn var(name: &str) -> Self {
        PropFormula::Var(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: PropFormula) -> Self {
        PropFormula::Not(Box::new(a))
    }

    pub fn and(a: PropFormula, b: PropFormula) -> Self {
        PropFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: PropFormula, b: PropFormula) -> Self {
        PropFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: PropFormula, b: PropFormula) -> Self {
        PropFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: PropFormula, b: PropFormula) -> Self {
        PropFormula::and(PropFormula::implies(a.clone(), b.clone()), PropFormula::implies(b, a))
    }

    /// Distinct variables, sorted.
    pub fn variables(&self) -> Vec<String> {
        fn go(f: &PropFormula, out: &mut Vec<String>) {
            match f {
                PropFormula::Var(v) => out.push(v.clone()),
                PropFormula::Not(a) => go(a, out),
                PropFormula::And(a, b) | PropFormula::Or(a, b) | PropFormula::Implies(a, b) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out.sort();
        out.dedup();
        out
    }

    pub fn negation_count(&self) -> usize {
        match self {
            PropFormula::Var(_) => 0,
            PropFormula::Not(a) => 1 + a.negation_count(),
            PropFormula::And(a, b) | PropFormula::Or(a, b) | PropFormula::Implies(a, b) => {
                a.negation_count() + b.negation_count()
            }
        }
    }

    pub fn substitute(&self, map: &dyn Fn(&str) -> Option<PropFormula>) -> PropFormula {
        match self {
            PropFormula::Var(v) => map(v).unwrap_or_else(|| self.clone()),
            PropFormula::Not(a) => PropFormula::not(a.substitute(map)),
            PropFormula::And(a, b) => PropFormula::and(a.substitute(map), b.substitute(map)),
            PropFormula::Or(a, b) => PropFormula::or(a.substitute(map), b.substitute(map)),
            PropFormula::Implies(a, b) => PropFormula::implies(a.substitute(map), b.substitute(map)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            PropFormula::Implies(..) => 1,
            PropFormula::Or(..) => 2,
            PropFormula::And(..) => 3,
            PropFormula::Not(_) => 4,
            PropFormula::Var(_) => 5,
        }
    }
}

impl fmt::Display for PropFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, sub: &PropFormula, parens: bool| {
            if parens {
                write!(f, "({sub})")
            } else {
                write!(f, "{sub}")
            }
        };
        match self {
            PropFormula::Var(v) => f.write_str(v),
            PropFormula::Not(a) => {
                f.write_str("~")?;
                wrap(f, a, a.precedence() < 4)
            }
            PropFormula::And(a, b) => {
                wrap(f, a, a.precedence() < 3)?;
                f.write_str(" & ")?;
                wrap(f, b, b.precedence() <= 3)
            }
            PropFormula::Or(a, b) => {
                wrap(f, a, a.precedence() < 2)?;
                f.write_str(" | ")?;
                wrap(f, b, b.precedence() <= 2)
            }
            PropFormula::Implies(a, b) => {
                wrap(f, a, a.precedence() <= 1)?;
                f.write_str(" -> ")?;
                wrap(f, b, b.precedence() < 1)
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PropError {
    #[error("variable `{0}` has no value")]
    MissingVariable(String),
    #[error("valuation supplies {found} negation values, formula has {expected} negations")]
    NegationCountMismatch { expected: usize, found: usize },
    #[error("negation occurrence {occurrence}: {reason}")]
    InvalidNegationChoice { occurrence: usize, reason: String },
}

/// Values for variables plus one chosen value per negation occurrence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropValuation {
    pub vars: Vec<(String, Element)>,
    pub negs: Vec<Element>,
}

impl PropValuation {
    pub fn var(&self, name: &str) -> Option<Element> {
        self.vars.iter().find(|(v, _)| v == name).map(|(_, e)| *e)
    }

    pub fn render(&self, s: &FidelStructure) -> String {
        let alg = s.algebra();
        let vars: Vec<String> = self
            .vars
            .iter()
            .map(|(v, e)| format!("v({v})={}", alg.label(*e)))
            .collect();
        let negs: Vec<String> = self.negs.iter().map(|e| alg.label(*e).to_string()).collect();
        format!("{} negations=[{}]", vars.join(" "), negs.join(", "))
    }
}

struct Partial {
    value: Element,
    /// For a negation node: the value of its body.
    body: Option<Element>,
}

/// Deterministic evaluation under a fully specified valuation.
pub fn eval_prop(f: &PropFormula, s: &FidelStructure, v: &PropValuation) -> Result<Element, PropError> {
    let expected = f.negation_count();
    if v.negs.len() != expected {
        return Err(PropError::NegationCountMismatch {
            expected,
            found: v.negs.len(),
        });
    }
    let mut next = 0;
    eval_rec(f, s, v, &mut next).map(|p| p.value)
}

fn eval_rec(f: &PropFormula, s: &FidelStructure, v: &PropValuation, next: &mut usize) -> Result<Partial, PropError> {
    let alg = s.algebra();
    Ok(match f {
        PropFormula::Var(name) => Partial {
            value: v.var(name).ok_or_else(|| PropError::MissingVariable(name.clone()))?,
            body: None,
        },
        PropFormula::Not(a) => {
            let inner = eval_rec(a, s, v, next)?;
            let occurrence = *next;
            *next += 1;
            let chosen = v.negs[occurrence];
            if !alg.owns(chosen) || !s.negations(inner.value).contains(chosen) {
                return Err(PropError::InvalidNegationChoice {
                    occurrence,
                    reason: format!("value is not in N_{}", alg.label(inner.value)),
                });
            }
            if let (PropFormula::Not(_), Some(below)) = (a.as_ref(), inner.body) {
                if !alg.leq(chosen, below) {
                    return Err(PropError::InvalidNegationChoice {
                        occurrence,
                        reason: format!("double negation {} exceeds {}", alg.label(chosen), alg.label(below)),
                    });
                }
            }
            Partial {
                value: chosen,
                body: Some(inner.value),
            }
        }
        PropFormula::And(a, b) | PropFormula::Or(a, b) | PropFormula::Implies(a, b) => {
            let x = eval_rec(a, s, v, next)?.value;
            let y = eval_rec(b, s, v, next)?.value;
            let value = match f {
                PropFormula::And(..) => alg.meet(x, y),
                PropFormula::Or(..) => alg.join(x, y),
                _ => alg.imp(x, y),
            };
            Partial { value, body: None }
        }
    })
}

/// Every admissible negation choice vector for one variable assignment,
/// paired with the resulting value.
fn negation_choices(
    f: &PropFormula,
    s: &FidelStructure,
    vars: &[(String, Element)],
) -> Vec<(Element, Option<Element>, Vec<Element>)> {
    let alg = s.algebra();
    match f {
        PropFormula::Var(name) => {
            let value = vars
                .iter()
                .find(|(v, _)| v == name)
                .map(|(_, e)| *e)
                .expect("assignment covers variables");
            vec![(value, None, vec![])]
        }
        PropFormula::Not(a) => {
            let mut out = Vec::new();
            for (value, body, negs) in negation_choices(a, s, vars) {
                let mut allowed = s.negations(value);
                if let (PropFormula::Not(_), Some(below)) = (a.as_ref(), body) {
                    allowed = allowed.intersection(alg.down_set(below));
                }
                for c in alg.set_of(allowed) {
                    let mut n = negs.clone();
                    n.push(c);
                    out.push((c, Some(value), n));
                }
            }
            out
        }
        PropFormula::And(a, b) | PropFormula::Or(a, b) | PropFormula::Implies(a, b) => {
            let left = negation_choices(a, s, vars);
            let right = negation_choices(b, s, vars);
            let mut out = Vec::with_capacity(left.len() * right.len());
            for (x, _, ln) in &left {
                for (y, _, rn) in &right {
                    let value = match f {
                        PropFormula::And(..) => alg.meet(*x, *y),
                        PropFormula::Or(..) => alg.join(*x, *y),
                        _ => alg.imp(*x, *y),
                    };
                    let mut negs = ln.clone();
                    negs.extend_from_slice(rn);
                    out.push((value, None, negs));
                }
            }
            out
        }
    }
}

/// All valuations of `f`: variable assignments in odometer order (first
/// variable slowest), then admissible negation choices.
pub fn enumerate_valuations<'a>(f: &'a PropFormula, s: &'a FidelStructure) -> impl Iterator<Item = PropValuation> + 'a {
    let vars = f.variables();
    let n = s.algebra().size();
    let total = n.checked_pow(vars.len() as u32).expect("too many variables");
    (0..total).flat_map(move |code| {
        let alg = s.algebra();
        let mut rem = code;
        let mut assignment: Vec<(String, Element)> = vec![];
        for (i, name) in vars.iter().enumerate() {
            let place = n.pow((vars.len() - 1 - i) as u32);
            assignment.push((name.clone(), alg.element(rem / place)));
            rem %= place;
        }
        negation_choices(f, s, &assignment)
            .into_iter()
            .map(move |(_, _, negs)| PropValuation {
                vars: assignment.clone(),
                negs,
            })
    })
}

/// Axiom schemas of C_ω and its two extensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Schema {
    A(u8),
    /// `(α₁→α₂) ∨ ⋯ ∨ (α_{n-1}→α_n)`.
    G(usize),
    L,
}

impl Schema {
    pub fn c_omega() -> Vec<Schema> {
        (1..=10).map(Schema::A).collect()
    }

    /// The schema over metavariables `a`, `b`, `c` (or `a1..an` for `G`).
    pub fn template(&self) -> PropFormula {
        use PropFormula as P;
        let (a, b, c) = (P::var("a"), P::var("b"), P::var("c"));
        match *self {
            Schema::A(1) => P::implies(a.clone(), P::implies(b, a)),
            Schema::A(2) => P::implies(
                P::implies(a.clone(), P::implies(b.clone(), c.clone())),
                P::implies(P::implies(a.clone(), b), P::implies(a, c)),
            ),
            Schema::A(3) => P::implies(P::and(a.clone(), b), a),
            Schema::A(4) => P::implies(P::and(a, b.clone()), b),
            Schema::A(5) => P::implies(a.clone(), P::implies(b.clone(), P::and(a, b))),
            Schema::A(6) => P::implies(a.clone(), P::or(a, b)),
            Schema::A(7) => P::implies(b.clone(), P::or(a, b)),
            Schema::A(8) => P::implies(
                P::implies(a.clone(), c.clone()),
                P::implies(P::implies(b.clone(), c.clone()), P::implies(P::and(a, b), c)),
            ),
            Schema::A(9) => P::or(a.clone(), P::not(a)),
            Schema::A(10) => P::implies(P::not(P::not(a.clone())), a),
            Schema::A(k) => panic!("no axiom A{k}"),
            Schema::G(n) => {
                assert!(n >= 2, "G_n needs n >= 2");
                let v = |i: usize| P::var(&format!("a{i}"));
                (2..n).fold(P::implies(v(1), v(2)), |acc, i| P::or(acc, P::implies(v(i), v(i + 1))))
            }
            Schema::L => P::or(P::implies(b.clone(), a.clone()), P::implies(a, b)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Schema::A(k) => format!("A{k}"),
            Schema::G(n) => format!("G{n}"),
            Schema::L => "L".into(),
        }
    }
}

impl FromStr for Schema {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        if lower == "l" {
            return Ok(Schema::L);
        }
        if let Some(k) = lower.strip_prefix('a').and_then(|k| k.parse::<u8>().ok()) {
            if (1..=10).contains(&k) {
                return Ok(Schema::A(k));
            }
        }
        if let Some(n) = lower.strip_prefix('g').and_then(|n| n.parse::<usize>().ok()) {
            if n >= 2 {
                return Ok(Schema::G(n));
            }
        }
        Err(format!("unknown schema `{s}` (expected a1..a10, gN with N >= 2, or l)"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchemaVerdict {
    Valid {
        instances: usize,
        valuations: usize,
    },
    Countermodel {
        instance: PropFormula,
        valuation: PropValuation,
        value: Element,
    },
}

impl SchemaVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, SchemaVerdict::Valid { .. })
    }
}

/// Formulas over `p`, `q` built with up to `depth` nested connectives.
fn substitution_pool(depth: usize) -> Vec<PropFormula> {
    let mut pool = vec![PropFormula::var("p"), PropFormula::var("q")];
    for _ in 0..depth {
        let prev = pool.clone();
        for a in &prev {
            pool.push(PropFormula::not(a.clone()));
            for b in &prev {
                pool.push(PropFormula::and(a.clone(), b.clone()));
                pool.push(PropFormula::or(a.clone(), b.clone()));
                pool.push(PropFormula::implies(a.clone(), b.clone()));
            }
        }
        let mut seen = std::collections::HashSet::new();
        pool.retain(|f| seen.insert(f.clone()));
    }
    pool
}

/// Instances of a schema: metavariables stay atomic at depth 0, otherwise
/// every metavariable ranges over compound formulas up to `depth`.
pub fn schema_instances(schema: Schema, depth: usize) -> Vec<PropFormula> {
    let template = schema.template();
    if depth == 0 {
        return vec![template];
    }
    let metas = template.variables();
    let pool = substitution_pool(depth);
    let total = pool.len().pow(metas.len() as u32);
    (0..total)
        .map(|mut code| {
            let mut chosen = Vec::new();
            for _ in &metas {
                chosen.push(pool[code % pool.len()].clone());
                code /= pool.len();
            }
            template.substitute(&|v| metas.iter().position(|m| m == v).map(|i| chosen[i].clone()))
        })
        .collect()
}

/// Valid iff every instance takes value top under every admissible valuation;
/// otherwise the first countermodel in enumeration order.
pub fn check_schema(schema: Schema, s: &FidelStructure, depth: usize) -> SchemaVerdict {
    let top = s.algebra().top();
    let mut valuations = 0;
    let instances = schema_instances(schema, depth);
    for instance in &instances {
        for v in enumerate_valuations(instance, s) {
            valuations += 1;
            let value = eval_prop(instance, s, &v).expect("enumerated valuations are admissible");
            if value != top {
                return SchemaVerdict::Countermodel {
                    instance: instance.clone(),
                    valuation: v,
                    value,
                };
            }
        }
    }
    SchemaVerdict::Valid {
        instances: instances.len(),
        valuations,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParaconsistencyWitness {
    pub formula: PropFormula,
    pub valuation: PropValuation,
    pub value: Element,
}

/// `(¬a ∧ a) → b` for premises `a`, `¬a` and conclusion `b`.
pub fn explosion_formula() -> PropFormula {
    PropFormula::implies(
        PropFormula::and(PropFormula::not(PropFormula::var("a")), PropFormula::var("a")),
        PropFormula::var("b"),
    )
}

/// Searches for a valuation refuting explosion; `None` if the structure is explosive.
pub fn find_paraconsistency_witness(s: &FidelStructure) -> Option<ParaconsistencyWitness> {
    let formula = explosion_formula();
    let top = s.algebra().top();
    let hit = enumerate_valuations(&formula, s)
        .map(|v| {
            let value = eval_prop(&formula, s, &v).expect("admissible");
            (v, value)
        })
        .find(|(_, value)| *value != top)?;
    Some(ParaconsistencyWitness {
        formula,
        valuation: hit.0,
        value: hit.1,
    })
}
